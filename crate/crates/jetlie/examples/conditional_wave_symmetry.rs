//! The headline statement: the cubic wave equation is conditionally
//! invariant under the projective operator A1 with the light-cone side
//! condition, and not invariant without it.
//!
//! Run with `cargo run --example conditional_wave_symmetry`.

use jetlie::catalog::{self, variants};
use jetlie::expr::{BaseVar, FunctionId, JetVar};
use jetlie::invariance::check_system_invariance;
use jetlie::prolong::prolong;
use jetlie::rewrite::consequences;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u0 = JetVar::deriv(FunctionId::U, &[BaseVar::X0]);
    let u33 = JetVar::deriv(FunctionId::U, &[BaseVar::X3, BaseVar::X3]);
    let system = vec![(catalog::wave_equation(), u33), (catalog::condition(), u0)];

    let a1 = catalog::projective_a1(3);
    for r in check_system_invariance(&a1, &system, 2)? {
        println!("{} on {}: {:?}", r.operator, r.subject, r.verdict);
        assert!(r.passed());
    }

    // Without the condition the residual survives.
    let wave_only = consequences(&catalog::wave_equation(), u33, 2)?;
    let residual = wave_only.reduce(&prolong(&a1, 2).apply(&catalog::wave_equation())?)?;
    println!("without the condition, residual = {residual}");
    assert!(!residual.is_zero());

    // The rejected readings fail exactly where expected.
    let printed = check_system_invariance(&variants::projective_a1_printed(3), &system, 2)?;
    println!("positive weight: wave residual = {}", printed[0].residual);
    assert!(!printed[0].passed());

    let lorentz = check_system_invariance(&variants::projective_a1_lorentz(3), &system, 2)?;
    println!(
        "Lorentz square: condition residual = {}",
        lorentz[1].residual
    );
    assert!(!lorentz[1].passed());
    Ok(())
}
