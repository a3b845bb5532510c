//! The four conditional invariants of the projective operator: invariance
//! modulo the side condition and round trips through the ansatz.
//!
//! Run with `cargo run --example conditional_invariants`.

use jetlie::catalog;
use jetlie::expr::{BaseVar, FunctionId, JetVar};
use jetlie::invariance::{check_conditional_invariant, Verdict};
use jetlie::reduction::conditional_invariant_pullback;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a1 = catalog::projective_a1(3);
    let condition = (
        catalog::condition(),
        JetVar::deriv(FunctionId::U, &[BaseVar::X0]),
    );
    for inv in catalog::conditional_invariants(2) {
        let report = check_conditional_invariant(&a1, &inv.u_form, &condition, 2)?;
        println!("{}: {:?}", inv.name, report.verdict);
        assert_eq!(report.verdict, Verdict::Conditional);
        println!("  wave side    {}", inv.u_form);
        println!("  reduced side {}", inv.phi_form);
    }
    for check in conditional_invariant_pullback(2) {
        println!(
            "{}: {}",
            check.name,
            if check.pass { "exact" } else { "FAILED" }
        );
        assert!(check.pass);
    }
    // Every function F(I1, I2, I3, I4) = 0 inherits the conditional
    // invariance; the invariants are the building blocks.
    Ok(())
}
