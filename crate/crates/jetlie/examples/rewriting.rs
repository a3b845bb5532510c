//! Differential constraints as rewrite systems: consequences, reduction,
//! and merging with re-solution of degenerate leading variables.
//!
//! Run with `cargo run --example rewriting`.

use jetlie::catalog;
use jetlie::expr::{BaseVar, FunctionId, JetVar};
use jetlie::rewrite::{consequences, merge};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u0 = JetVar::deriv(FunctionId::U, &[BaseVar::X0]);
    let u33 = JetVar::deriv(FunctionId::U, &[BaseVar::X3, BaseVar::X3]);

    // The side condition solved for u_0, closed to second order.
    let cond = consequences(&catalog::condition(), u0, 2)?;
    println!("condition system ({} rules):", cond.len());
    for (lhs, rhs) in cond.rules() {
        println!("  {lhs}  ->  {rhs}");
    }

    // Reducing the condition itself gives zero; box u loses its
    // time-direction derivatives.
    assert!(cond.reduce(&catalog::condition())?.is_zero());
    let reduced_box = cond.reduce(&catalog::box_u(FunctionId::U))?;
    println!("box u on the condition manifold  =  {reduced_box}");

    // Merging with the wave equation solved for u_33: the condition's
    // consequences cancel u_33 exactly, and the merge re-solves the residual
    // constraint for u_11.
    let wave = consequences(&catalog::wave_equation(), u33, 2)?;
    let merged = merge(&cond, &wave)?;
    println!("merged system ({} rules):", merged.len());
    for (lhs, rhs) in merged.rules() {
        println!("  {lhs}  ->  {rhs}");
    }
    assert!(merged.reduce(&catalog::wave_equation())?.is_zero());
    println!("wave polynomial reduces to 0 modulo the merged system");
    Ok(())
}
