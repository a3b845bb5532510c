//! The floating-point oracle: seeded jet points, ansatz-generated points
//! satisfying the side condition, and rank certification.
//!
//! Run with `cargo run --example numeric_oracle`.

use jetlie::catalog;
use jetlie::expr::{Expr, FunctionId};
use jetlie::numeric::{
    certified_rank, eval, relative_residual, setting_coordinates_with_conjugates, JetPoint, Setting,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Ansatz-generated points satisfy the condition to machine precision.
    let mut worst = 0.0_f64;
    for seed in 0..100 {
        let point = JetPoint::from_ansatz(seed)?;
        let value = eval(&catalog::condition(), &point)?;
        let scale = eval(&Expr::func(FunctionId::U), &point)?.norm().max(1.0);
        worst = worst.max(value.norm() / scale);
    }
    println!("condition residual over 100 ansatz points: {worst:.3e}");
    assert!(worst < 1e-12);

    // The box identity holds numerically.
    let point = JetPoint::from_ansatz(42)?;
    let lhs = catalog::box_u(FunctionId::U);
    let rhs = Expr::func(FunctionId::U).mul_ref(&catalog::n1());
    println!(
        "box u vs u N1 at seed 42: {:.3e}",
        relative_residual(&lhs, &rhs, &point)?
    );

    // Rank certification of the invariant families.
    let seeds = [42, 43, 44];
    let wave_cols = setting_coordinates_with_conjugates(Setting::WaveOrder2);
    let basis: Vec<Expr> = catalog::poincare_basis()
        .into_iter()
        .map(|e| e.expr)
        .collect();
    println!(
        "wave basis rank: {:?} (expect 24)",
        certified_rank(&basis, &wave_cols, Setting::WaveOrder2, &seeds)?
    );
    let reduced_cols = setting_coordinates_with_conjugates(Setting::ReducedOrder2);
    let basis: Vec<Expr> = catalog::galilei_basis()
        .into_iter()
        .map(|e| e.expr)
        .collect();
    println!(
        "reduced basis rank: {:?} (expect 16)",
        certified_rank(&basis, &reduced_cols, Setting::ReducedOrder2, &seeds)?
    );
    Ok(())
}
