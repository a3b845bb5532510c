//! Vector fields and their prolongations to second order.
//!
//! Run with `cargo run --example prolongation`.

use jetlie::catalog;
use jetlie::expr::{BaseVar, Expr, FunctionId, JetVar};
use jetlie::prolong::{prolong, VectorField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The plane rotation: first-order coefficients swap the gradient.
    let j12 = VectorField::from_parts(
        "J12",
        &[
            (BaseVar::X2, Expr::base(BaseVar::X1)),
            (BaseVar::X1, Expr::base(BaseVar::X2).neg_ref()),
        ],
        &[],
    )?;
    let pr = prolong(&j12, 1);
    for vars in [[BaseVar::X1], [BaseVar::X2]] {
        let jet = JetVar::deriv(FunctionId::U, &vars);
        println!("coeff({jet})  =  {}", pr.coeff(&jet).unwrap());
    }

    // A Galilei boost annihilates M1 = 2 i m phi_t + phi_a phi_a.
    let g1 = catalog::galilei_algebra()
        .into_iter()
        .find(|f| f.name == "G1")
        .unwrap();
    let residual = prolong(&g1, 2).apply(&catalog::m1())?;
    println!("pr G1 (M1)  =  {residual}");
    assert!(residual.is_zero());

    // The prolonged field acts as a derivation (Leibniz rule).
    let f = Expr::deriv(FunctionId::Phi, &[BaseVar::Tau]);
    let g = catalog::phi_laplacian(FunctionId::Phi);
    let pr2 = prolong(&g1, 2);
    let lhs = pr2.apply(&f.mul_ref(&g))?;
    let rhs = pr2
        .apply(&f)?
        .mul_ref(&g)
        .add_ref(&f.mul_ref(&pr2.apply(&g)?));
    assert_eq!(lhs, rhs);
    println!("Leibniz rule holds on phi_t * phi_aa");

    // The wave-side projective operator acting on u gives its eta part.
    let a1 = catalog::projective_a1(3);
    println!(
        "pr A1 (u)  =  {}",
        prolong(&a1, 2).apply(&Expr::func(FunctionId::U))?
    );
    Ok(())
}
