//! The exact expression kernel: canonical forms, calculus, and the textual
//! syntax.
//!
//! Run with `cargo run --example expressions`.

use jetlie::expr::{BaseVar, Expr, FunctionId};
use jetlie::parse::{parse, print};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Expressions normalize on construction: equal values share one form.
    let u1 = Expr::deriv(FunctionId::U, &[BaseVar::X1]);
    let u2 = Expr::deriv(FunctionId::U, &[BaseVar::X2]);
    let product = (&u1 + &u2).mul_ref(&(&u1 - &u2));
    println!("(u1 + u2)(u1 - u2)  =  {product}");
    assert!(product
        .sub_ref(&(&u1.pow_int(2)? - &u2.pow_int(2)?))
        .is_zero());

    // Exponentials merge; exp(0) is 1.
    let phi = Expr::func(FunctionId::Phi);
    let merged = Expr::exp_of(&phi).mul_ref(&Expr::exp_of(&phi.conjugate()));
    println!("exp(phi) exp(phi*)  =  {merged}");

    // Derivatives: formal partials and total derivatives.
    let e = parse("x0*u[0] + u^2")?;
    println!("D_0({e})  =  {}", e.total_derivative(BaseVar::X0));

    // Conjugation is an involution and a ring homomorphism.
    let m1 = jetlie::catalog::m1();
    println!("M1   =  {m1}");
    println!("M1*  =  {}", m1.conjugate());
    assert_eq!(m1.conjugate().conjugate(), m1);

    // The parser inverts the printer on canonical forms.
    let text = print(&m1);
    assert_eq!(parse(&text)?, m1);
    println!("round trip through `{text}` ok");

    // Quotients: negative powers of atoms and power atoms over sums.
    let i2 = parse("u**(-u[0,0]+u[1,1]+u[2,2]+u[3,3])/(u*(-u*[0,0]+u*[1,1]+u*[2,2]+u*[3,3]))")?;
    println!("I2  =  {i2}");
    Ok(())
}
