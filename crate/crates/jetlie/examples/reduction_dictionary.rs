//! The exponential-phase ansatz and the dictionary between wave-side
//! contractions and reduced-side invariants.
//!
//! Run with `cargo run --example reduction_dictionary`.

use jetlie::catalog;
use jetlie::expr::FunctionId;
use jetlie::reduction::{verify_dictionary, Ansatz};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ansatz = Ansatz::new(2);

    // The ansatz solves the side condition identically.
    let image = ansatz.substitute(&catalog::condition())?;
    println!("condition under the ansatz  =  {image}");
    assert!(image.is_zero());

    // box u maps onto u N1.
    let box_image = ansatz.substitute(&catalog::box_u(FunctionId::U))?;
    println!("box u under the ansatz  =  {box_image}");

    // All eleven dictionary identities hold exactly.
    for check in verify_dictionary(2) {
        println!(
            "{:<34} {}",
            check.name,
            if check.pass { "exact" } else { "FAILED" }
        );
        assert!(check.pass);
    }
    Ok(())
}
