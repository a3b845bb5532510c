//! The invariant bases: 24 wave-setting invariants, 16 Galilei invariants,
//! and the 14 invariants of the extension by dilation and projection.
//!
//! Run with `cargo run --example invariant_bases`.

use jetlie::catalog;
use jetlie::prolong::prolong;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let galilei: Vec<_> = catalog::galilei_algebra()
        .iter()
        .map(|g| prolong(g, 2))
        .collect();
    println!(
        "galilei basis ({} entries):",
        catalog::galilei_basis().len()
    );
    for entry in catalog::galilei_basis() {
        for p in &galilei {
            let (cleared, _) = p.apply(&entry.expr)?.clear_denominators();
            assert!(cleared.is_zero(), "{} under {}", entry.name, p.base.name);
        }
        println!(
            "  {}  (annihilated by all {} generators)",
            entry.name,
            galilei.len()
        );
    }

    let mut extension = vec![catalog::dilation(), catalog::projective_a()];
    extension.extend(catalog::galilei_algebra());
    let extension: Vec<_> = extension.iter().map(|g| prolong(g, 2)).collect();
    println!(
        "extended basis ({} entries):",
        catalog::extended_basis(2).len()
    );
    for entry in catalog::extended_basis(2) {
        for p in &extension {
            let (cleared, _) = p.apply(&entry.expr)?.clear_denominators();
            assert!(cleared.is_zero(), "{} under {}", entry.name, p.base.name);
        }
        println!("  {}", entry.name);
    }

    let poincare: Vec<_> = catalog::poincare_algebra()
        .iter()
        .map(|g| prolong(g, 2))
        .collect();
    let basis = catalog::poincare_basis();
    println!("wave-setting basis ({} entries):", basis.len());
    for entry in &basis {
        for p in &poincare {
            assert!(p.apply(&entry.expr)?.is_zero());
        }
    }
    println!(
        "  all {} entries annihilated by all 10 generators",
        basis.len()
    );
    Ok(())
}
