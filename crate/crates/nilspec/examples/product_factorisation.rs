//! Product manifolds: eigenvalue sums with exact-key merging, the certified
//! double Dirichlet sum over two spectra, and the closed-form cross-check of
//! the circle zeta against Riemann zeta data.
//!
//! Run with: cargo run -p nilspec --example product_factorisation

use nilspec::spectrum::{product_spectrum, NilmanifoldModel};
use nilspec::{zeta, Complex64};

fn main() -> nilspec::Result<()> {
    // The product of two circles is the 2-torus: the merged eigenvalue
    // ladders must agree entry by entry.
    let circle = NilmanifoldModel::torus(1)?;
    let torus2 = NilmanifoldModel::torus(2)?;
    let cutoff = 2000.0;
    let s1 = circle.spectrum(cutoff)?;
    let product = product_spectrum(&s1, &s1, cutoff)?;
    let direct = torus2.spectrum(cutoff)?;
    let matches = product
        .entries()
        .iter()
        .zip(direct.entries())
        .all(|(a, b)| a.exact == b.exact && a.multiplicity == b.multiplicity);
    println!(
        "T^1 x T^1 vs T^2 up to {cutoff}: {} entries, ladders identical: {matches}",
        product.entries().len()
    );

    let model = NilmanifoldModel::direct_product(&circle, &circle)?;
    println!(
        "product model: {} with Q/nu = {} and volume {}",
        model.label(),
        model.q_over_nu(),
        model.volume()
    );

    // Z(s) = sum over pairs of positive eigenvalues of (l1 + l2)^{-s},
    // with a certified bound for the doubly-truncated remainder. The same
    // sum read off the product spectrum is the oracle.
    let big = circle.spectrum(4.0e6)?;
    for sigma in [3.0, 4.0] {
        let s = Complex64::new(sigma, 0.0);
        let (z, certificate) = zeta::product_zeta_z(&big, 0.5, &big, 0.5, s, 1e-5)?;
        let (oracle, tail) = zeta::zeta_direct(&product, 1.0, s, 1e-3)?;
        // The oracle's positive part double-counts pairs with a zero mode;
        // subtract the two single-factor ladders.
        let (single, _) = zeta::zeta_direct(&s1, 0.5, s, 1e-3)?;
        let pure = oracle - 2.0 * single;
        println!(
            "\nZ({sigma}) = {:.12} (certificate {:.2e})",
            z.re, certificate
        );
        println!(
            "  product-spectrum oracle {:.12} (tail {:.2e}), deviation {:.3e}",
            pure.re,
            tail,
            (z - pure).norm()
        );
    }

    // Circle cross-check: zeta_Delta(s) against the closed Riemann form,
    // both as computed and in display precision.
    println!("\ncircle zeta cross-check:");
    for sigma in [2.0, 3.0] {
        let cc = zeta::torus_cross_check(&big, 0.5, Complex64::new(sigma, 0.0), 1e-6)?;
        println!(
            "  s = {sigma}: residual {:.3e} (displayed-value residual {:.3e}, budget {:.2e})",
            cc.residual, cc.residual_displayed, cc.error_estimate
        );
    }
    Ok(())
}
