//! Eigenvalue ladders with exact keys: the torus Laplacian, the Heisenberg
//! sub-Laplacian with its two spectral families, and exact images under the
//! spectral transform lambda -> c lambda^l.
//!
//! Run with: cargo run -p nilspec --example spectrum_ladder

use nilspec::spectrum::{ExactCoeff, NilmanifoldModel};

fn main() -> nilspec::Result<()> {
    let torus = NilmanifoldModel::torus(2)?;
    let stream = torus.spectrum(400.0)?;
    println!("torus(n=2), eigenvalues up to 400:");
    println!("{:>12}  {:>4}  {:>5}  exact", "lambda", "mult", "count");
    let mut count = 0;
    for e in stream.entries() {
        count += e.multiplicity;
        println!("{:12.6}  {:4}  {:5}  {}", e.value, e.multiplicity, count, e.exact);
    }

    // The Heisenberg spectrum interleaves a toral family 4 pi^2 |m|^2 with a
    // line family 4 (2a + n) pi k; exact keys keep the two apart even where
    // the float values collide.
    let heis = NilmanifoldModel::heisenberg(1)?;
    let hstream = heis.spectrum(160.0)?;
    println!("\nheisenberg(n=1), eigenvalues up to 160:");
    println!("{:>12}  {:>4}  exact", "lambda", "mult");
    for e in hstream.entries() {
        println!("{:12.6}  {:4}  {}", e.value, e.multiplicity, e.exact);
    }
    println!(
        "total count {} up to cutoff {}; spectral gap {:.6}",
        hstream.total_count(),
        hstream.cutoff(),
        hstream.spectral_gap().unwrap()
    );

    // Spectral transform: the operator (3/2) Delta^2 has spectrum
    // (3/2) lambda^2, mapped exactly on the rational-in-pi keys.
    let scaled = heis.transform(ExactCoeff::new(3, 2), 2)?;
    let sstream = scaled.spectrum(40000.0)?;
    println!("\n{}:", scaled.label());
    for (orig, image) in hstream.entries().iter().zip(sstream.entries()).take(5) {
        println!(
            "  {} -> {}   ({:.6} -> {:.6})",
            orig.exact, image.exact, orig.value, image.value
        );
    }
    println!(
        "growth exponents Q/nu: base {}, transformed {}",
        heis.q_over_nu(),
        scaled.q_over_nu()
    );
    Ok(())
}
