//! Spectral zeta functions: direct Dirichlet sums in the convergent
//! half-plane, Mellin continuation across the pole, and the pole residue
//! against its closed form. The circle is the reference case, where
//! zeta_Delta(s) = 2 (2 pi)^{-2s} zeta_R(2s) checks every value.
//!
//! Run with: cargo run -p nilspec --example zeta_values

use nilspec::spectrum::NilmanifoldModel;
use nilspec::{special, zeta, Complex64};

fn main() -> nilspec::Result<()> {
    let torus = NilmanifoldModel::torus(1)?;
    let stream = torus.spectrum(4.0e6)?;
    let alpha = torus.q_over_nu();

    println!("torus(n=1): zeta_Delta(s) against 2 (2 pi)^(-2s) zeta_R(2s)");
    println!("{:>6}  {:>22}  {:>10}  {:>12}  method", "s", "value", "error", "|dev oracle|");
    for s in [3.0, 2.0, 1.0, 0.25, 0.0, -0.5, -1.0] {
        let z = Complex64::new(s, 0.0);
        let (value, err, method) = if s > alpha + 0.5 {
            let (v, tail) = zeta::zeta_direct(&stream, alpha, z, 1e-4)?;
            (v, tail, "direct")
        } else {
            let split = zeta::zeta_mellin(&stream, &torus, z)?;
            (split.value, split.error_estimate, "mellin")
        };
        let oracle = 2.0 * (2.0 * std::f64::consts::PI).powf(-2.0 * s)
            * special::riemann_zeta(2.0 * z)?.re;
        println!(
            "{s:6.2}  {:22.15}  {:10.2e}  {:12.3e}  {method}",
            value.re,
            err,
            (value.re - oracle).abs()
        );
    }

    // At the pole s = Q/nu the residue has the closed form
    // vol p_1(0) / Gamma(Q/nu); for the circle that is 1/(2 pi).
    let (residue, err) = zeta::residue_at_pole(&stream, &torus)?;
    let closed = torus.heat_coefficient().unwrap()
        * special::recip_gamma(Complex64::from(alpha)).re;
    println!("\nresidue at s = {alpha}: {residue:.10} +- {err:.2e}");
    println!("closed form 1/(2 pi) = {closed:.10}");

    // The Mellin split itself: the four pieces the continuation is made of.
    let split = zeta::zeta_mellin(&stream, &torus, Complex64::new(0.25, 0.0))?;
    println!("\nMellin split at s = 0.25:");
    println!("  long-time integral   {:+.9e}", split.h1.re);
    println!("  pole term            {:+.9e}", split.pole_term.re);
    println!("  1/Gamma(s) term      {:+.9e}", split.gamma_reciprocal_term.re);
    println!("  short-time integral  {:+.9e}", split.h2.re);
    println!("  sum                  {:+.12}", split.value.re);

    // Same machinery on a genuinely nonabelian spectrum.
    let heis = NilmanifoldModel::heisenberg(1)?;
    let hstream = heis.spectrum(3000.0)?;
    for s in [4.0, 1.0] {
        let z = Complex64::new(s, 0.0);
        let split = zeta::zeta_mellin(&hstream, &heis, z)?;
        println!(
            "\nheisenberg(n=1) zeta({s}) = {:.10} +- {:.2e}",
            split.value.re, split.error_estimate
        );
        if s > heis.q_over_nu() + 0.5 {
            let (direct, tail) = zeta::zeta_direct(&hstream, heis.q_over_nu(), z, 1e-3)?;
            println!("  direct sum agrees to {:.3e} (tail {:.2e})", (split.value - direct).norm(), tail);
        }
    }
    Ok(())
}
