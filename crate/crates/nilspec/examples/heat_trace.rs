//! Heat traces with certified truncation tails, checked against the modular
//! dual on the torus and against the small-time law theta(t) ~ vol p_1(0)
//! t^{-Q/nu} on the Heisenberg nilmanifold.
//!
//! Run with: cargo run -p nilspec --example heat_trace

use nilspec::spectrum::NilmanifoldModel;
use nilspec::theta;

fn main() -> nilspec::Result<()> {
    let torus = NilmanifoldModel::torus(1)?;
    let stream = torus.spectrum(40000.0)?;
    let alpha = torus.q_over_nu();
    println!("torus(n=1): theta(t) vs the Poisson dual evaluator");
    println!("{:>6}  {:>18}  {:>12}  {:>11}", "t", "theta", "tail bound", "|dev dual|");
    for t in [0.05, 0.1, 0.2, 0.5, 1.0] {
        let th = theta::heat_trace(&stream, alpha, t)?;
        let dual = theta::theta_torus_dual(1, t)?;
        println!(
            "{t:6.2}  {:18.12}  {:12.3e}  {:11.3e}",
            th.value,
            th.tail_bound,
            (th.value - dual).abs()
        );
    }

    // Heisenberg: t^{Q/nu} theta(t) converges to vol p_1(0) = 1/32 as t -> 0.
    let heis = NilmanifoldModel::heisenberg(1)?;
    let hstream = heis.spectrum(3000.0)?;
    let halpha = heis.q_over_nu();
    let coeff = heis.heat_coefficient().unwrap();
    println!("\nheisenberg(n=1): small-time law, vol p_1(0) = {coeff}");
    println!("{:>6}  {:>18}  {:>18}  {:>12}", "t", "theta", "t^2 theta", "tail bound");
    for t in [0.2, 0.1, 0.05, 0.025] {
        let th = theta::heat_trace(&hstream, halpha, t)?;
        println!(
            "{t:6.3}  {:18.9}  {:18.12}  {:12.3e}",
            th.value,
            t.powf(halpha) * th.value,
            th.tail_bound
        );
    }

    // Long-time envelope: past t0 the positive trace decays at the gap rate.
    let env = theta::exponential_tail(&hstream, halpha, 1.0)?;
    println!(
        "\nexponential envelope from t0 = {}: theta(t) - {} <= {:.6e} exp(-{:.6} t)",
        env.valid_from, env.zero_modes, env.coeff, env.rate
    );
    Ok(())
}
