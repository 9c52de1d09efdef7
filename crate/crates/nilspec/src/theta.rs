//! Heat traces theta(t) = sum of exp(-lambda t) over the spectrum, with
//! certified bounds for the part of the spectrum beyond the enumeration
//! cutoff.
//!
//! The tail certificate combines the counting bound N(lambda) <= A lambda^a
//! (a = Q/nu) with integration by parts:
//!
//!   sum_{lambda > L} m(lambda) e^{-lambda t}
//!     <= t Integral_L^inf N(lambda) e^{-lambda t} dlambda
//!     <= A t^{-a} Gamma_upper(a + 1, t L).
//!
//! The envelope constant A is measured on the top half of the enumerated
//! range and doubled; tests check it dominates refinements at larger cutoffs.

use crate::error::{Error, Result};
use crate::spectrum::EigenvalueStream;
use crate::special;
use crate::sum::pairwise_sum;

#[derive(Debug, Clone, Copy)]
pub struct ThetaValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Envelope constant A with N(lambda) <= A lambda^alpha across the top half
/// of the enumerated range, doubled as a safety margin for extrapolation
/// beyond the cutoff.
pub fn density_envelope(stream: &EigenvalueStream, alpha: f64) -> Result<f64> {
    let cutoff = stream.cutoff();
    let mut best: Option<f64> = None;
    for e in stream.entries() {
        if e.value >= cutoff / 2.0 && e.value > 0.0 {
            let n = stream.count_at_most(e.value)? as f64;
            let d = n / e.value.powf(alpha);
            best = Some(best.map_or(d, |b: f64| b.max(d)));
        }
    }
    best.map(|b| 2.0 * b).ok_or(Error::CutoffInsufficient {
        cutoff,
        needed: 2.0 * cutoff,
    })
}

/// theta(t) over the enumerated spectrum plus a certified bound for the
/// discarded tail. Requires t * cutoff > alpha so the incomplete-gamma bound
/// applies (in practice the cutoff should be far larger for a useful bound).
pub fn heat_trace(stream: &EigenvalueStream, alpha: f64, t: f64) -> Result<ThetaValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("heat trace needs t > 0, got {t}")));
    }
    let cutoff = stream.cutoff();
    let a = alpha + 1.0;
    if t * cutoff <= alpha {
        return Err(Error::CutoffInsufficient {
            cutoff,
            needed: alpha / t,
        });
    }
    let terms: Vec<f64> = stream
        .entries()
        .iter()
        .map(|e| e.multiplicity as f64 * (-e.value * t).exp())
        .collect();
    let value = pairwise_sum(&terms);
    let envelope = density_envelope(stream, alpha)?;
    let tail_bound =
        envelope * t.powf(-alpha) * special::upper_gamma_bound(a, t * cutoff)?;
    Ok(ThetaValue { value, tail_bound })
}

/// Exponential envelope for the positive part of the trace: for t >= t0,
/// theta(t) - (zero modes) <= coeff * exp(-rate t).
#[derive(Debug, Clone, Copy)]
pub struct ExponentialTail {
    pub coeff: f64,
    pub rate: f64,
    pub zero_modes: u64,
    pub valid_from: f64,
}

/// Build the envelope at anchor time t0: every positive eigenvalue satisfies
/// e^{-lambda t} <= e^{-lambda t0} e^{-lambda_1 (t - t0)}, so the positive
/// trace at t0 (plus its tail bound) times e^{lambda_1 t0} serves as coeff.
pub fn exponential_tail(
    stream: &EigenvalueStream,
    alpha: f64,
    t0: f64,
) -> Result<ExponentialTail> {
    let rate = stream
        .spectral_gap()
        .ok_or_else(|| Error::InvalidArgument("spectrum has no positive eigenvalue".into()))?;
    let zero_modes = stream.count_at_most(0.0)?;
    let theta = heat_trace(stream, alpha, t0)?;
    let positive = (theta.value - zero_modes as f64).max(0.0) + theta.tail_bound;
    Ok(ExponentialTail {
        coeff: positive * (rate * t0).exp(),
        rate,
        zero_modes,
        valid_from: t0,
    })
}

/// Reference evaluator for the torus trace sum_{m in Z^n} e^{-4 pi^2 |m|^2 t},
/// switching to the modular dual (4 pi t)^{-1/2} sum_j e^{-j^2/(4t)} per
/// coordinate factor when t is small. Accurate to full precision for t > 0.
pub fn theta_torus_dual(n: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("theta needs t > 0, got {t}")));
    }
    let pi = std::f64::consts::PI;
    let one_dim = if t >= 0.1 {
        let mut s = 1.0;
        let mut m = 1.0f64;
        loop {
            let term = (-4.0 * pi * pi * m * m * t).exp();
            if term == 0.0 {
                break;
            }
            s += 2.0 * term;
            m += 1.0;
        }
        s
    } else {
        let mut s = 1.0;
        let mut j = 1.0f64;
        loop {
            let term = (-j * j / (4.0 * t)).exp();
            if term == 0.0 {
                break;
            }
            s += 2.0 * term;
            j += 1.0;
        }
        s * (4.0 * pi * t).powf(-0.5)
    };
    Ok(one_dim.powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::NilmanifoldModel;
    use approx::assert_relative_eq;

    #[test]
    fn torus_trace_matches_dual_evaluator() {
        let model = NilmanifoldModel::torus(1).unwrap();
        let stream = model.spectrum(4000.0).unwrap();
        for &t in &[0.02, 0.05, 0.1, 0.5, 1.0, 2.0] {
            let got = heat_trace(&stream, model.q_over_nu(), t).unwrap();
            let want = theta_torus_dual(1, t).unwrap();
            assert!(
                (got.value - want).abs() <= got.tail_bound + 1e-12,
                "t = {t}: got {} want {want} tail {}",
                got.value,
                got.tail_bound
            );
        }
    }

    #[test]
    fn torus_2d_trace_matches_dual_evaluator() {
        let model = NilmanifoldModel::torus(2).unwrap();
        let stream = model.spectrum(6000.0).unwrap();
        for &t in &[0.05, 0.2, 1.0] {
            let got = heat_trace(&stream, model.q_over_nu(), t).unwrap();
            let want = theta_torus_dual(2, t).unwrap();
            assert!((got.value - want).abs() <= got.tail_bound + 1e-12);
        }
    }

    #[test]
    fn tail_bound_dominates_refinement() {
        let model = NilmanifoldModel::heisenberg(1).unwrap();
        let coarse = model.spectrum(500.0).unwrap();
        let fine = model.spectrum(2500.0).unwrap();
        let alpha = model.q_over_nu();
        for &t in &[0.05, 0.1, 0.3] {
            let a = heat_trace(&coarse, alpha, t).unwrap();
            let b = heat_trace(&fine, alpha, t).unwrap();
            assert!(b.value >= a.value);
            assert!(
                b.value - a.value <= a.tail_bound,
                "t = {t}: refinement moved by {} > bound {}",
                b.value - a.value,
                a.tail_bound
            );
        }
    }

    #[test]
    fn heisenberg_small_time_coefficient() {
        // t^2 theta(t) -> 1/32; the first correction (the toral family) is
        // positive and of relative size about 8t/pi.
        let model = NilmanifoldModel::heisenberg(1).unwrap();
        let alpha = model.q_over_nu();
        let stream = model.spectrum(4000.0).unwrap();
        let v_02 = heat_trace(&stream, alpha, 0.02).unwrap().value * 0.02f64.powi(2);
        let v_01 = heat_trace(&stream, alpha, 0.01).unwrap().value * 0.01f64.powi(2);
        let limit = 1.0 / 32.0;
        assert!(v_02 > limit && v_02 < limit * 1.08, "t^2 theta = {v_02}");
        assert!(v_01 > limit && v_01 < v_02);
    }

    #[test]
    fn exponential_tail_envelope_holds() {
        let model = NilmanifoldModel::heisenberg(1).unwrap();
        let alpha = model.q_over_nu();
        let stream = model.spectrum(800.0).unwrap();
        let env = exponential_tail(&stream, alpha, 1.0).unwrap();
        assert_relative_eq!(env.rate, 4.0 * std::f64::consts::PI, max_relative = 1e-14);
        assert_eq!(env.zero_modes, 1);
        for &t in &[1.0, 1.5, 2.0, 4.0] {
            let theta = heat_trace(&stream, alpha, t).unwrap();
            let excess = theta.value - 1.0;
            let bound = env.coeff * (-env.rate * t).exp();
            assert!(excess <= bound * 1.0000001, "t = {t}: {excess} > {bound}");
        }
    }

    #[test]
    fn guards() {
        let model = NilmanifoldModel::torus(1).unwrap();
        let stream = model.spectrum(100.0).unwrap();
        assert!(heat_trace(&stream, 0.5, 0.0).is_err());
        assert!(heat_trace(&stream, 0.5, -1.0).is_err());
        // t * cutoff too small for the incomplete-gamma bound.
        assert!(matches!(
            heat_trace(&stream, 0.5, 0.004),
            Err(Error::CutoffInsufficient { .. })
        ));
        assert!(theta_torus_dual(1, 0.0).is_err());
    }

    #[test]
    fn dual_representation_is_smooth_across_switch() {
        // Values on both sides of the t = 0.1 representation switch agree
        // with a stream evaluation.
        let model = NilmanifoldModel::torus(1).unwrap();
        let stream = model.spectrum(20000.0).unwrap();
        for &t in &[0.09999, 0.10001] {
            let dual = theta_torus_dual(1, t).unwrap();
            let direct = heat_trace(&stream, 0.5, t).unwrap();
            assert!((dual - direct.value).abs() <= direct.tail_bound + 1e-13);
        }
    }
}
