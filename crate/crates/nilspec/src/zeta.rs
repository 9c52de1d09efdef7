//! Spectral zeta functions: direct Dirichlet sums with density-certified
//! tails, the Mellin-split meromorphic continuation, residue extraction,
//! product identities, and Weyl-law fits.
//!
//! The continuation follows the heat-trace split at t = 1:
//! zeta(s) = h1(s) + (1/Gamma(s)) vol p_1(0) / (s - Q/nu) - m0/Gamma(s+1)
//!           + h2(s),
//! with h1, h2 entire (numerically: finite everywhere off the pole). The
//! reciprocal gamma factors vanish at non-positive integers, which realises
//! zeta(0) = -m0 and the trivial zeros exactly.

use num_complex::Complex64;

use crate::constants::neville_at_zero;
use crate::error::{Error, Result};
use crate::quad;
use crate::special::{self, gamma_complex, recip_gamma};
use crate::spectrum::{product_spectrum, EigenvalueStream, NilmanifoldModel};
use crate::sum::{pairwise_sum, pairwise_sum_complex};
use crate::theta::{self, ThetaValue};

const PI: f64 = std::f64::consts::PI;

/// Heat-trace evaluation options: a spectral-gap probe gamma (the envelope
/// |theta(t) - m0| <= C_gamma e^{-gamma t} drives integral truncations) and
/// the tolerance the certified tail must meet.
#[derive(Debug, Clone, Copy)]
pub struct ThetaOptions {
    pub tail_gap: f64,
    pub truncation_tolerance: f64,
}

impl ThetaOptions {
    pub fn validate(&self, stream: &EigenvalueStream) -> Result<()> {
        let gap = stream
            .spectral_gap()
            .ok_or_else(|| Error::InvalidArgument("spectrum has no positive eigenvalue".into()))?;
        if !(self.tail_gap > 0.0 && self.tail_gap < gap) {
            return Err(Error::InvalidArgument(format!(
                "tail gap {} outside (0, {gap})",
                self.tail_gap
            )));
        }
        if !(self.truncation_tolerance > 0.0) {
            return Err(Error::InvalidArgument("truncation tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Heat trace with the certificate that the discarded tail meets the
/// requested tolerance.
pub fn theta_with_options(
    stream: &EigenvalueStream,
    alpha: f64,
    t: f64,
    opts: &ThetaOptions,
) -> Result<ThetaValue> {
    opts.validate(stream)?;
    let th = theta::heat_trace(stream, alpha, t)?;
    if th.tail_bound >= opts.truncation_tolerance {
        return Err(Error::CutoffInsufficient {
            cutoff: stream.cutoff(),
            needed: (alpha.max(1.0) + 40.0 + (1.0 / opts.truncation_tolerance).ln().max(0.0)) / t,
        });
    }
    Ok(th)
}

/// Tail of sum mult * lambda^{-sigma} beyond the enumeration cutoff, from
/// the density envelope N(lambda) <= A lambda^alpha: integration by parts
/// gives sigma * A * cutoff^{alpha - sigma} / (sigma - alpha).
fn dirichlet_tail(stream: &EigenvalueStream, alpha: f64, sigma: f64) -> Result<f64> {
    if sigma <= alpha {
        return Err(Error::DivergenceRegion(format!(
            "Dirichlet tail needs Re s > {alpha}, got {sigma}"
        )));
    }
    let a = theta::density_envelope(stream, alpha)?;
    let cutoff = stream.cutoff();
    Ok(sigma * a * cutoff.powf(alpha - sigma) / (sigma - alpha))
}

/// Direct Dirichlet sum over the enumerated positive spectrum plus a
/// certified bound for the rest; requires the bound to come in under
/// `delta`.
pub fn zeta_direct(
    stream: &EigenvalueStream,
    alpha: f64,
    s: Complex64,
    delta: f64,
) -> Result<(Complex64, f64)> {
    let sigma = s.re;
    if sigma <= alpha + 1e-9 {
        return Err(Error::DivergenceRegion(format!(
            "direct sum diverges for Re s <= Q/nu = {alpha}; got {sigma}"
        )));
    }
    let tail = dirichlet_tail(stream, alpha, sigma)?;
    if tail > delta {
        let a = theta::density_envelope(stream, alpha)?;
        let needed = (sigma * a / (delta * (sigma - alpha))).powf(1.0 / (sigma - alpha));
        return Err(Error::CutoffInsufficient { cutoff: stream.cutoff(), needed });
    }
    let terms: Vec<Complex64> = stream
        .positive()
        .map(|e| (-s * e.value.ln()).exp() * e.multiplicity as f64)
        .collect();
    Ok((pairwise_sum_complex(&terms), tail))
}

/// The four components of the continued zeta at one point, with
/// `value` their exact sum and a propagated error budget.
#[derive(Debug, Clone, Copy)]
pub struct MellinSplit {
    pub s: Complex64,
    pub h1: Complex64,
    pub pole_term: Complex64,
    pub gamma_reciprocal_term: Complex64,
    pub h2: Complex64,
    pub value: Complex64,
    pub error_estimate: f64,
}

fn complex_power(t: f64, e: Complex64) -> Complex64 {
    (e * t.ln()).exp()
}

/// Smallest-time quadrature node per group family: abelian traces are
/// already clean at 0.02; the Heisenberg cancellation between the two
/// spectral families needs 0.05.
fn mellin_t_min(model: &NilmanifoldModel) -> f64 {
    if model.group().max_weight() == 1 {
        0.02
    } else {
        0.05
    }
}

/// Meromorphic continuation of the spectral zeta by the Mellin split of the
/// heat trace at t = 1.
///
/// h1 integrates (theta - m0) t^{s-1} over [1, T] with T chosen from the
/// exponential trace envelope; h2 integrates (theta - vol p_1(0) t^{-Q/nu})
/// t^{s-1} over geometric panels down to a family-dependent t_min, below
/// which the integrand is absorbed into the error bar through its measured
/// exponential-in-1/t decay envelope.
pub fn zeta_mellin(
    stream: &EigenvalueStream,
    model: &NilmanifoldModel,
    s: Complex64,
) -> Result<MellinSplit> {
    let alpha = model.q_over_nu();
    let vol_p1 = model.heat_coefficient().ok_or_else(|| {
        Error::Unsupported("model has no closed-form heat coefficient".into())
    })?;
    if (s - Complex64::from(alpha)).norm() < 1e-6 {
        return Err(Error::AtPole { pole: alpha, guard: 1e-6 });
    }
    let t_min = mellin_t_min(model);
    if stream.cutoff() < 40.0 / t_min {
        return Err(Error::CutoffInsufficient {
            cutoff: stream.cutoff(),
            needed: 40.0 / t_min,
        });
    }
    let m0 = stream.count_at_most(0.0)? as f64;
    let sigma = s.re;

    // h1 over [1, T]: a short stream suffices since e^{-lambda t} <= e^{-lambda};
    // the truncated stream's own tail certificate covers what is dropped. The
    // truncation point must leave the top half of the range populated for the
    // density envelope, hence the doubling search.
    let mut cut = 160.0_f64.min(stream.cutoff());
    let h1_stream = loop {
        let cand = stream.truncated(cut);
        if theta::density_envelope(&cand, alpha).is_ok() {
            break cand;
        }
        if cut >= stream.cutoff() {
            return Err(Error::CutoffInsufficient {
                cutoff: stream.cutoff(),
                needed: 2.0 * cut,
            });
        }
        cut = (cut * 2.0).min(stream.cutoff());
    };
    let envelope = theta::exponential_tail(&h1_stream, alpha, 1.0)?;
    let t_upper = ((envelope.coeff.max(1.0).ln() + 70.0) / envelope.rate).max(2.0);
    // Beyond T: |theta - m0| <= C e^{-rate t}, so the rest of the integral is
    // bounded through the upper incomplete gamma function.
    let x = envelope.rate * t_upper;
    let h1_trunc = if x > (sigma - 1.0).max(0.0) {
        envelope.coeff * envelope.rate.powf(-sigma) * special::upper_gamma_bound(sigma, x)?
    } else {
        return Err(Error::CertificateFailure(
            "h1 truncation point too small for the incomplete-gamma bound".into(),
        ));
    };
    let h1_theta_tail = theta::heat_trace(&h1_stream, alpha, 1.0)?.tail_bound
        * t_upper.powf(sigma.max(0.0) + 1.0);
    let h1_integrand = |t: f64| {
        // Guarded: t >= 1 and the stream cutoff exceeds alpha, so the trace
        // evaluation cannot fail.
        let th = theta::heat_trace(&h1_stream, alpha, t).expect("trace on [1, T]");
        complex_power(t, s - 1.0) * (th.value - m0)
    };
    let h1_quad = quad::adaptive_complex(&h1_integrand, 1.0, t_upper, 1e-13, 6000)?;

    // h2 over [t_min, 1] in geometric panels.
    let f_raw = |t: f64| {
        let th = theta::heat_trace(stream, alpha, t).expect("trace on [t_min, 1]");
        th.value - vol_p1 * t.powf(-alpha)
    };
    let h2_integrand = |t: f64| complex_power(t, s - 1.0) * f_raw(t);
    let mut panels = Vec::new();
    let mut h2_quad_err = 0.0;
    let mut hi = 1.0f64;
    while hi > t_min * (1.0 + 1e-12) {
        let lo = (hi / 2.0).max(t_min);
        let q = quad::adaptive_complex(&h2_integrand, lo, hi, 5e-13, 6000)?;
        panels.push(q.value);
        h2_quad_err += q.abs_error;
        hi = lo;
    }
    let h2_int = pairwise_sum_complex(&panels);
    let weight = if sigma.abs() < 1e-12 {
        (1.0 / t_min).ln()
    } else {
        ((1.0 - t_min.powf(sigma)) / sigma).abs()
    };
    let h2_theta_tail = theta::heat_trace(stream, alpha, t_min)?.tail_bound * weight;

    // Below t_min the integrand theta - vol p_1(0) t^{-alpha} decays faster
    // than any power; measure an exponential-in-1/t envelope D e^{-c/t} from
    // the two smallest accessible times and integrate it.
    let f1 = f_raw(t_min).abs();
    let f2 = f_raw(2.0 * t_min).abs();
    let sub_rem = if f1 == 0.0 {
        0.0
    } else if f1 < f2 {
        let c = 2.0 * t_min * (f2 / f1).ln();
        let xx = c / t_min; // = 2 ln(f2/f1)
        if xx <= (-sigma - 1.0).max(0.0) {
            return Err(Error::CertificateFailure(
                "decay below t_min too weak to certify the dropped integral".into(),
            ));
        }
        // int_0^{t_min} D e^{-c/t} t^{sigma-1} dt = D c^sigma Gamma_up(-sigma, c/t_min),
        // with D = f1 e^{c/t_min} = f2^2/f1.
        (f2 * f2 / f1) * c.powf(sigma) * special::upper_gamma_bound(-sigma, xx)?
    } else {
        return Err(Error::CertificateFailure(
            "no decay measured below t_min; cannot absorb the remaining integral".into(),
        ));
    };

    let rg = recip_gamma(s);
    let h1 = rg * h1_quad.value;
    let h2 = rg * h2_int;
    let pole_term = rg * vol_p1 / (s - alpha);
    let gamma_reciprocal_term = -m0 * recip_gamma(s + 1.0);
    let value = h1 + pole_term + gamma_reciprocal_term + h2;
    let error_estimate = rg.norm()
        * (h1_quad.abs_error + h1_trunc + h1_theta_tail + h2_quad_err + h2_theta_tail + sub_rem);
    Ok(MellinSplit {
        s,
        h1,
        pole_term,
        gamma_reciprocal_term,
        h2,
        value,
        error_estimate,
    })
}

/// Numerical residue at s = Q/nu: epsilon * zeta(Q/nu + epsilon) probed at
/// three epsilon values, polynomial-extrapolated to zero. Compare against
/// the closed route vol p_1(0) / Gamma(Q/nu).
pub fn residue_at_pole(
    stream: &EigenvalueStream,
    model: &NilmanifoldModel,
) -> Result<(f64, f64)> {
    let alpha = model.q_over_nu();
    let eps = [1e-2, 1e-3, 1e-4];
    let mut rs = Vec::with_capacity(eps.len());
    let mut err = 0.0;
    for &e in &eps {
        let split = zeta_mellin(stream, model, Complex64::new(alpha + e, 0.0))?;
        rs.push(e * split.value.re);
        err += e * split.error_estimate;
    }
    let (value, spread) = neville_at_zero(&eps, &rs);
    Ok((value, spread + err))
}

/// Double Dirichlet sum Z(s) = sum_{lambda_1, lambda_2 > 0}
/// (lambda_1 + lambda_2)^{-s} over two spectra, with a weighted-AM-GM tail
/// certificate: for weights a + b = 1,
/// lambda_1 + lambda_2 >= (lambda_1/a)^a (lambda_2/b)^b, so the remainder
/// with lambda_1 past its cutoff is bounded by the lambda_1 tail at exponent
/// a sigma times the full lambda_2 sum at exponent b sigma. Leaning the
/// weight onto the truncated factor (b sigma barely above alpha_2) makes the
/// certificate track the actual cutoff decay; the split is minimised over a
/// small exponent grid, separately for each one-sided remainder.
pub fn product_zeta_z(
    s1: &EigenvalueStream,
    alpha1: f64,
    s2: &EigenvalueStream,
    alpha2: f64,
    s: Complex64,
    delta: f64,
) -> Result<(Complex64, f64)> {
    let sigma = s.re;
    let slack = sigma - alpha1 - alpha2;
    if slack <= 1e-9 {
        return Err(Error::DivergenceRegion(format!(
            "double sum needs Re s > {}, got {sigma}",
            alpha1 + alpha2
        )));
    }
    let power_sum = |st: &EigenvalueStream, beta: f64| -> f64 {
        let terms: Vec<f64> = st
            .positive()
            .map(|e| e.multiplicity as f64 * e.value.powf(-beta))
            .collect();
        pairwise_sum(&terms)
    };
    // Remainder with lambda_a past its cutoff, lambda_b unrestricted.
    // Returns the bound and the decay margin beta_a - alpha_a driving it.
    let one_sided = |sa: &EigenvalueStream,
                     aa: f64,
                     sb: &EigenvalueStream,
                     ab: f64|
     -> Result<(f64, f64)> {
        let mut best = (f64::INFINITY, slack / 2.0);
        for k in 1..=8u32 {
            let m = slack * k as f64 / 16.0;
            let beta_b = ab + m;
            let beta_a = sigma - beta_b;
            let gm = (beta_a / sigma).powf(beta_a) * (beta_b / sigma).powf(beta_b);
            let ta = dirichlet_tail(sa, aa, beta_a)?;
            let tb = dirichlet_tail(sb, ab, beta_b)?;
            let bound = gm * ta * (power_sum(sb, beta_b) + tb);
            if bound < best.0 {
                best = (bound, beta_a - aa);
            }
        }
        Ok(best)
    };
    let (r1, d1) = one_sided(s1, alpha1, s2, alpha2)?;
    let (r2, d2) = one_sided(s2, alpha2, s1, alpha1)?;
    let tail = r1 + r2;
    if tail > delta {
        let cutoff = s1.cutoff().min(s2.cutoff());
        return Err(Error::CutoffInsufficient {
            cutoff,
            needed: cutoff * (tail / delta).powf(1.0 / d1.min(d2)),
        });
    }
    let mut terms = Vec::new();
    for e1 in s1.positive() {
        for e2 in s2.positive() {
            let mult = (e1.multiplicity * e2.multiplicity) as f64;
            terms.push((-s * (e1.value + e2.value).ln()).exp() * mult);
        }
    }
    Ok((pairwise_sum_complex(&terms), tail))
}

/// Both sides of the product-with-a-circle identity at one s.
#[derive(Debug, Clone, Copy)]
pub struct CrossCheck {
    pub s: Complex64,
    /// zeta of the product spectrum, by direct summation.
    pub lhs: Complex64,
    /// 2 (2 pi)^{-2s} zeta(2s) + Gamma(s-1/2)/(2 sqrt(pi) Gamma(s)) *
    /// zeta_1(s - 1/2) + h(s).
    pub rhs: Complex64,
    pub residual: f64,
    /// The same composite with both factors as displayed in the source
    /// (first term (2 pi)^{-s}, coefficient without the 1/2); kept for the
    /// discrepancy report.
    pub rhs_displayed: Complex64,
    pub residual_displayed: f64,
    pub h_term: Complex64,
    pub error_estimate: f64,
}

/// Cross-checks zeta_{R_1 + Delta_T}(s) against the theta-factorisation
/// formula. The lhs is the direct sum over the product spectrum; the rhs is
/// 2 (2 pi)^{-2s} zeta(2s) (the circle zeta in corrected form)
/// + (4 pi)^{-1/2} Gamma(s-1/2)/Gamma(s) * zeta_1(s-1/2)
/// + h(s), h(s) = (1/(sqrt(pi) Gamma(s))) int (theta_1(t) - m0)
///   sum_{j>=1} e^{-j^2/(4t)} t^{s-3/2} dt.
/// Both display-form discrepancies (the misprinted (2 pi)^{-s} and the
/// missing 1/2 in the coefficient) are reported, not silently dropped.
pub fn torus_cross_check(
    spec_l: &EigenvalueStream,
    alpha_l: f64,
    s: Complex64,
    delta: f64,
) -> Result<CrossCheck> {
    let cutoff = spec_l.cutoff();
    if cutoff < 4.0e4 {
        return Err(Error::CutoffInsufficient { cutoff, needed: 4.0e4 });
    }
    let circle = NilmanifoldModel::torus(1)?.spectrum(cutoff)?;
    let prod = product_spectrum(spec_l, &circle, cutoff)?;
    let (lhs, lhs_tail) = zeta_direct(&prod, alpha_l + 0.5, s, delta)?;

    let two_pi = 2.0 * PI;
    let term1 = 2.0 * (-2.0 * s * two_pi.ln()).exp() * special::riemann_zeta(2.0 * s)?;
    let term1_displayed = 2.0 * (-s * two_pi.ln()).exp() * special::riemann_zeta(2.0 * s)?;
    let (z1, z1_tail) = zeta_direct(spec_l, alpha_l, s - 0.5, delta)?;
    let coeff = gamma_complex(s - 0.5) * recip_gamma(s) / (2.0 * PI.sqrt());
    let term2 = coeff * z1;

    let m0 = spec_l.count_at_most(0.0)? as f64;
    let theta_stream = spec_l.truncated(cutoff.min(8.0e4));
    let dual_sum = |t: f64| -> f64 {
        let mut acc = 0.0;
        let mut j = 1.0f64;
        loop {
            let term = (-j * j / (4.0 * t)).exp();
            if term == 0.0 {
                return acc;
            }
            acc += term;
            j += 1.0;
        }
    };
    let h_integrand = |t: f64| {
        // Guarded: t >= 1e-3 and cutoff >= 4e4 keep t * cutoff >= 40 > alpha.
        let th = theta::heat_trace(&theta_stream, alpha_l, t).expect("trace on h range");
        complex_power(t, s - 1.5) * ((th.value - m0) * dual_sum(t))
    };
    let h_quad = quad::adaptive_complex(&h_integrand, 1e-3, 8.0, 1e-12, 8000)?;
    // Beyond t = 8: the trace envelope C e^{-rate t} against
    // sum_j e^{-j^2/4t} <= sqrt(pi t) leaves C sqrt(pi) t^{sigma-1} e^{-rate t}.
    let env_big = theta::exponential_tail(&theta_stream, alpha_l, 1.0)?;
    let x_hi = 8.0 * env_big.rate;
    let tail_hi = if x_hi > (s.re - 1.0).max(0.0) {
        env_big.coeff * PI.sqrt() * env_big.rate.powf(-s.re)
            * special::upper_gamma_bound(s.re, x_hi)?
    } else {
        return Err(Error::CertificateFailure(
            "cross-check upper tail bound unavailable at this s".into(),
        ));
    };
    // Below t = 1e-3 the integrand is dominated by
    // A Gamma(alpha+1) t^{-alpha} * 1.1 e^{-1/(4t)} t^{sigma - 3/2}.
    let a_env = theta::density_envelope(&theta_stream, alpha_l)?;
    let beta = s.re - alpha_l - 0.5;
    let x0 = 1.0 / (4.0e-3);
    let tail_lo = if x0 > (-beta - 1.0).max(0.0) {
        1.1 * a_env * special::gamma(alpha_l + 1.0)
            * 4.0f64.powf(-beta)
            * special::upper_gamma_bound(-beta, x0)?
    } else {
        return Err(Error::CertificateFailure(
            "cross-check lower tail bound unavailable at this s".into(),
        ));
    };
    // Theta truncation inside the h range: the per-evaluation tail bound is
    // largest at the left endpoint; int t^{sigma-3/2} dual(t) dt over the
    // range is below sqrt(pi) 8^{max(sigma, 1)}.
    let theta_trunc = theta::heat_trace(&theta_stream, alpha_l, 1e-3)?.tail_bound
        * PI.sqrt()
        * 8.0f64.powf(s.re.max(1.0));
    let rg = recip_gamma(s);
    let h_term = rg * h_quad.value / PI.sqrt();
    let h_err = rg.norm() * (h_quad.abs_error + tail_hi + tail_lo + theta_trunc) / PI.sqrt();

    let rhs = term1 + term2 + h_term;
    let rhs_displayed = term1_displayed + 2.0 * term2 + h_term;
    let error_estimate = lhs_tail + coeff.norm() * z1_tail + h_err;
    Ok(CrossCheck {
        s,
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        rhs_displayed,
        residual_displayed: (lhs - rhs_displayed).norm(),
        h_term,
        error_estimate,
    })
}

/// Fits the Weyl constant: mean of N(Lambda) Lambda^{-alpha} over the top
/// half of the grid, with the relative spread over that half as drift.
pub fn weyl_fit(
    stream: &EigenvalueStream,
    alpha: f64,
    lambda_grid: &[f64],
) -> Result<(f64, f64)> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("empty Weyl grid".into()));
    }
    if lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("Weyl grid must be strictly increasing".into()));
    }
    let top = &lambda_grid[lambda_grid.len() / 2..];
    let mut values = Vec::with_capacity(top.len());
    for &l in top {
        if !(l > 0.0) {
            return Err(Error::InvalidArgument("Weyl grid values must be positive".into()));
        }
        values.push(stream.count_at_most(l)? as f64 * l.powf(-alpha));
    }
    let mean = pairwise_sum(&values) / values.len() as f64;
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    Ok((mean, (max - min) / mean.abs().max(1e-300)))
}
