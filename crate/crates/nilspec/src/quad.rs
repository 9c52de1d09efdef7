//! Adaptive Gauss-Kronrod quadrature.
//!
//! The core rule is the 15-point Kronrod extension of 7-point Gauss. Adaptive
//! refinement bisects the worst interval first; the interval queue is ordered
//! deterministically (error, then position), so node sets and results are
//! reproducible for a given integrand.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BinaryHeap;

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod weights.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights for the embedded 7-point rule (odd Kronrod indices).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResultComplex {
    pub value: Complex64,
    pub abs_error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    let mut resabs = 0.0;
    for (j, &x) in XGK.iter().enumerate() {
        let (fl, fr) = if x == 0.0 {
            let v = f(center);
            (v, 0.0)
        } else {
            (f(center - half * x), f(center + half * x))
        };
        let fsum = fl + fr;
        kron += WGK[j] * fsum;
        resabs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    let value = kron * half;
    let err = ((kron - gauss) * half).abs();
    // Standard conditioning of the raw error estimate.
    let scale = resabs * half.abs();
    let err = if scale > 0.0 && err > 0.0 {
        let r = (200.0 * err / scale).powf(1.5);
        (scale * r.min(1.0)).max(err * 1e-10)
    } else {
        err
    };
    (value, err)
}

fn gk15_complex<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    for (j, &x) in XGK.iter().enumerate() {
        let fsum = if x == 0.0 {
            f(center)
        } else {
            f(center - half * x) + f(center + half * x)
        };
        kron += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    ((kron * half), ((kron - gauss) * half).norm())
}

#[derive(Debug)]
struct Interval {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap on error; ties broken by left endpoint for determinism.
        self.err
            .total_cmp(&other.err)
            .then(other.a.total_cmp(&self.a))
    }
}

/// Adaptive integration of `f` over [a, b] to absolute tolerance `abs_tol`.
///
/// Returns the value with an error estimate; errors out only if the estimate
/// cannot be brought under `abs_tol` within `max_intervals` bisections.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidArgument(format!(
            "bad integration interval [{a}, {b}]"
        )));
    }
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval { err: e, a, b, value: v });
    let mut total_err = e;
    let mut n = 1usize;
    while total_err > abs_tol && n < max_intervals {
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; keep its estimate.
            total_err = heap.iter().map(|i| i.err).sum::<f64>() + worst.err;
            heap.push(worst);
            break;
        }
        total_err -= worst.err;
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total_err += e1 + e2;
        heap.push(Interval { err: e1, a: worst.a, b: mid, value: v1 });
        heap.push(Interval { err: e2, a: mid, b: worst.b, value: v2 });
        n += 1;
    }
    let parts: Vec<f64> = {
        let mut iv: Vec<Interval> = heap.into_vec();
        iv.sort_by(|p, q| p.a.total_cmp(&q.a));
        iv.iter().map(|i| i.value).collect()
    };
    let value = crate::sum::pairwise_sum(&parts);
    if total_err > abs_tol {
        return Err(Error::CertificateFailure(format!(
            "quadrature error {total_err:.3e} above tolerance {abs_tol:.3e} after {n} intervals"
        )));
    }
    Ok(QuadResult { value, abs_error: total_err })
}

#[derive(Debug)]
struct IntervalC {
    err: f64,
    a: f64,
    b: f64,
    value: Complex64,
}

impl PartialEq for IntervalC {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for IntervalC {}
impl PartialOrd for IntervalC {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for IntervalC {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .total_cmp(&other.err)
            .then(other.a.total_cmp(&self.a))
    }
}

/// Complex-valued counterpart of [`adaptive`].
pub fn adaptive_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<QuadResultComplex> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidArgument(format!(
            "bad integration interval [{a}, {b}]"
        )));
    }
    let (v, e) = gk15_complex(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(IntervalC { err: e, a, b, value: v });
    let mut total_err = e;
    let mut n = 1usize;
    while total_err > abs_tol && n < max_intervals {
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            total_err = heap.iter().map(|i| i.err).sum::<f64>() + worst.err;
            heap.push(worst);
            break;
        }
        total_err -= worst.err;
        let (v1, e1) = gk15_complex(f, worst.a, mid);
        let (v2, e2) = gk15_complex(f, mid, worst.b);
        total_err += e1 + e2;
        heap.push(IntervalC { err: e1, a: worst.a, b: mid, value: v1 });
        heap.push(IntervalC { err: e2, a: mid, b: worst.b, value: v2 });
        n += 1;
    }
    let parts: Vec<Complex64> = {
        let mut iv: Vec<IntervalC> = heap.into_vec();
        iv.sort_by(|p, q| p.a.total_cmp(&q.a));
        iv.iter().map(|i| i.value).collect()
    };
    let value = crate::sum::pairwise_sum_complex(&parts);
    if total_err > abs_tol {
        return Err(Error::CertificateFailure(format!(
            "quadrature error {total_err:.3e} above tolerance {abs_tol:.3e} after {n} intervals"
        )));
    }
    Ok(QuadResultComplex { value, abs_error: total_err })
}

/// Integrate f over (0, upper] where f may have an integrable singularity at 0
/// of strength milder than 1/t. Panels [upper/2^(k+1), upper/2^k] are summed
/// until a panel contributes less than `drop_tol` of the running total (or the
/// panel count is exhausted), and the final panel's geometric continuation is
/// added to the error estimate.
pub fn integrate_to_zero<F: Fn(f64) -> f64>(
    f: &F,
    upper: f64,
    abs_tol: f64,
    drop_tol: f64,
) -> Result<QuadResult> {
    let mut hi = upper;
    let mut parts = Vec::new();
    let mut err = 0.0;
    let mut total = 0.0_f64;
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let lo = hi / 2.0;
        let r = adaptive(f, lo, hi, abs_tol / 64.0, 400)?;
        parts.push(r.value);
        err += r.abs_error;
        total += r.value;
        last = r.value.abs();
        if last < drop_tol * total.abs().max(1e-300) || last == 0.0 {
            break;
        }
        hi = lo;
    }
    // Remaining mass below the last panel, assuming the panel values keep
    // decaying at least geometrically with the observed ratio <= 1/2 ... we
    // bound it by one more panel's worth.
    err += last;
    Ok(QuadResult { value: crate::sum::pairwise_sum(&parts), abs_error: err })
}
