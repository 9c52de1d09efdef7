//! Deterministic summation.
//!
//! Every reduction in this crate goes through `pairwise_sum` (or the complex
//! variant). The recursion tree depends only on the input length, so results
//! are bit-reproducible across runs and independent of any chunking of the
//! work, and the pairwise shape keeps rounding error at O(log n) ulps.

use num_complex::Complex64;

const LEAF: usize = 32;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}

/// Pairwise sum of `f(0), ..., f(n-1)` with the same tree shape as
/// `pairwise_sum`, without materializing the terms.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: &F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= LEAF {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    if n == 0 {
        return 0.0;
    }
    rec(0, n, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_small_inputs() {
        let v: Vec<f64> = (0..7).map(|i| (i as f64) * 0.1).collect();
        assert_eq!(pairwise_sum(&v), v.iter().sum::<f64>());
    }

    #[test]
    fn harmonic_partial_sum() {
        let v: Vec<f64> = (1..=100_000).map(|i| 1.0 / i as f64).collect();
        let s = pairwise_sum(&v);
        // H_100000 = ln(100000) + gamma + 1/(2n) - ...
        let expected = 12.090146129863427;
        assert!((s - expected).abs() < 1e-12, "got {s}");
    }

    #[test]
    fn by_index_agrees_with_slice() {
        let v: Vec<f64> = (0..4097).map(|i| ((i * 37) % 101) as f64 * 1e-3).collect();
        let a = pairwise_sum(&v);
        let b = pairwise_sum_by(v.len(), &|i| v[i]);
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_across_calls() {
        let v: Vec<f64> = (0..10_000).map(|i| (i as f64).sin() * 1e-5).collect();
        assert_eq!(pairwise_sum(&v).to_bits(), pairwise_sum(&v).to_bits());
    }
}
