//! Eigenvalue enumeration with exact arithmetic keys.
//!
//! Every eigenvalue produced here is a rational multiple of a power of pi
//! (or a sum of such after taking products of manifolds), so eigenvalues are
//! carried as small polynomials in pi with rational coefficients. Merging of
//! coincident eigenvalues happens on these exact keys, never on floats; the
//! float value attached to an entry is always the evaluation of its key.
//!
//! Supported spectra:
//! * flat torus R^n/Z^n: 4 pi^2 |m|^2 over m in Z^n,
//! * Heisenberg nilmanifold (canonical lattice): the toral family
//!   4 pi^2 |m|^2 over m in Z^{2n} together with the family
//!   4 (2a + n) pi |k| of multiplicity (2|k|)^n binom(n+a-1, a)
//!   over integers k != 0 and a >= 0,
//! * images under lambda -> c lambda^l with c a positive rational, l >= 1,
//! * direct products (eigenvalue sums over all pairs).

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::{GradedGroup, Rational};
use crate::lattice::LatticeSubgroup;
use crate::quad;
use crate::special;

/// Coefficient type for exact eigenvalue keys.
pub type ExactCoeff = Ratio<i128>;

/// A polynomial in pi with rational coefficients, used as an exact eigenvalue
/// key. Single spectra only need monomials q pi^p; products introduce sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PiForm {
    // power of pi -> nonzero coefficient
    terms: BTreeMap<u32, ExactCoeff>,
}

impl PiForm {
    pub fn zero() -> Self {
        PiForm { terms: BTreeMap::new() }
    }

    pub fn monomial(coeff: ExactCoeff, power: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(power, coeff);
        }
        PiForm { terms }
    }

    pub fn constant(coeff: ExactCoeff) -> Self {
        PiForm::monomial(coeff, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PiForm) -> PiForm {
        let mut terms = self.terms.clone();
        for (p, c) in &other.terms {
            let slot = terms.entry(*p).or_insert_with(ExactCoeff::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(p);
            }
        }
        PiForm { terms }
    }

    pub fn mul(&self, other: &PiForm) -> PiForm {
        let mut terms: BTreeMap<u32, ExactCoeff> = BTreeMap::new();
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                let slot = terms.entry(p1 + p2).or_insert_with(ExactCoeff::zero);
                *slot += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        PiForm { terms }
    }

    pub fn scale(&self, c: ExactCoeff) -> PiForm {
        if c.is_zero() {
            return PiForm::zero();
        }
        let terms = self.terms.iter().map(|(p, q)| (*p, q * c)).collect();
        PiForm { terms }
    }

    pub fn pow(&self, n: u32) -> PiForm {
        let mut acc = PiForm::constant(ExactCoeff::from_integer(1));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Float evaluation. Ascending powers of pi, fixed summation order.
    /// Folds from +0.0: the iterator Sum identity is -0.0, which would give
    /// the zero eigenvalue a negative sign bit that leaks into output.
    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(p, c)| c.to_f64().expect("finite rational") * std::f64::consts::PI.powi(*p as i32))
            .fold(0.0, |acc, x| acc + x)
    }
}

impl fmt::Display for PiForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // Highest power first: "4*pi^2 + 12*pi + 1/2".
        for (p, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let q = if c.denom() == &1 {
                format!("{}", c.numer())
            } else {
                format!("{}/{}", c.numer(), c.denom())
            };
            match p {
                0 => write!(f, "{q}")?,
                1 => write!(f, "{q}*pi")?,
                _ => write!(f, "{q}*pi^{p}")?,
            }
        }
        Ok(())
    }
}

impl PartialOrd for PiForm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PiForm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Numeric value first so streams sort ascending; the exact terms break
        // any float tie deterministically.
        self.to_f64()
            .total_cmp(&other.to_f64())
            .then_with(|| self.terms.cmp(&other.terms))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub value: f64,
    pub multiplicity: u64,
    pub exact: PiForm,
}

/// All eigenvalues (with multiplicity) up to and including `cutoff`, sorted
/// ascending, coincident exact keys merged.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueStream {
    entries: Vec<SpectrumEntry>,
    cumulative: Vec<u64>,
    cutoff: f64,
}

impl EigenvalueStream {
    fn from_map(map: BTreeMap<PiForm, u64>, cutoff: f64) -> Self {
        let mut entries = Vec::with_capacity(map.len());
        let mut cumulative = Vec::with_capacity(map.len());
        let mut running = 0u64;
        for (exact, multiplicity) in map {
            if multiplicity == 0 {
                continue;
            }
            let value = exact.to_f64();
            debug_assert!(
                entries.last().map_or(true, |e: &SpectrumEntry| e.value <= value),
                "stream out of order"
            );
            running += multiplicity;
            cumulative.push(running);
            entries.push(SpectrumEntry { value, multiplicity, exact });
        }
        EigenvalueStream { entries, cumulative, cutoff }
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Total count including multiplicity (and the zero mode if present).
    pub fn total_count(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    /// Counting function N(lambda) = #{eigenvalues <= lambda}, with
    /// multiplicity. Rejects queries beyond the enumeration cutoff.
    pub fn count_at_most(&self, lambda: f64) -> Result<u64> {
        if lambda > self.cutoff {
            return Err(Error::CutoffInsufficient { cutoff: self.cutoff, needed: lambda });
        }
        let idx = self.entries.partition_point(|e| e.value <= lambda);
        Ok(if idx == 0 { 0 } else { self.cumulative[idx - 1] })
    }

    /// Smallest positive eigenvalue, if any positive one was enumerated.
    pub fn spectral_gap(&self) -> Option<f64> {
        self.entries.iter().find(|e| e.value > 0.0).map(|e| e.value)
    }

    /// Entries with positive eigenvalue (zeta sums exclude the kernel).
    pub fn positive(&self) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(|e| e.value > 0.0)
    }

    /// Restriction to a smaller cutoff.
    pub fn truncated(&self, cutoff: f64) -> EigenvalueStream {
        let mut map = BTreeMap::new();
        for e in &self.entries {
            if e.value <= cutoff {
                map.insert(e.exact.clone(), e.multiplicity);
            }
        }
        EigenvalueStream::from_map(map, cutoff)
    }
}

/// Largest s >= 0 with value(s) <= cutoff, for nondecreasing value with
/// value(0) <= cutoff. `estimate` only speeds up the search; the fixup loops
/// decide every boundary case in the same arithmetic as `value`.
fn refine_max_index(estimate: i64, cutoff: f64, value: impl Fn(i64) -> f64) -> i64 {
    let mut s = estimate.max(0);
    while value(s + 1) <= cutoff {
        s += 1;
    }
    while s > 0 && value(s) > cutoff {
        s -= 1;
    }
    s
}

/// Counts of integer vectors in Z^n with |m|^2 = s for each s <= s_max.
fn sum_of_squares_counts(n: usize, s_max: i64) -> Vec<u64> {
    let mut bucket = vec![0u64; (s_max + 1) as usize];
    fn isqrt(rem: i64) -> i64 {
        let mut r = (rem as f64).sqrt() as i64;
        while (r + 1) * (r + 1) <= rem {
            r += 1;
        }
        while r > 0 && r * r > rem {
            r -= 1;
        }
        r
    }
    fn rec(dims_left: usize, rem: i64, used: i64, bucket: &mut [u64]) {
        if dims_left == 0 {
            bucket[used as usize] += 1;
            return;
        }
        let r = isqrt(rem);
        for v in -r..=r {
            rec(dims_left - 1, rem - v * v, used + v * v, bucket);
        }
    }
    rec(n, s_max, 0, &mut bucket);
    bucket
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial fits u64")
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if !cutoff.is_finite() || cutoff < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "spectrum cutoff must be finite and >= 0, got {cutoff}"
        )));
    }
    Ok(())
}

fn torus_stream(n: usize, cutoff: f64) -> Result<EigenvalueStream> {
    check_cutoff(cutoff)?;
    let key = |s: i64| PiForm::monomial(ExactCoeff::from_integer(4 * s as i128), 2);
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let s_max = refine_max_index((cutoff / four_pi_sq) as i64, cutoff, |s| key(s).to_f64());
    let bucket = sum_of_squares_counts(n, s_max);
    let mut map = BTreeMap::new();
    for (s, count) in bucket.iter().enumerate() {
        if *count > 0 {
            map.insert(key(s as i64), *count);
        }
    }
    Ok(EigenvalueStream::from_map(map, cutoff))
}

fn heisenberg_stream(n: usize, cutoff: f64) -> Result<EigenvalueStream> {
    check_cutoff(cutoff)?;
    let toral_key = |s: i64| PiForm::monomial(ExactCoeff::from_integer(4 * s as i128), 2);
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let s_max = refine_max_index((cutoff / four_pi_sq) as i64, cutoff, |s| toral_key(s).to_f64());
    let mut map = BTreeMap::new();
    for (s, count) in sum_of_squares_counts(2 * n, s_max).iter().enumerate() {
        if *count > 0 {
            map.insert(toral_key(s as i64), *count);
        }
    }
    // Second family: lambda = 4 (2a + n) pi k over k >= 1, a >= 0, counted
    // twice for the sign of k.
    let line_key = |q: i64| PiForm::monomial(ExactCoeff::from_integer(q as i128), 1);
    let mut k: i64 = 1;
    loop {
        let q0 = 4 * (n as i64) * k; // a = 0 floor for this k
        if line_key(q0).to_f64() > cutoff {
            break;
        }
        let mut a: i64 = 0;
        loop {
            let q = 4 * (2 * a + n as i64) * k;
            if line_key(q).to_f64() > cutoff {
                break;
            }
            let radial = (2 * k as u64)
                .checked_pow(n as u32)
                .expect("multiplicity fits u64");
            let mult = 2u64
                .checked_mul(radial)
                .and_then(|m| m.checked_mul(binomial(n as u64 + a as u64 - 1, a as u64)))
                .expect("multiplicity fits u64");
            *map.entry(line_key(q)).or_insert(0) += mult;
            a += 1;
        }
        k += 1;
    }
    Ok(EigenvalueStream::from_map(map, cutoff))
}

/// Image of a stream under lambda -> c lambda^l, exact keys transformed
/// exactly. The map is strictly increasing on [0, inf), so multiplicities and
/// order carry over; the new cutoff is the image of the old one.
pub fn transform_spectrum(
    stream: &EigenvalueStream,
    coeff: ExactCoeff,
    power: u32,
) -> Result<EigenvalueStream> {
    if coeff <= ExactCoeff::zero() {
        return Err(Error::InvalidArgument("transform coefficient must be positive".into()));
    }
    if power == 0 {
        return Err(Error::InvalidArgument("transform power must be >= 1".into()));
    }
    let mut map = BTreeMap::new();
    for e in stream.entries() {
        let exact = e.exact.pow(power).scale(coeff);
        if map.insert(exact, e.multiplicity).is_some() {
            // Strictly monotone transforms cannot merge distinct eigenvalues.
            return Err(Error::InvalidArgument("duplicate key under monotone transform".into()));
        }
    }
    let c = coeff.to_f64().expect("finite rational");
    let mut new_cutoff = c * stream.cutoff().powi(power as i32);
    if let Some((k, _)) = map.iter().next_back() {
        new_cutoff = new_cutoff.max(k.to_f64());
    }
    Ok(EigenvalueStream::from_map(map, new_cutoff))
}

/// Spectrum of a direct product: all pairwise sums lambda_1 + lambda_2 up to
/// `cutoff`. Both factors must have been enumerated at least that far.
pub fn product_spectrum(
    s1: &EigenvalueStream,
    s2: &EigenvalueStream,
    cutoff: f64,
) -> Result<EigenvalueStream> {
    check_cutoff(cutoff)?;
    for s in [s1, s2] {
        if s.cutoff() < cutoff {
            return Err(Error::CutoffInsufficient { cutoff: s.cutoff(), needed: cutoff });
        }
    }
    // Small float slack on the inner break; exact keys make the final call.
    let slack = 1e-9 * cutoff.max(1.0);
    let mut map: BTreeMap<PiForm, u64> = BTreeMap::new();
    for e1 in s1.entries() {
        if e1.value > cutoff + slack {
            break;
        }
        for e2 in s2.entries() {
            if e1.value + e2.value > cutoff + slack {
                break;
            }
            let exact = e1.exact.add(&e2.exact);
            if exact.to_f64() <= cutoff {
                let mult = e1
                    .multiplicity
                    .checked_mul(e2.multiplicity)
                    .expect("product multiplicity fits u64");
                *map.entry(exact).or_insert(0) += mult;
            }
        }
    }
    Ok(EigenvalueStream::from_map(map, cutoff))
}

/// (1/n!) Integral over (0, inf) of (u / (2 sinh u))^n, the profile integral
/// behind the small-time heat coefficient of the second Heisenberg family.
/// Closed forms: pi^2/8 at n = 1, pi^2/48 at n = 2.
pub(crate) fn type2_profile_integral(n: usize) -> Result<f64> {
    let nf = n as f64;
    let f = move |u: f64| {
        if u < 1e-6 {
            // u / (2 sinh u) = (1/2)(1 - u^2/6 + O(u^4))
            (0.5 * (1.0 - u * u / 6.0)).powf(nf)
        } else {
            (u / (2.0 * u.sinh())).powf(nf)
        }
    };
    // Integrand <= (u e^{-u}/(1 - e^{-2}))^n, utterly negligible past u = 80.
    let q = quad::adaptive(&f, 0.0, 80.0, 1e-13, 4000)?;
    let mut fact = 1.0;
    for i in 1..=n {
        fact *= i as f64;
    }
    Ok(q.value / fact)
}

#[derive(Debug, Clone)]
enum ModelKind {
    Torus { n: usize },
    Heisenberg { n: usize },
    Transformed { base: Box<NilmanifoldModel>, coeff: ExactCoeff, power: u32 },
    Product { left: Box<NilmanifoldModel>, right: Box<NilmanifoldModel> },
}

/// A compact quotient together with a positive operator on it: enough data to
/// enumerate the spectrum, form heat traces, and know the expected growth
/// N(lambda) ~ W lambda^{Q/nu}.
#[derive(Debug, Clone)]
pub struct NilmanifoldModel {
    kind: ModelKind,
    group: GradedGroup,
    lattice: LatticeSubgroup,
    /// Homogeneous order of the operator in the grading of `group`.
    nu: f64,
    volume: f64,
    /// Heat kernel at the identity at time 1 (coefficient of t^{-Q/nu} in the
    /// small-time trace is volume * p1_zero), when a closed form is known.
    p1_zero: Option<f64>,
    label: String,
}

impl NilmanifoldModel {
    /// Flat torus R^n/Z^n with its Laplacian.
    pub fn torus(n: usize) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(Error::InvalidArgument("torus dimension must be in 1..=6".into()));
        }
        let group = GradedGroup::abelian(n);
        let lattice = LatticeSubgroup::torus(n, Rational::from_integer(1))?;
        let p1 = (4.0 * std::f64::consts::PI).powf(-(n as f64) / 2.0);
        Ok(NilmanifoldModel {
            kind: ModelKind::Torus { n },
            group,
            lattice,
            nu: 2.0,
            volume: 1.0,
            p1_zero: Some(p1),
            label: format!("torus(n={n})"),
        })
    }

    /// Heisenberg nilmanifold (canonical lattice, covolume 1/2) with its
    /// homogeneous sub-Laplacian.
    pub fn heisenberg(n: usize) -> Result<Self> {
        if n == 0 || n > 3 {
            return Err(Error::InvalidArgument("Heisenberg index must be in 1..=3".into()));
        }
        let pi = std::f64::consts::PI;
        let s_n = match n {
            1 => pi * pi / 8.0,
            2 => pi * pi / 48.0,
            _ => type2_profile_integral(n)?,
        };
        // volume * p1_zero = 2^{n+1} n! S_n / (4 pi)^{n+1}; volume = 1/2.
        let mut fact = 1.0;
        for i in 1..=n {
            fact *= i as f64;
        }
        let heat_coeff = 2f64.powi(n as i32 + 1) * fact * s_n / (4.0 * pi).powi(n as i32 + 1);
        let group = GradedGroup::heisenberg(n);
        let lattice = LatticeSubgroup::heisenberg_canonical(n);
        Ok(NilmanifoldModel {
            kind: ModelKind::Heisenberg { n },
            group,
            lattice,
            nu: 2.0,
            volume: 0.5,
            p1_zero: Some(heat_coeff / 0.5),
            label: format!("heisenberg(n={n})"),
        })
    }

    /// Same manifold, operator replaced by c Delta^l (spectrum c lambda^l).
    pub fn transform(&self, coeff: ExactCoeff, power: u32) -> Result<Self> {
        if coeff <= ExactCoeff::zero() {
            return Err(Error::InvalidArgument("transform coefficient must be positive".into()));
        }
        if power == 0 {
            return Err(Error::InvalidArgument("transform power must be >= 1".into()));
        }
        let c = coeff.to_f64().expect("finite rational");
        let pi = std::f64::consts::PI;
        let p1_zero = match &self.kind {
            // Spectral side of c (4 pi^2 |xi|^2)^l on R^n:
            // p_1(0) = c^{-n/(2l)} (2 pi^{n/2}/Gamma(n/2)) (2 pi)^{-n}
            //          Gamma(n/(2l)) / (2l).
            ModelKind::Torus { n } => {
                let nf = *n as f64;
                let lf = power as f64;
                Some(
                    c.powf(-nf / (2.0 * lf))
                        * (2.0 * pi.powf(nf / 2.0) / special::gamma(nf / 2.0))
                        * (2.0 * pi).powi(-(*n as i32))
                        * special::gamma(nf / (2.0 * lf))
                        / (2.0 * lf),
                )
            }
            // Second-family dominated trace: volume * p_1(0) =
            // c^{-(n+1)/l} 2^{n+1} Gamma((n+1)/l) / l (4 pi)^{-(n+1)} S_n.
            ModelKind::Heisenberg { n } => {
                let s_n = match n {
                    1 => pi * pi / 8.0,
                    2 => pi * pi / 48.0,
                    _ => type2_profile_integral(*n)?,
                };
                let lf = power as f64;
                let nf = *n as f64;
                let heat_coeff = c.powf(-(nf + 1.0) / lf)
                    * 2f64.powi(*n as i32 + 1)
                    * special::gamma((nf + 1.0) / lf)
                    / lf
                    * (4.0 * pi).powi(-(*n as i32 + 1))
                    * s_n;
                Some(heat_coeff / self.volume)
            }
            _ if power == 1 => {
                // Pure scaling: theta_{c Delta}(t) = theta(c t).
                self.p1_zero.map(|p| p * c.powf(-self.q_over_nu()))
            }
            _ => None,
        };
        Ok(NilmanifoldModel {
            kind: ModelKind::Transformed {
                base: Box::new(self.clone()),
                coeff,
                power,
            },
            group: self.group.clone(),
            lattice: self.lattice.clone(),
            nu: self.nu * power as f64,
            volume: self.volume,
            p1_zero,
            label: format!("transform(c={coeff}, l={power}) of {}", self.label),
        })
    }

    /// Direct product of two models carrying operators of the same
    /// homogeneous order (the operator on the product is the sum).
    pub fn direct_product(left: &Self, right: &Self) -> Result<Self> {
        if (left.nu - right.nu).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "product factors must carry operators of the same order".into(),
            ));
        }
        let group = GradedGroup::direct_product(left.group.clone(), right.group.clone());
        let lattice = LatticeSubgroup::direct_product(&left.lattice, &right.lattice);
        let p1_zero = match (left.p1_zero, right.p1_zero) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Ok(NilmanifoldModel {
            kind: ModelKind::Product {
                left: Box::new(left.clone()),
                right: Box::new(right.clone()),
            },
            group,
            lattice,
            nu: left.nu,
            volume: left.volume * right.volume,
            p1_zero,
            label: format!("product({}, {})", left.label, right.label),
        })
    }

    /// Multiply every weight of the grading by m. The operator and spectrum
    /// are untouched; Q and nu both scale by m, so Q/nu is invariant.
    pub fn reweight(&self, m: u32) -> Result<Self> {
        let group = self.group.reweight(m)?;
        let lattice = LatticeSubgroup::new(group.clone(), self.lattice.scales().to_vec())?;
        Ok(NilmanifoldModel {
            kind: self.kind.clone(),
            group,
            lattice,
            nu: self.nu * m as f64,
            volume: self.volume,
            p1_zero: self.p1_zero,
            label: format!("reweight(m={m}) of {}", self.label),
        })
    }

    pub fn group(&self) -> &GradedGroup {
        &self.group
    }

    pub fn lattice(&self) -> &LatticeSubgroup {
        &self.lattice
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn q_over_nu(&self) -> f64 {
        self.group.homogeneous_dim() as f64 / self.nu
    }

    pub fn p1_zero(&self) -> Option<f64> {
        self.p1_zero
    }

    /// Coefficient of t^{-Q/nu} in the small-time heat trace.
    pub fn heat_coefficient(&self) -> Option<f64> {
        self.p1_zero.map(|p| p * self.volume)
    }

    /// Coefficient W of the eigenvalue growth N(lambda) ~ W lambda^{Q/nu}:
    /// W = volume p_1(0) / Gamma(Q/nu + 1).
    pub fn weyl_constant(&self) -> Option<f64> {
        self.heat_coefficient()
            .map(|h| h / special::gamma(self.q_over_nu() + 1.0))
    }

    /// Growth main term W lambda^{Q/nu}.
    pub fn weyl_main_term(&self, lambda: f64) -> Result<f64> {
        let w = self.weyl_constant().ok_or_else(|| {
            Error::Unsupported(format!("no closed heat coefficient for {}", self.label))
        })?;
        Ok(w * lambda.powf(self.q_over_nu()))
    }

    pub fn spectrum(&self, cutoff: f64) -> Result<EigenvalueStream> {
        check_cutoff(cutoff)?;
        match &self.kind {
            ModelKind::Torus { n } => torus_stream(*n, cutoff),
            ModelKind::Heisenberg { n } => heisenberg_stream(*n, cutoff),
            ModelKind::Transformed { base, coeff, power } => {
                let c = coeff.to_f64().expect("finite rational");
                let base_cut =
                    (cutoff / c).powf(1.0 / *power as f64) * (1.0 + 1e-9) + 1e-9;
                let stream = base.spectrum(base_cut)?;
                Ok(transform_spectrum(&stream, *coeff, *power)?.truncated(cutoff))
            }
            ModelKind::Product { left, right } => {
                let s1 = left.spectrum(cutoff)?;
                let s2 = right.spectrum(cutoff)?;
                product_spectrum(&s1, &s2, cutoff)
            }
        }
    }
}
