//! Schwartz-class kernels on graded groups, dilation scaling, periodisation
//! over a lattice, and quadrature traces on the quotient.
//!
//! Every kernel carries a certified Gaussian envelope
//! |kappa(x)| <= prefactor * exp(-rate * |x|^2) in the quasi-norm, from which
//! polynomial decay certificates (C_N, N) with
//! |kappa(x)| <= C_N (1 + |x|)^{-N} follow in closed form. Periodisation
//! tails are bounded through the envelope and dyadic shell counts, using the
//! conjugation bound |x^{-1} gamma x|^2 >= |gamma|^2 - kappa |x| |gamma|
//! (kappa = 0 on abelian groups, where conjugation is trivial).
//!
//! Conjugations under the trace quadrature are computed exactly in rational
//! arithmetic before the (float) kernel evaluation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::group::{GradedGroup, GroupElement, Rational, RationalElement};
use crate::lattice::{FundamentalDomainGrid, LatticeSubgroup};
use crate::sum::pairwise_sum;

/// |kappa(x)| <= prefactor * exp(-rate * |x|^2), |.| the group quasi-norm.
#[derive(Debug, Clone, Copy)]
pub struct QuasiNormEnvelope {
    pub prefactor: f64,
    pub rate: f64,
}

impl QuasiNormEnvelope {
    pub fn bound(&self, norm: f64) -> f64 {
        self.prefactor * (-self.rate * norm * norm).exp()
    }

    /// Smallest C_N with prefactor e^{-rate u^2} <= C_N (1+u)^{-N}: the
    /// maximiser of (1+u)^N e^{-rate u^2} is u* = (-1 + sqrt(1 + 2N/rate))/2.
    pub fn polynomial_constant(&self, n_exp: f64) -> f64 {
        let r = self.rate;
        let u = (-1.0 + (1.0 + 2.0 * n_exp / r).sqrt()) / 2.0;
        self.prefactor * (1.0 + u).powf(n_exp) * (-r * u * u).exp()
    }
}

/// |kappa(x)| <= prefactor * prod_j exp(-rates[j] * x_j^2) in coordinates.
#[derive(Debug, Clone)]
struct CoordinateEnvelope {
    prefactor: f64,
    rates: Vec<f64>,
}

/// sup over u >= 0 of (u^2 - u^{2w}): positive only for u < 1, attained at
/// u^2 = w^{-1/(w-1)}. Quantifies how far the quasi-norm square can exceed
/// the largest coordinate square for high-weight coordinates.
fn norm_square_deficit(w: u32) -> f64 {
    if w <= 1 {
        return 0.0;
    }
    let wf = w as f64;
    let u2 = wf.powf(-1.0 / (wf - 1.0));
    u2 - u2.powf(wf)
}

#[derive(Debug, Clone)]
enum KernelKind {
    /// Euclidean heat kernel (4 pi t)^{-n/2} exp(-|x|^2/(4t)) on R^n.
    GaussianHeat { n: usize, t: f64 },
    /// exp(-|x|_E^2) in exponential coordinates on H_n, a synthetic Schwartz
    /// test function (the group heat kernel itself is not needed).
    HeisenbergSchwartz { n: usize },
    Combination { terms: Vec<(f64, Kernel)> },
    Scaled { base: Box<Kernel>, epsilon: f64 },
    /// x -> base(x^{-1}).
    Adjoint { base: Box<Kernel> },
    /// Midpoint-grid group convolution base * adjoint(base).
    NumericConvolution {
        base: Box<Kernel>,
        axes: Vec<Vec<f64>>,
        cell: f64,
        at_zero: f64,
        envelope: QuasiNormEnvelope,
        pointwise_error: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Kernel {
    group: GradedGroup,
    kind: KernelKind,
    label: String,
}

impl Kernel {
    /// Euclidean heat kernel p_t on the abelian group R^n.
    pub fn gaussian_heat(n: usize, t: f64) -> Result<Kernel> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("heat kernel needs t > 0, got {t}")));
        }
        Ok(Kernel {
            group: GradedGroup::abelian(n),
            kind: KernelKind::GaussianHeat { n, t },
            label: format!("gaussian_heat(n={n}, t={t})"),
        })
    }

    /// Synthetic Schwartz function exp(-|x|_E^2) on the Heisenberg group H_n.
    pub fn heisenberg_schwartz(n: usize) -> Result<Kernel> {
        if n == 0 {
            return Err(Error::InvalidArgument("Heisenberg index must be >= 1".into()));
        }
        Ok(Kernel {
            group: GradedGroup::heisenberg(n),
            kind: KernelKind::HeisenbergSchwartz { n },
            label: format!("heisenberg_schwartz(n={n})"),
        })
    }

    pub fn linear_combination(terms: &[(f64, Kernel)]) -> Result<Kernel> {
        let Some(((_, first), _)) = terms.split_first() else {
            return Err(Error::InvalidArgument("empty kernel combination".into()));
        };
        for (_, k) in terms {
            if k.group != first.group {
                return Err(Error::InvalidArgument(
                    "all kernels in a combination must share the group".into(),
                ));
            }
        }
        Ok(Kernel {
            group: first.group.clone(),
            kind: KernelKind::Combination { terms: terms.to_vec() },
            label: "linear_combination".into(),
        })
    }

    /// kappa^(eps)(x) = eps^{-Q} kappa(D_{1/eps} x).
    pub fn scale(&self, epsilon: f64) -> Result<Kernel> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("scale needs eps > 0, got {epsilon}")));
        }
        Ok(Kernel {
            group: self.group.clone(),
            kind: KernelKind::Scaled { base: Box::new(self.clone()), epsilon },
            label: format!("scale(eps={epsilon}) of {}", self.label),
        })
    }

    /// kappa~(x) = kappa(x^{-1}) (kernels here are real-valued).
    pub fn adjoint(&self) -> Kernel {
        Kernel {
            group: self.group.clone(),
            kind: KernelKind::Adjoint { base: Box::new(self.clone()) },
            label: format!("adjoint of {}", self.label),
        }
    }

    pub fn group(&self) -> &GradedGroup {
        &self.group
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &GroupElement) -> Result<f64> {
        if x.coords.len() != self.group.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.group.dim(),
                got: x.coords.len(),
            });
        }
        Ok(match &self.kind {
            KernelKind::GaussianHeat { n, t } => {
                let sq: f64 = x.coords.iter().map(|c| c * c).sum();
                (4.0 * PI * t).powf(-(*n as f64) / 2.0) * (-sq / (4.0 * t)).exp()
            }
            KernelKind::HeisenbergSchwartz { .. } => {
                let sq: f64 = x.coords.iter().map(|c| c * c).sum();
                (-sq).exp()
            }
            KernelKind::Combination { terms } => {
                let mut acc = 0.0;
                for (a, k) in terms {
                    acc += a * k.eval(x)?;
                }
                acc
            }
            KernelKind::Scaled { base, epsilon } => {
                let q = self.group.homogeneous_dim() as f64;
                let y = self.group.dilate(1.0 / epsilon, x)?;
                epsilon.powf(-q) * base.eval(&y)?
            }
            KernelKind::Adjoint { base } => base.eval(&self.group.inverse(x)?)?,
            KernelKind::NumericConvolution { base, axes, cell, .. } => {
                numeric_convolution_eval(base, axes, *cell, x)?
            }
        })
    }

    pub fn value_at_zero(&self) -> f64 {
        match &self.kind {
            KernelKind::NumericConvolution { at_zero, .. } => *at_zero,
            _ => self
                .eval(&self.group.identity())
                .expect("identity evaluation cannot fail"),
        }
    }

    /// Certified coordinate-wise Gaussian bound, when the kernel structure
    /// exposes one.
    fn coordinate_envelope(&self) -> Result<CoordinateEnvelope> {
        match &self.kind {
            KernelKind::GaussianHeat { n, t } => Ok(CoordinateEnvelope {
                prefactor: (4.0 * PI * t).powf(-(*n as f64) / 2.0),
                rates: vec![1.0 / (4.0 * t); *n],
            }),
            KernelKind::HeisenbergSchwartz { n } => Ok(CoordinateEnvelope {
                prefactor: 1.0,
                rates: vec![1.0; 2 * n + 1],
            }),
            KernelKind::Combination { terms } => {
                let mut prefactor = 0.0;
                let mut rates = vec![f64::INFINITY; self.group.dim()];
                for (a, k) in terms {
                    let env = k.coordinate_envelope()?;
                    prefactor += a.abs() * env.prefactor;
                    for (r, e) in rates.iter_mut().zip(env.rates) {
                        *r = r.min(e);
                    }
                }
                Ok(CoordinateEnvelope { prefactor, rates })
            }
            KernelKind::Scaled { base, epsilon } => {
                let env = base.coordinate_envelope()?;
                let q = self.group.homogeneous_dim() as f64;
                let rates = env
                    .rates
                    .iter()
                    .zip(self.group.weights())
                    .map(|(r, w)| r * epsilon.powi(-2 * (*w as i32)))
                    .collect();
                Ok(CoordinateEnvelope {
                    prefactor: env.prefactor * epsilon.powf(-q),
                    rates,
                })
            }
            KernelKind::Adjoint { base } => base.coordinate_envelope(),
            KernelKind::NumericConvolution { .. } => Err(Error::Unsupported(
                "numeric convolutions carry only a quasi-norm envelope".into(),
            )),
        }
    }

    /// Certified quasi-norm envelope. For coordinate-Gaussian kernels:
    /// sum_j r_j x_j^2 >= r_min max_j x_j^2 >= r_min (u^2 - deficit) with u
    /// the quasi-norm, so prefactor picks up e^{r_min * deficit}.
    pub fn envelope(&self) -> Result<QuasiNormEnvelope> {
        if let KernelKind::NumericConvolution { envelope, .. } = &self.kind {
            return Ok(*envelope);
        }
        let env = self.coordinate_envelope()?;
        let rate = env.rates.iter().copied().fold(f64::INFINITY, f64::min);
        let deficit = norm_square_deficit(self.group.max_weight());
        Ok(QuasiNormEnvelope {
            prefactor: env.prefactor * (rate * deficit).exp(),
            rate,
        })
    }

    /// Polynomial decay certificates (C_N, N) derived from the envelope.
    pub fn decay_certificates(&self, orders: &[f64]) -> Result<Vec<(f64, f64)>> {
        let env = self.envelope()?;
        Ok(orders
            .iter()
            .map(|n| (env.polynomial_constant(*n), *n))
            .collect())
    }

    /// Decay orders exceeding the lattice convergence threshold step * dim.
    pub fn default_decay_orders(&self) -> Vec<f64> {
        let base = (self.group.max_weight() as f64) * (self.group.dim() as f64);
        vec![base + 1.0, base + 2.0, base + 4.0, base + 8.0]
    }

    /// Pointwise evaluation-error budget (zero for closed-form kernels).
    pub fn pointwise_error(&self) -> f64 {
        match &self.kind {
            KernelKind::NumericConvolution { pointwise_error, .. } => *pointwise_error,
            KernelKind::Combination { terms } => terms
                .iter()
                .map(|(a, k)| a.abs() * k.pointwise_error())
                .sum(),
            KernelKind::Scaled { base, epsilon } => {
                base.pointwise_error() * epsilon.powf(-(self.group.homogeneous_dim() as f64))
            }
            KernelKind::Adjoint { base } => base.pointwise_error(),
            _ => 0.0,
        }
    }

    /// kappa * kappa~ together with a pointwise evaluation-error budget.
    /// Closed form where the semigroup law applies (Gaussians, and images of
    /// such under scaling); midpoint-grid group convolution otherwise.
    pub fn self_convolution(&self) -> Result<ConvolutionSquare> {
        match &self.kind {
            KernelKind::GaussianHeat { n, t } => Ok(ConvolutionSquare {
                kernel: Kernel::gaussian_heat(*n, 2.0 * t)?,
                pointwise_error: 0.0,
            }),
            // (f * f~)^(eps) = f^(eps) * (f^(eps))~.
            KernelKind::Scaled { base, epsilon } => {
                let inner = base.self_convolution()?;
                let q = self.group.homogeneous_dim() as f64;
                Ok(ConvolutionSquare {
                    kernel: inner.kernel.scale(*epsilon)?,
                    pointwise_error: inner.pointwise_error * epsilon.powf(-q),
                })
            }
            // Our kernels are symmetric (even in coordinates), so the adjoint
            // has the same convolution square.
            KernelKind::Adjoint { base } => base.self_convolution(),
            KernelKind::NumericConvolution { .. } => Err(Error::Unsupported(
                "nested numerical convolutions are not supported".into(),
            )),
            _ => numeric_convolution(self),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvolutionSquare {
    pub kernel: Kernel,
    pub pointwise_error: f64,
}

/// Haar integral of exp(-sigma |y|^2) over the group: product over
/// coordinates of w Gamma(w/2) sigma^{-w/2} (w the coordinate weight).
fn envelope_haar_mass(group: &GradedGroup, sigma: f64) -> f64 {
    group
        .weights()
        .iter()
        .map(|w| {
            let wf = *w as f64;
            wf * crate::special::gamma(wf / 2.0) * sigma.powf(-wf / 2.0)
        })
        .product()
}

fn numeric_convolution_eval(
    base: &Kernel,
    axes: &[Vec<f64>],
    cell: f64,
    x: &GroupElement,
) -> Result<f64> {
    let group = base.group();
    let xinv = group.inverse(x)?;
    let dim = axes.len();
    let mut idx = vec![0usize; dim];
    let mut terms = Vec::with_capacity(axes.iter().map(|a| a.len()).product());
    loop {
        let y = GroupElement::new((0..dim).map(|j| axes[j][idx[j]]).collect());
        let shifted = group.multiply(&xinv, &y)?;
        terms.push(base.eval(&y)? * base.eval(&shifted)?);
        // Odometer increment.
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(pairwise_sum(&terms) * cell);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Builds the midpoint-grid convolution square of `base`. The y-box is cut
/// where the coordinate envelope falls below e^{-46} of its peak; spacing is
/// 0.35 / sqrt(rate) per axis. Midpoint rules on analytic Gaussians alias
/// like exp(-pi^2 / (a h^2)) with a the integrand's quadratic rate along the
/// axis; the budget takes a = 4 rate, which absorbs the coordinate coupling
/// the group law introduces for conjugation points with |x|_E <= 2 sqrt(2)
/// (any fundamental-domain point).
fn numeric_convolution(base: &Kernel) -> Result<ConvolutionSquare> {
    let env = base.coordinate_envelope()?;
    let group = base.group().clone();
    let mut axes = Vec::with_capacity(env.rates.len());
    let mut cell = 1.0;
    let mut alias_rel = 0.0;
    for r in &env.rates {
        if !(*r > 0.0) {
            return Err(Error::CertificateFailure(
                "convolution needs strictly positive decay rates".into(),
            ));
        }
        let half_width = (46.0 / r).sqrt();
        let spacing = 0.35 / r.sqrt();
        let count = (2.0 * half_width / spacing).ceil() as usize;
        let width = 2.0 * half_width / count as f64;
        cell *= width;
        alias_rel += 3.0 * (-PI * PI / (4.0 * r * width * width)).exp();
        axes.push(
            (0..count)
                .map(|i| -half_width + (i as f64 + 0.5) * width)
                .collect(),
        );
    }
    // Truncation: outside the box, |integrand| <= sup|kappa| * envelope(y);
    // the complement is covered by the slabs |y_j| > L_j.
    let sup = env.prefactor;
    let mut truncation = 0.0;
    for (j, r) in env.rates.iter().enumerate() {
        let l = (46.0 / r).sqrt();
        let slab = (-r * l * l).exp() / (r * l); // 2 * int_L^inf e^{-r u^2} du bound
        let others: f64 = env
            .rates
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, ri)| (PI / ri).sqrt())
            .product();
        truncation += sup * sup * slab * others;
    }
    // Quasi-norm envelope of the convolution by the splitting
    // max(|y|, |x^{-1}y|) >= |x| / (2C):
    let quasi = base.envelope()?;
    let c = group.triangle_constant();
    let conv_env = QuasiNormEnvelope {
        prefactor: quasi.prefactor * quasi.prefactor
            * envelope_haar_mass(&group, quasi.rate / 2.0),
        rate: quasi.rate / (8.0 * c * c),
    };
    let discretisation = alias_rel * conv_env.prefactor;
    let kind = KernelKind::NumericConvolution {
        base: Box::new(base.clone()),
        axes: axes.clone(),
        cell,
        at_zero: 0.0, // fixed below
        envelope: conv_env,
        pointwise_error: truncation + discretisation,
    };
    let mut kernel = Kernel {
        group: group.clone(),
        kind,
        label: format!("self-convolution of {}", base.label()),
    };
    let at_zero = numeric_convolution_eval(base, &axes, cell, &group.identity())?;
    if let KernelKind::NumericConvolution { at_zero: slot, .. } = &mut kernel.kind {
        *slot = at_zero;
    }
    Ok(ConvolutionSquare {
        kernel,
        pointwise_error: truncation + discretisation,
    })
}

/// Certified sum of exp(-beta |gamma|^2) over lattice points with
/// |gamma| > r, by dyadic shells and the box point-count bound.
pub fn gaussian_lattice_tail(lattice: &LatticeSubgroup, beta: f64, r: f64) -> Result<f64> {
    shifted_gaussian_tail(lattice, beta, 0.0, r)
}

/// Sum of exp(-beta (|gamma|^2 - a |gamma|)) over |gamma| > r, valid for
/// r >= 2a so the exponent is increasing across every shell.
fn shifted_gaussian_tail(lattice: &LatticeSubgroup, beta: f64, a: f64, r: f64) -> Result<f64> {
    if !(beta > 0.0) || !(r > 0.0) || r < 2.0 * a {
        return Err(Error::InvalidArgument(
            "gaussian lattice tail needs beta > 0 and r >= max(2a, 0+)".into(),
        ));
    }
    let mut total = 0.0;
    for k in 0..64 {
        let shell_r = 2f64.powi(k) * r;
        let term =
            lattice.count_bound(2.0 * shell_r) * (-beta * (shell_r - a) * shell_r).exp();
        total += term;
        if term < 1e-300 {
            return Ok(total);
        }
    }
    Err(Error::CertificateFailure(
        "gaussian lattice tail did not close within 64 dyadic shells".into(),
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodisedValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Tail of the periodised sum beyond quasi-norm `r_cut`, at conjugation
/// point of norm `x_norm`. Conjugation can lower quasi-norms by at most
/// |conj|^2 >= |gamma|^2 - a |gamma| with a = kappa |x|; the cutoff must
/// reach 2a so the lowered exponent still grows across the tail shells.
fn periodisation_tail(
    kernel: &Kernel,
    lattice: &LatticeSubgroup,
    x_norm: f64,
    r_cut: f64,
) -> Result<f64> {
    let shift = kernel.group().conjugation_shift_coefficient() * x_norm;
    if shift > 0.0 && r_cut < 2.0 * shift {
        return Err(Error::CutoffInsufficient {
            cutoff: r_cut,
            needed: 2.0 * shift,
        });
    }
    let env = kernel.envelope()?;
    let gaussian_route =
        env.prefactor * shifted_gaussian_tail(lattice, env.rate, shift, r_cut)?;
    let mut best = gaussian_route;
    // Polynomial alternative: past |gamma| >= 2a the shift costs at most a
    // factor 2 on the squared norm, so (1+|conj|)^{-N} <= 2^{N/2} (1+|gamma|)^{-N}.
    let loss = if shift > 0.0 { std::f64::consts::SQRT_2 } else { 1.0 };
    for n in kernel.default_decay_orders() {
        let c_n = env.polynomial_constant(n);
        if let Ok(bound) = lattice.tail_sum_bound(n, r_cut) {
            best = best.min(c_n * loss.powf(n) * bound);
        }
    }
    Ok(best)
}

fn diag_over_ball(
    kernel: &Kernel,
    lattice: &LatticeSubgroup,
    ball: &[RationalElement],
    x: &RationalElement,
) -> Result<f64> {
    let group = lattice.group();
    let mut terms = Vec::with_capacity(ball.len());
    for gamma in ball {
        let conj = group.conjugate_generic::<Rational>(&x.coords, &gamma.coords)?;
        terms.push(kernel.eval(&RationalElement::new(conj).to_float())?);
    }
    Ok(pairwise_sum(&terms))
}

/// Sum of kappa(x^{-1} gamma x) over lattice points of quasi-norm <= r_cut,
/// with a certified bound for the rest. Conjugation is exact (rational x).
pub fn periodised_diag(
    kernel: &Kernel,
    lattice: &LatticeSubgroup,
    x: &RationalElement,
    r_cut: f64,
) -> Result<PeriodisedValue> {
    if kernel.group() != lattice.group() {
        return Err(Error::InvalidArgument(
            "kernel and lattice live on different groups".into(),
        ));
    }
    let ball = lattice.ball(r_cut)?;
    let value = diag_over_ball(kernel, lattice, &ball, x)?;
    let x_norm = lattice.group().quasi_norm_rational(x)?;
    let tail = periodisation_tail(kernel, lattice, x_norm, r_cut)?
        + kernel.pointwise_error() * ball.len() as f64;
    Ok(PeriodisedValue { value, tail_bound: tail })
}

/// Float-point variant (for arbitrary sample points); conjugation in f64.
pub fn periodised_diag_at(
    kernel: &Kernel,
    lattice: &LatticeSubgroup,
    x: &GroupElement,
    r_cut: f64,
) -> Result<PeriodisedValue> {
    if kernel.group() != lattice.group() {
        return Err(Error::InvalidArgument(
            "kernel and lattice live on different groups".into(),
        ));
    }
    let group = lattice.group();
    let ball = lattice.ball(r_cut)?;
    let mut terms = Vec::with_capacity(ball.len());
    for gamma in &ball {
        let conj = group.conjugate_generic::<f64>(&x.coords, &gamma.to_float().coords)?;
        terms.push(kernel.eval(&GroupElement::new(conj))?);
    }
    let value = pairwise_sum(&terms);
    let x_norm = group.quasi_norm(x)?;
    let tail = periodisation_tail(kernel, lattice, x_norm, r_cut)?
        + kernel.pointwise_error() * ball.len() as f64;
    Ok(PeriodisedValue { value, tail_bound: tail })
}

#[derive(Debug, Clone, Copy)]
pub struct TraceValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// Quadrature of the periodised diagonal over a fundamental-domain grid:
/// Tr = integral over M of sum_gamma kappa(x^{-1} gamma x). The error
/// estimate combines the gamma-tail bound, the grid-refinement delta
/// (resolution doubled), and any pointwise evaluation budget.
pub fn periodised_trace(
    kernel: &Kernel,
    lattice: &LatticeSubgroup,
    grid: &FundamentalDomainGrid,
    r_cut: f64,
) -> Result<TraceValue> {
    if kernel.group() != lattice.group() {
        return Err(Error::InvalidArgument(
            "kernel and lattice live on different groups".into(),
        ));
    }
    if grid.is_empty() || grid.nodes()[0].coords.len() != lattice.group().dim() {
        return Err(Error::InvalidArgument("grid does not conform to the lattice".into()));
    }
    if (grid.covolume() - lattice.covolume()).abs() > 1e-12 * lattice.covolume() {
        return Err(Error::InvalidArgument("grid does not conform to the lattice".into()));
    }
    let ball = lattice.ball(r_cut)?;
    let quadrature = |g: &FundamentalDomainGrid| -> Result<f64> {
        let mut vals = Vec::with_capacity(g.len());
        for node in g.nodes() {
            vals.push(diag_over_ball(kernel, lattice, &ball, node)?);
        }
        Ok(pairwise_sum(&vals) * g.weight())
    };
    let value = quadrature(grid)?;
    let refined = lattice.fundamental_domain_grid(grid.resolution() * 2)?;
    let refinement_delta = (quadrature(&refined)? - value).abs();
    let corner = lattice.box_corner_norm();
    let tail = periodisation_tail(kernel, lattice, corner, r_cut)?;
    let volume = lattice.covolume();
    let error_estimate = refinement_delta
        + volume * tail
        + volume * kernel.pointwise_error() * ball.len() as f64;
    Ok(TraceValue { value, error_estimate })
}

/// Hilbert-Schmidt norm squared of the periodised operator: the trace of the
/// periodisation of kappa * kappa~.
pub fn hs_norm_squared(
    kernel: &Kernel,
    lattice: &LatticeSubgroup,
    grid: &FundamentalDomainGrid,
    r_cut: f64,
) -> Result<TraceValue> {
    let conv = kernel.self_convolution()?;
    periodised_trace(&conv.kernel, lattice, grid, r_cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::NilmanifoldModel;
    use crate::theta::theta_torus_dual;
    use approx::assert_relative_eq;
    use num_rational::Ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn elem(coords: &[f64]) -> GroupElement {
        GroupElement::new(coords.to_vec())
    }

    #[test]
    fn gaussian_values_and_normalisation() {
        let k = Kernel::gaussian_heat(1, 1.0).unwrap();
        assert_relative_eq!(
            k.value_at_zero(),
            (4.0 * PI).powf(-0.5),
            max_relative = 1e-15
        );
        // Midpoint quadrature of p_t over [-20 sqrt(t), 20 sqrt(t)].
        for &t in &[0.25, 1.0, 3.0] {
            let kt = Kernel::gaussian_heat(1, t).unwrap();
            let l = 20.0 * t.sqrt();
            let m = 640;
            let h = 2.0 * l / m as f64;
            let total: f64 = (0..m)
                .map(|i| kt.eval(&elem(&[-l + (i as f64 + 0.5) * h])).unwrap() * h)
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "t = {t}: mass {total}");
        }
    }

    #[test]
    fn gaussian_scaling_identity() {
        // p_{r^2 t}(r x) = r^{-n} p_t(x) at (r, t, x) = (2, 1, 0.3).
        let p1 = Kernel::gaussian_heat(1, 1.0).unwrap();
        let p4 = Kernel::gaussian_heat(1, 4.0).unwrap();
        let lhs = p4.eval(&elem(&[0.6])).unwrap();
        let rhs = 0.5 * p1.eval(&elem(&[0.3])).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
    }

    #[test]
    fn scaled_kernel_value_at_zero() {
        let p = Kernel::gaussian_heat(1, 1.0).unwrap();
        let s1 = p.scale(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = elem(&[rng.gen_range(-3.0..3.0)]);
            assert_relative_eq!(s1.eval(&x).unwrap(), p.eval(&x).unwrap(), max_relative = 1e-15);
        }
        let half = p.scale(0.5).unwrap();
        assert_relative_eq!(
            half.value_at_zero(),
            2.0 * (4.0 * PI).powf(-0.5),
            max_relative = 1e-14
        );
        // Heisenberg Q = 4: eps = 1/2 multiplies kappa(0) by 16.
        let hk = Kernel::heisenberg_schwartz(1).unwrap();
        let hs = hk.scale(0.5).unwrap();
        assert_relative_eq!(hs.value_at_zero(), 16.0, max_relative = 1e-14);
    }

    #[test]
    fn envelopes_hold_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let cases = vec![
            Kernel::gaussian_heat(1, 1.0).unwrap(),
            Kernel::gaussian_heat(2, 0.3).unwrap(),
            Kernel::heisenberg_schwartz(1).unwrap(),
            Kernel::heisenberg_schwartz(1).unwrap().scale(0.4).unwrap(),
            Kernel::linear_combination(&[
                (0.7, Kernel::gaussian_heat(1, 1.0).unwrap()),
                (-0.2, Kernel::gaussian_heat(1, 0.5).unwrap()),
            ])
            .unwrap(),
        ];
        for k in &cases {
            let group = k.group().clone();
            let env = k.envelope().unwrap();
            let certs = k.decay_certificates(&k.default_decay_orders()).unwrap();
            for _ in 0..1000 {
                let coords: Vec<f64> = group
                    .weights()
                    .iter()
                    .map(|w| {
                        let lim = 50f64.powi(*w as i32);
                        rng.gen_range(-lim..lim)
                    })
                    .collect();
                let x = elem(&coords);
                let u = group.quasi_norm(&x).unwrap();
                let v = k.eval(&x).unwrap().abs();
                assert!(v <= env.bound(u) * (1.0 + 1e-12), "envelope fails at {coords:?}");
                for (c_n, n) in &certs {
                    assert!(v <= c_n * (1.0 + u).powf(-n) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn periodised_diag_matches_jacobi_oracle() {
        // Sum_j p_t(j) equals the eigenvalue-side theta by modular duality.
        let k = Kernel::gaussian_heat(1, 1.0).unwrap();
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let x0 = lat.group().identity_rational();
        let d = periodised_diag(&k, &lat, &x0, 14.0).unwrap();
        let oracle = theta_torus_dual(1, 1.0).unwrap();
        assert!((d.value - oracle).abs() <= d.tail_bound + 1e-12);
        assert!(d.tail_bound < 1e-12);
    }

    #[test]
    fn tight_ball_gives_kernel_at_zero() {
        let k = Kernel::gaussian_heat(1, 1.0).unwrap();
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let x0 = lat.group().identity_rational();
        let d = periodised_diag(&k, &lat, &x0, 0.5).unwrap();
        assert_relative_eq!(d.value, k.value_at_zero(), max_relative = 1e-15);
    }

    #[test]
    fn doubling_cutoff_stays_within_tail_bound() {
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        let k = Kernel::heisenberg_schwartz(1).unwrap();
        let x = RationalElement::new(vec![
            Ratio::new(1, 8),
            Ratio::new(-3, 16),
            Ratio::new(1, 16),
        ]);
        let d1 = periodised_diag(&k, &lat, &x, 3.0).unwrap();
        let d2 = periodised_diag(&k, &lat, &x, 6.0).unwrap();
        assert!((d2.value - d1.value).abs() <= d1.tail_bound);
        assert!(d2.tail_bound < d1.tail_bound);
    }

    #[test]
    fn gamma_invariance_of_the_diagonal() {
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        let k = Kernel::heisenberg_schwartz(1).unwrap();
        let group = lat.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let shifts = lat.ball(2.0).unwrap();
        for _ in 0..5 {
            let x = RationalElement::new(vec![
                Ratio::new(rng.gen_range(-32i64..32), 64),
                Ratio::new(rng.gen_range(-32i64..32), 64),
                Ratio::new(rng.gen_range(-16i64..16), 64),
            ]);
            let d = periodised_diag(&k, &lat, &x, 12.0).unwrap();
            let gamma0 = &shifts[rng.gen_range(0..shifts.len())];
            let shifted = group.multiply_rational(gamma0, &x).unwrap();
            // Shifted conjugation points reach quasi-norm 2.5, so the additive
            // tail bound needs the cutoff past 2 * 2n * 2.5 = 10.
            let d2 = periodised_diag(&k, &lat, &shifted, 12.0).unwrap();
            assert!(
                (d.value - d2.value).abs() <= d.tail_bound + d2.tail_bound + 1e-12,
                "x = {x:?}, gamma0 = {gamma0:?}"
            );
        }
    }

    #[test]
    fn torus_trace_equals_heat_trace() {
        let k = Kernel::gaussian_heat(1, 1.0).unwrap();
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let grid = lat.fundamental_domain_grid(4).unwrap();
        let tr = periodised_trace(&k, &lat, &grid, 10.0).unwrap();
        let model = NilmanifoldModel::torus(1).unwrap();
        let stream = model.spectrum(3000.0).unwrap();
        let theta = crate::theta::heat_trace(&stream, 0.5, 1.0).unwrap();
        assert!((tr.value - theta.value).abs() < 1e-9);
        assert!(tr.error_estimate < 1e-9);
    }

    #[test]
    fn trace_is_linear_in_the_kernel() {
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let grid = lat.fundamental_domain_grid(3).unwrap();
        let k1 = Kernel::gaussian_heat(1, 0.7).unwrap();
        let k2 = Kernel::gaussian_heat(1, 1.3).unwrap();
        let combo = Kernel::linear_combination(&[(0.6, k1.clone()), (-1.7, k2.clone())]).unwrap();
        let t1 = periodised_trace(&k1, &lat, &grid, 9.0).unwrap().value;
        let t2 = periodised_trace(&k2, &lat, &grid, 9.0).unwrap().value;
        let tc = periodised_trace(&combo, &lat, &grid, 9.0).unwrap().value;
        assert_relative_eq!(tc, 0.6 * t1 - 1.7 * t2, max_relative = 1e-12);
    }

    #[test]
    fn heisenberg_trace_positive_excess_and_small_error() {
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        let k = Kernel::heisenberg_schwartz(1).unwrap();
        let grid = lat.fundamental_domain_grid(3).unwrap();
        let tr = periodised_trace(&k, &lat, &grid, 5.0).unwrap();
        // Identity term alone contributes vol * kappa(0) = 1/2; the rest is
        // positive.
        assert!(tr.value > 0.5);
        assert!(tr.error_estimate < 0.05 * tr.value);
    }

    #[test]
    fn hs_norm_matches_double_time_trace() {
        // ||T_{p_t}||_HS^2 = theta(2t) on the torus.
        let k = Kernel::gaussian_heat(1, 1.0).unwrap();
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let grid = lat.fundamental_domain_grid(4).unwrap();
        let hs = hs_norm_squared(&k, &lat, &grid, 20.0).unwrap();
        let oracle = theta_torus_dual(1, 2.0).unwrap();
        assert!((hs.value - oracle).abs() < 1e-9);
        assert!(hs.value >= 0.0);
    }

    #[test]
    fn hs_scaling_ratio_doubles_at_small_time() {
        // At t = 0.01 the off-lattice corrections are ~1e-5, so halving eps
        // doubles the HS norm to within far better than 1%.
        let t = 0.01;
        let k = Kernel::gaussian_heat(1, t).unwrap();
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let grid = lat.fundamental_domain_grid(2).unwrap();
        let base = hs_norm_squared(&k, &lat, &grid, 8.0).unwrap().value;
        let scaled = hs_norm_squared(&k.scale(0.5).unwrap(), &lat, &grid, 8.0)
            .unwrap()
            .value;
        assert!((scaled / base - 2.0).abs() < 0.01, "ratio {}", scaled / base);
    }

    #[test]
    fn hs_invariant_under_adjoint() {
        let k = Kernel::gaussian_heat(1, 0.4).unwrap();
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let grid = lat.fundamental_domain_grid(3).unwrap();
        let a = hs_norm_squared(&k, &lat, &grid, 9.0).unwrap().value;
        let b = hs_norm_squared(&k.adjoint(), &lat, &grid, 9.0).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn numeric_convolution_matches_gaussian_semigroup() {
        // Forcing the numeric path through a one-term combination; the
        // closed form is p_{2t}.
        let t = 0.25;
        let p = Kernel::gaussian_heat(1, t).unwrap();
        let forced = Kernel::linear_combination(&[(1.0, p)]).unwrap();
        let conv = forced.self_convolution().unwrap();
        let closed = Kernel::gaussian_heat(1, 2.0 * t).unwrap();
        for &x in &[0.0, 0.3, 1.0, -2.0] {
            let a = conv.kernel.eval(&elem(&[x])).unwrap();
            let b = closed.eval(&elem(&[x])).unwrap();
            assert!((a - b).abs() < 1e-8, "x = {x}: {a} vs {b}");
        }
        assert!(conv.pointwise_error < 1e-6);
    }

    #[test]
    fn heisenberg_numeric_convolution_at_zero() {
        // (kappa * kappa~)(0) = integral of kappa^2 = (pi/2)^{3/2} for
        // exp(-|x|_E^2) on H_1 (the group law drops out at x = 0).
        let k = Kernel::heisenberg_schwartz(1).unwrap();
        let conv = k.self_convolution().unwrap();
        let want = (PI / 2.0).powf(1.5);
        assert!((conv.kernel.value_at_zero() - want).abs() < 1e-9);
        // Convolution squares are symmetric under inversion.
        let group = conv.kernel.group().clone();
        let x = elem(&[0.4, -0.2, 0.3]);
        let xi = group.inverse(&x).unwrap();
        let a = conv.kernel.eval(&x).unwrap();
        let b = conv.kernel.eval(&xi).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        // Envelope covers sampled values.
        let env = conv.kernel.envelope().unwrap();
        let u = group.quasi_norm(&x).unwrap();
        assert!(a.abs() <= env.bound(u));
    }

    #[test]
    fn scaled_convolution_commutes_with_closed_form() {
        let p = Kernel::gaussian_heat(1, 1.0).unwrap();
        let scaled_then_conv = p.scale(0.3).unwrap().self_convolution().unwrap();
        let conv_then_scaled = Kernel::gaussian_heat(1, 2.0).unwrap().scale(0.3).unwrap();
        for &x in &[0.0, 0.5, 1.5] {
            assert_relative_eq!(
                scaled_then_conv.kernel.eval(&elem(&[x])).unwrap(),
                conv_then_scaled.eval(&elem(&[x])).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn zero_kernel_periodises_to_zero() {
        let p = Kernel::gaussian_heat(1, 1.0).unwrap();
        let zero = Kernel::linear_combination(&[(0.0, p)]).unwrap();
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let x0 = lat.group().identity_rational();
        let d = periodised_diag(&zero, &lat, &x0, 5.0).unwrap();
        assert_eq!(d.value, 0.0);
        let grid = lat.fundamental_domain_grid(2).unwrap();
        let hs = hs_norm_squared(&zero, &lat, &grid, 5.0).unwrap();
        assert!(hs.value.abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let k = Kernel::gaussian_heat(1, 1.0).unwrap();
        let hlat = LatticeSubgroup::heisenberg_canonical(1);
        let x0 = hlat.group().identity_rational();
        assert!(matches!(
            periodised_diag(&k, &hlat, &x0, 5.0),
            Err(Error::InvalidArgument(_))
        ));
        // Conjugation-point norm too large for the cutoff; only non-abelian
        // groups constrain it (abelian conjugation is the identity).
        let hk = Kernel::heisenberg_schwartz(1).unwrap();
        let far = RationalElement::new(vec![
            Ratio::from_integer(3),
            Ratio::from_integer(0),
            Ratio::from_integer(0),
        ]);
        assert!(matches!(
            periodised_diag(&hk, &hlat, &far, 2.0),
            Err(Error::CutoffInsufficient { .. })
        ));
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let far_torus = RationalElement::new(vec![Ratio::from_integer(3)]);
        assert!(periodised_diag(&k, &lat, &far_torus, 2.0).is_ok());
        // Nested numeric convolution unsupported.
        let forced = Kernel::linear_combination(&[(1.0, k.clone())]).unwrap();
        let conv = forced.self_convolution().unwrap();
        assert!(matches!(
            conv.kernel.self_convolution(),
            Err(Error::Unsupported(_))
        ));
        assert!(Kernel::gaussian_heat(1, 0.0).is_err());
        assert!(k.scale(-1.0).is_err());
    }
}
