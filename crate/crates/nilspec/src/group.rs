//! Graded nilpotent Lie groups in exponential coordinates.
//!
//! Supported families: abelian R^n, Heisenberg H_n (coordinates
//! (x_1..x_n, y_1..y_n, t)), and direct products of these. Each group carries
//! positive integer weights (v_1, ..., v_n); the dilation
//! D_r(x) = (r^{v_1} x_1, ..., r^{v_n} x_n) is a group automorphism, the
//! homogeneous dimension is Q = sum v_j, and the homogeneous quasi-norm is
//! |x| = max_j |x_j|^{1/v_j}.
//!
//! The group law is polynomial with half-integer coefficients, so all
//! operations are implemented generically over a coordinate scalar and can be
//! carried out exactly over rationals (used for lattice points and grid
//! nodes) as well as over f64.

use crate::error::{Error, Result};
use num_rational::Ratio;
use num_traits::Signed;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rational = Ratio<i64>;

/// Scalar admissible as a group coordinate: a commutative ring containing 1/2.
pub trait Coord:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn half(self) -> Self;
}

impl Coord for f64 {
    fn zero() -> Self {
        0.0
    }
    fn half(self) -> Self {
        0.5 * self
    }
}

impl Coord for Rational {
    fn zero() -> Self {
        Ratio::from_integer(0)
    }
    fn half(self) -> Self {
        self / 2
    }
}

/// Structural group law; weights live alongside in [`GradedGroup`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupLaw {
    /// R^dim with addition.
    Abelian { dim: usize },
    /// H_n on R^(2n+1): (x,y,t)(x',y',t') = (x+x', y+y', t+t'+(x.y'-y.x')/2).
    Heisenberg { n: usize },
    /// Direct product; coordinates are concatenated.
    Product(Box<GradedGroup>, Box<GradedGroup>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedGroup {
    law: GroupLaw,
    weights: Vec<u32>,
}

/// A group element with f64 coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub coords: Vec<f64>,
}

/// A group element with exact rational coordinates (lattice points, grid nodes).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalElement {
    pub coords: Vec<Rational>,
}

impl GroupElement {
    pub fn new(coords: Vec<f64>) -> Self {
        GroupElement { coords }
    }
}

impl RationalElement {
    pub fn new(coords: Vec<Rational>) -> Self {
        RationalElement { coords }
    }

    pub fn to_float(&self) -> GroupElement {
        GroupElement::new(
            self.coords
                .iter()
                .map(|r| *r.numer() as f64 / *r.denom() as f64)
                .collect(),
        )
    }
}

fn multiply_impl<T: Coord>(law: &GroupLaw, x: &[T], y: &[T], out: &mut Vec<T>) {
    match law {
        GroupLaw::Abelian { dim } => {
            for j in 0..*dim {
                out.push(x[j] + y[j]);
            }
        }
        GroupLaw::Heisenberg { n } => {
            let n = *n;
            for j in 0..2 * n {
                out.push(x[j] + y[j]);
            }
            let mut symplectic = T::zero();
            for j in 0..n {
                symplectic = symplectic + x[j] * y[n + j] - x[n + j] * y[j];
            }
            out.push(x[2 * n] + y[2 * n] + symplectic.half());
        }
        GroupLaw::Product(g1, g2) => {
            let d1 = g1.dim();
            multiply_impl(&g1.law, &x[..d1], &y[..d1], out);
            multiply_impl(&g2.law, &x[d1..], &y[d1..], out);
        }
    }
}

impl GradedGroup {
    pub fn abelian(n: usize) -> Self {
        GradedGroup { law: GroupLaw::Abelian { dim: n }, weights: vec![1; n] }
    }

    /// Heisenberg group H_n with weights (1,...,1,2): Q = 2n + 2.
    pub fn heisenberg(n: usize) -> Self {
        assert!(n >= 1, "Heisenberg group needs n >= 1");
        let mut weights = vec![1; 2 * n];
        weights.push(2);
        GradedGroup { law: GroupLaw::Heisenberg { n }, weights }
    }

    /// Direct product; weights are concatenated unchanged.
    pub fn direct_product(g1: GradedGroup, g2: GradedGroup) -> Self {
        let mut weights = g1.weights.clone();
        weights.extend_from_slice(&g2.weights);
        GradedGroup { law: GroupLaw::Product(Box::new(g1), Box::new(g2)), weights }
    }

    /// Multiply every weight by m >= 1. The group law and Haar measure are
    /// unchanged; only the dilation family (hence Q and quasi-norm) is
    /// relabelled. Used to match homogeneity degrees across product factors.
    pub fn reweight(&self, m: u32) -> Result<GradedGroup> {
        if m == 0 {
            return Err(Error::InvalidArgument("reweight factor must be >= 1".into()));
        }
        fn rw(g: &GradedGroup, m: u32) -> GradedGroup {
            let law = match &g.law {
                GroupLaw::Product(a, b) => {
                    GroupLaw::Product(Box::new(rw(a, m)), Box::new(rw(b, m)))
                }
                other => other.clone(),
            };
            GradedGroup { law, weights: g.weights.iter().map(|w| w * m).collect() }
        }
        Ok(rw(self, m))
    }

    pub fn law(&self) -> &GroupLaw {
        &self.law
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Homogeneous dimension Q = sum of weights.
    pub fn homogeneous_dim(&self) -> u32 {
        self.weights.iter().sum()
    }

    /// Largest weight (the step scale for lattice tail estimates).
    pub fn max_weight(&self) -> u32 {
        *self.weights.iter().max().expect("nonempty weights")
    }

    /// Coefficient kappa in |x^{-1} gamma x|^2 >= |gamma|^2 - kappa |x| |gamma|
    /// (homogeneous quasi-norms). Conjugation fixes every non-central
    /// coordinate; on H_n it shifts the central one by the symplectic pairing
    /// of the abelian parts, bounded by 2n max|x_j| max|gamma_j| <=
    /// 2n (|x| |gamma|)^w with w the abelian-layer weight, and the central
    /// coordinate enters the squared norm with exponent 1/w. Abelian groups
    /// conjugate trivially; a product is controlled factor by factor.
    pub fn conjugation_shift_coefficient(&self) -> f64 {
        match &self.law {
            GroupLaw::Abelian { .. } => 0.0,
            GroupLaw::Heisenberg { n } => {
                let w = self.weights[0] as f64;
                (2.0 * *n as f64).powf(1.0 / w)
            }
            GroupLaw::Product(a, b) => a
                .conjugation_shift_coefficient()
                .max(b.conjugation_shift_coefficient()),
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }

    /// Group multiplication over any coordinate scalar.
    pub fn multiply_generic<T: Coord>(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        self.check_dim(x.len())?;
        self.check_dim(y.len())?;
        let mut out = Vec::with_capacity(self.dim());
        multiply_impl(&self.law, x, y, &mut out);
        Ok(out)
    }

    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        Ok(GroupElement::new(self.multiply_generic(&x.coords, &y.coords)?))
    }

    pub fn multiply_rational(
        &self,
        x: &RationalElement,
        y: &RationalElement,
    ) -> Result<RationalElement> {
        Ok(RationalElement::new(self.multiply_generic(&x.coords, &y.coords)?))
    }

    /// Inverse is coordinate negation for every supported family.
    pub fn inverse_generic<T: Coord>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x.len())?;
        Ok(x.iter().map(|c| -*c).collect())
    }

    pub fn inverse(&self, x: &GroupElement) -> Result<GroupElement> {
        Ok(GroupElement::new(self.inverse_generic(&x.coords)?))
    }

    pub fn inverse_rational(&self, x: &RationalElement) -> Result<RationalElement> {
        Ok(RationalElement::new(self.inverse_generic(&x.coords)?))
    }

    /// Conjugation x^{-1} g x, exact over rationals.
    pub fn conjugate_generic<T: Coord>(&self, x: &[T], g: &[T]) -> Result<Vec<T>> {
        let xinv = self.inverse_generic(x)?;
        let left = self.multiply_generic(&xinv, g)?;
        self.multiply_generic(&left, x)
    }

    /// Dilation D_r(x) = (r^{v_j} x_j)_j for r > 0.
    pub fn dilate(&self, r: f64, x: &GroupElement) -> Result<GroupElement> {
        self.check_dim(x.coords.len())?;
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("dilation needs r > 0, got {r}")));
        }
        Ok(GroupElement::new(
            x.coords
                .iter()
                .zip(&self.weights)
                .map(|(c, w)| c * r.powi(*w as i32))
                .collect(),
        ))
    }

    /// Exact dilation by a rational r (for exact automorphism checks).
    pub fn dilate_rational(&self, r: Rational, x: &RationalElement) -> Result<RationalElement> {
        self.check_dim(x.coords.len())?;
        if r <= Ratio::from_integer(0) {
            return Err(Error::InvalidArgument("dilation needs r > 0".into()));
        }
        Ok(RationalElement::new(
            x.coords
                .iter()
                .zip(&self.weights)
                .map(|(c, w)| {
                    let mut p = Ratio::from_integer(1);
                    for _ in 0..*w {
                        p *= r;
                    }
                    c * p
                })
                .collect(),
        ))
    }

    /// Homogeneous quasi-norm |x| = max_j |x_j|^{1/v_j}.
    pub fn quasi_norm(&self, x: &GroupElement) -> Result<f64> {
        self.check_dim(x.coords.len())?;
        let mut best = 0.0_f64;
        for (c, w) in x.coords.iter().zip(&self.weights) {
            let v = match w {
                1 => c.abs(),
                2 => c.abs().sqrt(),
                w => c.abs().powf(1.0 / *w as f64),
            };
            best = best.max(v);
        }
        Ok(best)
    }

    pub fn quasi_norm_rational(&self, x: &RationalElement) -> Result<f64> {
        self.quasi_norm(&x.to_float())
    }

    /// Certified constant C with |xy| <= C(|x| + |y|) for all x, y.
    ///
    /// For the max-form quasi-norm above: abelian gives C = 1, Heisenberg H_n
    /// gives C = max(1, sqrt((n+2)/4)) (from |t-coordinate of xy| <=
    /// |x|^2 + n|x||y| + |y|^2), and a product takes the max of its factors.
    pub fn triangle_constant(&self) -> f64 {
        match &self.law {
            GroupLaw::Abelian { .. } => 1.0,
            GroupLaw::Heisenberg { n } => (((*n as f64) + 2.0) / 4.0).sqrt().max(1.0),
            GroupLaw::Product(a, b) => a.triangle_constant().max(b.triangle_constant()),
        }
    }

    /// Identity element.
    pub fn identity(&self) -> GroupElement {
        GroupElement::new(vec![0.0; self.dim()])
    }

    pub fn identity_rational(&self) -> RationalElement {
        RationalElement::new(vec![Ratio::from_integer(0); self.dim()])
    }
}
