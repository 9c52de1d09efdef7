//! Cocompact lattices and fundamental-domain grids.
//!
//! A lattice is described by one positive rational scale per coordinate: its
//! points are exactly the elements whose j-th coordinate is an integer
//! multiple of `scales[j]`. For the supported families this set is closed
//! under the group law:
//!
//! * abelian: any positive scales,
//! * Heisenberg H_n: the canonical lattice Z^n x Z^n x (1/2)Z only,
//! * products: a supported lattice in each factor.
//!
//! The coordinate box Prod_j [-k_j/2, k_j/2) is a strict fundamental domain
//! (each orbit meets it exactly once), with volume (= covolume of the
//! lattice) Prod_j k_j.

use crate::error::{Error, Result};
use crate::group::{GradedGroup, GroupLaw, Rational, RationalElement};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSubgroup {
    group: GradedGroup,
    scales: Vec<Rational>,
}

fn validate_scales(group: &GradedGroup, scales: &[Rational]) -> Result<()> {
    if scales.len() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), got: scales.len() });
    }
    if scales.iter().any(|s| *s <= Ratio::zero()) {
        return Err(Error::InvalidArgument("lattice scales must be positive".into()));
    }
    match group.law() {
        GroupLaw::Abelian { .. } => Ok(()),
        GroupLaw::Heisenberg { n } => {
            let one = Ratio::from_integer(1);
            let half = Ratio::new(1, 2);
            let ok = scales[..2 * n].iter().all(|s| *s == one) && scales[2 * n] == half;
            if ok {
                Ok(())
            } else {
                Err(Error::Unsupported(
                    "Heisenberg lattices other than Z^n x Z^n x (1/2)Z are not closed \
                     under the group law in this parametrisation"
                        .into(),
                ))
            }
        }
        GroupLaw::Product(g1, g2) => {
            let d1 = g1.dim();
            validate_scales(g1, &scales[..d1])?;
            validate_scales(g2, &scales[d1..])
        }
    }
}

impl LatticeSubgroup {
    pub fn new(group: GradedGroup, scales: Vec<Rational>) -> Result<Self> {
        validate_scales(&group, &scales)?;
        Ok(LatticeSubgroup { group, scales })
    }

    /// Z^n in the abelian group R^n, optionally rescaled uniformly by k.
    pub fn torus(n: usize, k: Rational) -> Result<Self> {
        LatticeSubgroup::new(GradedGroup::abelian(n), vec![k; n])
    }

    /// The canonical lattice Z^n x Z^n x (1/2)Z in H_n. Covolume 1/2.
    pub fn heisenberg_canonical(n: usize) -> Self {
        let group = GradedGroup::heisenberg(n);
        let mut scales = vec![Ratio::from_integer(1); 2 * n];
        scales.push(Ratio::new(1, 2));
        LatticeSubgroup { group, scales }
    }

    pub fn direct_product(l1: &LatticeSubgroup, l2: &LatticeSubgroup) -> Self {
        let group =
            GradedGroup::direct_product(l1.group.clone(), l2.group.clone());
        let mut scales = l1.scales.clone();
        scales.extend_from_slice(&l2.scales);
        LatticeSubgroup { group, scales }
    }

    pub fn group(&self) -> &GradedGroup {
        &self.group
    }

    pub fn scales(&self) -> &[Rational] {
        &self.scales
    }

    /// Volume of the fundamental box = product of the scales.
    pub fn covolume(&self) -> f64 {
        self.scales
            .iter()
            .map(|s| s.to_f64().expect("finite rational"))
            .product()
    }

    /// Membership test (exact): every coordinate is an integer multiple of its scale.
    pub fn contains(&self, x: &RationalElement) -> bool {
        x.coords.len() == self.scales.len()
            && x.coords
                .iter()
                .zip(&self.scales)
                .all(|(c, s)| (c / s).is_integer())
    }

    /// All lattice points with quasi-norm <= r, in lexicographic order of the
    /// generator exponents (m_1, ..., m_n). Membership is decided by the same
    /// `quasi_norm` used everywhere else; the integer search box is padded so
    /// no boundary point is lost to rounding.
    pub fn ball(&self, r: f64) -> Result<Vec<RationalElement>> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("ball radius must be >= 0, got {r}")));
        }
        let weights = self.group.weights();
        let mut ranges = Vec::with_capacity(self.scales.len());
        for (s, w) in self.scales.iter().zip(weights) {
            let bound = r.powi(*w as i32) * s.denom().to_f64().unwrap()
                / s.numer().to_f64().unwrap();
            let m = bound.floor() as i64 + 2;
            ranges.push(m);
        }
        let mut out = Vec::new();
        let dim = self.scales.len();
        let mut exps = vec![0i64; dim];
        // Nested lexicographic sweep without recursion.
        fn sweep(
            lat: &LatticeSubgroup,
            ranges: &[i64],
            exps: &mut Vec<i64>,
            depth: usize,
            r: f64,
            out: &mut Vec<RationalElement>,
        ) -> Result<()> {
            if depth == ranges.len() {
                let coords: Vec<Rational> = exps
                    .iter()
                    .zip(&lat.scales)
                    .map(|(m, s)| Ratio::from_integer(*m) * s)
                    .collect();
                let el = RationalElement::new(coords);
                if lat.group.quasi_norm_rational(&el)? <= r {
                    out.push(el);
                }
                return Ok(());
            }
            for m in -ranges[depth]..=ranges[depth] {
                exps[depth] = m;
                sweep(lat, ranges, exps, depth + 1, r, out)?;
            }
            Ok(())
        }
        sweep(self, &ranges, &mut exps, 0, r, &mut out)?;
        Ok(out)
    }

    /// Upper bound for the number of lattice points with quasi-norm <= r:
    /// the integer box gives Prod_j (2 r^{v_j}/k_j + 1).
    pub fn count_bound(&self, r: f64) -> f64 {
        self.scales
            .iter()
            .zip(self.group.weights())
            .map(|(s, w)| 2.0 * r.powi(*w as i32) * s.denom().to_f64().unwrap()
                / s.numer().to_f64().unwrap()
                + 1.0)
            .product()
    }

    /// Upper bound for sum_{|gamma| > r} |gamma|^{-n_exp}, by dyadic shells:
    /// the shell 2^k r < |gamma| <= 2^{k+1} r contributes at most
    /// (2^k r)^{-n_exp} * count_bound(2^{k+1} r), and consecutive shell bounds
    /// shrink at least by 2^{Q - n_exp} once past the first shells.
    /// Requires n_exp > step * dim (the classical convergence threshold).
    pub fn tail_sum_bound(&self, n_exp: f64, r: f64) -> Result<f64> {
        let threshold = (self.group.max_weight() as f64) * (self.group.dim() as f64);
        if n_exp <= threshold {
            return Err(Error::DivergenceRegion(format!(
                "lattice sum exponent {n_exp} must exceed step*dim = {threshold}"
            )));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("tail bound needs r > 0".into()));
        }
        let q = self.group.homogeneous_dim() as f64;
        let rho = 2f64.powf(q - n_exp); // < 1 since n_exp > step*dim >= Q
        let mut total = 0.0;
        let mut last = 0.0;
        for k in 0..64 {
            let shell_r = 2f64.powi(k) * r;
            last = shell_r.powf(-n_exp) * self.count_bound(2.0 * shell_r);
            total += last;
            if last < 1e-300 {
                return Ok(total);
            }
        }
        Ok(total + last * rho / (1.0 - rho))
    }

    /// Partial sum over 0 < |gamma| <= r of |gamma|^{-n_exp}, with a certified
    /// bound for the discarded tail.
    pub fn tail_sum(&self, n_exp: f64, r: f64) -> Result<TailSum> {
        let ball = self.ball(r)?;
        let mut terms = Vec::with_capacity(ball.len());
        for el in &ball {
            let norm = self.group.quasi_norm_rational(el)?;
            if norm > 0.0 {
                terms.push(norm.powf(-n_exp));
            }
        }
        // Deterministic order: sort descending so small terms add last in the
        // pairwise tree tails; the tree shape already fixes the result.
        let partial = crate::sum::pairwise_sum(&terms);
        let tail_bound = self.tail_sum_bound(n_exp, r)?;
        Ok(TailSum { partial, tail_bound })
    }

    /// Quasi-norm of the farthest point of the closed fundamental box,
    /// max_j (k_j/2)^{1/v_j}.
    pub fn box_corner_norm(&self) -> f64 {
        self.scales
            .iter()
            .zip(self.group.weights())
            .map(|(s, w)| {
                let half = s.to_f64().unwrap() / 2.0;
                half.powf(1.0 / *w as f64)
            })
            .fold(0.0, f64::max)
    }

    /// Midpoint quadrature grid on the fundamental box: `resolution` nodes per
    /// axis at k_j (2i + 1 - res)/(2 res), all strictly inside the box.
    pub fn fundamental_domain_grid(&self, resolution: u32) -> Result<FundamentalDomainGrid> {
        if resolution == 0 {
            return Err(Error::InvalidArgument("grid resolution must be >= 1".into()));
        }
        let res = resolution as i64;
        let dim = self.scales.len();
        let axes: Vec<Vec<Rational>> = self
            .scales
            .iter()
            .map(|k| {
                (0..res)
                    .map(|i| k * Ratio::new(2 * i + 1 - res, 2 * res))
                    .collect()
            })
            .collect();
        let count = (resolution as usize).pow(dim as u32);
        let mut nodes = Vec::with_capacity(count);
        let mut idx = vec![0usize; dim];
        loop {
            let coords: Vec<Rational> =
                idx.iter().enumerate().map(|(j, &i)| axes[j][i]).collect();
            nodes.push(RationalElement::new(coords));
            // Lexicographic increment.
            let mut d = dim;
            loop {
                if d == 0 {
                    break;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < resolution as usize {
                    break;
                }
                idx[d] = 0;
                if d == 0 {
                    d = usize::MAX;
                    break;
                }
            }
            if d == usize::MAX {
                break;
            }
        }
        let covolume = self.covolume();
        let weight = covolume / count as f64;
        Ok(FundamentalDomainGrid {
            nodes,
            weight,
            covolume,
            resolution,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TailSum {
    pub partial: f64,
    pub tail_bound: f64,
}

/// Uniform-weight midpoint grid over the fundamental box.
#[derive(Debug, Clone)]
pub struct FundamentalDomainGrid {
    nodes: Vec<RationalElement>,
    weight: f64,
    covolume: f64,
    resolution: u32,
}

impl FundamentalDomainGrid {
    pub fn nodes(&self) -> &[RationalElement] {
        &self.nodes
    }

    /// Shared quadrature weight: covolume / node count.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn torus_ball_counts() {
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        assert_eq!(lat.ball(2.5).unwrap().len(), 5); // -2..2
        assert_eq!(lat.ball(3.0).unwrap().len(), 7); // boundary included
        assert_eq!(lat.ball(0.0).unwrap().len(), 1); // identity only
    }

    #[test]
    fn heisenberg_ball_counts() {
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        // |m|,|p| <= 1 and |q/2| <= 1 -> q in -2..2: 3*3*5 = 45.
        assert_eq!(lat.ball(1.0).unwrap().len(), 45);
        // R = 2: |m|,|p| <= 2, |q| <= 8: 5*5*17 = 425.
        assert_eq!(lat.ball(2.0).unwrap().len(), 425);
    }

    #[test]
    fn ball_is_exact_and_monotone() {
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        let b1 = lat.ball(1.5).unwrap();
        let b2 = lat.ball(2.5).unwrap();
        for el in &b1 {
            assert!(lat.group().quasi_norm_rational(el).unwrap() <= 1.5);
        }
        // Subset property.
        for el in &b1 {
            assert!(b2.contains(el));
        }
        assert!(b2.len() > b1.len());
    }

    #[test]
    fn ball_order_is_lexicographic_deterministic() {
        let lat = LatticeSubgroup::torus(2, Ratio::from_integer(1)).unwrap();
        let b = lat.ball(1.0).unwrap();
        let coords: Vec<Vec<i64>> = b
            .iter()
            .map(|e| e.coords.iter().map(|c| c.to_integer()).collect())
            .collect();
        assert_eq!(
            coords,
            vec![
                vec![-1, -1], vec![-1, 0], vec![-1, 1],
                vec![0, -1], vec![0, 0], vec![0, 1],
                vec![1, -1], vec![1, 0], vec![1, 1],
            ]
        );
    }

    #[test]
    fn lattice_closure_under_multiplication() {
        use rand::{Rng, SeedableRng};
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        let ball = lat.ball(3.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2718);
        for _ in 0..1000 {
            let a = &ball[rng.gen_range(0..ball.len())];
            let b = &ball[rng.gen_range(0..ball.len())];
            let prod = lat.group().multiply_rational(a, b).unwrap();
            assert!(lat.contains(&prod), "{a:?} * {b:?} = {prod:?} left the lattice");
            let inv = lat.group().inverse_rational(a).unwrap();
            assert!(lat.contains(&inv));
        }
    }

    #[test]
    fn covolumes() {
        assert_eq!(LatticeSubgroup::torus(2, Ratio::from_integer(1)).unwrap().covolume(), 1.0);
        assert_eq!(LatticeSubgroup::heisenberg_canonical(1).covolume(), 0.5);
        assert_eq!(LatticeSubgroup::heisenberg_canonical(2).covolume(), 0.5);
    }

    #[test]
    fn torus_tail_sum_converges_to_pi_sq_over_3() {
        // sum_{j != 0} |j|^{-2} = pi^2/3; the partial sum plus certified tail
        // bound must bracket the limit.
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 3.0;
        let mut prev_gap = f64::INFINITY;
        for &r in &[100.0, 1000.0, 10000.0] {
            let ts = lat.tail_sum(2.0, r).unwrap();
            let gap = (exact - ts.partial).abs();
            assert!(gap <= ts.tail_bound, "r = {r}: gap {gap} > bound {}", ts.tail_bound);
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn heisenberg_tail_bound_is_a_true_bound() {
        // Doubling the radius changes the partial sum by less than the
        // reported tail bound at the smaller radius.
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        let t10 = lat.tail_sum(9.0, 10.0).unwrap();
        let t20 = lat.tail_sum(9.0, 20.0).unwrap();
        assert!(t20.partial >= t10.partial);
        assert!(t20.partial - t10.partial <= t10.tail_bound);
        assert!(t10.tail_bound < 1e-2);
    }

    #[test]
    fn tail_sum_divergence_region_rejected() {
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        // step * dim = 2 * 3 = 6.
        assert!(lat.tail_sum(6.0, 10.0).is_err());
        assert!(lat.tail_sum(6.5, 10.0).is_ok());
    }

    #[test]
    fn torus_grid_midpoints() {
        let lat = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let grid = lat.fundamental_domain_grid(4).unwrap();
        let coords: Vec<Rational> = grid.nodes().iter().map(|n| n.coords[0]).collect();
        assert_eq!(
            coords,
            vec![
                Ratio::new(-3, 8),
                Ratio::new(-1, 8),
                Ratio::new(1, 8),
                Ratio::new(3, 8)
            ]
        );
        assert_eq!(grid.weight(), 0.25);
        let total: f64 = grid.weight() * grid.len() as f64;
        assert_eq!(total, 1.0);
    }

    #[test]
    fn heisenberg_grid_volume_and_box() {
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        let grid = lat.fundamental_domain_grid(8).unwrap();
        assert_eq!(grid.len(), 512);
        let total = grid.weight() * grid.len() as f64;
        assert!((total - 0.5).abs() < 1e-15);
        // Nodes lie inside the half-open box [-1/2,1/2)^2 x [-1/4,1/4).
        for node in grid.nodes() {
            assert!(node.coords[0].abs() < Ratio::new(1, 2));
            assert!(node.coords[1].abs() < Ratio::new(1, 2));
            assert!(node.coords[2].abs() < Ratio::new(1, 4));
        }
        assert!((lat.box_corner_norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_nodes_pairwise_inequivalent() {
        // No two nodes are related by a lattice element from ball(3): the box
        // is a strict fundamental domain and the grid respects it. Exact
        // rational arithmetic throughout.
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        let grid = lat.fundamental_domain_grid(3).unwrap();
        let ball = lat.ball(3.0).unwrap();
        for (i, u) in grid.nodes().iter().enumerate() {
            for gam in &ball {
                let gu = lat.group().multiply_rational(gam, u).unwrap();
                for (j, v) in grid.nodes().iter().enumerate() {
                    if gu == *v {
                        let is_identity = gam.coords.iter().all(|c| c.is_zero());
                        assert!(
                            is_identity && i == j,
                            "nodes {i} and {j} equivalent via {gam:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn noncanonical_heisenberg_lattice_rejected() {
        let g = GradedGroup::heisenberg(1);
        let bad = LatticeSubgroup::new(
            g.clone(),
            vec![Ratio::from_integer(2), Ratio::from_integer(1), Ratio::new(1, 2)],
        );
        assert!(matches!(bad, Err(Error::Unsupported(_))));
        let good = LatticeSubgroup::new(
            g,
            vec![Ratio::from_integer(1), Ratio::from_integer(1), Ratio::new(1, 2)],
        );
        assert!(good.is_ok());
    }

    #[test]
    fn scaled_torus_lattice() {
        let lat = LatticeSubgroup::torus(1, Ratio::new(1, 2)).unwrap();
        assert_eq!(lat.ball(1.0).unwrap().len(), 5); // multiples of 1/2 in [-1,1]
        assert_eq!(lat.covolume(), 0.5);
        let grid = lat.fundamental_domain_grid(2).unwrap();
        assert_eq!(grid.nodes()[0].coords[0], Ratio::new(-1, 8));
    }

    #[test]
    fn product_lattice() {
        let l1 = LatticeSubgroup::heisenberg_canonical(1);
        let l2 = LatticeSubgroup::torus(1, Ratio::from_integer(1)).unwrap();
        let p = LatticeSubgroup::direct_product(&l1, &l2);
        assert_eq!(p.covolume(), 0.5);
        assert_eq!(p.group().homogeneous_dim(), 5);
        // Ball of radius 1: 45 Heisenberg choices x 3 torus choices.
        assert_eq!(p.ball(1.0).unwrap().len(), 135);
    }

    #[test]
    fn quasi_norm_consistency_between_rational_and_float() {
        let lat = LatticeSubgroup::heisenberg_canonical(1);
        for el in lat.ball(2.0).unwrap().iter().take(50) {
            let gf = el.to_float();
            let a = lat.group().quasi_norm_rational(el).unwrap();
            let b = lat.group().quasi_norm(&gf).unwrap();
            assert_eq!(a, b);
        }
    }
}
