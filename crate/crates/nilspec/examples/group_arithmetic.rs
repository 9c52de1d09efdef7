//! Exact arithmetic on graded groups: dilations, quasi-norms, conjugation,
//! and certified lattice ball enumeration.
//!
//! Run with: cargo run -p nilspec --example group_arithmetic

use nilspec::group::{GradedGroup, GroupElement, Rational, RationalElement};
use nilspec::lattice::LatticeSubgroup;

fn main() -> nilspec::Result<()> {
    let h = GradedGroup::heisenberg(1);
    println!(
        "H_1: dim {}, weights {:?}, homogeneous dimension Q = {}",
        h.dim(),
        h.weights(),
        h.homogeneous_dim()
    );

    // Non-commutativity shows up only in the central coordinate.
    let x = GroupElement::new(vec![1.0, 0.0, 0.0]);
    let y = GroupElement::new(vec![0.0, 1.0, 0.0]);
    let xy = h.multiply(&x, &y)?;
    let yx = h.multiply(&y, &x)?;
    println!("x * y = {:?}", xy.coords);
    println!("y * x = {:?}", yx.coords);

    // Dilations are automorphisms: D_r(x y) = D_r(x) D_r(y), with the
    // central coordinate scaling like r^2.
    let r = 3.0;
    let lhs = h.dilate(r, &xy)?;
    let rhs = h.multiply(&h.dilate(r, &x)?, &h.dilate(r, &y)?)?;
    println!("D_3(xy) = {:?}   D_3(x) D_3(y) = {:?}", lhs.coords, rhs.coords);

    // The quasi-norm is homogeneous of degree 1 under dilations.
    let z = GroupElement::new(vec![0.7, -0.4, 1.3]);
    let nz = h.quasi_norm(&z)?;
    let ndz = h.quasi_norm(&h.dilate(r, &z)?)?;
    println!("|z| = {nz:.6}, |D_3 z| = {ndz:.6}, ratio = {:.6}", ndz / nz);
    println!("triangle constant for H_1: {:.6}", h.triangle_constant());

    // Conjugation is trivial on abelian groups; on H_n it shifts the centre.
    let abelian = GradedGroup::abelian(2);
    let a = GroupElement::new(vec![2.0, -1.0]);
    let b = GroupElement::new(vec![0.5, 0.5]);
    let conj = abelian.conjugate_generic(&a.coords, &b.coords)?;
    println!("abelian conjugation a^-1 b a = {conj:?} (= b)");
    let conj_h = h.conjugate_generic(&x.coords, &y.coords)?;
    println!("H_1 conjugation x^-1 y x = {conj_h:?} (central shift only)");

    // Lattice balls in the canonical lattice Z x Z x (1/2)Z, with the
    // counting bound that certifies periodisation tails.
    let lattice = LatticeSubgroup::heisenberg_canonical(1);
    println!("lattice covolume = {}", lattice.covolume());
    for radius in [1.0, 2.0, 4.0] {
        let ball = lattice.ball(radius)?;
        println!(
            "|ball(r = {radius})| = {:5}   count bound = {}",
            ball.len(),
            lattice.count_bound(radius)
        );
    }

    // Lattice membership is decided exactly over rationals.
    let half = Rational::new(1, 2);
    let inside = RationalElement::new(vec![half * 2, half * 4, half]);
    let outside = RationalElement::new(vec![half, half, half]);
    println!(
        "(1, 2, 1/2) in lattice: {}   (1/2, 1/2, 1/2) in lattice: {}",
        lattice.contains(&inside),
        lattice.contains(&outside)
    );
    Ok(())
}
