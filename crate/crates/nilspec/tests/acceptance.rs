//! Acceptance suite: ten numbered end-to-end checks with pinned tolerances.
//! Each prints one PASS/FAIL line (run with `--nocapture` to see them all).

use std::time::{Duration, Instant};

use nilspec::constants::{self, Multiplier, PrefactorMode};
use nilspec::kernels::{periodised_diag, periodised_trace, Kernel};
use nilspec::special;
use nilspec::spectrum::NilmanifoldModel;
use nilspec::theta;
use nilspec::zeta;
use nilspec::Complex64;

const PI: f64 = std::f64::consts::PI;

fn report(idx: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {idx:02} [{status}] {name}: {detail}");
    assert!(pass, "criterion {idx:02} {name}: {detail}");
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Log-log slope across one halving of the scale parameter.
fn halving_slope(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).ln() / std::f64::consts::LN_2
}

#[test]
fn criterion_01_torus_weyl_law() {
    let budget = Duration::from_secs(5);
    let start = Instant::now();
    let lambda = 4.0 * PI * PI * 1e6;
    let model = NilmanifoldModel::torus(1).unwrap();
    // The evaluation point sits exactly on an eigenvalue; nudge the cutoff by
    // one part in 1e12 so ties cannot flip with rounding of pi.
    let stream = model.spectrum(lambda * (1.0 + 1e-9)).unwrap();
    let n = stream.count_at_most(lambda * (1.0 + 1e-12)).unwrap();
    let elapsed = start.elapsed();
    let scaled = n as f64 / lambda.sqrt();
    let target = 1.0 / PI;
    let rel = (scaled - target).abs() / target;
    // Exact count 2 * floor(sqrt(lambda)/(2 pi)) + 1 with sqrt(lambda)/(2 pi) = 1000.
    let oracle = 2 * 1000 + 1;
    let pass = rel < 0.02 && n == oracle && elapsed < budget;
    report(
        1,
        "torus Weyl constant",
        pass,
        &format!(
            "N(L) L^-1/2 = {scaled:.7} vs 1/pi = {target:.7} (rel {rel:.2e}), \
             count {n} vs oracle {oracle}, {elapsed:?} < {budget:?}"
        ),
    );
}

#[test]
fn criterion_02_heisenberg_weyl_law() {
    let budget = Duration::from_secs(60);
    let start = Instant::now();
    let lambda = 2.0e4;
    let model = NilmanifoldModel::heisenberg(1).unwrap();
    let stream = model.spectrum(lambda).unwrap();
    let n = stream.count_at_most(lambda).unwrap();
    let elapsed = start.elapsed();
    let scaled = n as f64 / (lambda * lambda);
    let target = 1.0 / 64.0;
    let rel = (scaled - target).abs() / target;
    let pass = rel < 0.05 && elapsed < budget;
    report(
        2,
        "Heisenberg Weyl constant",
        pass,
        &format!(
            "N(L) L^-2 = {scaled:.7} vs 1/64 = {target:.7} (rel {rel:.2e}), {elapsed:?} < {budget:?}"
        ),
    );
}

#[test]
fn criterion_03_heisenberg_heat_trace_decay() {
    let model = NilmanifoldModel::heisenberg(1).unwrap();
    let stream = model.spectrum(2000.0).unwrap();
    let ts = [0.2, 0.1, 0.05];
    let mut devs = Vec::new();
    let mut tails_ok = true;
    let mut tail_detail = Vec::new();
    for &t in &ts {
        let th = theta::heat_trace(&stream, 2.0, t).unwrap();
        tails_ok &= th.tail_bound < 1e-8;
        tail_detail.push(format!("{:.1e}", th.tail_bound));
        devs.push((t * t * th.value - 1.0 / 32.0).abs());
    }
    let s12 = halving_slope(devs[0], devs[1]);
    let s23 = halving_slope(devs[1], devs[2]);
    let pass = tails_ok && s12 >= 3.0 && s23 >= 3.0;
    report(
        3,
        "Heisenberg t^2 theta(t) - 1/32 decay",
        pass,
        &format!(
            "deviations {:.3e}/{:.3e}/{:.3e}, slopes {s12:.2}/{s23:.2} >= 3, tails {} < 1e-8",
            devs[0],
            devs[1],
            devs[2],
            tail_detail.join("/")
        ),
    );
}

#[test]
fn criterion_04_periodisation_asymptotics() {
    let eps = [0.4, 0.2, 0.1];
    // (kernel, lattice model, grid resolution, lattice ball radius)
    let torus = NilmanifoldModel::torus(1).unwrap();
    let heis = NilmanifoldModel::heisenberg(1).unwrap();
    let cases = [
        (Kernel::gaussian_heat(1, 0.4).unwrap(), &torus, 5u32, 12.0),
        (Kernel::heisenberg_schwartz(1).unwrap(), &heis, 2u32, 6.0),
    ];
    let mut detail = Vec::new();
    let mut pass = true;
    for (kernel, model, res, r_cut) in &cases {
        let lattice = model.lattice();
        let grid = lattice.fundamental_domain_grid(*res).unwrap();
        let q = model.group().homogeneous_dim() as f64;
        let kappa0 = kernel.value_at_zero();
        let vol = model.volume();
        let probes: Vec<_> = grid.nodes().iter().take(5).collect();
        // devs[point][eps index], plus the trace row at the end.
        let mut devs = vec![Vec::new(); probes.len() + 1];
        for &e in &eps {
            let scaled = kernel.scale(e).unwrap();
            let factor = e.powf(q);
            for (p, node) in probes.iter().enumerate() {
                let pv = periodised_diag(&scaled, lattice, node, *r_cut).unwrap();
                devs[p].push((factor * pv.value - kappa0).abs());
            }
            let tr = periodised_trace(&scaled, lattice, &grid, *r_cut).unwrap();
            devs[probes.len()].push((factor * tr.value - vol * kappa0).abs());
        }
        let mut min_slope = f64::INFINITY;
        for row in &devs {
            for pair in row.windows(2) {
                // Once both deviations round to exactly zero the decay has
                // outrun f64 entirely; no slope is measurable there and the
                // order claim is already witnessed by the preceding drop.
                if pair[0] == 0.0 && pair[1] == 0.0 {
                    continue;
                }
                let s = halving_slope(pair[0], pair[1]);
                if !(s >= 4.0) {
                    pass = false;
                }
                min_slope = min_slope.min(s);
            }
        }
        detail.push(format!("{} min slope {min_slope:.2}", kernel.label()));
    }
    report(
        4,
        "kernel periodisation order",
        pass,
        &format!("{} (diag at 5 points + trace, all >= 4)", detail.join("; ")),
    );
}

#[test]
fn criterion_05_torus_zeta_values() {
    let budget = Duration::from_secs(30);
    let start = Instant::now();
    let model = NilmanifoldModel::torus(1).unwrap();
    let stream = model.spectrum(3000.0).unwrap();
    let closed = 1.0 / (2.0 * PI);
    let (res_num, _res_err) = zeta::residue_at_pole(&stream, &model).unwrap();
    let res_heat = model.heat_coefficient().unwrap() / special::gamma(0.5);
    let z2 = zeta::zeta_mellin(&stream, &model, re(2.0)).unwrap().value.re;
    let z0 = zeta::zeta_mellin(&stream, &model, re(0.0)).unwrap().value.re;
    let zm1 = zeta::zeta_mellin(&stream, &model, re(-1.0)).unwrap().value;
    let zm2 = zeta::zeta_mellin(&stream, &model, re(-2.0)).unwrap().value;
    let elapsed = start.elapsed();
    let d_res = (res_num - closed).abs().max((res_heat - closed).abs());
    let d2 = (z2 - 1.0 / 720.0).abs();
    let d0 = (z0 + 1.0).abs();
    let dm = zm1.norm().max(zm2.norm());
    let pass = d_res < 1e-6 && d2 < 1e-8 && d0 < 1e-6 && dm < 1e-6 && elapsed < budget;
    report(
        5,
        "torus zeta special values",
        pass,
        &format!(
            "residue routes off 1/(2pi) by {d_res:.2e} < 1e-6, zeta(2)-1/720 = {d2:.2e} < 1e-8, \
             zeta(0)+1 = {d0:.2e} < 1e-6, |zeta(-1)|,|zeta(-2)| <= {dm:.2e} < 1e-6, {elapsed:?} < {budget:?}"
        ),
    );
}

#[test]
fn criterion_06_heisenberg_zeta_values() {
    let model = NilmanifoldModel::heisenberg(1).unwrap();
    let stream = model.spectrum(2000.0).unwrap();
    let (res_num, _) = zeta::residue_at_pole(&stream, &model).unwrap();
    let rel_res = (res_num - 1.0 / 32.0).abs() * 32.0;
    let z0 = zeta::zeta_mellin(&stream, &model, re(0.0)).unwrap().value.re;
    let zm1 = zeta::zeta_mellin(&stream, &model, re(-1.0)).unwrap().value.norm();
    let pass = rel_res < 0.02 && (z0 + 1.0).abs() < 1e-2 && zm1 < 1e-2;
    report(
        6,
        "Heisenberg zeta special values",
        pass,
        &format!(
            "residue 32*|r - 1/32| = {rel_res:.2e} < 0.02, zeta(0)+1 = {:.2e} < 1e-2, \
             |zeta(-1)| = {zm1:.2e} < 1e-2",
            (z0 + 1.0).abs()
        ),
    );
}

#[test]
fn criterion_07_kernel_at_zero_identity() {
    let (lhs_e, rhs_e) = constants::kernel_at_zero(Multiplier::Exp, 1).unwrap();
    let (lhs_l, rhs_l) = constants::kernel_at_zero(Multiplier::LambdaExp, 1).unwrap();
    let d_e = (lhs_e - rhs_e).abs() / lhs_e.abs();
    let d_l = (lhs_l - rhs_l).abs() / lhs_l.abs();
    let pass = d_e < 1e-10 && d_l < 1e-10;
    report(
        7,
        "kernel-at-zero multiplier identity",
        pass,
        &format!("exp(-l) rel {d_e:.2e}, l exp(-l) rel {d_l:.2e}, both < 1e-10"),
    );
}

#[test]
fn criterion_08_constant_identity_chains() {
    let c0_1 = constants::c0_euclidean(1).unwrap();
    let mut worst: f64 = 0.0;
    // c0 on R^n against the heat route and the n = 1 closed value.
    worst = worst.max((c0_1 * 2.0 * PI - 1.0).abs());
    for n in 1..=3usize {
        let heat = (4.0 * PI).powf(-(n as f64) / 2.0) / special::gamma(n as f64 / 2.0);
        let c0 = constants::c0_euclidean(n).unwrap();
        worst = worst.max(((c0 - heat) / heat).abs());
    }
    // Scaling: c0(2 Delta) = 2^{-1/2} c0(Delta).
    let scaled = constants::c0_scaled(c0_1, 2.0, 1.0, 2.0).unwrap();
    worst = worst.max((scaled * 2.0 * PI * 2f64.sqrt() - 1.0).abs());
    // Power: c0(Delta^2) = c0/2 = 1/(4 pi) = Gamma(5/4)/(pi Gamma(1/4)).
    let powered = constants::c0_power(c0_1, 2).unwrap();
    let via_p1 = special::gamma(1.25) / (PI * special::gamma(0.25));
    worst = worst.max(((powered - via_p1) / via_p1).abs());
    worst = worst.max((powered * 4.0 * PI - 1.0).abs());
    // Fourth-order kernel value: chain vs closed Gamma(5/4)/pi.
    let p1_chain =
        constants::p1_power_relation((4.0 * PI).powf(-0.5), 2, 1.0, 2.0).unwrap();
    let p1_closed = special::gamma(1.25) / PI;
    worst = worst.max(((p1_chain - p1_closed) / p1_closed).abs());
    // Fourier oracle for the same value, at its own tolerance.
    let (_via_sub, fourier) = constants::subordination_power_consistency().unwrap();
    let d_fourier = ((p1_chain - fourier) / p1_closed).abs();
    let pass = worst < 1e-10 && d_fourier < 1e-6;
    report(
        8,
        "constant identity chains",
        pass,
        &format!(
            "closed chains worst rel {worst:.2e} < 1e-10; p1(0) chain {p1_chain:.9} vs \
             Fourier oracle {fourier:.9} rel {d_fourier:.2e} < 1e-6"
        ),
    );
}

#[test]
fn criterion_09_product_zeta_identities() {
    let t1 = NilmanifoldModel::torus(1).unwrap();
    let s1 = t1.spectrum(4.0e6).unwrap();
    let t2 = NilmanifoldModel::torus(2).unwrap();
    let s2 = t2.spectrum(4.0e6).unwrap();
    let mut worst_sum: f64 = 0.0;
    let mut worst_cross: f64 = 0.0;
    for &x in &[2.0, 3.0] {
        let s = re(x);
        let (direct2, _) = zeta::zeta_direct(&s2, 1.0, s, 1e-6).unwrap();
        let (z1, _) = zeta::zeta_direct(&s1, 0.5, s, 1e-6).unwrap();
        let (zz, _) = zeta::product_zeta_z(&s1, 0.5, &s1, 0.5, s, 1e-5).unwrap();
        worst_sum = worst_sum.max((direct2 - (2.0 * z1 + zz)).norm());
        let cc = zeta::torus_cross_check(&s1, 0.5, s, 1e-6).unwrap();
        worst_cross = worst_cross.max(cc.residual);
    }
    let pass = worst_sum < 1e-6 && worst_cross < 1e-6;
    report(
        9,
        "product spectrum factorisations",
        pass,
        &format!(
            "T^2 vs zeta1+zeta2+Z residual {worst_sum:.2e} < 1e-6; \
             theta-factorisation residual {worst_cross:.2e} < 1e-6 at s = 2, 3"
        ),
    );
}

#[test]
fn criterion_10_prefactor_discrepancy_ledger() {
    let terms = 300_000;
    let paper = constants::c0_heisenberg(1, terms, PrefactorMode::Paper).unwrap();
    let consistent = constants::c0_heisenberg(1, terms, PrefactorMode::Consistent).unwrap();
    let ratio = consistent.value / paper.value;
    let four_pi_sq = 4.0 * PI * PI;
    let rel = (ratio - four_pi_sq).abs() / four_pi_sq;
    let declared = constants::heisenberg_prefactor_ratio(1);
    let pass = ratio > 39.0 && ratio < 40.0 && rel < 1e-9 && (declared - four_pi_sq).abs() < 1e-9;
    report(
        10,
        "Plancherel prefactor modes",
        pass,
        &format!(
            "consistent/paper = {ratio:.6} in (39, 40), vs 4 pi^2 = {four_pi_sq:.6} rel {rel:.2e}"
        ),
    );
}
