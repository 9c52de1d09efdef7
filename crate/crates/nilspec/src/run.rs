//! Command-line orchestration: argument parsing, config layering, experiment
//! dispatch, artifact emission.
//!
//! Output convention: `--csv PATH` / `--json PATH` write files; with neither
//! flag the subcommand's natural artifact goes to stdout (tables for
//! spectrum/theta/weyl, JSON reports for the rest). Exit codes: 0 success,
//! 2 validation or usage error, 3 certificate failure.

use std::collections::BTreeMap;
use std::fs;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, Family};
use crate::constants::{self, PrefactorMode};
use crate::error::{Error, Result};
use crate::kernels::{periodised_diag, periodised_trace, Kernel};
use crate::report::{ComplexMeasured, CsvTable, Measured, Report};
use crate::special;
use crate::theta;
use crate::zeta;

#[derive(Debug, Parser)]
#[command(
    name = "nilspec",
    version,
    about = "Spectral geometry on graded nilmanifolds: spectra, heat traces, Weyl laws, zeta functions, kernel periodisation."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the eigenvalue ladder up to a cutoff.
    Spectrum(CommonArgs),
    /// Heat trace theta(t) with certified truncation tails.
    Theta(CommonArgs),
    /// Counting-function fit against the closed-form Weyl constant.
    Weyl(CommonArgs),
    /// Spectral zeta values (Mellin continuation) and the pole residue.
    Zeta(CommonArgs),
    /// Periodised kernel diagonals and traces across scales.
    Periodise(CommonArgs),
    /// Cross-route constant report, including both Plancherel prefactor modes.
    Constants(CommonArgs),
    /// Product-spectrum factorisation identity check.
    Crosscheck(CommonArgs),
}

/// One flag per config key; names match the file keys exactly.
#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// Flat key = value config file; flags override its entries.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Model descriptor: torus:N, heisenberg:N, or product:fam:N,fam:N.
    #[arg(long)]
    pub model: Option<String>,
    /// Spectrum enumeration cutoff.
    // allow_negative_numbers lets out-of-range values like -5 reach
    // validation, which reports PARAM_RANGE instead of a usage error.
    #[arg(long = "lambda-max", allow_negative_numbers = true)]
    pub lambda_max: Option<String>,
    /// Comma-separated heat times.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<String>,
    /// Comma-separated s values, each `re` or `re:im`.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<String>,
    /// Comma-separated periodisation scales in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<String>,
    /// Certificate budget for tail bounds.
    #[arg(long, allow_negative_numbers = true)]
    pub tolerance: Option<String>,
    /// Series length for the Plancherel constant.
    #[arg(long = "series-terms", allow_negative_numbers = true)]
    pub series_terms: Option<String>,
    /// Fundamental-domain grid nodes per axis.
    #[arg(long, allow_negative_numbers = true)]
    pub resolution: Option<String>,
    /// Lattice ball radius for periodisation.
    #[arg(long = "r-cut", allow_negative_numbers = true)]
    pub r_cut: Option<String>,
    /// Number of Weyl grid points.
    #[arg(long = "grid-points", allow_negative_numbers = true)]
    pub grid_points: Option<String>,
    /// Heat time of the Gaussian base kernel (periodise).
    #[arg(long = "kernel-t", allow_negative_numbers = true)]
    pub kernel_t: Option<String>,
    /// Plancherel prefactor convention: paper or consistent.
    #[arg(long)]
    pub mode: Option<String>,
    /// Also extract the pole residue (zeta).
    #[arg(long)]
    pub residue: Option<String>,
    /// CSV output path.
    #[arg(long)]
    pub csv: Option<String>,
    /// JSON output path.
    #[arg(long)]
    pub json: Option<String>,
    /// Spectral transform coefficient c (rational, e.g. 3/2).
    #[arg(long, allow_negative_numbers = true)]
    pub scale: Option<String>,
    /// Spectral transform power l.
    #[arg(long, allow_negative_numbers = true)]
    pub power: Option<String>,
    /// Explicit lattice scales, checked against the supported set.
    #[arg(long = "lattice-scales")]
    pub lattice_scales: Option<String>,
}

impl CommonArgs {
    fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        };
        put("model", &self.model);
        put("lambda-max", &self.lambda_max);
        put("t", &self.t);
        put("s", &self.s);
        put("epsilon", &self.epsilon);
        put("tolerance", &self.tolerance);
        put("series-terms", &self.series_terms);
        put("resolution", &self.resolution);
        put("r-cut", &self.r_cut);
        put("grid-points", &self.grid_points);
        put("kernel-t", &self.kernel_t);
        put("mode", &self.mode);
        put("residue", &self.residue);
        put("csv", &self.csv);
        put("json", &self.json);
        put("scale", &self.scale);
        put("power", &self.power);
        put("lattice-scales", &self.lattice_scales);
        m
    }
}

/// Parses flags and config file into a validated [`ExperimentConfig`].
pub fn resolve_config(experiment: Experiment, args: &CommonArgs) -> Result<ExperimentConfig> {
    let file_map = match &args.config {
        Some(path) => crate::config::parse_key_value_file(&fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    let flag_map = args.to_map();
    let cfg = ExperimentConfig::from_sources(experiment, &[&file_map, &flag_map])?;
    let diags = cfg.validate();
    if !diags.is_empty() {
        let joined: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(Error::Config(joined.join("; ")));
    }
    Ok(cfg)
}

/// Entry point behind `main`: dispatches a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    let (experiment, args) = match &cli.command {
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Theta(a) => (Experiment::Theta, a),
        Command::Weyl(a) => (Experiment::Weyl, a),
        Command::Zeta(a) => (Experiment::Zeta, a),
        Command::Periodise(a) => (Experiment::Periodise, a),
        Command::Constants(a) => (Experiment::Constants, a),
        Command::Crosscheck(a) => (Experiment::CrossCheck, a),
    };
    let cfg = resolve_config(experiment, args)?;
    match experiment {
        Experiment::Spectrum => run_spectrum(&cfg),
        Experiment::Theta => run_theta(&cfg),
        Experiment::Weyl => run_weyl(&cfg),
        Experiment::Zeta => run_zeta(&cfg),
        Experiment::Periodise => run_periodise(&cfg),
        Experiment::Constants => run_constants(&cfg),
        Experiment::CrossCheck => run_crosscheck(&cfg),
    }
}

/// CSV-first subcommands print the table to stdout when no path is given;
/// JSON-first ones print the report.
fn emit<T: Serialize>(
    cfg: &ExperimentConfig,
    report: &Report<T>,
    table: &CsvTable,
    csv_first: bool,
) -> Result<()> {
    if let Some(path) = &cfg.csv {
        table.write(path)?;
    }
    if let Some(path) = &cfg.json {
        report.write_json(path)?;
    }
    if cfg.csv.is_none() && cfg.json.is_none() {
        if csv_first {
            print!("{}", table.render());
        } else {
            print!("{}", report.to_json_string()?);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ComplexPair {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexPair {
    fn from(z: Complex64) -> Self {
        ComplexPair { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    lambda: f64,
    multiplicity: u64,
    count: u64,
    error_estimate: f64,
}

#[derive(Serialize)]
struct SpectrumData {
    cutoff: f64,
    total_count: u64,
    entries: Vec<SpectrumRow>,
}

fn run_spectrum(cfg: &ExperimentConfig) -> Result<()> {
    let model = cfg.model.build()?;
    let stream = model.spectrum(cfg.lambda_max)?;
    let mut rows = Vec::new();
    let mut cum = 0u64;
    for e in stream.entries() {
        cum += e.multiplicity;
        rows.push(SpectrumRow {
            lambda: e.value,
            multiplicity: e.multiplicity,
            count: cum,
            error_estimate: 0.0,
        });
    }
    let mut table = CsvTable::new(&["lambda", "multiplicity", "count"]);
    for r in &rows {
        table.push_row(vec![r.lambda, r.multiplicity as f64, r.count as f64])?;
    }
    let data = SpectrumData { cutoff: stream.cutoff(), total_count: stream.total_count(), entries: rows };
    emit(cfg, &Report::new("spectrum", model.label(), data), &table, true)
}

#[derive(Serialize)]
struct ThetaRow {
    t: f64,
    value: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct ThetaData {
    alpha: f64,
    lambda_max: f64,
    rows: Vec<ThetaRow>,
}

fn run_theta(cfg: &ExperimentConfig) -> Result<()> {
    let model = cfg.model.build()?;
    let stream = model.spectrum(cfg.lambda_max)?;
    let alpha = model.q_over_nu();
    let mut rows = Vec::new();
    let mut table = CsvTable::new(&["t", "theta", "tail_bound"]);
    for &t in &cfg.t_grid {
        let th = theta::heat_trace(&stream, alpha, t)?;
        if th.tail_bound > cfg.tolerance {
            return Err(Error::CertificateFailure(format!(
                "theta({t}) tail bound {} exceeds tolerance {}",
                th.tail_bound, cfg.tolerance
            )));
        }
        table.push_row(vec![t, th.value, th.tail_bound])?;
        rows.push(ThetaRow { t, value: th.value, tail_bound: th.tail_bound });
    }
    let data = ThetaData { alpha, lambda_max: cfg.lambda_max, rows };
    emit(cfg, &Report::new("theta", model.label(), data), &table, true)
}

#[derive(Serialize)]
struct WeylRow {
    lambda: f64,
    count: u64,
    scaled: f64,
}

#[derive(Serialize)]
struct WeylData {
    alpha: f64,
    fitted: Measured,
    closed_form: Option<f64>,
    relative_deviation: Option<f64>,
    rows: Vec<WeylRow>,
}

fn run_weyl(cfg: &ExperimentConfig) -> Result<()> {
    let model = cfg.model.build()?;
    let stream = model.spectrum(cfg.lambda_max)?;
    let alpha = model.q_over_nu();
    let grid: Vec<f64> = (1..=cfg.grid_points)
        .map(|k| cfg.lambda_max * k as f64 / cfg.grid_points as f64)
        .collect();
    let (fitted, drift) = zeta::weyl_fit(&stream, alpha, &grid)?;
    let closed = model.weyl_constant();
    let mut rows = Vec::new();
    let mut table = CsvTable::new(&["lambda", "count", "scaled"]);
    for &l in &grid {
        let n = stream.count_at_most(l)?;
        let scaled = n as f64 * l.powf(-alpha);
        table.push_row(vec![l, n as f64, scaled])?;
        rows.push(WeylRow { lambda: l, count: n, scaled });
    }
    let data = WeylData {
        alpha,
        fitted: Measured::new(fitted, drift * fitted.abs()),
        closed_form: closed,
        relative_deviation: closed.map(|c| (fitted - c).abs() / c.abs().max(1e-300)),
        rows,
    };
    emit(cfg, &Report::new("weyl", model.label(), data), &table, true)
}

#[derive(Serialize)]
struct ZetaPoint {
    s: ComplexPair,
    value: ComplexMeasured,
    method: &'static str,
    h1: Option<ComplexPair>,
    pole_term: Option<ComplexPair>,
    gamma_reciprocal_term: Option<ComplexPair>,
    h2: Option<ComplexPair>,
}

#[derive(Serialize)]
struct ResidueData {
    pole: f64,
    numerical: Measured,
    closed_form: Option<f64>,
    relative_deviation: Option<f64>,
}

#[derive(Serialize)]
struct ZetaData {
    alpha: f64,
    points: Vec<ZetaPoint>,
    residue: Option<ResidueData>,
}

fn run_zeta(cfg: &ExperimentConfig) -> Result<()> {
    let model = cfg.model.build()?;
    let stream = model.spectrum(cfg.lambda_max)?;
    let alpha = model.q_over_nu();
    let continuable = model.heat_coefficient().is_some();
    let mut points = Vec::new();
    let mut table = CsvTable::new(&["re_s", "im_s", "re_zeta", "im_zeta", "error"]);
    for &s in &cfg.s_values {
        let point = if continuable {
            let split = zeta::zeta_mellin(&stream, &model, s)?;
            ZetaPoint {
                s: s.into(),
                value: ComplexMeasured {
                    re: split.value.re,
                    im: split.value.im,
                    error_estimate: split.error_estimate,
                },
                method: "mellin",
                h1: Some(split.h1.into()),
                pole_term: Some(split.pole_term.into()),
                gamma_reciprocal_term: Some(split.gamma_reciprocal_term.into()),
                h2: Some(split.h2.into()),
            }
        } else {
            let (v, tail) = zeta::zeta_direct(&stream, alpha, s, cfg.tolerance)?;
            ZetaPoint {
                s: s.into(),
                value: ComplexMeasured { re: v.re, im: v.im, error_estimate: tail },
                method: "direct",
                h1: None,
                pole_term: None,
                gamma_reciprocal_term: None,
                h2: None,
            }
        };
        table.push_row(vec![s.re, s.im, point.value.re, point.value.im, point.value.error_estimate])?;
        points.push(point);
    }
    let residue = if cfg.residue && continuable {
        let (num, err) = zeta::residue_at_pole(&stream, &model)?;
        // Closed route: vol p_1(0) / Gamma(Q/nu).
        let closed = model
            .heat_coefficient()
            .map(|hc| hc * special::recip_gamma(Complex64::from(alpha)).re);
        Some(ResidueData {
            pole: alpha,
            numerical: Measured::new(num, err),
            closed_form: closed,
            relative_deviation: closed.map(|c| (num - c).abs() / c.abs().max(1e-300)),
        })
    } else {
        None
    };
    let data = ZetaData { alpha, points, residue };
    emit(cfg, &Report::new("zeta", model.label(), data), &table, false)
}

#[derive(Serialize)]
struct DiagPoint {
    index: usize,
    scaled_value: f64,
    deviation: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct EpsilonBlock {
    epsilon: f64,
    diag: Vec<DiagPoint>,
    trace: Measured,
    trace_reference: f64,
    trace_scaled_deviation: f64,
}

#[derive(Serialize)]
struct PeriodiseData {
    kernel: String,
    kappa_zero: f64,
    volume: f64,
    homogeneous_dim: f64,
    blocks: Vec<EpsilonBlock>,
}

fn run_periodise(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.model.factors.len() != 1 || cfg.model.scale.is_some() || cfg.model.power != 1 {
        return Err(Error::Unsupported(
            "periodise runs on plain torus:N or heisenberg:N models".into(),
        ));
    }
    let model = cfg.model.build()?;
    let (family, n) = cfg.model.factors[0];
    let kernel = match family {
        Family::Torus => Kernel::gaussian_heat(n, cfg.kernel_t)?,
        Family::Heisenberg => Kernel::heisenberg_schwartz(n)?,
    };
    let lattice = model.lattice();
    let grid = lattice.fundamental_domain_grid(cfg.resolution)?;
    let q = model.group().homogeneous_dim() as f64;
    let kappa0 = kernel.value_at_zero();
    let vol = model.volume();
    // Five deterministic probe points spread across the grid.
    let stride = (grid.nodes().len() / 5).max(1);
    let probes: Vec<usize> = (0..grid.nodes().len()).step_by(stride).take(5).collect();
    let mut blocks = Vec::new();
    let mut table = CsvTable::new(&["epsilon", "point", "scaled_value", "deviation", "tail_bound"]);
    for &eps in &cfg.epsilons {
        let scaled = kernel.scale(eps)?;
        let factor = eps.powf(q);
        let mut diag = Vec::new();
        for &idx in &probes {
            let pv = periodised_diag(&scaled, lattice, &grid.nodes()[idx], cfg.r_cut)?;
            let value = factor * pv.value;
            let deviation = (value - kappa0).abs();
            let tail = factor * pv.tail_bound;
            if tail > cfg.tolerance {
                return Err(Error::CertificateFailure(format!(
                    "periodisation tail {tail} at epsilon {eps} exceeds tolerance {}",
                    cfg.tolerance
                )));
            }
            table.push_row(vec![eps, idx as f64, value, deviation, tail])?;
            diag.push(DiagPoint { index: idx, scaled_value: value, deviation, tail_bound: tail });
        }
        let tr = periodised_trace(&scaled, lattice, &grid, cfg.r_cut)?;
        let reference = vol * kappa0 / factor;
        blocks.push(EpsilonBlock {
            epsilon: eps,
            diag,
            trace: Measured::new(tr.value, tr.error_estimate),
            trace_reference: reference,
            trace_scaled_deviation: (factor * tr.value - vol * kappa0).abs(),
        });
    }
    let data = PeriodiseData {
        kernel: kernel.label().to_string(),
        kappa_zero: kappa0,
        volume: vol,
        homogeneous_dim: q,
        blocks,
    };
    emit(cfg, &Report::new("periodise", model.label(), data), &table, false)
}

#[derive(Serialize)]
struct PrefactorBlock {
    paper: Measured,
    consistent: Measured,
    ratio: Measured,
    four_pi_squared_power: f64,
}

#[derive(Serialize)]
struct ConstantsData {
    series_terms: usize,
    selected_mode: PrefactorMode,
    c0_selected: Measured,
    prefactor: PrefactorBlock,
    reports: Vec<constants::ConstantReport>,
}

fn run_constants(cfg: &ExperimentConfig) -> Result<()> {
    let n = match cfg.model.factors.as_slice() {
        [(Family::Heisenberg, n)] => *n,
        _ => 1,
    };
    let paper = constants::c0_heisenberg(n, cfg.series_terms, PrefactorMode::Paper)?;
    let consistent = constants::c0_heisenberg(n, cfg.series_terms, PrefactorMode::Consistent)?;
    let ratio = consistent.value / paper.value;
    let ratio_err = ratio
        * (consistent.tail_bound / consistent.value.abs()
            + paper.tail_bound / paper.value.abs());
    let selected = match cfg.mode {
        PrefactorMode::Paper => paper,
        PrefactorMode::Consistent => consistent,
    };
    let data = ConstantsData {
        series_terms: cfg.series_terms,
        selected_mode: cfg.mode,
        c0_selected: Measured::new(selected.value, selected.tail_bound),
        prefactor: PrefactorBlock {
            paper: Measured::new(paper.value, paper.tail_bound),
            consistent: Measured::new(consistent.value, consistent.tail_bound),
            ratio: Measured::new(ratio, ratio_err),
            four_pi_squared_power: constants::heisenberg_prefactor_ratio(n),
        },
        reports: constants::constant_reports(cfg.series_terms)?,
    };
    let mut table = CsvTable::new(&["report", "route", "value", "error_estimate"]);
    for (i, rep) in data.reports.iter().enumerate() {
        for (j, route) in rep.routes.iter().enumerate() {
            table.push_row(vec![i as f64, j as f64, route.value, route.error_estimate])?;
        }
    }
    emit(cfg, &Report::new("constants", "heisenberg-family", data), &table, false)
}

#[derive(Serialize)]
struct CrossRow {
    s: ComplexPair,
    lhs: ComplexPair,
    rhs: ComplexPair,
    residual: f64,
    rhs_displayed: ComplexPair,
    residual_displayed: f64,
    h: ComplexPair,
    error_estimate: f64,
}

#[derive(Serialize)]
struct CrossData {
    alpha_left: f64,
    rows: Vec<CrossRow>,
}

fn run_crosscheck(cfg: &ExperimentConfig) -> Result<()> {
    let model = cfg.model.build()?;
    let stream = model.spectrum(cfg.lambda_max)?;
    let alpha = model.q_over_nu();
    let mut rows = Vec::new();
    let mut table =
        CsvTable::new(&["re_s", "im_s", "residual", "residual_displayed", "error_estimate"]);
    for &s in &cfg.s_values {
        let cc = zeta::torus_cross_check(&stream, alpha, s, cfg.tolerance)?;
        table.push_row(vec![s.re, s.im, cc.residual, cc.residual_displayed, cc.error_estimate])?;
        rows.push(CrossRow {
            s: s.into(),
            lhs: cc.lhs.into(),
            rhs: cc.rhs.into(),
            residual: cc.residual,
            rhs_displayed: cc.rhs_displayed.into(),
            residual_displayed: cc.residual_displayed,
            h: cc.h_term.into(),
            error_estimate: cc.error_estimate,
        });
    }
    let data = CrossData { alpha_left: alpha, rows };
    emit(cfg, &Report::new("crosscheck", model.label(), data), &table, false)
}
