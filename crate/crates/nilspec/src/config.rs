//! Experiment configuration: a flat key = value file mirrored one-to-one by
//! command-line flags, resolved in layers (defaults, then file, then flags)
//! into a typed config, plus pre-run validation diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::constants::PrefactorMode;
use crate::error::{Error, Result};
use crate::spectrum::{ExactCoeff, NilmanifoldModel};

/// Machine-readable diagnostic codes.
pub mod codes {
    pub const PARAM_RANGE: &str = "PARAM_RANGE";
    pub const AT_POLE: &str = "AT_POLE";
    pub const UNSUPPORTED_LATTICE: &str = "UNSUPPORTED_LATTICE";
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Spectrum,
    Theta,
    Weyl,
    Zeta,
    Periodise,
    Constants,
    CrossCheck,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Theta => "theta",
            Experiment::Weyl => "weyl",
            Experiment::Zeta => "zeta",
            Experiment::Periodise => "periodise",
            Experiment::Constants => "constants",
            Experiment::CrossCheck => "crosscheck",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Torus,
    Heisenberg,
}

/// Model descriptor: one or more lattice-group factors, an optional spectral
/// transform c * lambda^ell, and optional explicit lattice scales (checked
/// against the supported canonical ones).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub factors: Vec<(Family, usize)>,
    pub scale: Option<Ratio<i128>>,
    pub power: u32,
    pub lattice_scales: Option<Vec<Ratio<i64>>>,
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        fn factor(text: &str) -> Result<(Family, usize)> {
            let (fam, n) = text
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("model factor '{text}' is not family:n")))?;
            let family = match fam {
                "torus" => Family::Torus,
                "heisenberg" => Family::Heisenberg,
                other => {
                    return Err(Error::Config(format!(
                        "unknown model family '{other}' (expected torus or heisenberg)"
                    )))
                }
            };
            let n: usize = n
                .parse()
                .map_err(|_| Error::Config(format!("model dimension '{n}' is not an integer")))?;
            Ok((family, n))
        }
        let factors = if let Some(rest) = s.strip_prefix("product:") {
            rest.split(',').map(factor).collect::<Result<Vec<_>>>()?
        } else {
            vec![factor(s)?]
        };
        if factors.is_empty() {
            return Err(Error::Config("model needs at least one factor".into()));
        }
        Ok(ModelSpec { factors, scale: None, power: 1, lattice_scales: None })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(fam, n)| {
                let name = match fam {
                    Family::Torus => "torus",
                    Family::Heisenberg => "heisenberg",
                };
                format!("{name}:{n}")
            })
            .collect();
        if parts.len() == 1 {
            f.write_str(&parts[0])
        } else {
            write!(f, "product:{}", parts.join(","))
        }
    }
}

impl ModelSpec {
    /// Lattice scales of the supported canonical lattice for this shape.
    pub fn canonical_scales(&self) -> Vec<Ratio<i64>> {
        let mut out = Vec::new();
        for (fam, n) in &self.factors {
            match fam {
                Family::Torus => out.extend(std::iter::repeat(Ratio::from_integer(1)).take(*n)),
                Family::Heisenberg => {
                    out.extend(std::iter::repeat(Ratio::from_integer(1)).take(2 * n));
                    out.push(Ratio::new(1, 2));
                }
            }
        }
        out
    }

    pub fn build(&self) -> Result<NilmanifoldModel> {
        let mut factors = self.factors.iter();
        let (fam, n) = factors.next().expect("nonempty by construction");
        let mut model = match fam {
            Family::Torus => NilmanifoldModel::torus(*n)?,
            Family::Heisenberg => NilmanifoldModel::heisenberg(*n)?,
        };
        for (fam, n) in factors {
            let next = match fam {
                Family::Torus => NilmanifoldModel::torus(*n)?,
                Family::Heisenberg => NilmanifoldModel::heisenberg(*n)?,
            };
            model = NilmanifoldModel::direct_product(&model, &next)?;
        }
        let scale = self.scale.unwrap_or_else(|| Ratio::from_integer(1));
        if scale != Ratio::from_integer(1) || self.power != 1 {
            model = model.transform(ExactCoeff::new(*scale.numer(), *scale.denom()), self.power)?;
        }
        Ok(model)
    }
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelSpec,
    pub lambda_max: f64,
    pub t_grid: Vec<f64>,
    pub s_values: Vec<Complex64>,
    pub epsilons: Vec<f64>,
    pub tolerance: f64,
    pub series_terms: usize,
    pub resolution: u32,
    pub r_cut: f64,
    pub grid_points: u32,
    pub kernel_t: f64,
    pub mode: PrefactorMode,
    pub residue: bool,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

/// Every key accepted in config files and (as --key) on the command line.
pub const VALID_KEYS: &[&str] = &[
    "model",
    "lambda-max",
    "t",
    "s",
    "epsilon",
    "tolerance",
    "series-terms",
    "resolution",
    "r-cut",
    "grid-points",
    "kernel-t",
    "mode",
    "residue",
    "csv",
    "json",
    "scale",
    "power",
    "lattice-scales",
];

/// Parses the flat `key = value` format: one pair per line, `#` comments,
/// blank lines ignored, duplicate keys rejected.
pub fn parse_key_value_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !VALID_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(map)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|item| parse_f64(key, item.trim())).collect()
}

/// Complex list items are `re` or `re:im`.
fn parse_complex_list(key: &str, v: &str) -> Result<Vec<Complex64>> {
    v.split(',')
        .map(|item| {
            let item = item.trim();
            match item.split_once(':') {
                Some((re, im)) => Ok(Complex64::new(parse_f64(key, re)?, parse_f64(key, im)?)),
                None => Ok(Complex64::new(parse_f64(key, item)?, 0.0)),
            }
        })
        .collect()
}

fn parse_rational_i128(key: &str, v: &str) -> Result<Ratio<i128>> {
    let parse_int = |t: &str| -> Result<i128> {
        t.trim()
            .parse()
            .map_err(|_| Error::Config(format!("{key}: '{t}' is not an integer")))
    };
    match v.split_once('/') {
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den == 0 {
                return Err(Error::Config(format!("{key}: zero denominator")));
            }
            Ok(Ratio::new(parse_int(num)?, den))
        }
        None => Ok(Ratio::from_integer(parse_int(v)?)),
    }
}

fn parse_rational_list_i64(key: &str, v: &str) -> Result<Vec<Ratio<i64>>> {
    v.split(',')
        .map(|item| {
            let r = parse_rational_i128(key, item)?;
            let num = i64::try_from(*r.numer())
                .map_err(|_| Error::Config(format!("{key}: value out of range")))?;
            let den = i64::try_from(*r.denom())
                .map_err(|_| Error::Config(format!("{key}: value out of range")))?;
            Ok(Ratio::new(num, den))
        })
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: '{v}' is not a boolean"))),
    }
}

fn default_entries(experiment: Experiment) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: &str| m.insert(k.to_string(), v.to_string());
    put("model", "torus:1");
    let lambda = match experiment {
        Experiment::Spectrum => "100",
        Experiment::Theta => "3000",
        Experiment::Weyl => "400000",
        Experiment::Zeta => "40000",
        Experiment::CrossCheck => "4000000",
        _ => "100",
    };
    put("lambda-max", lambda);
    put("t", "0.2,0.1,0.05");
    let s = match experiment {
        Experiment::CrossCheck => "2,3",
        _ => "0,2",
    };
    put("s", s);
    put("epsilon", "0.4,0.2,0.1");
    put("tolerance", "1e-6");
    put("series-terms", "200000");
    put("resolution", "4");
    put("r-cut", "8");
    put("grid-points", "16");
    put("kernel-t", "0.15");
    put("mode", "consistent");
    put("residue", "true");
    put("power", "1");
    m
}

impl ExperimentConfig {
    /// Resolves layered string sources (later layers override earlier ones)
    /// over the per-experiment defaults into a typed config. Keys must come
    /// from [`VALID_KEYS`].
    pub fn from_sources(
        experiment: Experiment,
        layers: &[&BTreeMap<String, String>],
    ) -> Result<Self> {
        let mut merged = default_entries(experiment);
        for layer in layers {
            for (k, v) in layer.iter() {
                if !VALID_KEYS.contains(&k.as_str()) {
                    return Err(Error::Config(format!("unknown key '{k}'")));
                }
                merged.insert(k.clone(), v.clone());
            }
        }
        let get = |k: &str| merged.get(k).map(|s| s.as_str());
        let mut model: ModelSpec = get("model").expect("defaulted").parse()?;
        if let Some(v) = get("scale") {
            model.scale = Some(parse_rational_i128("scale", v)?);
        }
        model.power = get("power")
            .expect("defaulted")
            .parse()
            .map_err(|_| Error::Config("power: not a non-negative integer".into()))?;
        if let Some(v) = get("lattice-scales") {
            model.lattice_scales = Some(parse_rational_list_i64("lattice-scales", v)?);
        }
        let mode = match get("mode").expect("defaulted") {
            "paper" => PrefactorMode::Paper,
            "consistent" => PrefactorMode::Consistent,
            other => {
                return Err(Error::Config(format!(
                    "mode: '{other}' is neither paper nor consistent"
                )))
            }
        };
        Ok(ExperimentConfig {
            experiment,
            model,
            lambda_max: parse_f64("lambda-max", get("lambda-max").expect("defaulted"))?,
            t_grid: parse_f64_list("t", get("t").expect("defaulted"))?,
            s_values: parse_complex_list("s", get("s").expect("defaulted"))?,
            epsilons: parse_f64_list("epsilon", get("epsilon").expect("defaulted"))?,
            tolerance: parse_f64("tolerance", get("tolerance").expect("defaulted"))?,
            series_terms: get("series-terms")
                .expect("defaulted")
                .parse()
                .map_err(|_| Error::Config("series-terms: not a non-negative integer".into()))?,
            resolution: get("resolution")
                .expect("defaulted")
                .parse()
                .map_err(|_| Error::Config("resolution: not a non-negative integer".into()))?,
            r_cut: parse_f64("r-cut", get("r-cut").expect("defaulted"))?,
            grid_points: get("grid-points")
                .expect("defaulted")
                .parse()
                .map_err(|_| Error::Config("grid-points: not a non-negative integer".into()))?,
            kernel_t: parse_f64("kernel-t", get("kernel-t").expect("defaulted"))?,
            mode,
            residue: parse_bool("residue", get("residue").expect("defaulted"))?,
            csv: get("csv").map(PathBuf::from),
            json: get("json").map(PathBuf::from),
        })
    }

    /// Pre-run diagnostics; empty iff `run` would pass validation. Documented
    /// ranges: factor dimension 1..=3, cutoffs in (0, 1e9], epsilon in (0, 1],
    /// all tolerances and grids positive.
    pub fn validate(&self) -> Vec<Diagnostic> {
        fn push_range(out: &mut Vec<Diagnostic>, cond: bool, msg: String) {
            if cond {
                out.push(Diagnostic { code: codes::PARAM_RANGE, message: msg });
            }
        }
        let mut out = Vec::new();
        for (fam, n) in &self.model.factors {
            let label = match fam {
                Family::Torus => "torus",
                Family::Heisenberg => "heisenberg",
            };
            push_range(
                &mut out,
                *n == 0 || *n > 3,
                format!("{label} dimension {n} outside documented range 1..=3"),
            );
        }
        push_range(
            &mut out,
            !(self.lambda_max > 0.0 && self.lambda_max <= 1e9),
            format!("lambda-max {} outside (0, 1e9]", self.lambda_max),
        );
        push_range(&mut out, self.t_grid.is_empty(), "empty t grid".into());
        for &t in &self.t_grid {
            push_range(&mut out, !(t > 0.0 && t.is_finite()), format!("t value {t} not positive"));
        }
        push_range(&mut out, self.epsilons.is_empty(), "empty epsilon list".into());
        for &e in &self.epsilons {
            push_range(&mut out, !(e > 0.0 && e <= 1.0), format!("epsilon {e} outside (0, 1]"));
        }
        push_range(
            &mut out,
            !(self.tolerance > 0.0 && self.tolerance.is_finite()),
            format!("tolerance {} not positive", self.tolerance),
        );
        push_range(&mut out, self.series_terms == 0, "series-terms must be >= 1".into());
        push_range(&mut out, self.resolution == 0, "resolution must be >= 1".into());
        push_range(&mut out, !(self.r_cut > 0.0), format!("r-cut {} not positive", self.r_cut));
        push_range(&mut out, self.grid_points == 0, "grid-points must be >= 1".into());
        push_range(&mut out, !(self.kernel_t > 0.0), format!("kernel-t {} not positive", self.kernel_t));
        push_range(&mut out, self.model.power == 0, "power must be >= 1".into());
        if let Some(c) = self.model.scale {
            push_range(&mut out, c <= Ratio::from_integer(0), format!("scale {c} not positive"));
        }
        if let Some(scales) = &self.model.lattice_scales {
            if *scales != self.model.canonical_scales() {
                out.push(Diagnostic {
                    code: codes::UNSUPPORTED_LATTICE,
                    message: format!(
                        "lattice scales {scales:?} differ from the supported canonical ones"
                    ),
                });
            }
        }
        if self.experiment == Experiment::Zeta {
            match self.model.build() {
                Ok(m) => {
                    let alpha = m.q_over_nu();
                    for s in &self.s_values {
                        if s.im == 0.0 && (s.re - alpha).abs() < 1e-12 {
                            out.push(Diagnostic {
                                code: codes::AT_POLE,
                                message: format!(
                                    "s = {} is the pole Q/nu = {alpha} of the spectral zeta",
                                    s.re
                                ),
                            });
                        }
                    }
                }
                Err(e) => push_range(&mut out, true, format!("model rejected: {e}")),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_specs_parse_and_build() {
        let m: ModelSpec = "torus:2".parse().unwrap();
        assert_eq!(m.factors, vec![(Family::Torus, 2)]);
        assert_eq!(m.build().unwrap().q_over_nu(), 1.0);
        let h: ModelSpec = "heisenberg:1".parse().unwrap();
        assert_eq!(h.build().unwrap().q_over_nu(), 2.0);
        let p: ModelSpec = "product:torus:1,torus:1".parse().unwrap();
        assert_eq!(p.factors.len(), 2);
        assert_eq!(p.build().unwrap().q_over_nu(), 1.0);
        assert_eq!(p.to_string(), "product:torus:1,torus:1");
        assert!("circle:1".parse::<ModelSpec>().is_err());
        assert!("torus".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn scaled_model_spec_transforms_spectrum() {
        let mut m: ModelSpec = "torus:1".parse().unwrap();
        m.scale = Some(Ratio::new(3, 2));
        m.power = 2;
        let built = m.build().unwrap();
        // lambda -> (3/2) lambda^2 turns 4 pi^2 into (3/2) 16 pi^4.
        let s = built.spectrum(4000.0).unwrap();
        let lam1 = s.spectral_gap().unwrap();
        let pi = std::f64::consts::PI;
        assert!((lam1 - 1.5 * 16.0 * pi.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn key_value_parsing_rejects_junk() {
        let good = "# comment\nmodel = heisenberg:1\nlambda-max = 20000\n\nresidue = false\n";
        let map = parse_key_value_file(good).unwrap();
        assert_eq!(map["model"], "heisenberg:1");
        assert_eq!(map.len(), 3);
        assert!(parse_key_value_file("bogus-key = 1").is_err());
        assert!(parse_key_value_file("model torus:1").is_err());
        assert!(parse_key_value_file("model = a\nmodel = b").is_err());
    }

    #[test]
    fn layering_flags_over_file_over_defaults() {
        let file = parse_key_value_file("lambda-max = 20000\nmodel = heisenberg:1").unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("lambda-max".to_string(), "500".to_string());
        let cfg = ExperimentConfig::from_sources(Experiment::Weyl, &[&file, &flags]).unwrap();
        assert_eq!(cfg.lambda_max, 500.0);
        assert_eq!(cfg.model.to_string(), "heisenberg:1");
        assert_eq!(cfg.grid_points, 16);
        assert!(cfg.validate().is_empty());
    }

    #[test]
    fn complex_list_forms() {
        let mut flags = BTreeMap::new();
        flags.insert("s".to_string(), "0, 2, 0.5:-1.25".to_string());
        let cfg = ExperimentConfig::from_sources(Experiment::Zeta, &[&flags]).unwrap();
        assert_eq!(cfg.s_values.len(), 3);
        assert_eq!(cfg.s_values[2], Complex64::new(0.5, -1.25));
    }

    #[test]
    fn validation_codes() {
        let mut flags = BTreeMap::new();
        flags.insert("lambda-max".to_string(), "-3".to_string());
        let cfg = ExperimentConfig::from_sources(Experiment::Weyl, &[&flags]).unwrap();
        let diags = cfg.validate();
        assert!(diags.iter().any(|d| d.code == codes::PARAM_RANGE));

        let mut flags = BTreeMap::new();
        flags.insert("s".to_string(), "0.5".to_string());
        let cfg = ExperimentConfig::from_sources(Experiment::Zeta, &[&flags]).unwrap();
        assert!(cfg.validate().iter().any(|d| d.code == codes::AT_POLE));

        let mut flags = BTreeMap::new();
        flags.insert("model".to_string(), "heisenberg:1".to_string());
        flags.insert("lattice-scales".to_string(), "1,1,1".to_string());
        let cfg = ExperimentConfig::from_sources(Experiment::Theta, &[&flags]).unwrap();
        assert!(cfg
            .validate()
            .iter()
            .any(|d| d.code == codes::UNSUPPORTED_LATTICE));
        // The canonical scales pass.
        let mut flags = BTreeMap::new();
        flags.insert("model".to_string(), "heisenberg:1".to_string());
        flags.insert("lattice-scales".to_string(), "1,1,1/2".to_string());
        let cfg = ExperimentConfig::from_sources(Experiment::Theta, &[&flags]).unwrap();
        assert!(cfg.validate().is_empty());
    }
}
