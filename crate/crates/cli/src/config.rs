use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use dcext::Tolerances;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterKind {
    Strip,
    Elltwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceKind {
    Majorant,
    Lift,
    Kuzeliky,
    #[command(name = "construct-D")]
    #[serde(rename = "construct-D")]
    ConstructD,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Verb {
    /// Extend a d.c. mapping or a convex function beyond its domain.
    Extend,
    /// Run the sampled checks on a function over a set.
    Verify,
    #[command(subcommand)]
    Counterexample(CounterKind),
    #[command(subcommand)]
    Subspace(SubspaceKind),
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verb::Extend => f.write_str("extend"),
            Verb::Verify => f.write_str("verify"),
            Verb::Counterexample(CounterKind::Strip) => f.write_str("counterexample strip"),
            Verb::Counterexample(CounterKind::Elltwo) => f.write_str("counterexample elltwo"),
            Verb::Subspace(SubspaceKind::Majorant) => f.write_str("subspace majorant"),
            Verb::Subspace(SubspaceKind::Lift) => f.write_str("subspace lift"),
            Verb::Subspace(SubspaceKind::Kuzeliky) => f.write_str("subspace kuzeliky"),
            Verb::Subspace(SubspaceKind::ConstructD) => f.write_str("subspace construct-D"),
        }
    }
}

impl Verb {
    fn parse(s: &str) -> Option<Verb> {
        let words: Vec<&str> = s.split_whitespace().collect();
        Some(match words.as_slice() {
            ["extend"] => Verb::Extend,
            ["verify"] => Verb::Verify,
            ["counterexample", "strip"] => Verb::Counterexample(CounterKind::Strip),
            ["counterexample", "elltwo"] => Verb::Counterexample(CounterKind::Elltwo),
            ["subspace", "majorant"] => Verb::Subspace(SubspaceKind::Majorant),
            ["subspace", "lift"] => Verb::Subspace(SubspaceKind::Lift),
            ["subspace", "kuzeliky"] => Verb::Subspace(SubspaceKind::Kuzeliky),
            ["subspace", "construct-D"] => Verb::Subspace(SubspaceKind::ConstructD),
            _ => return None,
        })
    }
}

impl Serialize for Verb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Flags shared by every verb. Each one overrides the matching config field.
#[derive(Clone, Debug, Default, Args)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Certificate tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Truncation dimension or number of sets.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub tau_list: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub csv_out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub report_out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendMethod {
    #[default]
    Radial,
    Lipschitz,
    FiniteDim,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendInput {
    #[serde(default)]
    pub method: ExtendMethod,
    pub function: Option<Value>,
    pub map: Option<Value>,
    pub control: Option<Value>,
    pub domain: Option<Value>,
    pub target: Option<Value>,
    pub exhaustion: Option<Vec<Value>>,
    pub lipschitz: Option<f64>,
    pub radius: Option<f64>,
    pub stages: Option<usize>,
    #[serde(default)]
    pub probes: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyInput {
    pub function: Option<Value>,
    pub map: Option<Value>,
    pub control: Option<Value>,
    pub domain: Option<Value>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripInput {
    pub target: Option<[f64; 2]>,
    pub cap: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllTwoInput {
    pub radius: Option<f64>,
    pub lambda: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceInput {
    pub dim: Option<usize>,
    pub y_basis: Option<Vec<Vec<f64>>>,
    /// Convex function on `Y` coordinates.
    pub function: Option<Value>,
    /// Sets on `X`; defaults to `U(0, n)`, `n = 1..=N`.
    pub d_sets: Option<Vec<Value>>,
    /// Sets on `Y` coordinates; defaults to `U(0, n)`, `n = 1..=N`.
    pub c_sets: Option<Vec<Value>>,
    pub x: Option<Vec<f64>>,
    pub r: Option<f64>,
    pub z_width: Option<f64>,
    pub radius: Option<f64>,
    pub directions: Option<usize>,
    pub inflation: Option<f64>,
    pub coverage_radius: Option<f64>,
    pub coverage_step: Option<f64>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub verb: Option<String>,
    pub seed: Option<u64>,
    pub tol_dist: Option<f64>,
    pub tol_mink: Option<f64>,
    pub cert_tol: Option<f64>,
    pub samples: Option<usize>,
    #[serde(alias = "N")]
    pub n: Option<usize>,
    pub tau_list: Option<Vec<f64>>,
    pub csv_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub verbose: Option<bool>,
    pub extend: Option<ExtendInput>,
    pub verify: Option<VerifyInput>,
    pub strip: Option<StripInput>,
    pub elltwo: Option<EllTwoInput>,
    pub subspace: Option<SubspaceInput>,
}

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_N: usize = 64;
pub const DEFAULT_SUBSPACE_SETS: usize = 6;
pub const DEFAULT_TAU_LIST: [f64; 3] = [1.0, 10.0, 100.0];

/// Fully resolved run configuration, echoed into the report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub verb: Verb,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub tol_dist: f64,
    pub tol_mink: f64,
    pub cert_tol: f64,
    pub samples: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub tau_list: Vec<f64>,
    pub csv_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
    pub jobs: usize,
    pub verbose: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extend: Option<ExtendInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strip: Option<StripInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elltwo: Option<EllTwoInput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceInput>,
}

impl RunConfig {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            dist: self.tol_dist,
            mink: self.tol_mink,
            cert: self.cert_tol,
        }
    }

    /// Merges the config file (if any) with the flags and validates the result.
    pub fn resolve(verb: Option<Verb>, flags: Flags) -> Result<RunConfig, CliError> {
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let file_verb = match &file.verb {
            Some(s) => Some(Verb::parse(s).ok_or_else(|| CliError::usage("verb", format!("unknown verb {s:?}")))?),
            None => None,
        };
        let verb = verb
            .or(file_verb)
            .ok_or_else(|| CliError::usage("verb", "no verb given on the command line or in the config"))?;
        let defaults = Tolerances::default();
        let cfg = RunConfig {
            verb,
            config_path: flags.config,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            tol_dist: file.tol_dist.unwrap_or(defaults.dist),
            tol_mink: file.tol_mink.unwrap_or(defaults.mink),
            cert_tol: flags.tol.or(file.cert_tol).unwrap_or(defaults.cert),
            samples: flags.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            n: flags.n.or(file.n).unwrap_or(match verb {
                Verb::Subspace(_) => DEFAULT_SUBSPACE_SETS,
                _ => DEFAULT_N,
            }),
            tau_list: flags.tau_list.or(file.tau_list).unwrap_or_else(|| DEFAULT_TAU_LIST.to_vec()),
            csv_out: flags.csv_out.or(file.csv_out),
            report_out: flags.report_out.or(file.report_out),
            jobs: flags.jobs.or(file.jobs).unwrap_or(1),
            verbose: flags.verbose || file.verbose.unwrap_or(false),
            extend: file.extend,
            verify: file.verify,
            strip: file.strip,
            elltwo: file.elltwo,
            subspace: file.subspace,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("tol_dist", self.tol_dist), ("tol_mink", self.tol_mink), ("cert_tol", self.cert_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::usage(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.samples == 0 {
            return Err(CliError::usage("samples", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(CliError::usage("N", "must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(CliError::usage("jobs", "must be at least 1"));
        }
        for (name, p) in [("csv_out", &self.csv_out), ("report_out", &self.report_out)] {
            if let Some(p) = p {
                check_output_path(name, p)?;
            }
        }
        match self.verb {
            Verb::Extend => {
                let e = self.extend.as_ref().ok_or_else(|| CliError::usage("extend", "section missing"))?;
                if e.domain.is_none() {
                    return Err(CliError::usage("extend.domain", "missing"));
                }
                match e.method {
                    ExtendMethod::Radial => {
                        if e.target.is_none() {
                            return Err(CliError::usage("extend.target", "missing"));
                        }
                        require_function_or_map("extend", e.function.is_some(), e.map.is_some())?;
                    }
                    ExtendMethod::FiniteDim => {
                        require_function_or_map("extend", e.function.is_some(), e.map.is_some())?;
                        positive("extend.radius", e.radius.ok_or_else(|| CliError::usage("extend.radius", "missing"))?)?;
                    }
                    ExtendMethod::Lipschitz => {
                        if e.function.is_none() {
                            return Err(CliError::usage("extend.function", "missing"));
                        }
                        positive("extend.lipschitz", e.lipschitz.ok_or_else(|| CliError::usage("extend.lipschitz", "missing"))?)?;
                    }
                }
                if e.map.is_some() && e.control.is_none() {
                    return Err(CliError::usage("extend.control", "required together with extend.map"));
                }
            }
            Verb::Verify => {
                let v = self.verify.as_ref().ok_or_else(|| CliError::usage("verify", "section missing"))?;
                if v.domain.is_none() {
                    return Err(CliError::usage("verify.domain", "missing"));
                }
                if v.function.is_none() && v.map.is_none() {
                    return Err(CliError::usage("verify.function", "give a function or a map with a control"));
                }
                if v.map.is_some() != v.control.is_some() {
                    return Err(CliError::usage("verify.control", "map and control go together"));
                }
            }
            Verb::Counterexample(CounterKind::Strip) => {
                if self.tau_list.is_empty() {
                    return Err(CliError::usage("tau_list", "empty"));
                }
                if self.tau_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) || self.tau_list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(CliError::usage("tau_list", "must be positive, finite and strictly increasing"));
                }
                if let Some(s) = &self.strip {
                    if let Some(t) = s.target {
                        if !(t[1] > 0.0) {
                            return Err(CliError::usage("strip.target", "must lie above the strip (second coordinate > 0)"));
                        }
                    }
                }
            }
            Verb::Counterexample(CounterKind::Elltwo) => {
                if self.n < 2 {
                    return Err(CliError::usage("N", "the ℓ₂ example needs N ≥ 2"));
                }
                if let Some(e) = &self.elltwo {
                    if let Some(r) = e.radius {
                        if !(r > 1.0) {
                            return Err(CliError::usage("elltwo.radius", "must exceed 1"));
                        }
                    }
                    if let Some(l) = e.lambda {
                        if !(l > 0.0 && l < 1.0) {
                            return Err(CliError::usage("elltwo.lambda", "must lie in (0, 1)"));
                        }
                    }
                }
            }
            Verb::Subspace(kind) => {
                let s = self.subspace.as_ref().ok_or_else(|| CliError::usage("subspace", "section missing"))?;
                let dim = s.dim.ok_or_else(|| CliError::usage("subspace.dim", "missing"))?;
                let basis = s.y_basis.as_ref().ok_or_else(|| CliError::usage("subspace.y_basis", "missing"))?;
                if basis.is_empty() || basis.iter().any(|b| b.len() != dim) {
                    return Err(CliError::usage("subspace.y_basis", format!("needs at least one vector of length {dim}")));
                }
                match kind {
                    SubspaceKind::Majorant if s.function.is_none() => {
                        return Err(CliError::usage("subspace.function", "missing"));
                    }
                    SubspaceKind::Kuzeliky => {
                        let x = s.x.as_ref().ok_or_else(|| CliError::usage("subspace.x", "missing"))?;
                        if x.len() != dim {
                            return Err(CliError::usage("subspace.x", format!("expected length {dim}")));
                        }
                        positive("subspace.r", s.r.ok_or_else(|| CliError::usage("subspace.r", "missing"))?)?;
                    }
                    _ => {}
                }
                for (name, v) in [("subspace.r", s.r), ("subspace.z_width", s.z_width), ("subspace.radius", s.radius)] {
                    if let Some(v) = v {
                        positive(name, v)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn require_function_or_map(section: &str, function: bool, map: bool) -> Result<(), CliError> {
    match (function, map) {
        (true, false) | (false, true) => Ok(()),
        _ => Err(CliError::usage(&format!("{section}.function"), "give exactly one of function and map")),
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::usage(name, format!("must be positive and finite, got {v}")))
    }
}

fn check_output_path(name: &str, p: &Path) -> Result<(), CliError> {
    if p.file_name().is_none() {
        return Err(CliError::usage(name, format!("{} is not a file path", p.display())));
    }
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() && !d.is_dir() => {
            Err(CliError::usage(name, format!("directory {} does not exist", d.display())))
        }
        _ => Ok(()),
    }
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::usage("config", format!("{} is empty", path.display())));
    }
    serde_json::from_str(&text).map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))
}
