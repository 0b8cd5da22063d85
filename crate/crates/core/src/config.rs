//! TOML run configuration.
//!
//! ```toml
//! [model]            # dimensionless coefficients, any subset
//! nu1 = 0.1
//! [dimensional]      # optional; when present it replaces [model]
//! crho_scale = 0.5
//! [grid]
//! n = 32
//! [time]
//! dt = 0.01
//! t_end = 500.0
//! record_every = 100
//! [initial]
//! uniform = [1.0, 1.0, 1.0, 1.0]   # v1, v2, sigma1, sigma2
//! # or: profile_file = "init.csv" and sigma = [1.0, 1.0]
//! [output]
//! dir = "out"
//! [experiment]
//! mode = "run"       # run | sweep | verify
//! threshold = 1e-3
//! seed = 0
//! c_rho = [0.2, 0.4]
//! f = [0.2, 0.4]
//! suites = ["all"]
//! ```
//!
//! Every key is optional and unknown keys are rejected.

use crate::discretization::GridSpec;
use crate::experiments::DEFAULT_THRESHOLD;
use crate::model::{derive_dimensionless, DimensionalParams, ModelParams, State};
use crate::stepper::TimeSpec;
use crate::verification::Suite;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_N: usize = 32;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_T_END: f64 = 500.0;
pub const DEFAULT_RECORD_EVERY: usize = 100;
pub const DEFAULT_INITIAL: [f64; 4] = [1.0, 1.0, 1.0, 1.0];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown key `{key}` at line {line}, column {column}")]
    UnknownKey {
        key: String,
        line: usize,
        column: usize,
    },
    #[error("invalid `{key}`: {constraint}")]
    Validation { key: String, constraint: String },
}

fn invalid(key: &str, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        constraint: constraint.into(),
    }
}

// ---------------------------------------------------------------------------
// file layout

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<RawModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimensional: Option<RawDimensional>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    time: RawTime,
    #[serde(default)]
    initial: RawInitial,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    experiment: RawExperiment,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    nu1: Option<f64>,
    nu2: Option<f64>,
    r1_tilde: Option<f64>,
    r2: Option<f64>,
    s1_tilde: Option<f64>,
    s2: Option<f64>,
    q1: Option<f64>,
    q2: Option<f64>,
    omega: Option<f64>,
    beta: Option<f64>,
    b_scale: Option<f64>,
    f_tilde: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDimensional {
    a_scale: Option<f64>,
    b_scale: Option<f64>,
    cu_scale: Option<f64>,
    crho_scale: Option<f64>,
    r1: Option<f64>,
    s1: Option<f64>,
    f: Option<f64>,
    nu1: Option<f64>,
    nu2: Option<f64>,
    r2: Option<f64>,
    s2: Option<f64>,
    omega: Option<f64>,
    beta: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: Option<f64>,
    t_end: Option<f64>,
    record_every: Option<usize>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(skip_serializing_if = "Option::is_none")]
    uniform: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<[f64; 2]>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    dir: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    mode: Option<Mode>,
    threshold: Option<f64>,
    seed: Option<u64>,
    c_rho: Option<Vec<f64>>,
    f: Option<Vec<f64>>,
    suites: Option<Vec<String>>,
}

// ---------------------------------------------------------------------------
// validated configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Run,
    Sweep,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelChoice {
    Dimensionless(ModelParams),
    Dimensional(DimensionalParams),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `(v1, v2, sigma1, sigma2)`
    Uniform([f64; 4]),
    /// CSV with columns `x,v1,v2` on the grid nodes; path already resolved
    /// against the config file's directory.
    Profile { path: PathBuf, sigma: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub threshold: f64,
    pub seed: u64,
    pub c_rho: Vec<f64>,
    pub f: Vec<f64>,
    pub suites: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelChoice,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub initial: InitialData,
    pub output_dir: Option<PathBuf>,
    pub experiment: ExperimentConfig,
}

/// A loaded configuration and the keys that fell back to defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub defaults_applied: Vec<String>,
}

impl RunConfig {
    /// Dimensionless coefficients, derived when the dimensional block is used.
    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let p = match self.model {
            ModelChoice::Dimensionless(p) => p,
            ModelChoice::Dimensional(d) => {
                derive_dimensionless(&d).map_err(|e| invalid("dimensional", e.to_string()))?
            }
        };
        p.validate().map_err(|e| invalid("model", e.to_string()))?;
        Ok(p)
    }

    /// Dimensional base for sweeps; the default scales when only `[model]` was
    /// given.
    pub fn dimensional_base(&self) -> DimensionalParams {
        match self.model {
            ModelChoice::Dimensional(d) => d,
            ModelChoice::Dimensionless(_) => DimensionalParams::default(),
        }
    }

    pub fn initial_state(&self) -> Result<State, ConfigError> {
        let nodes = self.grid.nodes();
        match &self.initial {
            InitialData::Uniform([v1, v2, s1, s2]) => Ok(State::uniform(nodes, *v1, *v2, *s1, *s2)),
            InitialData::Profile { path, sigma } => {
                let (v1, v2) = read_profile(path, &self.grid)?;
                Ok(State {
                    v1,
                    v2,
                    sigma1: sigma[0],
                    sigma2: sigma[1],
                    t: 0.0,
                })
            }
        }
    }

    pub fn suites(&self) -> Result<Vec<Suite>, ConfigError> {
        self.experiment
            .suites
            .iter()
            .map(|s| s.parse().map_err(|e: crate::verification::VerifyError| invalid("experiment.suites", e.to_string())))
            .collect()
    }

    /// Fully explicit TOML that loads back to an equal configuration.
    pub fn echo(&self) -> String {
        let (model, dimensional) = match self.model {
            ModelChoice::Dimensionless(p) => (
                Some(RawModel {
                    nu1: Some(p.nu1),
                    nu2: Some(p.nu2),
                    r1_tilde: Some(p.r1_tilde),
                    r2: Some(p.r2),
                    s1_tilde: Some(p.s1_tilde),
                    s2: Some(p.s2),
                    q1: Some(p.q1),
                    q2: Some(p.q2),
                    omega: Some(p.omega),
                    beta: Some(p.beta),
                    b_scale: Some(p.b_scale),
                    f_tilde: Some(p.f_tilde),
                }),
                None,
            ),
            ModelChoice::Dimensional(d) => (
                None,
                Some(RawDimensional {
                    a_scale: Some(d.a_scale),
                    b_scale: Some(d.b_scale),
                    cu_scale: Some(d.cu_scale),
                    crho_scale: Some(d.crho_scale),
                    r1: Some(d.r1),
                    s1: Some(d.s1),
                    f: Some(d.f),
                    nu1: Some(d.nu1),
                    nu2: Some(d.nu2),
                    r2: Some(d.r2),
                    s2: Some(d.s2),
                    omega: Some(d.omega),
                    beta: Some(d.beta),
                }),
            ),
        };
        let initial = match &self.initial {
            InitialData::Uniform(u) => RawInitial {
                uniform: Some(*u),
                ..Default::default()
            },
            InitialData::Profile { path, sigma } => RawInitial {
                profile_file: Some(path.clone()),
                sigma: Some(*sigma),
                ..Default::default()
            },
        };
        let e = &self.experiment;
        let raw = RawConfig {
            model,
            dimensional,
            grid: RawGrid {
                n: Some(self.grid.intervals()),
            },
            time: RawTime {
                dt: Some(self.time.dt),
                t_end: Some(self.time.t_end),
                record_every: Some(self.time.record_every),
            },
            initial,
            output: RawOutput {
                dir: self.output_dir.clone(),
            },
            experiment: RawExperiment {
                mode: Some(e.mode),
                threshold: Some(e.threshold),
                seed: Some(e.seed),
                c_rho: Some(e.c_rho.clone()),
                f: Some(e.f.clone()),
                suites: Some(e.suites.clone()),
            },
        };
        toml::to_string(&raw).expect("config serializes")
    }

    /// Hex SHA-256 of [`RunConfig::echo`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.echo().as_bytes()))
    }
}

/// Default sweep axes: `C_rho = 0.2, 0.4, ..., 2.0` and `f = 0.2, 0.4, ..., 3.0`.
pub fn default_axes() -> (Vec<f64>, Vec<f64>) {
    let c = (1..=10).map(|k| 0.2 * k as f64).collect();
    let f = (1..=15).map(|k| 0.2 * k as f64).collect();
    (c, f)
}

// ---------------------------------------------------------------------------
// loading

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let loaded = parse_config(&text, base)?;
    if !loaded.defaults_applied.is_empty() {
        log::info!("defaults applied: {}", loaded.defaults_applied.join(", "));
    }
    Ok(loaded)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.split("unknown field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

/// Parses configuration text; relative profile paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<LoadedConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        match unknown_key(e.message()) {
            Some(key) => ConfigError::UnknownKey { key, line, column },
            None => ConfigError::Parse {
                line,
                column,
                message: e.message().trim().to_string(),
            },
        }
    })?;
    resolve(raw, base)
}

struct Defaults(Vec<String>);

impl Defaults {
    fn take<T>(&mut self, key: &str, value: Option<T>, default: T) -> T {
        value.unwrap_or_else(|| {
            self.0.push(key.to_string());
            default
        })
    }
}

fn resolve(raw: RawConfig, base: &Path) -> Result<LoadedConfig, ConfigError> {
    let mut d = Defaults(Vec::new());

    let model = match (&raw.dimensional, &raw.model) {
        (Some(dim), model) => {
            if model.is_some() {
                log::warn!("[dimensional] present: [model] is ignored");
            }
            let t = DimensionalParams::default();
            let dp = DimensionalParams {
                a_scale: d.take("dimensional.a_scale", dim.a_scale, t.a_scale),
                b_scale: d.take("dimensional.b_scale", dim.b_scale, t.b_scale),
                cu_scale: d.take("dimensional.cu_scale", dim.cu_scale, t.cu_scale),
                crho_scale: d.take("dimensional.crho_scale", dim.crho_scale, t.crho_scale),
                r1: d.take("dimensional.r1", dim.r1, t.r1),
                s1: d.take("dimensional.s1", dim.s1, t.s1),
                f: d.take("dimensional.f", dim.f, t.f),
                nu1: d.take("dimensional.nu1", dim.nu1, t.nu1),
                nu2: d.take("dimensional.nu2", dim.nu2, t.nu2),
                r2: d.take("dimensional.r2", dim.r2, t.r2),
                s2: d.take("dimensional.s2", dim.s2, t.s2),
                omega: d.take("dimensional.omega", dim.omega, t.omega),
                beta: d.take("dimensional.beta", dim.beta, t.beta),
            };
            let p = derive_dimensionless(&dp).map_err(|e| invalid("dimensional", e.to_string()))?;
            log::info!("derived dimensionless coefficients: {p:?}");
            ModelChoice::Dimensional(dp)
        }
        (None, model) => {
            let m = model.clone().unwrap_or_default();
            let t = ModelParams::default();
            ModelChoice::Dimensionless(ModelParams {
                nu1: d.take("model.nu1", m.nu1, t.nu1),
                nu2: d.take("model.nu2", m.nu2, t.nu2),
                r1_tilde: d.take("model.r1_tilde", m.r1_tilde, t.r1_tilde),
                r2: d.take("model.r2", m.r2, t.r2),
                s1_tilde: d.take("model.s1_tilde", m.s1_tilde, t.s1_tilde),
                s2: d.take("model.s2", m.s2, t.s2),
                q1: d.take("model.q1", m.q1, t.q1),
                q2: d.take("model.q2", m.q2, t.q2),
                omega: d.take("model.omega", m.omega, t.omega),
                beta: d.take("model.beta", m.beta, t.beta),
                b_scale: d.take("model.b_scale", m.b_scale, t.b_scale),
                f_tilde: d.take("model.f_tilde", m.f_tilde, t.f_tilde),
            })
        }
    };

    let n = d.take("grid.n", raw.grid.n, DEFAULT_N);
    let grid = GridSpec::new(n).map_err(|e| invalid("grid.n", e.to_string()))?;
    let time = TimeSpec::new(
        d.take("time.dt", raw.time.dt, DEFAULT_DT),
        d.take("time.t_end", raw.time.t_end, DEFAULT_T_END),
        d.take("time.record_every", raw.time.record_every, DEFAULT_RECORD_EVERY),
    )
    .map_err(|e| invalid("time", e.to_string()))?;

    let initial = match (raw.initial.uniform, raw.initial.profile_file) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                "initial",
                "give exactly one of `uniform` and `profile_file`",
            ))
        }
        (Some(u), None) => {
            if raw.initial.sigma.is_some() {
                return Err(invalid("initial.sigma", "only allowed with `profile_file`"));
            }
            InitialData::Uniform(u)
        }
        (None, Some(path)) => InitialData::Profile {
            path: if path.is_absolute() { path } else { base.join(path) },
            sigma: d.take(
                "initial.sigma",
                raw.initial.sigma,
                [DEFAULT_INITIAL[2], DEFAULT_INITIAL[3]],
            ),
        },
        (None, None) => {
            if raw.initial.sigma.is_some() {
                return Err(invalid("initial.sigma", "only allowed with `profile_file`"));
            }
            InitialData::Uniform(d.take("initial.uniform", None, DEFAULT_INITIAL))
        }
    };
    let init_values: Vec<f64> = match &initial {
        InitialData::Uniform(u) => u.to_vec(),
        InitialData::Profile { sigma, .. } => sigma.to_vec(),
    };
    if init_values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("initial", "values must be finite and >= 0"));
    }

    let (c_axis, f_axis) = default_axes();
    let e = raw.experiment;
    let experiment = ExperimentConfig {
        mode: d.take("experiment.mode", e.mode, Mode::Run),
        threshold: d.take("experiment.threshold", e.threshold, DEFAULT_THRESHOLD),
        seed: d.take("experiment.seed", e.seed, 0),
        c_rho: d.take("experiment.c_rho", e.c_rho, c_axis),
        f: d.take("experiment.f", e.f, f_axis),
        suites: d.take("experiment.suites", e.suites, vec!["all".to_string()]),
    };
    if !(experiment.threshold.is_finite() && experiment.threshold >= 0.0) {
        return Err(invalid("experiment.threshold", "must be finite and >= 0"));
    }
    for (key, axis) in [("experiment.c_rho", &experiment.c_rho), ("experiment.f", &experiment.f)] {
        if axis.is_empty() {
            return Err(invalid(key, "must be nonempty"));
        }
        if axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid(key, "must be strictly increasing"));
        }
    }

    let config = RunConfig {
        model,
        grid,
        time,
        initial,
        output_dir: raw.output.dir,
        experiment,
    };
    config.params()?;
    config.suites()?;
    Ok(LoadedConfig {
        config,
        defaults_applied: d.0,
    })
}

/// Reads `x,v1,v2` rows and checks they sit on the grid nodes.
pub fn read_profile(path: &Path, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Row {
        x: f64,
        v1: f64,
        v2: f64,
    }
    let key = "initial.profile_file";
    let mut reader = csv::Reader::from_path(path).map_err(|e| invalid(key, format!("{}: {e}", path.display())))?;
    let mut v1 = Vec::new();
    let mut v2 = Vec::new();
    for (j, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| invalid(key, format!("{}: {e}", path.display())))?;
        if j >= grid.nodes() {
            return Err(invalid(key, format!("more than {} rows", grid.nodes())));
        }
        if (row.x - grid.x(j)).abs() > 1e-9 {
            return Err(invalid(key, format!("row {} has x = {}, expected {}", j + 1, row.x, grid.x(j))));
        }
        if !(row.v1.is_finite() && row.v2.is_finite()) {
            return Err(invalid(key, format!("row {} is not finite", j + 1)));
        }
        v1.push(row.v1);
        v2.push(row.v2);
    }
    if v1.len() != grid.nodes() {
        return Err(invalid(key, format!("{} rows, expected {}", v1.len(), grid.nodes())));
    }
    Ok((v1, v2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(text: &str) -> Result<LoadedConfig, ConfigError> {
        parse_config(text, Path::new("."))
    }

    #[test]
    fn table_one_verbatim() {
        let text = r#"
            [model]
            nu1 = 0.1
            nu2 = 0.1
            r1_tilde = 0.5
            r2 = 0.5
            s1_tilde = 1.0
            s2 = 1.0
            q1 = 1.0
            q2 = 1.0
            omega = 0.1
            beta = 2.0
            b_scale = 1.0
            f_tilde = 1.0
            [grid]
            n = 32
            [time]
            dt = 0.01
        "#;
        let c = parse(text).unwrap().config;
        let p = c.params().unwrap();
        assert_eq!(c.time.dt, 0.01);
        assert_eq!(c.grid.dx(), 1.0 / 32.0);
        assert_eq!((p.nu1, p.nu2, p.r1_tilde, p.r2), (0.1, 0.1, 0.5, 0.5));
        assert_eq!((p.s2, p.q1, p.omega, p.f_tilde, p.beta), (1.0, 1.0, 0.1, 1.0, 2.0));
        assert_eq!(p, ModelParams::default());
    }

    #[test]
    fn empty_file_applies_all_defaults() {
        let l = parse("").unwrap();
        assert_eq!(l.config.params().unwrap(), ModelParams::default());
        assert!(l.defaults_applied.contains(&"model.nu1".to_string()));
        assert!(l.defaults_applied.contains(&"grid.n".to_string()));
        assert!(l.defaults_applied.contains(&"initial.uniform".to_string()));
        assert_eq!(l.config.initial, InitialData::Uniform(DEFAULT_INITIAL));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("[model]\nnu3 = 0.2\n").unwrap_err();
        match &err {
            ConfigError::UnknownKey { key, line, .. } => {
                assert_eq!(key, "nu3");
                assert_eq!(*line, 2);
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("nu3"));
        assert!(matches!(parse("[gird]\nn = 3\n"), Err(ConfigError::UnknownKey { .. })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("[grid]\nn = = 3\n") {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_failures() {
        assert!(matches!(parse("[grid]\nn = 2\n"), Err(ConfigError::Validation { key, .. }) if key == "grid.n"));
        assert!(matches!(parse("[model]\nnu1 = -1.0\n"), Err(ConfigError::Validation { .. })));
        assert!(matches!(parse("[time]\ndt = 0.0\n"), Err(ConfigError::Validation { .. })));
        assert!(matches!(
            parse("[initial]\nuniform = [1.0, 1.0, 1.0, 1.0]\nprofile_file = \"a.csv\"\n"),
            Err(ConfigError::Validation { key, .. }) if key == "initial"
        ));
        assert!(matches!(
            parse("[experiment]\nc_rho = [0.4, 0.2]\n"),
            Err(ConfigError::Validation { key, .. }) if key == "experiment.c_rho"
        ));
        assert!(matches!(parse("[experiment]\nsuites = [\"bogus\"]\n"), Err(ConfigError::Validation { .. })));
        assert!(matches!(parse("[experiment]\nmode = \"fly\"\n"), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn dimensional_block_wins() {
        let l = parse("[model]\nf_tilde = 9.0\n[dimensional]\ncrho_scale = 0.5\nf = 2.0\n").unwrap();
        let p = l.config.params().unwrap();
        assert_eq!(p.f_tilde, 2.0);
        assert_eq!(p.q2, 2.0);
        assert_eq!(p.s1_tilde, 0.5);
        assert_eq!(l.config.dimensional_base().crho_scale, 0.5);
    }

    #[test]
    fn echo_round_trips() {
        for text in [
            "",
            "[dimensional]\ncrho_scale = 0.3\n[experiment]\nmode = \"sweep\"\nc_rho = [0.2]\nf = [0.1, 0.7]\n",
            "[model]\nomega = 0.2\n[output]\ndir = \"runs/a\"\n[experiment]\nmode = \"verify\"\nsuites = [\"ghost\", \"poles\"]\nseed = 99\n",
        ] {
            let c = parse(text).unwrap().config;
            let again = parse(&c.echo()).unwrap();
            assert_eq!(again.config, c);
            assert!(again.defaults_applied.is_empty(), "{:?}", again.defaults_applied);
            assert_eq!(again.config.hash(), c.hash());
        }
    }

    #[test]
    fn profile_file_is_read_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = fs::File::create(dir.path().join("init.csv")).unwrap();
        writeln!(f, "x,v1,v2").unwrap();
        for j in 0..=4 {
            writeln!(f, "{},{},{}", j as f64 / 4.0, j, 2 * j).unwrap();
        }
        drop(f);
        let cfg = dir.path().join("run.toml");
        fs::write(&cfg, "[grid]\nn = 4\n[initial]\nprofile_file = \"init.csv\"\nsigma = [0.5, 0.25]\n").unwrap();
        let c = load_config(&cfg).unwrap().config;
        let s = c.initial_state().unwrap();
        assert_eq!(s.v1, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.v2, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        assert_eq!((s.sigma1, s.sigma2), (0.5, 0.25));

        fs::write(&cfg, "[grid]\nn = 8\n[initial]\nprofile_file = \"init.csv\"\n").unwrap();
        let c = load_config(&cfg).unwrap().config;
        assert!(c.initial_state().is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_config(Path::new("/nonexistent/x.toml")), Err(ConfigError::Io { .. })));
    }

    #[test]
    fn default_axes_match_sweep_protocol() {
        let (c, f) = default_axes();
        assert_eq!((c.len(), f.len()), (10, 15));
        assert!((c[9] - 2.0).abs() < 1e-12 && (f[14] - 3.0).abs() < 1e-12);
    }
}
