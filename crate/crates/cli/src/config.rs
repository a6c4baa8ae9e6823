//! Run configuration: TOML files, bundled presets and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use distdp_core::dpflow::{FlowKind, Method};
use distdp_core::mdp::TransitionCheck;
use distdp_core::{CommGraph, Mat, MultiAgentProblem, PolicyEvalCore, Vector};
use serde::Deserialize;

pub const PRESETS: &[(&str, &str)] = &[("paper-sec5", include_str!("../presets/paper-sec5.toml"))];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, reason: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Central,
    V1,
    V2,
}

impl Algo {
    pub fn kind(self) -> FlowKind {
        match self {
            Algo::Central => FlowKind::Centralized,
            Algo::V1 => FlowKind::Version1,
            Algo::V2 => FlowKind::Version2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Euler,
    Rk4,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Method {
        match m {
            MethodName::Euler => Method::Euler,
            MethodName::Rk4 => Method::Rk4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Zeros,
    /// Uniform on `[-1, 1]` from a seeded generator.
    Random(u64),
    /// The full initial state in flow order.
    Values(Vec<f64>),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    gamma: Option<f64>,
    transition: Option<Vec<Vec<f64>>>,
    features: Option<Vec<Vec<f64>>>,
    rewards: Option<Vec<Vec<f64>>>,
    edges: Option<Vec<(i64, i64)>>,
    verbatim_transition: Option<bool>,
    state_weights: Option<Vec<f64>>,
}

impl RawProblem {
    fn overlay(&mut self, top: RawProblem) {
        macro_rules! take {
            ($($f:ident),*) => { $(if top.$f.is_some() { self.$f = top.$f; })* };
        }
        take!(
            gamma,
            transition,
            features,
            rewards,
            edges,
            verbatim_transition,
            state_weights
        );
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    algo: Option<Algo>,
    dt: Option<f64>,
    t_final: Option<f64>,
    method: Option<MethodName>,
    init: Option<Init>,
    output_dir: Option<PathBuf>,
    decimation: Option<i64>,
    problem: Option<RawProblem>,
}

impl RawConfig {
    fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })
    }

    fn overlay(&mut self, top: RawConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $(if top.$f.is_some() { self.$f = top.$f; })* };
        }
        take!(algo, dt, t_final, method, init, output_dir, decimation);
        if let Some(p) = top.problem {
            self.problem.get_or_insert_with(Default::default).overlay(p);
        }
    }
}

/// Values that take precedence over the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub algo: Option<Algo>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub method: Option<MethodName>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub decimation: Option<i64>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: MultiAgentProblem,
    pub algo: Algo,
    pub dt: f64,
    pub t_final: f64,
    pub method: MethodName,
    pub init: Init,
    pub output_dir: PathBuf,
    pub decimation: usize,
}

pub const DEFAULT_OUTPUT_DIR: &str = "distdp-out";

impl RunConfig {
    /// Loads `path` (if any), applies its preset (if any) underneath, then
    /// the overrides on top, and validates the result.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                RawConfig::parse(&text, &p.display().to_string())?
            }
            None => RawConfig::default(),
        };
        let preset = overrides.preset.clone().or_else(|| file.preset.clone());
        let mut raw = match &preset {
            Some(name) => {
                let text = preset_text(name).ok_or_else(|| {
                    let known: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
                    ConfigError::invalid(
                        "preset",
                        format!("unknown preset `{name}` (known: {})", known.join(", ")),
                    )
                })?;
                RawConfig::parse(text, &format!("preset {name}"))?
            }
            None => RawConfig::default(),
        };
        raw.overlay(file);
        raw.overlay(RawConfig {
            algo: overrides.algo,
            dt: overrides.dt,
            t_final: overrides.t_final,
            method: overrides.method,
            init: overrides.seed.map(Init::Random),
            output_dir: overrides.output_dir.clone(),
            decimation: overrides.decimation,
            ..Default::default()
        });
        Self::validate(raw)
    }

    /// Parses and validates configuration text without touching the disk.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file = RawConfig::parse(text, "config")?;
        let mut raw = match &file.preset {
            Some(name) => RawConfig::parse(
                preset_text(name).ok_or_else(|| {
                    ConfigError::invalid("preset", format!("unknown preset `{name}`"))
                })?,
                name,
            )?,
            None => RawConfig::default(),
        };
        raw.overlay(file);
        Self::validate(raw)
    }

    fn validate(raw: RawConfig) -> Result<Self, ConfigError> {
        let dt = raw
            .dt
            .ok_or_else(|| ConfigError::invalid("dt", "missing"))?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ConfigError::invalid("dt", format!("{dt} is not positive")));
        }
        let t_final = raw
            .t_final
            .ok_or_else(|| ConfigError::invalid("t_final", "missing"))?;
        if !(t_final >= dt && t_final.is_finite()) {
            return Err(ConfigError::invalid(
                "t_final",
                format!("{t_final} is smaller than dt = {dt}"),
            ));
        }
        let decimation = raw.decimation.unwrap_or(1);
        if decimation < 1 {
            return Err(ConfigError::invalid(
                "decimation",
                format!("{decimation} is below 1"),
            ));
        }
        let algo = raw
            .algo
            .ok_or_else(|| ConfigError::invalid("algo", "missing"))?;
        let problem = build_problem(raw.problem.unwrap_or_default())?;
        let init = raw.init.unwrap_or(Init::Zeros);
        if let Init::Values(v) = &init {
            let dim = state_dim(&problem, algo);
            if v.len() != dim {
                return Err(ConfigError::invalid(
                    "init",
                    format!(
                        "{} values given, the {} flow has {dim} states",
                        v.len(),
                        algo.kind().name()
                    ),
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ConfigError::invalid("init", "values must be finite"));
            }
        }
        Ok(RunConfig {
            problem,
            algo,
            dt,
            t_final,
            method: raw.method.unwrap_or(MethodName::Rk4),
            init,
            output_dir: raw
                .output_dir
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            decimation: decimation as usize,
        })
    }

    /// Initial state of the configured flow.
    pub fn initial_state(&self) -> Vector {
        let dim = state_dim(&self.problem, self.algo);
        match &self.init {
            Init::Zeros => Vector::zeros(dim),
            Init::Random(seed) => distdp_core::random::random_state(dim, *seed),
            Init::Values(v) => Vector::from(v.clone()),
        }
    }
}

pub fn state_dim(problem: &MultiAgentProblem, algo: Algo) -> usize {
    let blocks = match algo {
        Algo::Central => 1,
        Algo::V1 => 2,
        Algo::V2 => 3,
    };
    blocks * problem.n_agents() * problem.n_features()
}

fn matrix(field: &str, rows: Option<Vec<Vec<f64>>>) -> Result<Mat, ConfigError> {
    let rows = rows.ok_or_else(|| ConfigError::invalid(field, "missing"))?;
    if rows.is_empty() {
        return Err(ConfigError::invalid(field, "no rows"));
    }
    Mat::from_rows(&rows).map_err(|e| ConfigError::invalid(field, e))
}

fn core_error(field_prefix: &str, e: distdp_core::Error) -> ConfigError {
    match e {
        distdp_core::Error::Invalid { field, reason } => {
            ConfigError::invalid(format!("{field_prefix}{field}"), reason)
        }
        other => ConfigError::invalid(field_prefix.trim_end_matches('.'), other),
    }
}

fn build_problem(raw: RawProblem) -> Result<MultiAgentProblem, ConfigError> {
    let gamma = raw
        .gamma
        .ok_or_else(|| ConfigError::invalid("problem.gamma", "missing"))?;
    let p = matrix("problem.transition", raw.transition)?;
    let phi = matrix("problem.features", raw.features)?;
    let check = if raw.verbatim_transition.unwrap_or(false) {
        TransitionCheck::Verbatim
    } else {
        TransitionCheck::RowStochastic
    };
    let weights = match raw.state_weights {
        Some(w) => {
            Some(Vector::new(w).map_err(|e| ConfigError::invalid("problem.state_weights", e))?)
        }
        None => None,
    };
    let core = PolicyEvalCore::with_check(p, phi, weights, gamma, check)
        .map_err(|e| core_error("problem.", e))?;

    let rewards = raw
        .rewards
        .ok_or_else(|| ConfigError::invalid("problem.rewards", "missing"))?;
    let n = rewards.len();
    let rewards = rewards
        .into_iter()
        .map(Vector::new)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ConfigError::invalid("problem.rewards", e))?;
    let mut edges = Vec::new();
    for (a, b) in raw.edges.unwrap_or_default() {
        if a < 1 || b < 1 {
            return Err(ConfigError::invalid(
                "problem.edges",
                format!("({a}, {b}) is not a pair of 1-based nodes"),
            ));
        }
        edges.push((a as usize, b as usize));
    }
    let graph = CommGraph::new(n, &edges).map_err(|e| ConfigError::invalid("problem.edges", e))?;
    MultiAgentProblem::new(core, rewards, graph).map_err(|e| match e {
        distdp_core::Error::Invalid { field, reason } => ConfigError::invalid(field, reason),
        other => ConfigError::invalid("problem", other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(r: Result<RunConfig, ConfigError>) -> String {
        match r {
            Err(ConfigError::Invalid { field, .. }) => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn preset_loads() {
        let c = RunConfig::from_toml("preset = \"paper-sec5\"").unwrap();
        assert_eq!(c.problem.n_agents(), 5);
        assert_eq!(c.problem.core().n_states(), 3);
        assert_eq!(c.problem.n_features(), 2);
        assert_eq!(c.problem.core().gamma(), 0.99);
        assert_eq!(c.algo, Algo::V2);
        assert_eq!(c.initial_state(), Vector::zeros(30));
    }

    #[test]
    fn file_values_override_preset() {
        let c = RunConfig::from_toml("preset = \"paper-sec5\"\nalgo = \"v1\"\nt_final = 3.0\n")
            .unwrap();
        assert_eq!((c.algo, c.t_final, c.dt), (Algo::V1, 3.0, 0.01));
    }

    #[test]
    fn validation_names_the_field() {
        assert_eq!(
            field_of(RunConfig::from_toml("preset = \"paper-sec5\"\ndt = 0.0")),
            "dt"
        );
        assert_eq!(
            field_of(RunConfig::from_toml(
                "preset = \"paper-sec5\"\nt_final = 0.001"
            )),
            "t_final"
        );
        assert_eq!(
            field_of(RunConfig::from_toml(
                "preset = \"paper-sec5\"\ndecimation = 0"
            )),
            "decimation"
        );
        assert_eq!(
            field_of(RunConfig::from_toml(
                "preset = \"paper-sec5\"\n[problem]\ngamma = 1.0"
            )),
            "problem.gamma"
        );
        assert_eq!(
            field_of(RunConfig::from_toml(
                "preset = \"paper-sec5\"\n[problem]\nedges = [[1, 2], [2, 5], [3, 5]]"
            )),
            "graph"
        );
        assert_eq!(
            field_of(RunConfig::from_toml(
                "preset = \"paper-sec5\"\n[problem]\nedges = [[1, 9]]"
            )),
            "problem.edges"
        );
        assert_eq!(
            field_of(RunConfig::from_toml(
                "preset = \"paper-sec5\"\ninit = { values = [1.0] }"
            )),
            "init"
        );
        assert_eq!(
            field_of(RunConfig::from_toml("preset = \"nope\"")),
            "preset"
        );
        assert_eq!(
            field_of(RunConfig::from_toml(
                "preset = \"paper-sec5\"\n[problem]\ntransition = [[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.5, 0.5, 0.5]]"
            )),
            "problem.transition"
        );
    }

    #[test]
    fn disconnected_graph_message() {
        let e = RunConfig::from_toml("preset = \"paper-sec5\"\n[problem]\nedges = [[1, 2]]")
            .unwrap_err();
        assert!(e.to_string().contains("graph"));
        assert!(e.to_string().contains("not connected"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::from_toml("preset = \"paper-sec5\"\nstep = 1"),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn verbatim_transition_is_accepted() {
        let text = "preset = \"paper-sec5\"\n[problem]\nverbatim_transition = true\n\
                    transition = [[0.5, 0.3333333333333333, 0.2], [0.25, 0.3333333333333333, 0.4], [0.25, 0.3333333333333333, 0.4]]";
        let c = RunConfig::from_toml(text).unwrap();
        assert!((c.problem.core().d().sum() - 1.0).abs() < 1e-12);
        let strict = text.replace("verbatim_transition = true", "verbatim_transition = false");
        assert_eq!(
            field_of(RunConfig::from_toml(&strict)),
            "problem.transition"
        );
    }

    #[test]
    fn init_forms() {
        let c = RunConfig::from_toml(
            "preset = \"paper-sec5\"\nalgo = \"central\"\ninit = { random = 4 }",
        )
        .unwrap();
        assert_eq!(c.initial_state(), distdp_core::random::random_state(10, 4));
        let values: Vec<String> = (0..10).map(|i| format!("{i}.0")).collect();
        let c = RunConfig::from_toml(&format!(
            "preset = \"paper-sec5\"\nalgo = \"central\"\ninit = {{ values = [{}] }}",
            values.join(", ")
        ))
        .unwrap();
        assert_eq!(c.initial_state()[9], 9.0);
    }
}
