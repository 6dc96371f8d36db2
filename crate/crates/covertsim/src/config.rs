//! Run configuration: JSON ingestion with strict validation.
//!
//! Every key is optional and defaults to the baseline operating point
//! (geometry, powers, noise, QoS floors, covertness budget). Unknown keys
//! are rejected, and every diagnostic names the offending key path. Values
//! are given in configuration units — dBW for powers, dB for noise, meters
//! for geometry — and converted once at the boundary.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::experiments::{InfeasiblePolicy, SweepParameter, SweepSpec};
use crate::model::{ModelError, Node, ParamSpec, Point, SystemParams, Topology};
use crate::optimizer::{CovertPath, InitStrategy, SolveOptions};

pub const DEFAULT_SEED: u64 = 1729;
pub const DEFAULT_TRIALS: u64 = 500;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

fn default_positions() -> RawPositions {
    RawPositions::default()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPositions {
    #[serde(default = "RawPositions::default_alice")]
    alice: [f64; 2],
    #[serde(default = "RawPositions::default_bob")]
    bob: [f64; 2],
    #[serde(default = "RawPositions::default_carol")]
    carol: [f64; 2],
    #[serde(default = "RawPositions::default_untrusted")]
    untrusted: [f64; 2],
    #[serde(default = "RawPositions::default_willie")]
    willie: [f64; 2],
    #[serde(default = "RawPositions::default_jammer")]
    jammer: [f64; 2],
}

impl RawPositions {
    fn default_alice() -> [f64; 2] {
        [0.0, 0.0]
    }
    fn default_bob() -> [f64; 2] {
        [-10.0, 0.0]
    }
    fn default_carol() -> [f64; 2] {
        [10.0, 0.0]
    }
    fn default_untrusted() -> [f64; 2] {
        [0.0, 10.0]
    }
    fn default_willie() -> [f64; 2] {
        [0.0, -10.0]
    }
    fn default_jammer() -> [f64; 2] {
        [0.0, 2.0]
    }
}

impl Default for RawPositions {
    fn default() -> Self {
        Self {
            alice: Self::default_alice(),
            bob: Self::default_bob(),
            carol: Self::default_carol(),
            untrusted: Self::default_untrusted(),
            willie: Self::default_willie(),
            jammer: Self::default_jammer(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoiseOverrides {
    bob: Option<f64>,
    carol: Option<f64>,
    untrusted: Option<f64>,
    willie: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default = "RawSolver::default_outer_tol")]
    outer_tol: f64,
    #[serde(default = "RawSolver::default_max_outer_iters")]
    max_outer_iters: u32,
    #[serde(default = "RawSolver::default_inner_tol")]
    inner_tol: f64,
    #[serde(default = "RawSolver::default_grid_resolution")]
    grid_resolution: f64,
    #[serde(default = "RawSolver::default_init")]
    init: String,
    #[serde(default = "RawSolver::default_covert_path")]
    covert_path: String,
}

impl RawSolver {
    fn default_outer_tol() -> f64 {
        1e-6
    }
    fn default_max_outer_iters() -> u32 {
        50
    }
    fn default_inner_tol() -> f64 {
        1e-8
    }
    fn default_grid_resolution() -> f64 {
        1e-3
    }
    fn default_init() -> String {
        "multi_start".into()
    }
    fn default_covert_path() -> String {
        "exact".into()
    }
}

impl Default for RawSolver {
    fn default() -> Self {
        Self {
            outer_tol: Self::default_outer_tol(),
            max_outer_iters: Self::default_max_outer_iters(),
            inner_tol: Self::default_inner_tol(),
            grid_resolution: Self::default_grid_resolution(),
            init: Self::default_init(),
            covert_path: Self::default_covert_path(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: String,
    values: Vec<f64>,
    trials: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetect {
    #[serde(default = "RawDetect::default_grid")]
    d_aw_values: Vec<f64>,
    #[serde(default = "RawDetect::default_grid")]
    d_jw_values: Vec<f64>,
    #[serde(default = "RawDetect::default_p_j")]
    p_j: f64,
}

impl RawDetect {
    fn default_grid() -> Vec<f64> {
        (2..=10).map(|i| 2.0 * i as f64).collect()
    }
    fn default_p_j() -> f64 {
        1.0
    }
}

impl Default for RawDetect {
    fn default() -> Self {
        Self {
            d_aw_values: Self::default_grid(),
            d_jw_values: Self::default_grid(),
            p_j: Self::default_p_j(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    #[serde(default = "default_positions")]
    positions: RawPositions,
    p_max_dbw: Option<f64>,
    p_jmax_dbw: Option<f64>,
    noise_db: Option<f64>,
    noise_db_overrides: RawNoiseOverrides,
    alpha: Option<f64>,
    r_bob_min: Option<f64>,
    r_carol_min: Option<f64>,
    epsilon: Option<f64>,
    tau_aw: Option<f64>,
    tau_jw: Option<f64>,
    n_symbols: Option<u64>,
    seed: Option<u64>,
    trials: Option<u64>,
    out_dir: Option<String>,
    policy: Option<String>,
    robust: Option<bool>,
    solver: RawSolver,
    sweep: Option<RawSweep>,
    detect: RawDetect,
}

/// Sweep section of a resolved configuration.
#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub trials: u64,
}

impl SweepConfig {
    pub fn to_spec(&self, seed: u64, policy: InfeasiblePolicy) -> SweepSpec {
        SweepSpec {
            parameter: self.parameter,
            values: self.values.clone(),
            trials: self.trials,
            seed,
            policy,
        }
    }
}

/// Detection-surface section of a resolved configuration.
#[derive(Clone, Debug, Serialize)]
pub struct DetectConfig {
    pub d_aw_values: Vec<f64>,
    pub d_jw_values: Vec<f64>,
    pub p_j: f64,
}

/// Fully resolved, validated run configuration.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub params: SystemParams,
    pub topology: Topology,
    pub seed: u64,
    pub trials: u64,
    pub out_dir: PathBuf,
    pub policy: InfeasiblePolicy,
    pub robust: bool,
    pub solver: SolveOptions,
    pub sweep: Option<SweepConfig>,
    pub detect: DetectConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config_str("{}").expect("empty config resolves to defaults")
    }
}

impl RunConfig {
    /// Rebuilds the resolved system parameters with a different jammer
    /// ceiling (used by the reproduction presets).
    pub fn with_p_jmax_dbw(mut self, dbw: f64) -> Self {
        self.params = self.params.with_p_jmax_dbw(dbw);
        self
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// Validates configuration text (`{}` yields the full baseline defaults).
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig =
        serde_path_to_error::deserialize(&mut de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    resolve(raw)
}

fn parse_sweep_parameter(s: &str) -> Result<SweepParameter, ConfigError> {
    let key = "sweep.parameter";
    match s {
        "d_ab" => Ok(SweepParameter::DAb),
        "d_ac" => Ok(SweepParameter::DAc),
        "d_au" => Ok(SweepParameter::DAu),
        "d_aw_jw" => Ok(SweepParameter::DAwDJw),
        "p_max_dbw" => Ok(SweepParameter::PMaxDbw),
        other => {
            if let Some(node) = other.strip_prefix("node_radial:") {
                let node = match node {
                    "bob" => Node::Bob,
                    "carol" => Node::Carol,
                    "untrusted" => Node::Untrusted,
                    "willie" => Node::Willie,
                    "jammer" => Node::Jammer,
                    "alice" => {
                        return Err(ConfigError::invalid(
                            key,
                            "alice is the reference node and cannot be swept",
                        ))
                    }
                    unknown => {
                        return Err(ConfigError::invalid(
                            key,
                            format!("unknown node `{unknown}`"),
                        ))
                    }
                };
                Ok(SweepParameter::NodeRadial(node))
            } else {
                Err(ConfigError::invalid(
                    key,
                    format!(
                        "unknown parameter `{other}` (expected d_ab, d_ac, d_au, d_aw_jw, \
                         p_max_dbw, or node_radial:<node>)"
                    ),
                ))
            }
        }
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let noise = raw.noise_db.unwrap_or(-30.0);
    let spec = ParamSpec {
        p_max_dbw: raw.p_max_dbw.unwrap_or(2.0),
        p_jmax_dbw: raw.p_jmax_dbw.unwrap_or(8.0),
        sigma2_db_bob: raw.noise_db_overrides.bob.unwrap_or(noise),
        sigma2_db_carol: raw.noise_db_overrides.carol.unwrap_or(noise),
        sigma2_db_untrusted: raw.noise_db_overrides.untrusted.unwrap_or(noise),
        sigma2_db_willie: raw.noise_db_overrides.willie.unwrap_or(noise),
        alpha: raw.alpha.unwrap_or(2.0),
        r_bob_min: raw.r_bob_min.unwrap_or(0.2),
        r_carol_min: raw.r_carol_min.unwrap_or(0.1),
        epsilon: raw.epsilon.unwrap_or(0.1),
        tau_aw: raw.tau_aw.unwrap_or(0.0),
        tau_jw: raw.tau_jw.unwrap_or(0.0),
        n_symbols: raw.n_symbols.unwrap_or(100_000),
    };
    let params = SystemParams::new(spec).map_err(|e| match e {
        ModelError::OutOfRange {
            name,
            value,
            constraint,
        } => ConfigError::invalid(name, format!("{value} rejected: {constraint}")),
        other => ConfigError::invalid("params", other.to_string()),
    })?;

    let p = &raw.positions;
    let topology = Topology::from_positions(
        Point::from(p.alice),
        Point::from(p.bob),
        Point::from(p.carol),
        Point::from(p.untrusted),
        Point::from(p.willie),
        Point::from(p.jammer),
    )
    .map_err(|e| ConfigError::invalid("positions", e.to_string()))?;

    if params.tau_aw() >= topology.d_aw() {
        return Err(ConfigError::invalid(
            "tau_aw",
            format!(
                "{} must stay below the Alice-Willie distance {}",
                params.tau_aw(),
                topology.d_aw()
            ),
        ));
    }

    let trials = raw.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(ConfigError::invalid("trials", "must be >= 1"));
    }

    let policy = match raw.policy.as_deref().unwrap_or("zero") {
        "zero" => InfeasiblePolicy::Zero,
        "exclude" => InfeasiblePolicy::Exclude,
        other => {
            return Err(ConfigError::invalid(
                "policy",
                format!("unknown policy `{other}` (expected zero or exclude)"),
            ))
        }
    };

    let s = &raw.solver;
    for (key, v) in [
        ("solver.outer_tol", s.outer_tol),
        ("solver.inner_tol", s.inner_tol),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::invalid(key, "tolerance must be > 0"));
        }
    }
    if s.max_outer_iters == 0 {
        return Err(ConfigError::invalid("solver.max_outer_iters", "must be >= 1"));
    }
    if !(s.grid_resolution > 0.0 && s.grid_resolution <= 1.0) {
        return Err(ConfigError::invalid(
            "solver.grid_resolution",
            "must lie in (0, 1]",
        ));
    }
    let init = match s.init.as_str() {
        "multi_start" => InitStrategy::MultiStart,
        "fixed" => InitStrategy::Fixed,
        other => {
            return Err(ConfigError::invalid(
                "solver.init",
                format!("unknown strategy `{other}` (expected multi_start or fixed)"),
            ))
        }
    };
    let covert_path = match s.covert_path.as_str() {
        "exact" => CovertPath::ExactMinError,
        "epigraph_diagnostic" => CovertPath::EpigraphDiagnostic,
        other => {
            return Err(ConfigError::invalid(
                "solver.covert_path",
                format!("unknown path `{other}` (expected exact or epigraph_diagnostic)"),
            ))
        }
    };
    let solver = SolveOptions {
        outer_tol: s.outer_tol,
        max_outer_iters: s.max_outer_iters,
        inner_tol: s.inner_tol,
        grid_resolution: s.grid_resolution,
        init,
        covert_path,
    };

    let sweep = match raw.sweep {
        None => None,
        Some(rs) => {
            let parameter = parse_sweep_parameter(&rs.parameter)?;
            let sweep_trials = rs.trials.unwrap_or(trials);
            let cfg = SweepConfig {
                parameter,
                values: rs.values,
                trials: sweep_trials,
            };
            cfg.to_spec(0, policy)
                .validate()
                .map_err(|e| ConfigError::invalid("sweep", e.to_string()))?;
            Some(cfg)
        }
    };

    let d = raw.detect;
    for (key, values) in [
        ("detect.d_aw_values", &d.d_aw_values),
        ("detect.d_jw_values", &d.d_jw_values),
    ] {
        if values.is_empty() {
            return Err(ConfigError::invalid(key, "value list must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(ConfigError::invalid(key, "distances must be > 0"));
        }
    }
    if !(0.0..=1.0).contains(&d.p_j) {
        return Err(ConfigError::invalid("detect.p_j", "must lie in [0, 1]"));
    }

    Ok(RunConfig {
        params,
        topology,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        trials,
        out_dir: PathBuf::from(raw.out_dir.unwrap_or_else(|| "out".into())),
        policy,
        robust: raw.robust.unwrap_or(false),
        solver,
        sweep,
        detect: DetectConfig {
            d_aw_values: d.d_aw_values,
            d_jw_values: d.d_jw_values,
            p_j: d.p_j,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_object_resolves_to_baseline_defaults() {
        let cfg = parse_config_str("{}").unwrap();
        assert_eq!(cfg.params.p_max_dbw(), 2.0);
        assert_eq!(cfg.params.p_jmax_dbw(), 8.0);
        assert_abs_diff_eq!(cfg.params.sigma2_bob(), 1e-3, epsilon = 1e-15);
        assert_eq!(cfg.params.alpha(), 2.0);
        assert_eq!(cfg.params.r_bob_min(), 0.2);
        assert_eq!(cfg.params.r_carol_min(), 0.1);
        assert_eq!(cfg.params.epsilon(), 0.1);
        assert_eq!(cfg.topology.d_ab(), 10.0);
        assert_eq!(cfg.topology.d_jw(), 12.0);
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert_eq!(cfg.policy, InfeasiblePolicy::Zero);
        assert!(!cfg.robust);
        assert!(cfg.sweep.is_none());
        assert_eq!(cfg.detect.p_j, 1.0);
    }

    #[test]
    fn explicit_default_equals_omitted() {
        let explicit = parse_config_str(r#"{"alpha": 2.0}"#).unwrap();
        let omitted = parse_config_str("{}").unwrap();
        assert_eq!(explicit.params, omitted.params);
    }

    #[test]
    fn out_of_range_epsilon_names_the_key() {
        let err = parse_config_str(r#"{"epsilon": 1.5}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("epsilon"), "got: {msg}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let err = parse_config_str(r#"{"epsilonn": 0.1}"#).unwrap_err();
        assert!(err.to_string().contains("epsilonn"));
        let err = parse_config_str(r#"{"solver": {"outer_tolerance": 1e-6}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("solver") && msg.contains("outer_tolerance"), "got: {msg}");
    }

    #[test]
    fn sweep_section_parses_and_validates() {
        let cfg = parse_config_str(
            r#"{"sweep": {"parameter": "d_ab", "values": [5, 6, 7], "trials": 10}}"#,
        )
        .unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.parameter, SweepParameter::DAb);
        assert_eq!(sweep.trials, 10);

        let err =
            parse_config_str(r#"{"sweep": {"parameter": "d_zz", "values": [1]}}"#).unwrap_err();
        assert!(err.to_string().contains("sweep.parameter"));

        let err = parse_config_str(r#"{"sweep": {"parameter": "d_ab", "values": []}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("sweep"));

        let cfg = parse_config_str(
            r#"{"sweep": {"parameter": "node_radial:jammer", "values": [2, 3]}}"#,
        )
        .unwrap();
        assert_eq!(
            cfg.sweep.unwrap().parameter,
            SweepParameter::NodeRadial(Node::Jammer)
        );
    }

    #[test]
    fn coincident_positions_rejected() {
        let err = parse_config_str(r#"{"positions": {"bob": [0.0, 0.0]}}"#).unwrap_err();
        assert!(err.to_string().contains("positions"));
    }

    #[test]
    fn uncertainty_radius_cross_checked_against_geometry() {
        let err = parse_config_str(r#"{"tau_aw": 10.0}"#).unwrap_err();
        assert!(err.to_string().contains("tau_aw"));
        assert!(parse_config_str(r#"{"tau_aw": 9.5}"#).is_ok());
    }

    #[test]
    fn noise_overrides_apply_per_node() {
        let cfg = parse_config_str(r#"{"noise_db_overrides": {"carol": -20.0}}"#).unwrap();
        assert_abs_diff_eq!(cfg.params.sigma2_carol(), 1e-2, epsilon = 1e-15);
        assert_abs_diff_eq!(cfg.params.sigma2_bob(), 1e-3, epsilon = 1e-15);
    }

    #[test]
    fn solver_strings_parse() {
        let cfg = parse_config_str(
            r#"{"solver": {"init": "fixed", "covert_path": "epigraph_diagnostic"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.solver.init, InitStrategy::Fixed);
        assert_eq!(cfg.solver.covert_path, CovertPath::EpigraphDiagnostic);
        let err = parse_config_str(r#"{"solver": {"init": "warm"}}"#).unwrap_err();
        assert!(err.to_string().contains("solver.init"));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let err = parse_config_str("{not json").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
    }
}
