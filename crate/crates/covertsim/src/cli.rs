//! Command-line front end: subcommand dispatch and file emission.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error
//! (including usage errors), 3 a run whose every realization was
//! infeasible.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use crate::config::{self, ConfigError, DetectConfig, RunConfig, SweepConfig};
use crate::experiments::{self, InfeasiblePolicy, SweepParameter, SweepRow};
use crate::model::{Node, Point};
use crate::output::{self, Cell};
use crate::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_ALL_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "covertsim",
    version,
    about = "Simulator and optimizer for covert + secrecy-constrained transmission with a friendly jammer"
)]
pub struct Cli {
    /// JSON configuration file; omitted means baseline defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Trials-per-point override (also applies to reproduction presets).
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Use the worst-case covert bound under location uncertainty.
    #[arg(long, global = true)]
    pub robust: bool,
    /// Infeasible-slot policy override.
    #[arg(long, global = true, value_enum)]
    pub policy: Option<PolicyArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PolicyArg {
    Zero,
    Exclude,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Solve a single fading realization and write the result record.
    Solve,
    /// Run the sweep described by the configuration.
    Sweep,
    /// Evaluate the warden detection surface over a distance grid.
    Detect,
    /// Run the built-in cross-check suites.
    Validate,
    /// Run a preset experiment.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Detection-error surface over warden distances.
    Fig2,
    /// Bob-distance sweep.
    Fig3,
    /// Carol-distance sweep.
    Fig4,
    /// Untrusted-user-distance sweep.
    Fig5,
    /// Warden-distance sweep with Bob and Carol at 5 m.
    Fig6,
    /// Transmit-power sweep at the 20 dBW jammer ceiling.
    Fig7,
}

impl Figure {
    fn file_stem(&self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG_ERROR
        }
    }
}

fn execute(cli: Cli) -> Result<i32, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => config::parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
        if let Some(sweep) = &mut cfg.sweep {
            sweep.trials = trials;
        }
    }
    if cli.robust {
        cfg.robust = true;
    }
    if let Some(policy) = cli.policy {
        cfg.policy = match policy {
            PolicyArg::Zero => InfeasiblePolicy::Zero,
            PolicyArg::Exclude => InfeasiblePolicy::Exclude,
        };
    }

    let cfg = match cli.command {
        Command::Reproduce { figure } => apply_preset(figure, cfg, cli.trials)?,
        _ => cfg,
    };

    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| ConfigError::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;
    output::write_resolved_config(&cfg, &cfg.out_dir.join("resolved_config.json")).map_err(
        |source| ConfigError::Io {
            path: cfg.out_dir.join("resolved_config.json"),
            source,
        },
    )?;

    match cli.command {
        Command::Solve => solve_cmd(&cfg),
        Command::Sweep => sweep_cmd(&cfg, "sweep"),
        Command::Detect => detect_cmd(&cfg, "detection_surface"),
        Command::Validate => Ok(if validate::run_validation(&cfg) {
            EXIT_OK
        } else {
            EXIT_VALIDATION_FAILED
        }),
        Command::Reproduce { figure } => match figure {
            Figure::Fig2 => detect_cmd(&cfg, figure.file_stem()),
            _ => sweep_cmd(&cfg, figure.file_stem()),
        },
    }
}

/// Preset experiments. Each forces the strong-jammer operating point of
/// 20 dBW: the baseline 8 dBW ceiling cannot satisfy the covertness budget
/// at full jammer power, so covert-constrained reproductions would be pure
/// outage there.
fn apply_preset(
    figure: Figure,
    base: RunConfig,
    cli_trials: Option<u64>,
) -> Result<RunConfig, ConfigError> {
    let mut cfg = base.with_p_jmax_dbw(20.0);
    let trials = |preset_default: u64| cli_trials.unwrap_or(preset_default);
    let span = |lo: u64, hi: u64| (lo..=hi).map(|v| v as f64).collect::<Vec<_>>();
    match figure {
        Figure::Fig2 => {
            cfg.detect = DetectConfig {
                d_aw_values: (2..=10).map(|i| 2.0 * i as f64).collect(),
                d_jw_values: (2..=10).map(|i| 2.0 * i as f64).collect(),
                p_j: 1.0,
            };
        }
        Figure::Fig3 => {
            cfg.sweep = Some(SweepConfig {
                parameter: SweepParameter::DAb,
                values: span(5, 12),
                trials: trials(500),
            });
        }
        Figure::Fig4 => {
            cfg.sweep = Some(SweepConfig {
                parameter: SweepParameter::DAc,
                values: span(5, 12),
                trials: trials(500),
            });
        }
        Figure::Fig5 => {
            // d_au = 2 would put the untrusted user on top of the jammer
            // at (0, 2), so the sweep starts at 3 m
            cfg.sweep = Some(SweepConfig {
                parameter: SweepParameter::DAu,
                values: span(3, 10),
                trials: trials(2000),
            });
        }
        Figure::Fig6 => {
            let moved = cfg
                .topology
                .with_position(Node::Bob, Point::new(-5.0, 0.0))
                .and_then(|t| t.with_position(Node::Carol, Point::new(5.0, 0.0)))
                .map_err(|e| ConfigError::Invalid {
                    key: "positions".into(),
                    message: e.to_string(),
                })?;
            cfg.topology = moved;
            cfg.sweep = Some(SweepConfig {
                parameter: SweepParameter::DAwDJw,
                values: span(5, 12),
                trials: trials(500),
            });
        }
        Figure::Fig7 => {
            cfg.sweep = Some(SweepConfig {
                parameter: SweepParameter::PMaxDbw,
                values: span(2, 10),
                trials: trials(2000),
            });
        }
    }
    Ok(cfg)
}

fn solve_cmd(cfg: &RunConfig) -> Result<i32, ConfigError> {
    let result = experiments::run_slot(
        &cfg.params,
        &cfg.topology,
        cfg.seed,
        0,
        cfg.robust,
        &cfg.solver,
    )
    .map_err(|e| ConfigError::Invalid {
        key: "params".into(),
        message: e.to_string(),
    })?;

    #[derive(serde::Serialize)]
    struct Record<'a> {
        artifact_version: &'static str,
        seed: u64,
        params_sha256: String,
        result: &'a crate::optimizer::SolveResult,
    }
    let record = Record {
        artifact_version: output::ARTIFACT_VERSION,
        seed: cfg.seed,
        params_sha256: output::params_digest(cfg),
        result: &result,
    };
    let mut text = serde_json::to_string_pretty(&record).expect("result serializes");
    text.push('\n');
    let path = cfg.out_dir.join("solve.json");
    std::fs::write(&path, text).map_err(|source| ConfigError::Io { path, source })?;

    if result.is_feasible() {
        println!(
            "solved: p_ab = {:.6}, p_j = {:.6}, rate = {:.6} bits/s/Hz",
            result.allocation.p_ab(),
            result.allocation.p_j(),
            result.objective
        );
        Ok(EXIT_OK)
    } else {
        eprintln!("infeasible realization: {:?}", result.status);
        Ok(EXIT_ALL_INFEASIBLE)
    }
}

fn sweep_cmd(cfg: &RunConfig, stem: &str) -> Result<i32, ConfigError> {
    let sweep_cfg = cfg.sweep.as_ref().ok_or_else(|| ConfigError::Invalid {
        key: "sweep".into(),
        message: "this run needs a sweep section in the configuration".into(),
    })?;
    let spec = sweep_cfg.to_spec(cfg.seed, cfg.policy);
    let rows = experiments::sweep(&spec, &cfg.params, &cfg.topology, cfg.robust, &cfg.solver)
        .map_err(|e| ConfigError::Invalid {
            key: "sweep".into(),
            message: e.to_string(),
        })?;

    let columns = [
        spec.parameter.column_name(),
        "mean_rate",
        "mean_rate_bob",
        "mean_rate_carol",
        "se",
        "outage",
        "trials",
    ];
    let data: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r: &SweepRow| {
            vec![
                Cell::Float(r.value),
                Cell::Float(r.stats.mean_total),
                Cell::Float(r.stats.mean_secrecy),
                Cell::Float(r.stats.mean_carol),
                Cell::Float(r.stats.std_error),
                Cell::Float(r.stats.outage),
                Cell::Int(r.stats.trials),
            ]
        })
        .collect();
    let meta = [
        ("parameter", spec.parameter.column_name().to_string()),
        ("trials", spec.trials.to_string()),
        (
            "policy",
            match cfg.policy {
                InfeasiblePolicy::Zero => "zero".to_string(),
                InfeasiblePolicy::Exclude => "exclude".to_string(),
            },
        ),
        ("robust", cfg.robust.to_string()),
    ];
    let path = cfg.out_dir.join(format!("{stem}.csv"));
    output::write_csv(&path, cfg, &meta, &columns, &data)
        .map_err(|source| ConfigError::Io { path, source })?;

    if rows.iter().all(|r| r.stats.outage >= 1.0) {
        eprintln!(
            "every realization was infeasible; the covertness budget is out of reach \
             at the configured jammer ceiling ({} dBW)",
            cfg.params.p_jmax_dbw()
        );
        Ok(EXIT_ALL_INFEASIBLE)
    } else {
        Ok(EXIT_OK)
    }
}

fn detect_cmd(cfg: &RunConfig, stem: &str) -> Result<i32, ConfigError> {
    let cells = experiments::detection_surface(
        &cfg.params,
        &cfg.detect.d_aw_values,
        &cfg.detect.d_jw_values,
        cfg.detect.p_j,
    );
    let columns = ["d_aw", "d_jw", "lambda1", "lambda2", "min_error", "covert_ok"];
    let data: Vec<Vec<Cell>> = cells
        .iter()
        .map(|c| {
            vec![
                Cell::Float(c.d_aw),
                Cell::Float(c.d_jw),
                Cell::Float(c.lambda1),
                Cell::Float(c.lambda2),
                Cell::Float(c.min_error),
                Cell::Flag(c.covert_ok),
            ]
        })
        .collect();
    let meta = [("p_j", output::fmt_sig(cfg.detect.p_j))];
    let path = cfg.out_dir.join(format!("{stem}.csv"));
    output::write_csv(&path, cfg, &meta, &columns, &data)
        .map_err(|source| ConfigError::Io { path, source })?;
    Ok(EXIT_OK)
}
