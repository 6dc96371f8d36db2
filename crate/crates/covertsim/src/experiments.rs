//! Monte Carlo averaging over fading, parameter sweeps, and the detection
//! surface over warden positions.
//!
//! Determinism contract: every trial owns a ChaCha stream selected by
//! `(master seed, trial index)`, and every sweep point derives its own
//! master seed from `(sweep seed, point index)`. Trials may execute
//! concurrently; results are collected by index and reduced sequentially,
//! so the output bytes never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::detection::{self, DetectionScales};
use crate::model::{
    ChannelRealization, EffectiveGains, ModelError, Node, Point, SystemParams, Topology,
};
use crate::optimizer::{self, SolveOptions, SolveResult};

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Detection(#[from] detection::DetectionError),
}

/// SplitMix64-derived seed for a sweep point.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random stream owned by one trial: one ChaCha key per master seed,
/// one stream index per trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// What to do with realizations whose constrained problem is infeasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasiblePolicy {
    /// Count the slot at zero rate (conservative default).
    Zero,
    /// Drop the slot from the averages; the outage fraction still reports it.
    Exclude,
}

/// Which knob a sweep turns. Distance sweeps move one node along its
/// baseline ray from Alice, so the swept value is that node's distance from
/// the transmitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Bob's distance from Alice.
    DAb,
    /// Carol's distance from Alice.
    DAc,
    /// The untrusted user's distance from Alice.
    DAu,
    /// Willie's distance from Alice (which moves `d_jw` jointly).
    DAwDJw,
    /// Alice's transmit ceiling in dBW.
    PMaxDbw,
    /// Any non-Alice node moved radially.
    NodeRadial(Node),
}

impl SweepParameter {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepParameter::DAb => "d_ab",
            SweepParameter::DAc => "d_ac",
            SweepParameter::DAu => "d_au",
            SweepParameter::DAwDJw => "d_aw",
            SweepParameter::PMaxDbw => "p_max_dbw",
            SweepParameter::NodeRadial(Node::Alice) => "d_alice",
            SweepParameter::NodeRadial(Node::Bob) => "d_ab",
            SweepParameter::NodeRadial(Node::Carol) => "d_ac",
            SweepParameter::NodeRadial(Node::Untrusted) => "d_au",
            SweepParameter::NodeRadial(Node::Willie) => "d_aw",
            SweepParameter::NodeRadial(Node::Jammer) => "d_aj",
        }
    }

    /// Applies one swept value to the baseline parameters and geometry.
    pub fn apply(
        &self,
        params: &SystemParams,
        topo: &Topology,
        value: f64,
    ) -> Result<(SystemParams, Topology), ExperimentError> {
        match self {
            SweepParameter::PMaxDbw => Ok((params.with_p_max_dbw(value), topo.clone())),
            SweepParameter::DAb => radial(params, topo, Node::Bob, value),
            SweepParameter::DAc => radial(params, topo, Node::Carol, value),
            SweepParameter::DAu => radial(params, topo, Node::Untrusted, value),
            SweepParameter::DAwDJw => radial(params, topo, Node::Willie, value),
            SweepParameter::NodeRadial(node) => radial(params, topo, *node, value),
        }
    }
}

fn radial(
    params: &SystemParams,
    topo: &Topology,
    node: Node,
    distance: f64,
) -> Result<(SystemParams, Topology), ExperimentError> {
    if node == Node::Alice {
        return Err(ExperimentError::InvalidSweep(
            "alice is the reference node and cannot be swept radially".into(),
        ));
    }
    if !distance.is_finite() || distance <= 0.0 {
        return Err(ExperimentError::InvalidSweep(format!(
            "swept distance must be positive, got {distance}"
        )));
    }
    let origin = topo.position(Node::Alice);
    let pos = topo.position(node);
    let norm = origin.distance(pos);
    if norm == 0.0 {
        return Err(ExperimentError::InvalidSweep(format!(
            "{node} coincides with alice; no sweep direction"
        )));
    }
    let unit = Point::new((pos.x - origin.x) / norm, (pos.y - origin.y) / norm);
    let moved = Point::new(origin.x + unit.x * distance, origin.y + unit.y * distance);
    let new_topo = topo.with_position(node, moved)?;
    Ok((*params, new_topo))
}

/// One sweep request.
#[derive(Clone, Debug, Serialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub policy: InfeasiblePolicy,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.values.is_empty() {
            return Err(ExperimentError::InvalidSweep("empty value list".into()));
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if self.values.len() > 1 && !increasing && !decreasing {
            return Err(ExperimentError::InvalidSweep(
                "value list must be strictly monotone".into(),
            ));
        }
        if self.trials == 0 {
            return Err(ExperimentError::InvalidSweep("trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// Monte Carlo summary of one configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateStats {
    pub mean_total: f64,
    pub mean_secrecy: f64,
    pub mean_carol: f64,
    pub outage: f64,
    pub trials: u64,
    pub std_error: f64,
}

/// One sweep-point row: the swept value plus its Monte Carlo summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(flatten)]
    pub stats: RateStats,
}

/// Samples the fading of trial `trial_index` from `(seed, trial_index)` and
/// solves the constrained rate maximization for that slot.
pub fn run_slot(
    params: &SystemParams,
    topo: &Topology,
    seed: u64,
    trial_index: u64,
    robust: bool,
    opts: &SolveOptions,
) -> Result<SolveResult, ExperimentError> {
    let mut rng = trial_rng(seed, trial_index);
    let ch = ChannelRealization::sample(&mut rng);
    let gains = EffectiveGains::compute(params, topo, &ch);
    if robust {
        Ok(optimizer::robust_solve(params, topo, &gains, opts)?)
    } else {
        Ok(optimizer::sca_solve(params, topo, &gains, opts))
    }
}

/// Mean optimized rates over `trials` independent fading realizations.
pub fn average_rate(
    params: &SystemParams,
    topo: &Topology,
    trials: u64,
    seed: u64,
    policy: InfeasiblePolicy,
    robust: bool,
    opts: &SolveOptions,
) -> Result<RateStats, ExperimentError> {
    if robust {
        // surface the uncertainty-radius validation once, not per trial
        detection::robust_scales(params, topo, 1.0)?;
    }
    let results: Vec<SolveResult> = (0..trials)
        .into_par_iter()
        .map(|i| {
            run_slot(params, topo, seed, i, robust, opts).expect("inputs validated above")
        })
        .collect();

    let mut totals: Vec<f64> = Vec::with_capacity(trials as usize);
    let (mut sum_total, mut sum_secrecy, mut sum_carol) = (0.0, 0.0, 0.0);
    let mut infeasible = 0u64;
    for r in &results {
        if r.is_feasible() {
            totals.push(r.objective);
            sum_total += r.objective;
            sum_secrecy += r.secrecy_rate;
            sum_carol += r.carol_rate;
        } else {
            infeasible += 1;
            if matches!(policy, InfeasiblePolicy::Zero) {
                totals.push(0.0);
            }
        }
    }
    let count = totals.len() as f64;
    let (mean_total, mean_secrecy, mean_carol) = if count > 0.0 {
        (sum_total / count, sum_secrecy / count, sum_carol / count)
    } else {
        (0.0, 0.0, 0.0)
    };
    let std_error = if totals.len() > 1 {
        let var = totals
            .iter()
            .map(|t| (t - mean_total).powi(2))
            .sum::<f64>()
            / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(RateStats {
        mean_total,
        mean_secrecy,
        mean_carol,
        outage: infeasible as f64 / trials as f64,
        trials,
        std_error,
    })
}

/// Runs a sweep: one row per swept value, each a Monte Carlo average with
/// a point-derived master seed.
pub fn sweep(
    spec: &SweepSpec,
    params: &SystemParams,
    topo: &Topology,
    robust: bool,
    opts: &SolveOptions,
) -> Result<Vec<SweepRow>, ExperimentError> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len());
    for (index, &value) in spec.values.iter().enumerate() {
        let (p, t) = spec.parameter.apply(params, topo, value)?;
        let stats = average_rate(
            &p,
            &t,
            spec.trials,
            derive_seed(spec.seed, index as u64),
            spec.policy,
            robust,
            opts,
        )?;
        rows.push(SweepRow { value, stats });
    }
    Ok(rows)
}

/// Transmit-power sweep (the jammer ceiling is taken from `params`, which
/// the caller sets to the strong-jammer operating point).
pub fn power_sweep(
    params: &SystemParams,
    topo: &Topology,
    p_max_values: &[f64],
    trials: u64,
    seed: u64,
    opts: &SolveOptions,
) -> Result<Vec<SweepRow>, ExperimentError> {
    let spec = SweepSpec {
        parameter: SweepParameter::PMaxDbw,
        values: p_max_values.to_vec(),
        trials,
        seed,
        policy: InfeasiblePolicy::Zero,
    };
    sweep(&spec, params, topo, false, opts)
}

/// One cell of the warden-position surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceCell {
    pub d_aw: f64,
    pub d_jw: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub min_error: f64,
    pub covert_ok: bool,
}

/// Closed-form minimum detection error over a grid of warden distances at a
/// fixed jammer fraction; cells meeting the covertness budget are flagged.
pub fn detection_surface(
    params: &SystemParams,
    d_aw_values: &[f64],
    d_jw_values: &[f64],
    p_j: f64,
) -> Vec<SurfaceCell> {
    let a = params.alpha();
    let mut cells = Vec::with_capacity(d_aw_values.len() * d_jw_values.len());
    for &d_aw in d_aw_values {
        for &d_jw in d_jw_values {
            let scales = DetectionScales {
                lambda1: p_j * params.p_jmax_w() * d_jw.powf(-a),
                lambda2: params.p_max_w() * d_aw.powf(-a),
                sigma2_w: params.sigma2_willie(),
            };
            let min_error = detection::min_detection_error(&scales);
            cells.push(SurfaceCell {
                d_aw,
                d_jw,
                lambda1: scales.lambda1,
                lambda2: scales.lambda2,
                min_error,
                covert_ok: detection::covertness_satisfied(&scales, params.epsilon()),
            });
        }
    }
    cells
}

/// Spearman rank correlation with average ranks on ties. Returns 0 when a
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut num, mut dx, mut dy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        num += (a - mx) * (b - my);
        dx += (a - mx).powi(2);
        dy += (b - my).powi(2);
    }
    if dx == 0.0 || dy == 0.0 {
        return 0.0;
    }
    num / (dx * dy).sqrt()
}
