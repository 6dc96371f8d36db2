//! Per-realization rate maximization.
//!
//! The slot objective (Carol's rate plus Bob's secrecy rate, without the
//! positive-part clamp) splits into a difference of two concave functions
//! `Gamma - Omega` of the decision pair `(p_ab, p_j)`. Each outer iteration
//! replaces `Omega` and the subtracted half of the secrecy constraint by
//! their first-order expansions at the current iterate, yielding a concave
//! two-variable subproblem over a convex set; since the expansions
//! over-estimate the concave functions they replace, every surrogate
//! solution is feasible for the exact constraints and the exact objective
//! ascends monotonically.
//!
//! Covertness enters through the exact monotone reduction `p_j >= p_j_min`
//! (the warden-side scales do not depend on fading or on `p_ab`, and the
//! minimum detection error is increasing in received jamming power). The
//! auxiliary-variable convexification of the covertness constraint is kept
//! behind [`CovertPath::EpigraphDiagnostic`] for comparison only: in the
//! strong-jamming regime that small detection budgets require, it admits
//! exactly the complement of the covert region.

use serde::Serialize;

use crate::detection::{self, DetectionScales};
use crate::model::{
    carol_rate, log2_1p, secrecy_rate, sinr_bob, sinr_untrusted, EffectiveGains, PowerAllocation,
    SystemParams, Topology,
};

use std::f64::consts::LN_2;

/// Position tolerance for the internal root-finding searches.
const ROOT_TOL: f64 = 1e-12;

/// Slack tolerance when filtering points against the exact constraints.
const FEAS_TOL: f64 = 1e-12;

/// How the covertness constraint is enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CovertPath {
    /// Exact reduction to a lower bound on the jammer fraction.
    ExactMinError,
    /// The auxiliary-variable pair, for diagnosis only. Where strong jamming
    /// is needed it admits the non-covert region instead; results under this
    /// path are not covert-safe.
    EpigraphDiagnostic,
}

/// Starting-point strategy for the outer iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// One anchor at `p_ab = 0.5` (projected into the feasible interval),
    /// `p_j` at its upper bound.
    Fixed,
    /// Anchors at both ends of the feasible `p_ab` interval and at the
    /// projected midpoint. The objective is a difference of concave
    /// functions in `p_ab`, so its maxima often sit on the constraint
    /// boundary; starting at both ends lets the ascent reach the better
    /// one regardless of where the middle start drifts.
    MultiStart,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Stop when the exact objective improves by less than this (bits).
    pub outer_tol: f64,
    pub max_outer_iters: u32,
    /// Position tolerance of the inner subproblem searches.
    pub inner_tol: f64,
    /// Lattice resolution of [`grid_oracle`].
    pub grid_resolution: f64,
    pub init: InitStrategy,
    pub covert_path: CovertPath,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            outer_tol: 1e-6,
            max_outer_iters: 50,
            inner_tol: 1e-8,
            grid_resolution: 1e-3,
            init: InitStrategy::MultiStart,
            covert_path: CovertPath::ExactMinError,
        }
    }
}

/// Which constraint made an instance infeasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    CarolQos,
    BobSecrecy,
    Covertness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "binding")]
pub enum SolveStatus {
    Optimal,
    Infeasible(ConstraintKind),
    MaxIters,
}

/// One outer-iteration record: the iterate, its surrogate value, and the
/// exact objective there (the surrogate never exceeds the exact value
/// beyond roundoff).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DCState {
    pub iterate: PowerAllocation,
    pub mu: u32,
    pub surrogate_value: f64,
    pub exact_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub allocation: PowerAllocation,
    /// Total rate at the returned point (Carol plus clamped secrecy).
    pub objective: f64,
    pub secrecy_rate: f64,
    pub carol_rate: f64,
    pub status: SolveStatus,
    pub iterations: u32,
    /// Exact objective after each outer iteration, starting at the anchor.
    pub trajectory: Vec<f64>,
}

impl SolveResult {
    pub fn is_feasible(&self) -> bool {
        !matches!(self.status, SolveStatus::Infeasible(_))
    }

    fn infeasible(kind: ConstraintKind) -> Self {
        Self {
            allocation: PowerAllocation::clamped(0.0, 0.0),
            objective: 0.0,
            secrecy_rate: 0.0,
            carol_rate: 0.0,
            status: SolveStatus::Infeasible(kind),
            iterations: 0,
            trajectory: Vec::new(),
        }
    }
}

/// The concave pair of the objective split: `Gamma` collects the fixed log
/// terms plus the interference log that is concave in `(p_ab, p_j)`;
/// `Omega` collects the subtracted concave logs.
pub fn dc_parts(alloc: &PowerAllocation, g: &EffectiveGains) -> (f64, f64) {
    let gamma = log2_1p(g.gamma_c)
        + log2_1p(g.gamma_b)
        + log2_1p(alloc.p_ac() * g.gamma_u + alloc.p_j() * g.gamma_j);
    let omega = log2_1p(alloc.p_ab() * g.gamma_c)
        + log2_1p(alloc.p_ac() * g.gamma_b)
        + log2_1p(g.gamma_u + alloc.p_j() * g.gamma_j);
    (gamma, omega)
}

/// Slot objective without the secrecy clamp; identical to `Gamma - Omega`.
pub fn unclamped_total_rate(alloc: &PowerAllocation, g: &EffectiveGains) -> f64 {
    carol_rate(alloc, g) + log2_1p(sinr_bob(alloc, g)) - log2_1p(sinr_untrusted(alloc, g))
}

/// Analytic gradient of `Omega` with respect to `(p_ab, p_j)`.
pub fn grad_omega(alloc: &PowerAllocation, g: &EffectiveGains) -> [f64; 2] {
    [
        (g.gamma_c / (alloc.p_ab() * g.gamma_c + 1.0)
            - g.gamma_b / (alloc.p_ac() * g.gamma_b + 1.0))
            / LN_2,
        g.gamma_j / (g.gamma_u + alloc.p_j() * g.gamma_j + 1.0) / LN_2,
    ]
}

/// First-order expansion of a concave function at an anchor point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Affine2 {
    pub anchor: [f64; 2],
    pub value_at_anchor: f64,
    pub grad: [f64; 2],
}

impl Affine2 {
    pub fn eval(&self, p_ab: f64, p_j: f64) -> f64 {
        self.value_at_anchor
            + self.grad[0] * (p_ab - self.anchor[0])
            + self.grad[1] * (p_j - self.anchor[1])
    }
}

/// Expansion of `Omega` at `anchor`; equals `Omega` there and over-estimates
/// it everywhere else by concavity.
pub fn linearize_omega(anchor: &PowerAllocation, g: &EffectiveGains) -> Affine2 {
    let (_, omega) = dc_parts(anchor, g);
    Affine2 {
        anchor: [anchor.p_ab(), anchor.p_j()],
        value_at_anchor: omega,
        grad: grad_omega(anchor, g),
    }
}

/// The secrecy-floor constraint written as a difference of concave parts:
/// `T - Lambda >= 0` is equivalent to Bob's secrecy rate clearing `r_min`.
pub fn secrecy_constraint_parts(
    alloc: &PowerAllocation,
    g: &EffectiveGains,
    r_min: f64,
) -> (f64, f64) {
    let interference = alloc.p_ac() * g.gamma_u + alloc.p_j() * g.gamma_j;
    let t = log2_1p(g.gamma_b) + log2_1p(interference) - r_min;
    let lambda =
        log2_1p(alloc.p_ac() * g.gamma_b) + log2_1p(g.gamma_u + alloc.p_j() * g.gamma_j);
    (t, lambda)
}

/// Expansion of the subtracted secrecy part `Lambda` at `anchor`.
pub fn linearize_secrecy_lambda(anchor: &PowerAllocation, g: &EffectiveGains) -> Affine2 {
    let (_, lambda) = secrecy_constraint_parts(anchor, g, 0.0);
    Affine2 {
        anchor: [anchor.p_ab(), anchor.p_j()],
        value_at_anchor: lambda,
        grad: [
            -g.gamma_b / (anchor.p_ac() * g.gamma_b + 1.0) / LN_2,
            g.gamma_j / (g.gamma_u + anchor.p_j() * g.gamma_j + 1.0) / LN_2,
        ],
    }
}

/// Carol's QoS constraint as a difference of concave parts `K - Sigma >= 0`.
pub fn carol_constraint_parts(
    alloc: &PowerAllocation,
    g: &EffectiveGains,
    r_min: f64,
) -> (f64, f64) {
    (
        log2_1p(g.gamma_c) - r_min,
        log2_1p(alloc.p_ab() * g.gamma_c),
    )
}

/// Expansion of the subtracted Carol part `Sigma` at `anchor`.
pub fn linearize_carol_sigma(anchor: &PowerAllocation, g: &EffectiveGains) -> Affine2 {
    Affine2 {
        anchor: [anchor.p_ab(), anchor.p_j()],
        value_at_anchor: log2_1p(anchor.p_ab() * g.gamma_c),
        grad: [g.gamma_c / (anchor.p_ab() * g.gamma_c + 1.0) / LN_2, 0.0],
    }
}

/// Exact reduction of Carol's QoS floor to an upper bound on `p_ab`:
/// `p_ab <= ((gamma_c + 1) / 2^r_min - 1) / gamma_c`, clamped into [0, 1].
/// `None` when even `p_ab = 0` cannot meet the floor.
pub fn carol_p_ab_max(g: &EffectiveGains, r_min: f64) -> Option<f64> {
    if r_min <= 0.0 {
        return Some(1.0);
    }
    if g.gamma_c <= 0.0 {
        return None;
    }
    let bound = ((g.gamma_c + 1.0) / r_min.exp2() - 1.0) / g.gamma_c;
    if bound < 0.0 {
        None
    } else {
        Some(bound.min(1.0))
    }
}

/// Exact slack of the secrecy floor at a point (bits).
pub fn exact_secrecy_slack(alloc: &PowerAllocation, g: &EffectiveGains, r_min: f64) -> f64 {
    log2_1p(sinr_bob(alloc, g)) - log2_1p(sinr_untrusted(alloc, g)) - r_min
}

/// Lower bound on the jammer fraction imposed by covertness, via the exact
/// monotone reduction. `None` when the instance cannot be covert at all.
pub fn covert_constraint(params: &SystemParams, topo: &Topology, epsilon: f64) -> Option<f64> {
    detection::min_jammer_fraction(params, topo, epsilon)
}

/// Whether the auxiliary-variable pair of the convexified covertness
/// constraint admits the given scales: there must exist `t` with
/// `lambda1 ln(lambda1/lambda2) <= t ln(epsilon)` and `lambda2 - lambda1 <= t`.
/// Diagnostic only; see [`CovertPath`].
pub fn epigraph_admits(scales: &DetectionScales, epsilon: f64) -> bool {
    let (l1, l2) = (scales.lambda1, scales.lambda2);
    let lhs = if l1 == 0.0 { 0.0 } else { l1 * (l1 / l2).ln() };
    let t_max = lhs / epsilon.ln();
    l2 - l1 <= t_max
}

/// The set of jammer fractions the auxiliary-variable pair admits,
/// approximated as an interval by scanning and endpoint bisection.
/// Diagnostic only.
pub fn epigraph_jammer_interval(
    params: &SystemParams,
    topo: &Topology,
    epsilon: f64,
) -> Option<(f64, f64)> {
    let admits = |p_j: f64| epigraph_admits(&DetectionScales::nominal(params, topo, p_j), epsilon);
    let n = 1000;
    let step = 1.0 / n as f64;
    let mut lo = None;
    let mut hi = None;
    for i in 0..=n {
        let p = i as f64 * step;
        if admits(p) {
            if lo.is_none() {
                lo = Some(p);
            }
            hi = Some(p);
        }
    }
    let (mut lo, mut hi) = (lo?, hi?);
    if lo > 0.0 {
        let (mut bad, mut good) = (lo - step, lo);
        while good - bad > 1e-9 {
            let mid = 0.5 * (bad + good);
            if admits(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        lo = good;
    }
    if hi < 1.0 {
        let (mut good, mut bad) = (hi, hi + step);
        while bad - good > 1e-9 {
            let mid = 0.5 * (good + bad);
            if admits(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        hi = good;
    }
    Some((lo, hi))
}

/// The concave surrogate problem at one anchor: maximize
/// `Gamma - linearized Omega` subject to the box, the covert bound on `p_j`
/// and the linearized secrecy constraint `T - linearized Lambda >= 0`.
struct Surrogate<'a> {
    g: &'a EffectiveGains,
    omega_lin: Affine2,
    lambda_lin: Affine2,
    /// `log2(gamma_c + 1) + log2(gamma_b + 1)`.
    gamma_const: f64,
    /// `log2(gamma_b + 1) - r_bob_min`.
    t_const: f64,
}

impl<'a> Surrogate<'a> {
    fn at(anchor: &PowerAllocation, g: &'a EffectiveGains, r_bob_min: f64) -> Self {
        Self {
            g,
            omega_lin: linearize_omega(anchor, g),
            lambda_lin: linearize_secrecy_lambda(anchor, g),
            gamma_const: log2_1p(g.gamma_c) + log2_1p(g.gamma_b),
            t_const: log2_1p(g.gamma_b) - r_bob_min,
        }
    }

    fn interference(&self, p_ab: f64, p_j: f64) -> f64 {
        (1.0 - p_ab) * self.g.gamma_u + p_j * self.g.gamma_j
    }

    fn objective(&self, p_ab: f64, p_j: f64) -> f64 {
        self.gamma_const + log2_1p(self.interference(p_ab, p_j)) - self.omega_lin.eval(p_ab, p_j)
    }

    fn d_objective_d_pab(&self, p_ab: f64, p_j: f64) -> f64 {
        -self.g.gamma_u / ((self.interference(p_ab, p_j) + 1.0) * LN_2) - self.omega_lin.grad[0]
    }

    fn d_objective_d_pj(&self, p_ab: f64, p_j: f64) -> f64 {
        self.g.gamma_j / ((self.interference(p_ab, p_j) + 1.0) * LN_2) - self.omega_lin.grad[1]
    }

    /// `T - linearized Lambda`, concave in `p_ab` for fixed `p_j`.
    fn secrecy_slack(&self, p_ab: f64, p_j: f64) -> f64 {
        self.t_const + log2_1p(self.interference(p_ab, p_j)) - self.lambda_lin.eval(p_ab, p_j)
    }

    fn d_secrecy_slack_d_pab(&self, p_ab: f64, p_j: f64) -> f64 {
        -self.g.gamma_u / ((self.interference(p_ab, p_j) + 1.0) * LN_2) - self.lambda_lin.grad[0]
    }
}

/// Maximizer of a concave function whose derivative `d` is nonincreasing on
/// [lo, hi]: endpoint when the sign never flips, else sign-change bisection.
fn argmax_decreasing_derivative(d: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    if d(lo) <= 0.0 {
        return lo;
    }
    if d(hi) >= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if d(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Zero crossing of a continuous function between a point where it is
/// nonnegative and one where it is negative; returns the nonnegative-side
/// endpoint so callers stay feasible.
fn root_keep_feasible(c: impl Fn(f64) -> f64, feasible: f64, infeasible: f64) -> f64 {
    let (mut good, mut bad) = (feasible, infeasible);
    while (good - bad).abs() > ROOT_TOL {
        let m = 0.5 * (good + bad);
        if c(m) >= 0.0 {
            good = m;
        } else {
            bad = m;
        }
    }
    good
}

/// Golden-section maximization of a unimodal function; returns (x, f(x)).
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = f(x1);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

struct Bounds {
    p_ab_max: f64,
    p_j_lo: f64,
    p_j_hi: f64,
}

/// Maximizes the surrogate over its feasible set. The problem is concave,
/// two-dimensional, with one nonlinear (concave) inequality, so nested
/// exact one-dimensional searches reach its optimum: for each `p_j` the
/// feasible `p_ab` values form an interval (the constraint is concave in
/// `p_ab`) over which the concave objective is maximized by derivative
/// bisection; the resulting value function of `p_j` is concave and is
/// maximized by golden section with explicit endpoint checks.
fn solve_subproblem(s: &Surrogate, b: &Bounds, inner_tol: f64) -> Option<(f64, f64)> {
    let pab_interval = |p_j: f64| -> Option<(f64, f64)> {
        let c = |p_ab: f64| s.secrecy_slack(p_ab, p_j);
        let peak = argmax_decreasing_derivative(
            |p_ab| s.d_secrecy_slack_d_pab(p_ab, p_j),
            0.0,
            b.p_ab_max,
            inner_tol,
        );
        if c(peak) < 0.0 {
            return None;
        }
        let lo = if c(0.0) >= 0.0 {
            0.0
        } else {
            root_keep_feasible(c, peak, 0.0)
        };
        let hi = if c(b.p_ab_max) >= 0.0 {
            b.p_ab_max
        } else {
            root_keep_feasible(c, peak, b.p_ab_max)
        };
        Some((lo, hi))
    };

    let best_pab = |p_j: f64| -> Option<f64> {
        let (lo, hi) = pab_interval(p_j)?;
        Some(argmax_decreasing_derivative(
            |p_ab| s.d_objective_d_pab(p_ab, p_j),
            lo,
            hi,
            inner_tol,
        ))
    };

    let value = |p_j: f64| best_pab(p_j).map(|p_ab| (p_ab, s.objective(p_ab, p_j)));

    // Localize the p_j range that leaves the constraint satisfiable; the
    // surrogate feasible set is convex so this range is an interval.
    let mut pj_lo = b.p_j_lo;
    let mut pj_hi = b.p_j_hi;
    let lo_feas = pab_interval(pj_lo).is_some();
    let hi_feas = pab_interval(pj_hi).is_some();
    if !lo_feas || !hi_feas {
        let mut witness = None;
        for i in 0..=64 {
            let p = pj_lo + (pj_hi - pj_lo) * i as f64 / 64.0;
            if pab_interval(p).is_some() {
                witness = Some(p);
                break;
            }
        }
        let witness = witness?;
        if !lo_feas {
            let (mut bad, mut good) = (pj_lo, witness);
            while good - bad > inner_tol {
                let m = 0.5 * (bad + good);
                if pab_interval(m).is_some() {
                    good = m;
                } else {
                    bad = m;
                }
            }
            pj_lo = good;
        }
        if !hi_feas {
            let (mut good, mut bad) = (witness, pj_hi);
            while bad - good > inner_tol {
                let m = 0.5 * (good + bad);
                if pab_interval(m).is_some() {
                    good = m;
                } else {
                    bad = m;
                }
            }
            pj_hi = good;
        }
    }

    // The exact objective and every slack are nondecreasing in p_j, so the
    // upper endpoint is the common case; taking it early keeps the returned
    // boundary value exact.
    let at_hi = value(pj_hi);
    if let Some((p_ab, _)) = at_hi {
        if s.d_objective_d_pj(p_ab, pj_hi) >= 0.0 {
            return Some((p_ab, pj_hi));
        }
    }
    let at_lo = value(pj_lo);
    let interior = if pj_hi - pj_lo > inner_tol {
        let (pj_mid, _) = golden_max(
            |p_j| value(p_j).map_or(f64::NEG_INFINITY, |(_, v)| v),
            pj_lo,
            pj_hi,
            inner_tol,
        );
        value(pj_mid).map(|(p_ab, v)| (p_ab, pj_mid, v))
    } else {
        None
    };

    let mut best: Option<(f64, f64, f64)> = None;
    for cand in [
        at_hi.map(|(p_ab, v)| (p_ab, pj_hi, v)),
        at_lo.map(|(p_ab, v)| (p_ab, pj_lo, v)),
        interior,
    ]
    .into_iter()
    .flatten()
    {
        if best.is_none_or(|(_, _, bv)| cand.2 > bv) {
            best = Some(cand);
        }
    }
    best.map(|(p_ab, p_j, _)| (p_ab, p_j))
}

/// Feasible `p_ab` interval of the exact secrecy floor at fixed `p_j`,
/// intersected with `[0, p_ab_cap]`. The exact slack is monotone in `p_ab`:
/// its derivative sign equals the sign of
/// `(p_j gamma_j + 1) gamma_b - gamma_u` independently of `p_ab`.
pub(crate) fn secrecy_feasible_interval(
    g: &EffectiveGains,
    r_bob_min: f64,
    p_j: f64,
    p_ab_cap: f64,
) -> Option<(f64, f64)> {
    let slack =
        |p_ab: f64| exact_secrecy_slack(&PowerAllocation::clamped(p_ab, p_j), g, r_bob_min);
    let direction = (p_j * g.gamma_j + 1.0) * g.gamma_b - g.gamma_u;
    if direction > 0.0 {
        if slack(p_ab_cap) < 0.0 {
            return None;
        }
        let lo = if slack(0.0) >= 0.0 {
            0.0
        } else {
            root_keep_feasible(slack, p_ab_cap, 0.0)
        };
        Some((lo, p_ab_cap))
    } else if direction < 0.0 {
        if slack(0.0) < 0.0 {
            return None;
        }
        let hi = if slack(p_ab_cap) >= 0.0 {
            p_ab_cap
        } else {
            root_keep_feasible(slack, 0.0, p_ab_cap)
        };
        Some((0.0, hi))
    } else if slack(0.0) >= 0.0 {
        Some((0.0, p_ab_cap))
    } else {
        None
    }
}

fn covert_pj_bounds(
    params: &SystemParams,
    topo: &Topology,
    covert_path: CovertPath,
) -> Option<(f64, f64)> {
    match covert_path {
        CovertPath::ExactMinError => {
            covert_constraint(params, topo, params.epsilon()).map(|p_j_min| (p_j_min, 1.0))
        }
        CovertPath::EpigraphDiagnostic => epigraph_jammer_interval(params, topo, params.epsilon()),
    }
}

fn prepare(
    params: &SystemParams,
    gains: &EffectiveGains,
    pj_bounds: Option<(f64, f64)>,
    init: InitStrategy,
) -> Result<(Bounds, Vec<PowerAllocation>), ConstraintKind> {
    let p_ab_max = carol_p_ab_max(gains, params.r_carol_min()).ok_or(ConstraintKind::CarolQos)?;
    let (p_j_lo, p_j_hi) = pj_bounds.ok_or(ConstraintKind::Covertness)?;
    // The secrecy slack is nondecreasing in p_j, so feasibility at the top
    // of the jammer range decides feasibility of the whole instance.
    let (lo, hi) = secrecy_feasible_interval(gains, params.r_bob_min(), p_j_hi, p_ab_max)
        .ok_or(ConstraintKind::BobSecrecy)?;
    let mut points = vec![0.5f64.clamp(lo, hi)];
    if matches!(init, InitStrategy::MultiStart) {
        points.push(lo);
        points.push(hi);
    }
    let mut anchors: Vec<PowerAllocation> = Vec::new();
    for p_ab in points {
        if anchors.iter().all(|a| (a.p_ab() - p_ab).abs() > 1e-9) {
            anchors.push(PowerAllocation::clamped(p_ab, p_j_hi));
        }
    }
    Ok((
        Bounds {
            p_ab_max,
            p_j_lo,
            p_j_hi,
        },
        anchors,
    ))
}

struct SingleRun {
    states: Vec<DCState>,
    converged: bool,
}

impl SingleRun {
    fn final_value(&self) -> f64 {
        self.states.last().map_or(f64::NEG_INFINITY, |s| s.exact_value)
    }
}

fn sca_from_anchor(
    anchor: PowerAllocation,
    gains: &EffectiveGains,
    r_bob_min: f64,
    bounds: &Bounds,
    opts: &SolveOptions,
) -> SingleRun {
    let mut states = Vec::with_capacity(8);
    let mut current = anchor;
    let mut exact = unclamped_total_rate(&current, gains);
    states.push(DCState {
        iterate: current,
        mu: 0,
        surrogate_value: exact,
        exact_value: exact,
    });
    let mut converged = false;
    for mu in 1..=opts.max_outer_iters {
        let surrogate = Surrogate::at(&current, gains, r_bob_min);
        let Some((p_ab, p_j)) = solve_subproblem(&surrogate, bounds, opts.inner_tol) else {
            // the anchor always satisfies its own surrogate constraints, so
            // an empty subproblem can only be numerical; stop at the anchor
            converged = true;
            break;
        };
        let next = PowerAllocation::clamped(p_ab, p_j);
        let next_exact = unclamped_total_rate(&next, gains);
        states.push(DCState {
            iterate: next,
            mu,
            surrogate_value: surrogate.objective(p_ab, p_j),
            exact_value: next_exact,
        });
        let improvement = next_exact - exact;
        current = next;
        exact = next_exact;
        if improvement < opts.outer_tol {
            converged = true;
            break;
        }
    }
    SingleRun { states, converged }
}

/// Solves one realization and returns the full iteration trace of the
/// winning start alongside the result.
pub fn sca_solve_traced(
    params: &SystemParams,
    topo: &Topology,
    gains: &EffectiveGains,
    opts: &SolveOptions,
) -> (SolveResult, Vec<DCState>) {
    let pj_bounds = covert_pj_bounds(params, topo, opts.covert_path);
    solve_with_pj_bounds(params, gains, pj_bounds, opts)
}

/// Solves the rate-maximization problem for one channel realization.
pub fn sca_solve(
    params: &SystemParams,
    topo: &Topology,
    gains: &EffectiveGains,
    opts: &SolveOptions,
) -> SolveResult {
    sca_solve_traced(params, topo, gains, opts).0
}

/// Robust variant: the covert bound is computed from the worst-case scales
/// under bounded location error. With zero radii it reproduces the nominal
/// solve exactly.
pub fn robust_solve(
    params: &SystemParams,
    topo: &Topology,
    gains: &EffectiveGains,
    opts: &SolveOptions,
) -> Result<SolveResult, detection::DetectionError> {
    let pj_bounds = match opts.covert_path {
        CovertPath::ExactMinError => {
            detection::min_jammer_fraction_robust(params, topo, params.epsilon())?
                .map(|p_j_min| (p_j_min, 1.0))
        }
        CovertPath::EpigraphDiagnostic => {
            detection::robust_scales(params, topo, 1.0)?;
            epigraph_jammer_interval(params, topo, params.epsilon())
        }
    };
    Ok(solve_with_pj_bounds(params, gains, pj_bounds, opts).0)
}

fn solve_with_pj_bounds(
    params: &SystemParams,
    gains: &EffectiveGains,
    pj_bounds: Option<(f64, f64)>,
    opts: &SolveOptions,
) -> (SolveResult, Vec<DCState>) {
    let (bounds, anchors) = match prepare(params, gains, pj_bounds, opts.init) {
        Ok(v) => v,
        Err(kind) => return (SolveResult::infeasible(kind), Vec::new()),
    };
    let mut best: Option<SingleRun> = None;
    for anchor in anchors {
        let run = sca_from_anchor(anchor, gains, params.r_bob_min(), &bounds, opts);
        if best.as_ref().is_none_or(|b| run.final_value() > b.final_value()) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one anchor");
    let last = run.states.last().expect("trace never empty");
    let allocation = last.iterate;
    let carol = carol_rate(&allocation, gains);
    let secrecy = secrecy_rate(&allocation, gains);
    let result = SolveResult {
        allocation,
        objective: carol + secrecy,
        secrecy_rate: secrecy,
        carol_rate: carol,
        status: if run.converged {
            SolveStatus::Optimal
        } else {
            SolveStatus::MaxIters
        },
        iterations: last.mu,
        trajectory: run.states.iter().map(|s| s.exact_value).collect(),
    };
    (result, run.states)
}

/// Brute-force ground truth for one realization: scans the `(p_ab, p_j)`
/// lattice at the given resolution, plus the exact constraint-boundary
/// abscissas (Carol's power cap and the secrecy-floor crossings for each
/// lattice `p_j`), filters by the exact constraints, and returns the best
/// feasible point. Ties break toward smaller `p_ab`, then smaller `p_j`.
pub fn grid_oracle(
    params: &SystemParams,
    topo: &Topology,
    gains: &EffectiveGains,
    resolution: f64,
) -> Option<(PowerAllocation, f64)> {
    assert!(
        resolution > 0.0 && resolution <= 1.0,
        "oracle resolution must lie in (0, 1]"
    );
    let n = (1.0 / resolution).round().max(1.0) as u64;
    let p_ab_max = carol_p_ab_max(gains, params.r_carol_min());
    let r_bob = params.r_bob_min();
    let eps = params.epsilon();
    let mut best: Option<(f64, f64, f64)> = None; // (rate, p_ab, p_j)
    let mut extras: Vec<f64> = Vec::with_capacity(3);
    for j in 0..=n {
        let p_j = j as f64 / n as f64;
        if !detection::covertness_satisfied(&DetectionScales::nominal(params, topo, p_j), eps) {
            continue;
        }
        extras.clear();
        if let Some(cap) = p_ab_max {
            extras.push(cap);
            if let Some((lo, hi)) = secrecy_feasible_interval(gains, r_bob, p_j, cap) {
                extras.push(lo);
                extras.push(hi);
            }
        }
        let lattice = (0..=n).map(|i| i as f64 / n as f64);
        for p_ab in lattice.chain(extras.iter().copied()) {
            let alloc = PowerAllocation::clamped(p_ab, p_j);
            if carol_rate(&alloc, gains) < params.r_carol_min() - FEAS_TOL {
                continue;
            }
            if exact_secrecy_slack(&alloc, gains, r_bob) < -FEAS_TOL {
                continue;
            }
            let rate = carol_rate(&alloc, gains) + secrecy_rate(&alloc, gains);
            let better = match best {
                None => true,
                Some((br, ba, bj)) => {
                    rate > br || (rate == br && (alloc.p_ab(), alloc.p_j()) < (ba, bj))
                }
            };
            if better {
                best = Some((rate, alloc.p_ab(), alloc.p_j()));
            }
        }
    }
    best.map(|(rate, p_ab, p_j)| (PowerAllocation::clamped(p_ab, p_j), rate))
}
