//! Network geometry, unit handling, Rayleigh fading, and per-slot SINR /
//! rate formulas for the six-node topology (Alice, Bob, Carol, untrusted
//! user, Willie, friendly jammer).
//!
//! All internal arithmetic is carried out in linear watts; decibel values
//! appear only at configuration boundaries. Fading is represented by squared
//! channel magnitudes |h|^2 only — no phase is ever stored, since nothing in
//! the rate or detection math uses it.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::f64::consts::LN_2;
use std::fmt;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("nodes {0} and {1} coincide; every link distance must be strictly positive")]
    CoincidentNodes(Node, Node),
    #[error("{name} = {value} rejected: {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

/// The six network nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Alice,
    Bob,
    Carol,
    Untrusted,
    Willie,
    Jammer,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Node::Alice => "alice",
            Node::Bob => "bob",
            Node::Carol => "carol",
            Node::Untrusted => "untrusted",
            Node::Willie => "willie",
            Node::Jammer => "jammer",
        };
        f.write_str(s)
    }
}

/// 2-D position in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point { x: v[0], y: v[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> [f64; 2] {
        [p.x, p.y]
    }
}

/// Node positions plus the six link distances the rest of the system uses.
///
/// Distances are derived from the stored positions at construction and the
/// struct is immutable afterwards, so they can never drift apart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Topology {
    alice: Point,
    bob: Point,
    carol: Point,
    untrusted: Point,
    willie: Point,
    jammer: Point,
    d_ab: f64,
    d_ac: f64,
    d_au: f64,
    d_aw: f64,
    d_jw: f64,
    d_ju: f64,
}

impl Topology {
    /// Builds a topology from the six node positions, deriving all link
    /// distances. Rejects any coincident pair among the used links.
    pub fn from_positions(
        alice: Point,
        bob: Point,
        carol: Point,
        untrusted: Point,
        willie: Point,
        jammer: Point,
    ) -> Result<Self, ModelError> {
        let links = [
            (Node::Alice, alice, Node::Bob, bob),
            (Node::Alice, alice, Node::Carol, carol),
            (Node::Alice, alice, Node::Untrusted, untrusted),
            (Node::Alice, alice, Node::Willie, willie),
            (Node::Jammer, jammer, Node::Willie, willie),
            (Node::Jammer, jammer, Node::Untrusted, untrusted),
        ];
        let mut d = [0.0; 6];
        for (i, (na, a, nb, b)) in links.iter().enumerate() {
            d[i] = a.distance(*b);
            if !(d[i].is_finite() && d[i] > 0.0) {
                return Err(ModelError::CoincidentNodes(*na, *nb));
            }
        }
        Ok(Self {
            alice,
            bob,
            carol,
            untrusted,
            willie,
            jammer,
            d_ab: d[0],
            d_ac: d[1],
            d_au: d[2],
            d_aw: d[3],
            d_jw: d[4],
            d_ju: d[5],
        })
    }

    pub fn position(&self, node: Node) -> Point {
        match node {
            Node::Alice => self.alice,
            Node::Bob => self.bob,
            Node::Carol => self.carol,
            Node::Untrusted => self.untrusted,
            Node::Willie => self.willie,
            Node::Jammer => self.jammer,
        }
    }

    /// Returns a copy with `node` moved to `position` (distances re-derived).
    pub fn with_position(&self, node: Node, position: Point) -> Result<Self, ModelError> {
        let mut p = [
            self.alice,
            self.bob,
            self.carol,
            self.untrusted,
            self.willie,
            self.jammer,
        ];
        p[match node {
            Node::Alice => 0,
            Node::Bob => 1,
            Node::Carol => 2,
            Node::Untrusted => 3,
            Node::Willie => 4,
            Node::Jammer => 5,
        }] = position;
        Self::from_positions(p[0], p[1], p[2], p[3], p[4], p[5])
    }

    pub fn d_ab(&self) -> f64 {
        self.d_ab
    }
    pub fn d_ac(&self) -> f64 {
        self.d_ac
    }
    pub fn d_au(&self) -> f64 {
        self.d_au
    }
    pub fn d_aw(&self) -> f64 {
        self.d_aw
    }
    pub fn d_jw(&self) -> f64 {
        self.d_jw
    }
    pub fn d_ju(&self) -> f64 {
        self.d_ju
    }
}

impl Default for Topology {
    /// Baseline geometry: Alice (0,0), Bob (-10,0), Carol (10,0),
    /// untrusted user (0,10), Willie (0,-10), jammer (0,2).
    fn default() -> Self {
        Self::from_positions(
            Point::new(0.0, 0.0),
            Point::new(-10.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(0.0, 10.0),
            Point::new(0.0, -10.0),
            Point::new(0.0, 2.0),
        )
        .expect("baseline geometry is valid")
    }
}

/// Converts a decibel power value (dBW or dB relative to 1 W) to linear watts.
pub fn dbw_to_watts(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Plain-unit inputs for [`SystemParams`]; powers in dBW, noise in dB.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub p_max_dbw: f64,
    pub p_jmax_dbw: f64,
    pub sigma2_db_bob: f64,
    pub sigma2_db_carol: f64,
    pub sigma2_db_untrusted: f64,
    pub sigma2_db_willie: f64,
    pub alpha: f64,
    pub r_bob_min: f64,
    pub r_carol_min: f64,
    pub epsilon: f64,
    pub tau_aw: f64,
    pub tau_jw: f64,
    pub n_symbols: u64,
}

impl Default for ParamSpec {
    fn default() -> Self {
        Self {
            p_max_dbw: 2.0,
            p_jmax_dbw: 8.0,
            sigma2_db_bob: -30.0,
            sigma2_db_carol: -30.0,
            sigma2_db_untrusted: -30.0,
            sigma2_db_willie: -30.0,
            alpha: 2.0,
            r_bob_min: 0.2,
            r_carol_min: 0.1,
            epsilon: 0.1,
            tau_aw: 0.0,
            tau_jw: 0.0,
            n_symbols: 100_000,
        }
    }
}

/// Validated system parameters. Power ceilings are stored in both dBW and
/// watts (watts always equal `10^(dBW/10)`); everything downstream reads the
/// linear fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SystemParams {
    p_max_dbw: f64,
    p_max_w: f64,
    p_jmax_dbw: f64,
    p_jmax_w: f64,
    sigma2_bob: f64,
    sigma2_carol: f64,
    sigma2_untrusted: f64,
    sigma2_willie: f64,
    alpha: f64,
    r_bob_min: f64,
    r_carol_min: f64,
    epsilon: f64,
    tau_aw: f64,
    tau_jw: f64,
    n_symbols: u64,
}

impl SystemParams {
    pub fn new(spec: ParamSpec) -> Result<Self, ModelError> {
        fn finite(name: &'static str, v: f64) -> Result<(), ModelError> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::OutOfRange {
                    name,
                    value: v,
                    constraint: "must be finite",
                })
            }
        }
        finite("p_max_dbw", spec.p_max_dbw)?;
        finite("p_jmax_dbw", spec.p_jmax_dbw)?;
        for (name, v) in [
            ("sigma2_db_bob", spec.sigma2_db_bob),
            ("sigma2_db_carol", spec.sigma2_db_carol),
            ("sigma2_db_untrusted", spec.sigma2_db_untrusted),
            ("sigma2_db_willie", spec.sigma2_db_willie),
        ] {
            finite(name, v)?;
        }
        if !(spec.alpha > 0.0 && spec.alpha.is_finite()) {
            return Err(ModelError::OutOfRange {
                name: "alpha",
                value: spec.alpha,
                constraint: "path-loss exponent must be > 0",
            });
        }
        for (name, v) in [
            ("r_bob_min", spec.r_bob_min),
            ("r_carol_min", spec.r_carol_min),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::OutOfRange {
                    name,
                    value: v,
                    constraint: "QoS floor must be >= 0",
                });
            }
        }
        if !(spec.epsilon > 0.0 && spec.epsilon < 1.0) {
            return Err(ModelError::OutOfRange {
                name: "epsilon",
                value: spec.epsilon,
                constraint: "covertness budget must lie strictly inside (0, 1)",
            });
        }
        for (name, v) in [("tau_aw", spec.tau_aw), ("tau_jw", spec.tau_jw)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::OutOfRange {
                    name,
                    value: v,
                    constraint: "location-uncertainty radius must be >= 0",
                });
            }
        }
        if spec.n_symbols == 0 {
            return Err(ModelError::OutOfRange {
                name: "n_symbols",
                value: 0.0,
                constraint: "symbols per slot must be >= 1",
            });
        }
        Ok(Self {
            p_max_dbw: spec.p_max_dbw,
            p_max_w: dbw_to_watts(spec.p_max_dbw),
            p_jmax_dbw: spec.p_jmax_dbw,
            p_jmax_w: dbw_to_watts(spec.p_jmax_dbw),
            sigma2_bob: dbw_to_watts(spec.sigma2_db_bob),
            sigma2_carol: dbw_to_watts(spec.sigma2_db_carol),
            sigma2_untrusted: dbw_to_watts(spec.sigma2_db_untrusted),
            sigma2_willie: dbw_to_watts(spec.sigma2_db_willie),
            alpha: spec.alpha,
            r_bob_min: spec.r_bob_min,
            r_carol_min: spec.r_carol_min,
            epsilon: spec.epsilon,
            tau_aw: spec.tau_aw,
            tau_jw: spec.tau_jw,
            n_symbols: spec.n_symbols,
        })
    }

    pub fn p_max_dbw(&self) -> f64 {
        self.p_max_dbw
    }
    pub fn p_max_w(&self) -> f64 {
        self.p_max_w
    }
    pub fn p_jmax_dbw(&self) -> f64 {
        self.p_jmax_dbw
    }
    pub fn p_jmax_w(&self) -> f64 {
        self.p_jmax_w
    }
    pub fn sigma2_bob(&self) -> f64 {
        self.sigma2_bob
    }
    pub fn sigma2_carol(&self) -> f64 {
        self.sigma2_carol
    }
    pub fn sigma2_untrusted(&self) -> f64 {
        self.sigma2_untrusted
    }
    pub fn sigma2_willie(&self) -> f64 {
        self.sigma2_willie
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn r_bob_min(&self) -> f64 {
        self.r_bob_min
    }
    pub fn r_carol_min(&self) -> f64 {
        self.r_carol_min
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn tau_aw(&self) -> f64 {
        self.tau_aw
    }
    pub fn tau_jw(&self) -> f64 {
        self.tau_jw
    }
    pub fn n_symbols(&self) -> u64 {
        self.n_symbols
    }

    /// Copy with a different transmit ceiling (used by power sweeps).
    pub fn with_p_max_dbw(&self, dbw: f64) -> Self {
        let mut p = *self;
        p.p_max_dbw = dbw;
        p.p_max_w = dbw_to_watts(dbw);
        p
    }

    /// Copy with a different jammer ceiling.
    pub fn with_p_jmax_dbw(&self, dbw: f64) -> Self {
        let mut p = *self;
        p.p_jmax_dbw = dbw;
        p.p_jmax_w = dbw_to_watts(dbw);
        p
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::new(ParamSpec::default()).expect("baseline parameters are valid")
    }
}

/// Squared fading magnitudes |h|^2 for the six links of one transmitting
/// slot. Rayleigh amplitudes make each a unit-mean exponential draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelRealization {
    pub g_ab: f64,
    pub g_ac: f64,
    pub g_au: f64,
    pub g_aw: f64,
    pub g_jw: f64,
    pub g_ju: f64,
}

impl ChannelRealization {
    /// Draws six independent Exp(1) squared magnitudes from `rng`, in the
    /// fixed field order `g_ab, g_ac, g_au, g_aw, g_jw, g_ju`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let g_ab = Exp1.sample(rng);
        let g_ac = Exp1.sample(rng);
        let g_au = Exp1.sample(rng);
        let g_aw = Exp1.sample(rng);
        let g_jw = Exp1.sample(rng);
        let g_ju = Exp1.sample(rng);
        Self {
            g_ab,
            g_ac,
            g_au,
            g_aw,
            g_jw,
            g_ju,
        }
    }

    pub fn unit() -> Self {
        Self {
            g_ab: 1.0,
            g_ac: 1.0,
            g_au: 1.0,
            g_aw: 1.0,
            g_jw: 1.0,
            g_ju: 1.0,
        }
    }
}

/// Normalized link gains for one realization:
/// `gamma_m = P_max g_am / (sigma_m^2 d_am^alpha)` for m in {Bob, Carol,
/// untrusted}, and the jammer-to-untrusted gain
/// `gamma_j = P_jmax g_ju / (sigma_u^2 d_ju^alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveGains {
    pub gamma_b: f64,
    pub gamma_c: f64,
    pub gamma_u: f64,
    pub gamma_j: f64,
}

impl EffectiveGains {
    pub fn compute(params: &SystemParams, topo: &Topology, ch: &ChannelRealization) -> Self {
        let a = params.alpha();
        let pm = params.p_max_w();
        Self {
            gamma_b: pm * ch.g_ab / (params.sigma2_bob() * topo.d_ab().powf(a)),
            gamma_c: pm * ch.g_ac / (params.sigma2_carol() * topo.d_ac().powf(a)),
            gamma_u: pm * ch.g_au / (params.sigma2_untrusted() * topo.d_au().powf(a)),
            gamma_j: params.p_jmax_w() * ch.g_ju
                / (params.sigma2_untrusted() * topo.d_ju().powf(a)),
        }
    }
}

/// Power-allocation decision variables: the fraction `p_ab` of Alice's power
/// sent to Bob (Carol receives `p_ac = 1 - p_ab`) and the fraction `p_j` of
/// the jammer ceiling in use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerAllocation {
    p_ab: f64,
    p_j: f64,
}

impl PowerAllocation {
    pub fn new(p_ab: f64, p_j: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&p_ab) {
            return Err(ModelError::OutOfRange {
                name: "p_ab",
                value: p_ab,
                constraint: "power fraction must lie in [0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&p_j) {
            return Err(ModelError::OutOfRange {
                name: "p_j",
                value: p_j,
                constraint: "power fraction must lie in [0, 1]",
            });
        }
        Ok(Self { p_ab, p_j })
    }

    /// Clamps both fractions into [0, 1]; NaN maps to 0.
    pub fn clamped(p_ab: f64, p_j: f64) -> Self {
        let c = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        Self {
            p_ab: c(p_ab),
            p_j: c(p_j),
        }
    }

    pub fn p_ab(&self) -> f64 {
        self.p_ab
    }
    pub fn p_ac(&self) -> f64 {
        1.0 - self.p_ab
    }
    pub fn p_j(&self) -> f64 {
        self.p_j
    }
}

/// Warden hypotheses: no transmission versus transmission in the slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    /// Alice is silent; only the jammer may be on.
    NoTransmission,
    /// Alice transmits to both Bob and Carol.
    Transmission,
}

/// Bob's SINR in a transmitting slot: `p_ab gamma_b / (p_ac gamma_b + 1)`.
pub fn sinr_bob(alloc: &PowerAllocation, g: &EffectiveGains) -> f64 {
    alloc.p_ab() * g.gamma_b / (alloc.p_ac() * g.gamma_b + 1.0)
}

/// Carol's SINR in a transmitting slot: `p_ac gamma_c / (p_ab gamma_c + 1)`.
pub fn sinr_carol(alloc: &PowerAllocation, g: &EffectiveGains) -> f64 {
    alloc.p_ac() * g.gamma_c / (alloc.p_ab() * g.gamma_c + 1.0)
}

/// The untrusted user's SINR on Bob's message in a transmitting slot:
/// `p_ab gamma_u / (p_ac gamma_u + p_j gamma_j + 1)`.
pub fn sinr_untrusted(alloc: &PowerAllocation, g: &EffectiveGains) -> f64 {
    alloc.p_ab() * g.gamma_u / (alloc.p_ac() * g.gamma_u + alloc.p_j() * g.gamma_j + 1.0)
}

pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Bob's information-theoretic secrecy rate in bits/s/Hz, clamped at zero:
/// `[log2(1 + sinr_bob) - log2(1 + sinr_untrusted)]^+`.
pub fn secrecy_rate(alloc: &PowerAllocation, g: &EffectiveGains) -> f64 {
    (log2_1p(sinr_bob(alloc, g)) - log2_1p(sinr_untrusted(alloc, g))).max(0.0)
}

/// Carol's rate in bits/s/Hz.
pub fn carol_rate(alloc: &PowerAllocation, g: &EffectiveGains) -> f64 {
    log2_1p(sinr_carol(alloc, g))
}

/// Slot total: Carol's rate plus Bob's (clamped) secrecy rate.
pub fn total_rate(alloc: &PowerAllocation, g: &EffectiveGains) -> f64 {
    carol_rate(alloc, g) + secrecy_rate(alloc, g)
}

/// Per-slot rate summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlotRates {
    pub bob_secrecy: f64,
    pub carol: f64,
    pub total: f64,
}

/// Rates for a slot under either hypothesis. A quiet slot carries exactly
/// zero rate for both users, keeping slot-level bookkeeping total.
pub fn slot_rates(hyp: Hypothesis, alloc: &PowerAllocation, g: &EffectiveGains) -> SlotRates {
    match hyp {
        Hypothesis::NoTransmission => SlotRates {
            bob_secrecy: 0.0,
            carol: 0.0,
            total: 0.0,
        },
        Hypothesis::Transmission => {
            let bob_secrecy = secrecy_rate(alloc, g);
            let carol = carol_rate(alloc, g);
            SlotRates {
                bob_secrecy,
                carol,
                total: carol + bob_secrecy,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table1_unit_gains() -> EffectiveGains {
        let params = SystemParams::default();
        EffectiveGains::compute(&params, &Topology::default(), &ChannelRealization::unit())
    }

    #[test]
    fn dbw_conversion() {
        assert_eq!(dbw_to_watts(0.0), 1.0);
        assert_abs_diff_eq!(dbw_to_watts(2.0), 1.5849, epsilon = 1e-4);
        assert_abs_diff_eq!(dbw_to_watts(8.0), 6.3096, epsilon = 1e-4);
    }

    #[test]
    fn derived_distances_match_baseline_geometry() {
        let t = Topology::default();
        assert_abs_diff_eq!(t.d_jw(), 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d_ab(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d_aw(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d_ju(), 8.0, epsilon = 1e-12);
        // distances always re-derive from stored positions
        for (d, a, b) in [
            (t.d_ab(), t.position(Node::Alice), t.position(Node::Bob)),
            (t.d_ac(), t.position(Node::Alice), t.position(Node::Carol)),
            (t.d_au(), t.position(Node::Alice), t.position(Node::Untrusted)),
            (t.d_aw(), t.position(Node::Alice), t.position(Node::Willie)),
            (t.d_jw(), t.position(Node::Jammer), t.position(Node::Willie)),
            (t.d_ju(), t.position(Node::Jammer), t.position(Node::Untrusted)),
        ] {
            assert!((d - a.distance(b)).abs() <= 1e-12 * d.max(1.0));
        }
    }

    #[test]
    fn coincident_nodes_rejected() {
        let err = Topology::from_positions(
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(0.0, 10.0),
            Point::new(0.0, -10.0),
            Point::new(0.0, 2.0),
        )
        .unwrap_err();
        assert_eq!(err, ModelError::CoincidentNodes(Node::Alice, Node::Bob));
    }

    #[test]
    fn channel_sampling_is_deterministic_per_stream() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            ChannelRealization::sample(&mut a),
            ChannelRealization::sample(&mut b)
        );
    }

    #[test]
    fn channel_sampling_matches_unit_mean_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut sums = [0.0f64; 6];
        let mut above_one = [0u64; 6];
        for _ in 0..n {
            let c = ChannelRealization::sample(&mut rng);
            for (i, g) in [c.g_ab, c.g_ac, c.g_au, c.g_aw, c.g_jw, c.g_ju]
                .into_iter()
                .enumerate()
            {
                assert!(g >= 0.0);
                sums[i] += g;
                if g > 1.0 {
                    above_one[i] += 1;
                }
            }
        }
        for i in 0..6 {
            let mean = sums[i] / n as f64;
            assert!((0.98..=1.02).contains(&mean), "mean[{i}] = {mean}");
            let p = above_one[i] as f64 / n as f64;
            assert!((0.36..=0.38).contains(&p), "P(g>1)[{i}] = {p}");
        }
    }

    #[test]
    fn effective_gains_baseline_values() {
        let g = table1_unit_gains();
        assert_abs_diff_eq!(g.gamma_b, 15.849, epsilon = 0.01);
        assert_abs_diff_eq!(g.gamma_c, 15.849, epsilon = 0.01);
        assert_abs_diff_eq!(g.gamma_u, 15.849, epsilon = 0.01);
        assert_abs_diff_eq!(g.gamma_j, 98.59, epsilon = 0.05);
    }

    #[test]
    fn effective_gains_zero_fading() {
        let params = SystemParams::default();
        let ch = ChannelRealization {
            g_ab: 0.0,
            g_ac: 0.0,
            g_au: 0.0,
            g_aw: 0.0,
            g_jw: 0.0,
            g_ju: 0.0,
        };
        let g = EffectiveGains::compute(&params, &Topology::default(), &ch);
        assert_eq!(
            (g.gamma_b, g.gamma_c, g.gamma_u, g.gamma_j),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn sinr_edge_cases() {
        let g = table1_unit_gains();
        let full = PowerAllocation::new(1.0, 1.0).unwrap();
        assert_eq!(sinr_bob(&full, &g), g.gamma_b);
        let none = PowerAllocation::new(0.0, 1.0).unwrap();
        assert_eq!(sinr_bob(&none, &g), 0.0);
        assert_eq!(carol_rate(&full, &g), 0.0);
    }

    #[test]
    fn sinr_baseline_values() {
        let g = table1_unit_gains();
        let alloc = PowerAllocation::new(0.5, 1.0).unwrap();
        assert_abs_diff_eq!(sinr_bob(&alloc, &g), 0.8880, epsilon = 1e-3);
        assert_abs_diff_eq!(sinr_untrusted(&alloc, &g), 0.07371, epsilon = 1e-3);
        assert_abs_diff_eq!(secrecy_rate(&alloc, &g), 0.8142, epsilon = 1e-3);
        assert_abs_diff_eq!(carol_rate(&alloc, &g), 0.9168, epsilon = 2e-3);
        assert_abs_diff_eq!(total_rate(&alloc, &g), 1.7310, epsilon = 2e-3);
    }

    #[test]
    fn secrecy_rate_clamps_to_zero() {
        let g = table1_unit_gains();
        let alloc = PowerAllocation::new(0.0, 0.0).unwrap();
        assert_eq!(secrecy_rate(&alloc, &g), 0.0);
        let g2 = EffectiveGains {
            gamma_b: 1.0,
            gamma_c: 1.0,
            gamma_u: 0.0,
            gamma_j: 0.0,
        };
        let alloc2 = PowerAllocation::new(1.0, 0.0).unwrap();
        assert_eq!(secrecy_rate(&alloc2, &g2), 1.0);
    }

    #[test]
    fn sinr_monotonicity_sampled() {
        let g = table1_unit_gains();
        let mut prev_bob = -1.0;
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let alloc = PowerAllocation::new(p, 1.0).unwrap();
            let s = sinr_bob(&alloc, &g);
            assert!(s > prev_bob, "sinr_bob must increase in p_ab");
            prev_bob = s;
        }
        let mut prev_unt = f64::INFINITY;
        for i in 1..=20 {
            let pj = i as f64 / 20.0;
            let alloc = PowerAllocation::new(0.5, pj).unwrap();
            let s = sinr_untrusted(&alloc, &g);
            assert!(s < prev_unt, "sinr_untrusted must decrease in p_j");
            prev_unt = s;
        }
    }

    #[test]
    fn legitimate_rates_ignore_jammer_power() {
        let g = table1_unit_gains();
        let reference = PowerAllocation::new(0.3, 0.0).unwrap();
        let carol_ref = carol_rate(&reference, &g);
        let bob_term_ref = log2_1p(sinr_bob(&reference, &g));
        for i in 0..=10 {
            let alloc = PowerAllocation::new(0.3, i as f64 / 10.0).unwrap();
            assert_eq!(carol_rate(&alloc, &g), carol_ref);
            assert_eq!(log2_1p(sinr_bob(&alloc, &g)), bob_term_ref);
        }
    }

    #[test]
    fn quiet_slot_rates_are_zero() {
        let g = table1_unit_gains();
        let alloc = PowerAllocation::new(0.5, 1.0).unwrap();
        let r = slot_rates(Hypothesis::NoTransmission, &alloc, &g);
        assert_eq!((r.bob_secrecy, r.carol, r.total), (0.0, 0.0, 0.0));
        let t = slot_rates(Hypothesis::Transmission, &alloc, &g);
        assert_eq!(t.total, t.carol + t.bob_secrecy);
    }

    #[test]
    fn allocation_validation() {
        assert!(PowerAllocation::new(1.2, 0.5).is_err());
        assert!(PowerAllocation::new(0.5, -0.1).is_err());
        let a = PowerAllocation::clamped(1.7, -3.0);
        assert_eq!((a.p_ab(), a.p_j()), (1.0, 0.0));
    }

    #[test]
    fn param_validation() {
        let s = ParamSpec {
            epsilon: 1.5,
            ..ParamSpec::default()
        };
        assert!(matches!(
            SystemParams::new(s),
            Err(ModelError::OutOfRange { name: "epsilon", .. })
        ));
        let s = ParamSpec {
            alpha: 0.0,
            ..ParamSpec::default()
        };
        assert!(SystemParams::new(s).is_err());
        let p = SystemParams::default();
        assert_abs_diff_eq!(p.p_max_w(), 1.5849, epsilon = 1e-4);
        assert_abs_diff_eq!(p.sigma2_bob(), 1e-3, epsilon = 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn gains_strategy() -> impl Strategy<Value = EffectiveGains> {
            (0.0..200.0f64, 0.0..200.0f64, 0.0..200.0f64, 0.0..2000.0f64).prop_map(
                |(gamma_b, gamma_c, gamma_u, gamma_j)| EffectiveGains {
                    gamma_b,
                    gamma_c,
                    gamma_u,
                    gamma_j,
                },
            )
        }

        proptest! {
            #[test]
            fn power_split_sums_to_one(p_ab in 0.0..=1.0f64) {
                let a = PowerAllocation::new(p_ab, 0.5).unwrap();
                prop_assert_eq!(a.p_ab() + a.p_ac(), 1.0);
            }

            #[test]
            fn secrecy_rate_never_negative(
                p_ab in 0.0..=1.0f64,
                p_j in 0.0..=1.0f64,
                g in gains_strategy(),
            ) {
                let a = PowerAllocation::new(p_ab, p_j).unwrap();
                prop_assert!(secrecy_rate(&a, &g) >= 0.0);
                prop_assert!(carol_rate(&a, &g) >= 0.0);
            }
        }
    }
}
