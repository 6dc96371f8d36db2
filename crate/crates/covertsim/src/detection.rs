//! Willie's binary hypothesis test.
//!
//! In a quiet slot the warden's per-symbol received power (beyond noise) is
//! exponential with mean `lambda1`, the mean received jamming power; in a
//! transmitting slot it is the sum of two independent exponentials with
//! means `lambda2` (Alice) and `lambda1` (jammer) — a hypoexponential law.
//! Everything here is the asymptotic closed form of the radiometer test on
//! those two laws, plus a Monte Carlo oracle that re-derives the same
//! probabilities by simulation (optionally with the finite-symbol chi-square
//! averaging left in).

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::Serialize;
use thiserror::Error;

use crate::model::{SystemParams, Topology};

/// Relative gap below which the two scales are treated as equal and the
/// Erlang-2 limit forms are used (the two-exponential expressions are 0/0 at
/// equality).
pub const EQUAL_SCALE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DetectionError {
    #[error("no jamming power at the warden (lambda1 = 0): the quiet-slot power law degenerates to a point mass and the warden detects perfectly")]
    NoJamming,
    #[error("invalid detection scales: {0}")]
    InvalidScales(&'static str),
    #[error("location uncertainty tau_aw = {tau_aw} must be smaller than d_aw = {d_aw}")]
    UncertaintyTooLarge { tau_aw: f64, d_aw: f64 },
}

/// Mean received powers (watts) at the warden.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectionScales {
    /// Mean received jamming power: `p_j * P_jmax * d_jw^-alpha`.
    pub lambda1: f64,
    /// Mean received Alice power: `P_max * d_aw^-alpha`.
    pub lambda2: f64,
    /// Warden noise power.
    pub sigma2_w: f64,
}

impl DetectionScales {
    pub fn new(lambda1: f64, lambda2: f64, sigma2_w: f64) -> Result<Self, DetectionError> {
        if !lambda1.is_finite() || lambda1 < 0.0 {
            return Err(DetectionError::InvalidScales(
                "lambda1 must be finite and >= 0",
            ));
        }
        if !lambda2.is_finite() || lambda2 <= 0.0 {
            return Err(DetectionError::InvalidScales(
                "lambda2 must be finite and > 0",
            ));
        }
        if !sigma2_w.is_finite() || sigma2_w < 0.0 {
            return Err(DetectionError::InvalidScales(
                "sigma2_w must be finite and >= 0",
            ));
        }
        Ok(Self {
            lambda1,
            lambda2,
            sigma2_w,
        })
    }

    /// Scales at the warden's true position for a given jammer fraction.
    pub fn nominal(params: &SystemParams, topo: &Topology, p_j: f64) -> Self {
        let a = params.alpha();
        Self {
            lambda1: p_j * params.p_jmax_w() * topo.d_jw().powf(-a),
            lambda2: params.p_max_w() * topo.d_aw().powf(-a),
            sigma2_w: params.sigma2_willie(),
        }
    }

    fn nearly_equal(&self) -> bool {
        (self.lambda1 - self.lambda2).abs() < EQUAL_SCALE_REL_TOL * self.lambda1.max(self.lambda2)
    }
}

/// Worst-case scales when Willie's position is only known to within
/// `tau_aw` / `tau_jw` meters: the jammer may be farther, Alice closer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RobustScales {
    pub lambda1_worst: f64,
    pub lambda2_worst: f64,
    pub sigma2_w: f64,
}

impl RobustScales {
    pub fn as_scales(&self) -> DetectionScales {
        DetectionScales {
            lambda1: self.lambda1_worst,
            lambda2: self.lambda2_worst,
            sigma2_w: self.sigma2_w,
        }
    }
}

/// Worst-case detection scales under bounded location error.
pub fn robust_scales(
    params: &SystemParams,
    topo: &Topology,
    p_j: f64,
) -> Result<RobustScales, DetectionError> {
    if params.tau_aw() >= topo.d_aw() {
        return Err(DetectionError::UncertaintyTooLarge {
            tau_aw: params.tau_aw(),
            d_aw: topo.d_aw(),
        });
    }
    let a = params.alpha();
    Ok(RobustScales {
        lambda1_worst: p_j * params.p_jmax_w() * (topo.d_jw() + params.tau_jw()).powf(-a),
        lambda2_worst: params.p_max_w() * (topo.d_aw() - params.tau_aw()).powf(-a),
        sigma2_w: params.sigma2_willie(),
    })
}

/// `ln(1 + r) / r`, continuous through r = 0.
fn ln1p_over(r: f64) -> f64 {
    if r.abs() < 1e-4 {
        // |error| < r^4/5, below f64 roundoff at this threshold
        1.0 - r / 2.0 + r * r / 3.0 - r * r * r / 4.0
    } else {
        r.ln_1p() / r
    }
}

/// `ln a` with `a = (lambda1/lambda2)^(lambda1/(lambda2-lambda1))`, the
/// complement of the minimum detection error. Continuous at equal scales
/// where it evaluates to -1.
fn ln_error_complement(scales: &DetectionScales) -> f64 {
    let r = (scales.lambda1 - scales.lambda2) / scales.lambda2;
    -(scales.lambda1 / scales.lambda2) * ln1p_over(r)
}

/// Density of the warden's mean received power (beyond noise) under the
/// given hypothesis. The quiet-slot law with `lambda1 = 0` is a point mass
/// at zero and is reported as [`DetectionError::NoJamming`].
pub fn pdf_gamma_w(
    x: f64,
    scales: &DetectionScales,
    hyp: crate::model::Hypothesis,
) -> Result<f64, DetectionError> {
    use crate::model::Hypothesis::*;
    if x < 0.0 {
        return Ok(0.0);
    }
    let (l1, l2) = (scales.lambda1, scales.lambda2);
    match hyp {
        NoTransmission => {
            if l1 == 0.0 {
                Err(DetectionError::NoJamming)
            } else {
                Ok((-x / l1).exp() / l1)
            }
        }
        Transmission => {
            if l1 == 0.0 {
                Ok((-x / l2).exp() / l2)
            } else if scales.nearly_equal() {
                let l = 0.5 * (l1 + l2);
                Ok(x / (l * l) * (-x / l).exp())
            } else {
                Ok(((-x / l2).exp() - (-x / l1).exp()) / (l2 - l1))
            }
        }
    }
}

/// False-alarm probability of the radiometer at threshold `theta`.
pub fn p_false_alarm(theta: f64, scales: &DetectionScales) -> f64 {
    let x = theta - scales.sigma2_w;
    if x < 0.0 {
        return 1.0;
    }
    if scales.lambda1 == 0.0 {
        // quiet-slot power is exactly the noise floor
        return if x == 0.0 { 1.0 } else { 0.0 };
    }
    (-x / scales.lambda1).exp()
}

/// Missed-detection probability of the radiometer at threshold `theta`.
pub fn p_missed_detection(theta: f64, scales: &DetectionScales) -> f64 {
    let x = theta - scales.sigma2_w;
    if x < 0.0 {
        return 0.0;
    }
    let (l1, l2) = (scales.lambda1, scales.lambda2);
    let p = if l1 == 0.0 {
        -(-x / l2).exp_m1()
    } else if scales.nearly_equal() {
        let l = 0.5 * (l1 + l2);
        -(-x / l).exp_m1() - x / l * (-x / l).exp()
    } else {
        (l2 * -(-x / l2).exp_m1() - l1 * -(-x / l1).exp_m1()) / (l2 - l1)
    };
    p.clamp(0.0, 1.0)
}

/// The threshold minimizing `p_FA + p_MD`:
/// `theta_op = lambda1 lambda2 / (lambda2 - lambda1) * ln(lambda2/lambda1) + sigma2_w`,
/// continuing to `lambda + sigma2_w` at equal scales.
pub fn optimal_threshold(scales: &DetectionScales) -> Result<f64, DetectionError> {
    let (l1, l2) = (scales.lambda1, scales.lambda2);
    if l1 == 0.0 {
        return Err(DetectionError::NoJamming);
    }
    if scales.nearly_equal() {
        return Ok(0.5 * (l1 + l2) + scales.sigma2_w);
    }
    Ok(l2 * ln1p_over((l2 - l1) / l1) + scales.sigma2_w)
}

/// Minimum of `p_FA + p_MD` over all thresholds, in closed form:
/// `1 - (lambda1/lambda2)^(lambda1/(lambda2-lambda1))`. Zero without jamming
/// (the warden detects perfectly), `1 - e^-1` at equal scales.
pub fn min_detection_error(scales: &DetectionScales) -> f64 {
    if scales.lambda1 <= 0.0 {
        return 0.0;
    }
    -ln_error_complement(scales).exp_m1()
}

/// Whether the covertness condition `min(p_FA + p_MD) >= 1 - epsilon` holds,
/// evaluated in log form (valid on both sides of lambda1 = lambda2).
pub fn covertness_satisfied(scales: &DetectionScales, epsilon: f64) -> bool {
    debug_assert!(epsilon > 0.0 && epsilon < 1.0);
    if scales.lambda1 <= 0.0 {
        return false;
    }
    ln_error_complement(scales) <= epsilon.ln()
}

/// Smallest jammer fraction that makes the slot covert, found by bisection
/// to absolute tolerance 1e-9; `None` when even `p_j = 1` is not enough.
/// Monotonicity holds because the minimum detection error increases with
/// the received jamming power.
pub fn min_jammer_fraction(params: &SystemParams, topo: &Topology, epsilon: f64) -> Option<f64> {
    bisect_jammer_fraction(epsilon, |p_j| DetectionScales::nominal(params, topo, p_j))
}

/// Robust variant of [`min_jammer_fraction`] using worst-case scales.
pub fn min_jammer_fraction_robust(
    params: &SystemParams,
    topo: &Topology,
    epsilon: f64,
) -> Result<Option<f64>, DetectionError> {
    robust_scales(params, topo, 1.0)?;
    Ok(bisect_jammer_fraction(epsilon, |p_j| {
        robust_scales(params, topo, p_j)
            .expect("tau_aw validated above")
            .as_scales()
    }))
}

fn bisect_jammer_fraction(epsilon: f64, scales_at: impl Fn(f64) -> DetectionScales) -> Option<f64> {
    if !covertness_satisfied(&scales_at(1.0), epsilon) {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if covertness_satisfied(&scales_at(mid), epsilon) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Detection performance at the optimal threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub theta_op: f64,
    pub p_fa: f64,
    pub p_md: f64,
    pub min_error: f64,
}

impl DetectionOutcome {
    pub fn evaluate(scales: &DetectionScales) -> Result<Self, DetectionError> {
        let theta_op = optimal_threshold(scales)?;
        Ok(Self {
            theta_op,
            p_fa: p_false_alarm(theta_op, scales),
            p_md: p_missed_detection(theta_op, scales),
            min_error: min_detection_error(scales),
        })
    }
}

/// How the Monte Carlo oracle forms the warden's normalized slot power.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectionSampling {
    /// Infinite-symbol limit: the chi-square average is exactly 1 and the
    /// slot power is `sigma2_w + gamma_w`.
    Asymptotic,
    /// `n`-symbol slots: the power is scaled by `chi2(2n) / (2n)`.
    FiniteSymbols(u64),
}

/// Empirical false-alarm / missed-detection frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmpiricalDetection {
    pub p_fa: f64,
    pub p_md: f64,
}

/// Simulates `slots` fading realizations once and evaluates the radiometer
/// at every threshold in `thetas`. Per slot the oracle draws the two squared
/// fading magnitudes, forms the quiet and transmitting slot powers, and (in
/// finite-symbol mode) multiplies each by an independent `chi2(2n)/(2n)`
/// average.
pub fn empirical_error_curve<R: Rng + ?Sized>(
    scales: &DetectionScales,
    thetas: &[f64],
    slots: u64,
    sampling: DetectionSampling,
    rng: &mut R,
) -> Vec<EmpiricalDetection> {
    let mut quiet = Vec::with_capacity(slots as usize);
    let mut transmitting = Vec::with_capacity(slots as usize);
    let chi_avg = match sampling {
        DetectionSampling::Asymptotic => None,
        DetectionSampling::FiniteSymbols(n) => {
            assert!(n >= 1, "finite-symbol mode needs n >= 1");
            // chi2 with 2n degrees of freedom is Gamma(shape n, scale 2)
            Some((
                Gamma::new(n as f64, 2.0).expect("valid gamma"),
                2.0 * n as f64,
            ))
        }
    };
    for _ in 0..slots {
        let g_jw: f64 = Exp1.sample(rng);
        let g_aw: f64 = Exp1.sample(rng);
        let mut p0 = scales.sigma2_w + scales.lambda1 * g_jw;
        let mut p1 = scales.sigma2_w + scales.lambda2 * g_aw + scales.lambda1 * g_jw;
        if let Some((gamma, two_n)) = &chi_avg {
            p0 *= gamma.sample(rng) / two_n;
            p1 *= gamma.sample(rng) / two_n;
        }
        quiet.push(p0);
        transmitting.push(p1);
    }
    quiet.sort_unstable_by(f64::total_cmp);
    transmitting.sort_unstable_by(f64::total_cmp);
    let n = slots as f64;
    thetas
        .iter()
        .map(|&theta| {
            let le = quiet.partition_point(|&v| v <= theta);
            let lt = transmitting.partition_point(|&v| v < theta);
            EmpiricalDetection {
                p_fa: (slots as usize - le) as f64 / n,
                p_md: lt as f64 / n,
            }
        })
        .collect()
}

/// Single-threshold convenience wrapper over [`empirical_error_curve`].
pub fn simulate_detection<R: Rng + ?Sized>(
    scales: &DetectionScales,
    theta: f64,
    slots: u64,
    sampling: DetectionSampling,
    rng: &mut R,
) -> EmpiricalDetection {
    empirical_error_curve(scales, &[theta], slots, sampling, rng)[0]
}
