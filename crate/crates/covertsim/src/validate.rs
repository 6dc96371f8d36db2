//! Built-in cross-check suite behind the `validate` subcommand: every
//! closed form is re-derived by an independent route (finite differences,
//! grid search, Monte Carlo, brute force) and compared at fixed tolerances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::detection::{self, DetectionSampling, DetectionScales};
use crate::model::{ChannelRealization, EffectiveGains, PowerAllocation, SystemParams, Topology};
use crate::optimizer::{self, SolveOptions};

struct Report {
    all_ok: bool,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("ok   {name}");
        } else {
            println!("FAIL {name}: {detail}");
            self.all_ok = false;
        }
    }
}

fn random_gains(rng: &mut ChaCha8Rng) -> EffectiveGains {
    let mut lu = |lo: f64, hi: f64| 10f64.powf(rng.gen_range(lo.log10()..hi.log10()));
    EffectiveGains {
        gamma_b: lu(0.01, 100.0),
        gamma_c: lu(0.01, 100.0),
        gamma_u: lu(0.01, 100.0),
        gamma_j: lu(0.01, 1000.0),
    }
}

fn random_scales(rng: &mut ChaCha8Rng) -> DetectionScales {
    let l1 = 10f64.powf(rng.gen_range(-1.3..0.7));
    let mut l2 = 10f64.powf(rng.gen_range(-1.3..0.7));
    if (l1 - l2).abs() < 1e-3 * l1.max(l2) {
        l2 = l1 * 1.01;
    }
    DetectionScales::new(l1, l2, 1e-3).unwrap()
}

/// Two-stage brute-force minimizer of `p_FA + p_MD` over the threshold:
/// coarse scan, then a fine pass at `resolution` around the coarse basin.
fn grid_search_threshold(scales: &DetectionScales, resolution: f64) -> f64 {
    let span = 30.0 * scales.lambda1.max(scales.lambda2);
    let error =
        |t: f64| detection::p_false_alarm(t, scales) + detection::p_missed_detection(t, scales);
    let coarse_steps = 20_000u64;
    let mut best = (f64::INFINITY, scales.sigma2_w);
    for i in 0..=coarse_steps {
        let t = scales.sigma2_w + span * i as f64 / coarse_steps as f64;
        let e = error(t);
        if e < best.0 {
            best = (e, t);
        }
    }
    let coarse_step = span / coarse_steps as f64;
    let lo = (best.1 - coarse_step).max(scales.sigma2_w);
    let hi = best.1 + coarse_step;
    let fine_steps = ((hi - lo) / resolution).ceil() as u64;
    for i in 0..=fine_steps {
        let t = lo + (hi - lo) * i as f64 / fine_steps as f64;
        let e = error(t);
        if e < best.0 {
            best = (e, t);
        }
    }
    best.1
}

/// Runs every cross-check and reports one line per suite. Returns whether
/// all of them passed.
pub fn run_validation(cfg: &RunConfig) -> bool {
    let mut report = Report { all_ok: true };
    let seed = cfg.seed;

    // objective split versus the direct rate expression
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..2000 {
            let g = random_gains(&mut rng);
            let a = PowerAllocation::clamped(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let (gamma, omega) = optimizer::dc_parts(&a, &g);
            worst = worst.max((gamma - omega - optimizer::unclamped_total_rate(&a, &g)).abs());
        }
        report.check(
            "dc split == direct rate (2000 random points)",
            worst < 1e-10,
            format!("worst |difference| = {worst:.3e}"),
        );
    }

    // analytic gradient versus central finite differences
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let h = 1e-6;
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let g = random_gains(&mut rng);
            let (p_ab, p_j) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
            let omega = |p_ab: f64, p_j: f64| {
                optimizer::dc_parts(&PowerAllocation::clamped(p_ab, p_j), &g).1
            };
            let fd = [
                (omega(p_ab + h, p_j) - omega(p_ab - h, p_j)) / (2.0 * h),
                (omega(p_ab, p_j + h) - omega(p_ab, p_j - h)) / (2.0 * h),
            ];
            let an = optimizer::grad_omega(&PowerAllocation::clamped(p_ab, p_j), &g);
            let rel = ((fd[0] - an[0]).powi(2) + (fd[1] - an[1]).powi(2)).sqrt()
                / (an[0].powi(2) + an[1].powi(2)).sqrt().max(1e-3);
            worst = worst.max(rel);
        }
        report.check(
            "omega gradient vs finite differences (200 points)",
            worst < 1e-5,
            format!("worst relative error = {worst:.3e}"),
        );
    }

    // closed-form optimal threshold versus brute-force grid search
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let s = random_scales(&mut rng);
            let theta_op = detection::optimal_threshold(&s).unwrap();
            let theta_grid = grid_search_threshold(&s, 1e-5);
            worst = worst.max((theta_grid - theta_op).abs());
        }
        report.check(
            "optimal threshold vs grid search (50 scale triples)",
            worst <= 1.5e-5,
            format!("worst |difference| = {worst:.3e}"),
        );
    }

    // closed-form minimum error versus the sum at the optimal threshold
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let s = random_scales(&mut rng);
            let out = detection::DetectionOutcome::evaluate(&s).unwrap();
            worst = worst.max((out.p_fa + out.p_md - out.min_error).abs());
        }
        report.check(
            "minimum error closed form (200 scale triples)",
            worst < 1e-12,
            format!("worst |difference| = {worst:.3e}"),
        );
    }

    // Monte Carlo radiometer versus the closed forms
    {
        let s = DetectionScales::new(0.8, 1.7, 1e-3).unwrap();
        let slots = 100_000u64;
        let thetas: Vec<f64> = (0..10)
            .map(|i| s.sigma2_w + 5.0 * s.lambda2 * i as f64 / 9.0)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let curve = detection::empirical_error_curve(
            &s,
            &thetas,
            slots,
            DetectionSampling::Asymptotic,
            &mut rng,
        );
        let mut worst = 0.0f64;
        for (theta, emp) in thetas.iter().zip(&curve) {
            for (obs, exp) in [
                (emp.p_fa, detection::p_false_alarm(*theta, &s)),
                (emp.p_md, detection::p_missed_detection(*theta, &s)),
            ] {
                let se = (exp * (1.0 - exp) / slots as f64).sqrt();
                worst = worst.max((obs - exp).abs() - 4.0 * se - 1e-4);
            }
        }
        report.check(
            "detection Monte Carlo vs closed forms (1e5 slots)",
            worst <= 0.0,
            format!("worst excess beyond 4 standard errors = {worst:.3e}"),
        );
    }

    // surrogate over-estimation
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let mut worst = 0.0f64;
        for _ in 0..500 {
            let g = random_gains(&mut rng);
            let anchor =
                PowerAllocation::clamped(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let probe = PowerAllocation::clamped(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let lin = optimizer::linearize_omega(&anchor, &g);
            let (_, omega) = optimizer::dc_parts(&probe, &g);
            worst = worst.max(omega - lin.eval(probe.p_ab(), probe.p_j()));
        }
        report.check(
            "linearized omega over-estimates omega (500 pairs)",
            worst <= 1e-10,
            format!("worst under-estimate = {worst:.3e}"),
        );
    }

    // iterative solver versus the brute-force oracle
    {
        let params = SystemParams::default().with_p_jmax_dbw(20.0);
        let topo = Topology::default();
        let opts = SolveOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let ch = ChannelRealization::sample(&mut rng);
            let gains = EffectiveGains::compute(&params, &topo, &ch);
            let r = optimizer::sca_solve(&params, &topo, &gains, &opts);
            let oracle = optimizer::grid_oracle(&params, &topo, &gains, 2e-3);
            match (r.is_feasible(), oracle) {
                (true, Some((_, v))) => worst = worst.max((r.objective - v).abs()),
                (false, None) => {}
                _ => worst = f64::INFINITY,
            }
        }
        report.check(
            "solver vs grid oracle (5 realizations)",
            worst <= 1e-2,
            format!("worst |difference| = {worst:.3e}"),
        );
    }

    // ascent, convergence, and exact feasibility of solver trajectories
    {
        let params = SystemParams::default().with_p_jmax_dbw(20.0);
        let topo = Topology::default();
        let opts = SolveOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let mut ok = true;
        let mut detail = String::new();
        for i in 0..20 {
            let ch = ChannelRealization::sample(&mut rng);
            let gains = EffectiveGains::compute(&params, &topo, &ch);
            let r = optimizer::sca_solve(&params, &topo, &gains, &opts);
            if !r.is_feasible() {
                continue;
            }
            let monotone = r.trajectory.windows(2).all(|w| w[1] >= w[0] - 1e-9);
            let secrecy_ok = optimizer::exact_secrecy_slack(
                &r.allocation,
                &gains,
                params.r_bob_min(),
            ) >= -1e-9;
            let covert_ok = detection::covertness_satisfied(
                &DetectionScales::nominal(&params, &topo, r.allocation.p_j()),
                params.epsilon(),
            );
            if !(monotone && secrecy_ok && covert_ok && r.iterations <= 50) {
                ok = false;
                detail = format!("realization {i} failed (monotone={monotone}, secrecy={secrecy_ok}, covert={covert_ok}, iters={})", r.iterations);
                break;
            }
        }
        report.check(
            "solver trajectories ascend and end feasible (20 realizations)",
            ok,
            detail,
        );
    }

    // covert bisection confirmed by the Monte Carlo radiometer
    {
        let params = SystemParams::default().with_p_jmax_dbw(20.0);
        let topo = Topology::default();
        let p_j_min = detection::min_jammer_fraction(&params, &topo, params.epsilon());
        let ok = match p_j_min {
            None => false,
            Some(p_j_min) => {
                let scales = DetectionScales::nominal(&params, &topo, p_j_min);
                let theta = detection::optimal_threshold(&scales).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 8);
                let emp = detection::simulate_detection(
                    &scales,
                    theta,
                    200_000,
                    DetectionSampling::Asymptotic,
                    &mut rng,
                );
                (emp.p_fa + emp.p_md - (1.0 - params.epsilon())).abs() <= 0.01
            }
        };
        report.check(
            "jammer-fraction bisection confirmed by Monte Carlo",
            ok,
            "empirical error at the bisected fraction strayed from 1 - epsilon".into(),
        );
    }

    report.all_ok
}
