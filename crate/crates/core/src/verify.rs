//! The property suite behind `ncgvf check`.
//!
//! Each check returns a pass flag and a one-line detail with the measured
//! quantity. Random inputs come from fixed seeds so results are repeatable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cli::config::{parse_config, SIM1_CFG, SIM2_CFG};
use crate::cli::field::{sample_field, Axis, FieldSampleGrid};
use crate::coop::{det_m, gain_gate};
use crate::frames::{se2_transform, Target, UnicycleTarget};
use crate::gvf::{chi_mpf, chi_se2_closed_form, lyapunov_rate_check, prefield, GainSet, RateSample};
use crate::linalg::{generalized_cross, VecN};
use crate::ode::{rk4_step, OdeError};
use crate::paths::{
    builtin_ellipse, builtin_lissajous, level_set_errors, wedge_closed_form, ExtendedState, FourierPath, ParametricPath,
};
use crate::sim::{run, Scenario, SimError, TrajectoryRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> CheckResult {
    result(name, false, format!("error: {err}"))
}

pub fn sim1_scenario() -> Scenario<f64> {
    parse_config(SIM1_CFG).expect("bundled sim1 config is valid").scenario
}

pub fn sim2_scenario() -> Scenario<f64> {
    parse_config(SIM2_CFG).expect("bundled sim2 config is valid").scenario
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> VecN<f64> {
    VecN::from_fn(n, |_| rng.gen_range(-1.0..1.0))
}

pub fn check_orthogonality() -> CheckResult {
    const NAME: &str = "wedge orthogonality";
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut r3_exact = true;
    for trial in 0..10_000 {
        let n = 2 + trial % 2;
        let vs: Vec<VecN<f64>> = (0..n).map(|_| random_vec(&mut rng, n + 1)).collect();
        let w = match generalized_cross(&vs) {
            Ok(w) => w,
            Err(e) => return failed(NAME, e),
        };
        for v in &vs {
            worst = worst.max(w.dot(v).unwrap().abs());
        }
        if n == 2 {
            let (a, b) = (&vs[0], &vs[1]);
            let classical = [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            r3_exact &= w.as_slice() == classical;
        }
    }
    result(
        NAME,
        worst < 1e-10 && r3_exact,
        format!("max |<wedge, v_i>| = {worst:.2e}, R^3 exact = {r3_exact}"),
    )
}

pub fn check_closed_form_wedge() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for path in [builtin_ellipse::<f64>(), builtin_lissajous()] {
        for _ in 0..1000 {
            let theta = rng.gen_range(-50.0..50.0);
            let x = random_vec(&mut rng, path.dim());
            let errors = level_set_errors(&path, &x, theta).expect("matching dimensions");
            let cross = generalized_cross(&errors.grads).expect("n gradients in R^(n+1)");
            let closed = wedge_closed_form(&path, theta);
            worst = worst.max(cross.checked_sub(&closed).unwrap().max_abs());
        }
    }
    result(
        "closed-form wedge",
        worst <= 1e-12,
        format!("max deviation {worst:.2e}"),
    )
}

pub fn check_non_vanishing() -> CheckResult {
    const NAME: &str = "non-vanishing field";
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut min_norm = f64::INFINITY;
    for (i, path) in [builtin_ellipse::<f64>(), builtin_lissajous()].iter().enumerate() {
        let gains = GainSet::unit(path.dim());
        for _ in 0..50_000 {
            let x = VecN::from_fn(path.dim(), |_| rng.gen_range(-10.0..10.0));
            let theta = rng.gen_range(-100.0..100.0) * (i + 1) as f64;
            let errors = level_set_errors(path, &x, theta).expect("matching dimensions");
            min_norm = min_norm.min(prefield(&errors, &gains).expect("unit gains").w.norm());
        }
    }
    let grid = FieldSampleGrid {
        axes: vec![
            Axis::Range {
                lo: -3.0,
                hi: 3.0,
                samples: 41,
            },
            Axis::Range {
                lo: -2.0,
                hi: 2.0,
                samples: 41,
            },
        ],
        thetas: vec![0.0],
        time: 0.0,
    };
    let scenario = Scenario {
        target: Target::Static { dim: 2 },
        agents: vec![],
        coordination: None,
        gains: GainSet::unit(2),
        ..sim1_scenario()
    };
    match sample_field(&scenario, &grid) {
        Ok(s) => {
            let grid_min = s.min_norm.unwrap_or(f64::NAN);
            result(
                NAME,
                min_norm >= 1.0 - 1e-9 && grid_min >= 1.0 - 1e-9 && s.flagged == 0,
                format!("min |w| over 1e5 states {min_norm:.6}, min over 41x41 grid {grid_min:.6}"),
            )
        }
        Err(e) => failed(NAME, e),
    }
}

fn rate_samples(record: &TrajectoryRecord<f64>, agent: usize) -> Vec<RateSample<f64>> {
    record
        .samples
        .iter()
        .map(|s| RateSample {
            t: s.t,
            v: s.agents[agent].v,
            grad_v: s.agents[agent].grad_v.clone(),
        })
        .collect()
}

/// One agent from the first scenario, uncoordinated, on a 30 s horizon.
pub fn single_agent_scenario(g_diag: Vec<f64>) -> Scenario<f64> {
    let mut sc = sim1_scenario();
    sc.agents.truncate(1);
    sc.coordination = None;
    sc.gains = GainSet {
        g_diag,
        k_c: 0.0,
        ..GainSet::unit(2)
    };
    sc.record_stride = 1;
    sc
}

pub fn check_lyapunov_descent() -> CheckResult {
    const NAME: &str = "Lyapunov descent";
    let exact = match run(&single_agent_scenario(vec![1.0; 3])) {
        Ok(r) => lyapunov_rate_check(&rate_samples(&r, 0), &[1.0; 3]).expect("enough samples"),
        Err(e) => return failed(NAME, e),
    };
    let g_diag = vec![0.4, 2.5, 0.7];
    let general = match run(&single_agent_scenario(g_diag.clone())) {
        Ok(r) => lyapunov_rate_check(&rate_samples(&r, 0), &g_diag).expect("enough samples"),
        Err(e) => return failed(NAME, e),
    };
    result(
        NAME,
        exact.max_relative_deviation < 1e-3 && general.max_rate <= 1e-8,
        format!(
            "G = I: max |dV/dt + |grad V|^2| / (1 + |grad V|^2) = {:.2e}; diagonal G: max dV/dt = {:.2e}",
            exact.max_relative_deviation, general.max_rate
        ),
    )
}

pub fn check_closed_form_equivalence() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let path = builtin_ellipse::<f64>();
    let base = match sim1_scenario().target {
        Target::Unicycle(u) => u,
        _ => unreachable!("bundled sim1 uses a unicycle target"),
    };
    let gains = GainSet::unit(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let target = UnicycleTarget {
            x: rng.gen_range(-10.0..10.0),
            y: rng.gen_range(-10.0..10.0),
            heading: rng.gen_range(-10.0..10.0),
            ..base.clone()
        };
        let t = rng.gen_range(0.0..30.0);
        let xi = ExtendedState::extend(
            VecN::from_fn(2, |_| rng.gen_range(-10.0..10.0)),
            rng.gen_range(-20.0..20.0),
        );
        let a = chi_se2_closed_form(&xi, t, &path, &target, &gains).expect("planar");
        let b = chi_mpf(&xi, &path, &se2_transform(&target, t), &gains).expect("rotation is invertible");
        worst = worst.max(a.extended().checked_sub(&b.extended()).unwrap().max_abs());
    }
    result(
        "closed form vs transformed field",
        worst < 1e-9,
        format!("max difference {worst:.2e}"),
    )
}

fn final_errors(record: &TrajectoryRecord<f64>) -> (f64, f64) {
    let last = record.samples.last().expect("runs record at least one sample");
    let phi = last.agents.iter().map(|a| a.phi_norm).fold(0.0, f64::max);
    let edge = last.edge_errors.iter().map(|e| e.abs()).fold(0.0, f64::max);
    (phi, edge)
}

pub fn check_sim1() -> CheckResult {
    match run(&sim1_scenario()) {
        Ok(r) => {
            let (phi, edge) = final_errors(&r);
            result(
                "first scenario reproduction",
                phi < 1e-2 && edge < 1e-2,
                format!("at 30 s: max |Phi| = {phi:.2e}, |theta1 - theta2 - pi/4| = {edge:.2e}"),
            )
        }
        Err(e) => failed("first scenario reproduction", e),
    }
}

pub fn check_sim2() -> CheckResult {
    match run(&sim2_scenario()) {
        Ok(r) => {
            let (phi, edge) = final_errors(&r);
            result(
                "second scenario reproduction",
                phi * phi < 1e-3 && edge < 5e-2,
                format!(
                    "at 60 s: max |Phi|^2 = {:.2e}, max edge error = {edge:.2e} rad",
                    phi * phi
                ),
            )
        }
        Err(e) => failed("second scenario reproduction", e),
    }
}

pub fn check_gain_gate() -> CheckResult {
    const NAME: &str = "coordination gain gate";
    let mut worst = f64::NEG_INFINITY;
    for g in [0.3, 1.0] {
        let mut sc = sim1_scenario();
        sc.gains.g_diag[2] = g;
        sc.t_end = 10.0;
        match run(&sc) {
            Ok(r) => worst = worst.max(r.steps.max_composite_rise.unwrap_or(f64::INFINITY)),
            Err(e) => return failed(NAME, e),
        }
    }
    let rejected = parse_config(&SIM1_CFG.replace("g = 1.0", "g = 1.5")).is_err();
    let mut bad = sim1_scenario().gains;
    bad.g_diag[2] = 1.5;
    let gate_rejects = gain_gate(&bad, true).is_err();
    let signs = det_m(0.3) > 0.0 && det_m(1.0) == 0.0 && det_m(1.5) < 0.0;
    result(
        NAME,
        worst <= 1e-8 && rejected && gate_rejects && signs,
        format!("max composite rise {worst:.2e}; g = 1.5 rejected = {rejected}; det M signs ok = {signs}"),
    )
}

/// The same path-frame start under a static frame and a moving one.
pub fn compensation_pair() -> (Scenario<f64>, Scenario<f64>) {
    let moving = sim1_scenario();
    let (x_p, theta) = (VecN::from_slice(&[3.0, -1.5]).unwrap(), 0.4);
    let target = match &moving.target {
        Target::Unicycle(u) => UnicycleTarget {
            x: 1.5,
            y: -0.5,
            heading: 0.7,
            ..u.clone()
        },
        _ => unreachable!("bundled sim1 uses a unicycle target"),
    };
    let frame = se2_transform(&target, 0.0);
    let x_i = crate::frames::FrameTransform::inverse_apply(&frame, &x_p).expect("planar");
    let single = |target, x| Scenario {
        target,
        agents: vec![ExtendedState::extend(x, theta)],
        coordination: None,
        gains: GainSet::unit(2),
        t_end: 10.0,
        record_stride: 10,
        ..moving.clone()
    };
    (
        single(Target::Static { dim: 2 }, x_p.clone()),
        single(Target::Unicycle(target), x_i),
    )
}

pub fn check_frame_compensation() -> CheckResult {
    let (fixed, moving) = compensation_pair();
    let traces = run(&fixed).and_then(|a| Ok::<_, SimError>((a, run(&moving)?)));
    match traces {
        Ok((a, b)) => {
            let worst = a
                .samples
                .iter()
                .zip(&b.samples)
                .map(|(p, q)| (p.agents[0].v - q.agents[0].v).abs())
                .fold(0.0, f64::max);
            result(
                "frame compensation",
                worst < 1e-4,
                format!("max |V_static - V_moving| over 10 s = {worst:.2e}"),
            )
        }
        Err(e) => failed("frame compensation", e),
    }
}

fn exp_error(dt: f64) -> f64 {
    let steps = (1.0 / dt).round() as usize;
    let mut y = vec![1.0];
    for k in 0..steps {
        y = rk4_step(&y, k as f64 * dt, dt, |_, y| Ok::<_, OdeError>(vec![y[0]])).expect("positive step");
    }
    (y[0] - 1f64.exp()).abs()
}

pub fn check_integrator_order() -> CheckResult {
    const NAME: &str = "integrator order";
    let ratio = exp_error(0.1) / exp_error(0.05);
    let mut finals = Vec::new();
    for dt in [1e-3, 5e-4] {
        let sc = Scenario { dt, ..sim1_scenario() };
        match run(&sc) {
            Ok(r) => finals.push(final_errors(&r)),
            Err(e) => return failed(NAME, e),
        }
    }
    let drift = (finals[0].0 - finals[1].0).abs().max((finals[0].1 - finals[1].1).abs());
    result(
        NAME,
        (14.0..18.0).contains(&ratio) && drift < 1e-4,
        format!("error ratio on dt halving {ratio:.2}; final metric change dt 1e-3 -> 5e-4 {drift:.2e}"),
    )
}

/// A path whose derivative is wrong must be caught by validation.
pub fn check_path_derivatives() -> CheckResult {
    let ok = [builtin_ellipse::<f64>(), builtin_lissajous()].iter().all(|p| {
        let thetas: Vec<f64> = (0..50).map(|k| -12.0 + 0.5 * k as f64).collect();
        crate::paths::check_derivatives(p, &thetas, 1e-6).is_ok()
    });
    let custom: FourierPath<f64> = builtin_ellipse();
    let bounds =
        crate::paths::derivative_bounds(&custom, -4.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI, 2001);
    let bounded = bounds
        .map(|b| b.max_first <= 2.0 + 1e-12 && b.max_second <= 2.0 + 1e-6)
        .unwrap_or(false);
    result(
        "path derivatives",
        ok && bounded,
        format!("analytic derivatives match = {ok}, bounded = {bounded}"),
    )
}

pub fn run_checks() -> Vec<CheckResult> {
    vec![
        check_orthogonality(),
        check_closed_form_wedge(),
        check_path_derivatives(),
        check_non_vanishing(),
        check_lyapunov_descent(),
        check_closed_form_equivalence(),
        check_sim1(),
        check_sim2(),
        check_gain_gate(),
        check_frame_compensation(),
        check_integrator_order(),
    ]
}
