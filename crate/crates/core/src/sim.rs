//! Fixed-step co-simulation of a moving target and a swarm of agents.
//!
//! The target state and every agent's `(x_I, θ)` are stacked into one flat
//! vector and advanced together with RK4, so all stages see consistent
//! target poses and neighbour θ values.

use log::debug;
use thiserror::Error;

use crate::coop::{
    combined_field, composite_lyapunov, edge_errors, gain_gate, CommGraph, Coordination, FormationPattern, GainCase,
};
use crate::frames::{FrameError, FrameTransform, Target};
use crate::gvf::{grad_xi_v, lyapunov_v, GainSet, GvfError};
use crate::linalg::{LinalgError, VecN};
use crate::paths::{level_set_errors, ExtendedState, FourierPath, ParametricPath, PathError};
use crate::scalar::Real;

pub use crate::ode::{rk4_step, OdeError};

/// Default integration step in seconds.
pub const DEFAULT_DT: f64 = 1e-3;
/// Any state entry beyond this magnitude aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Gvf(#[from] GvfError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("state diverged at t = {t} s (|entry| = {value:e})")]
    Divergence { t: f64, value: f64 },
}

impl SimError {
    pub fn is_validation(&self) -> bool {
        matches!(self, SimError::Invalid(_) | SimError::Gvf(GvfError::InvalidGains(_)))
    }
}

/// Graph and reference configuration for coordinated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationSpec<T> {
    pub graph: CommGraph,
    pub pattern: FormationPattern<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub path: FourierPath<T>,
    pub target: Target<T>,
    pub agents: Vec<ExtendedState<T>>,
    pub gains: GainSet<T>,
    pub coordination: Option<CoordinationSpec<T>>,
    pub dt: T,
    pub t_end: T,
    /// Record every `record_stride`-th step (the first and last are always kept).
    pub record_stride: usize,
}

impl<T: Real> Scenario<T> {
    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    /// Checks every structural invariant and the gain gate.
    pub fn validate(&self) -> Result<GainCase, SimError> {
        let n = self.dim();
        let invalid = |m: String| Err(SimError::Invalid(m));
        if self.agents.is_empty() {
            return invalid("scenario has no agents".into());
        }
        if self.target.dim() != n {
            return invalid(format!("target frame is {}-D but the path is {n}-D", self.target.dim()));
        }
        for (i, a) in self.agents.iter().enumerate() {
            if a.dim() != n {
                return invalid(format!("agent {} is {}-D but the path is {n}-D", i + 1, a.dim()));
            }
            if !a.is_finite() {
                return invalid(format!("agent {} has a non-finite initial state", i + 1));
            }
        }
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return invalid("dt must be positive".into());
        }
        if !(self.t_end.is_finite() && self.t_end > self.dt) {
            return invalid("t_end must exceed dt".into());
        }
        if self.record_stride == 0 {
            return invalid("record stride must be at least 1".into());
        }
        if let Some(co) = &self.coordination {
            if co.graph.agents() != self.agents.len() {
                return invalid(format!(
                    "graph has {} agents, scenario has {}",
                    co.graph.agents(),
                    self.agents.len()
                ));
            }
            if co.pattern.theta_star.len() != self.agents.len() {
                return invalid("reference configuration length differs from agent count".into());
            }
        }
        self.target.check()?;
        Ok(gain_gate(&self.gains, self.coordination.is_some())?)
    }

    /// Number of integration steps; the last one is shortened to land on
    /// `t_end` exactly.
    pub fn step_count(&self) -> usize {
        let ratio = (self.t_end / self.dt).to_f64().unwrap_or(0.0);
        (ratio - 1e-9).ceil().max(1.0) as usize
    }

    fn coordination(&self) -> Option<Coordination<'_, T>> {
        self.coordination.as_ref().map(|c| Coordination {
            graph: &c.graph,
            pattern: &c.pattern,
        })
    }

    fn initial_state(&self) -> Vec<T> {
        let mut y = self.target.state();
        for a in &self.agents {
            y.extend_from_slice(a.x.as_slice());
            y.push(a.theta);
        }
        y
    }

    fn split<'a>(&self, y: &'a [T]) -> (&'a [T], Vec<ExtendedState<T>>) {
        let m = self.target.state().len();
        let n = self.dim();
        let agents = y[m..]
            .chunks(n + 1)
            .map(|c| ExtendedState::extend(VecN::from_slice(&c[..n]).expect("finite state"), c[n]))
            .collect();
        (&y[..m], agents)
    }

    /// Time derivative of the stacked state.
    pub fn derivative(&self, t: T, y: &[T]) -> Result<Vec<T>, SimError> {
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { index: i }.into());
        }
        let (target_state, agents) = self.split(y);
        let target = self.target.with_state(target_state);
        let frame = target.frame(t)?;
        let mut out = target.state_rates(t)?;
        let theta: Vec<T> = agents.iter().map(|a| a.theta).collect();
        for (i, xi) in agents.iter().enumerate() {
            let f = combined_field(i, xi, &theta, &self.path, &frame, &self.gains, self.coordination())?;
            out.extend_from_slice(f.xdot.as_slice());
            out.push(f.theta_dot);
        }
        Ok(out)
    }

    fn sample(&self, t: T, y: &[T]) -> Result<Sample<T>, SimError> {
        let (target_state, agents) = self.split(y);
        let target = self.target.with_state(target_state);
        let frame = target.frame(t)?;
        let mut samples = Vec::with_capacity(agents.len());
        for xi in &agents {
            let x_p = frame.apply(&xi.x)?;
            let errors = level_set_errors(&self.path, &x_p, xi.theta)?;
            samples.push(AgentSample {
                v: lyapunov_v(&errors.phi, &self.gains.k)?,
                grad_v: grad_xi_v(&errors, &self.gains.k)?,
                phi_norm: errors.phi.norm(),
                x_i: xi.x.clone(),
                x_p,
                theta: xi.theta,
            });
        }
        let theta: Vec<T> = agents.iter().map(|a| a.theta).collect();
        let (edges, composite_v) = match &self.coordination {
            Some(co) => {
                let vs: Vec<T> = samples.iter().map(|s| s.v).collect();
                (
                    edge_errors(&theta, &co.graph, &co.pattern)?,
                    Some(composite_lyapunov(&vs, &theta, &co.graph, &co.pattern, self.gains.k_c)?),
                )
            }
            None => (Vec::new(), None),
        };
        Ok(Sample {
            t,
            agents: samples,
            edge_errors: edges,
            composite_v,
            target_state: target_state.to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSample<T> {
    pub x_i: VecN<T>,
    pub x_p: VecN<T>,
    pub theta: T,
    pub v: T,
    pub phi_norm: T,
    pub grad_v: VecN<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub agents: Vec<AgentSample<T>>,
    /// `θ_i − θ_j − Δ[i, j]` per graph edge; empty without coordination.
    pub edge_errors: Vec<T>,
    /// `𝕍`; `None` without coordination.
    pub composite_v: Option<T>,
    pub target_state: Vec<T>,
}

/// Run settings echoed alongside the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub dim: usize,
    pub agents: usize,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub record_stride: usize,
    /// Zero-based edges of the communication graph.
    pub edges: Vec<(usize, usize)>,
    pub gain_case: GainCase,
    pub g: f64,
    pub k_c: f64,
}

/// Extremes tracked at every integration step, not only recorded ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats<T> {
    /// Largest one-step increase of any agent's `V`.
    pub max_agent_v_rise: T,
    /// Largest one-step increase of `𝕍`.
    pub max_composite_rise: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub header: RecordHeader,
    pub samples: Vec<Sample<T>>,
    pub steps: StepStats<T>,
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Runs a scenario to `t_end`.
pub fn run<T: Real>(scenario: &Scenario<T>) -> Result<TrajectoryRecord<T>, SimError> {
    let case = scenario.validate()?;
    let steps = scenario.step_count();
    let header = RecordHeader {
        dim: scenario.dim(),
        agents: scenario.agents.len(),
        dt: to_f64(scenario.dt),
        t_end: to_f64(scenario.t_end),
        steps,
        record_stride: scenario.record_stride,
        edges: scenario
            .coordination
            .as_ref()
            .map(|c| c.graph.edges().to_vec())
            .unwrap_or_default(),
        gain_case: case,
        g: to_f64(scenario.gains.g()),
        k_c: to_f64(scenario.gains.k_c),
    };
    debug!("running {steps} steps of {} s with {} agents", header.dt, header.agents);

    let mut y = scenario.initial_state();
    let mut t = T::zero();
    let mut current = scenario.sample(t, &y)?;
    let mut samples = vec![current.clone()];
    let mut stats = StepStats {
        max_agent_v_rise: T::neg_infinity(),
        max_composite_rise: current.composite_v.map(|_| T::neg_infinity()),
    };
    let limit = T::lit(DIVERGENCE_LIMIT);
    for k in 1..=steps {
        let t_next = if k == steps {
            scenario.t_end
        } else {
            scenario.dt * T::from_usize(k).expect("step index fits")
        };
        y = rk4_step(&y, t, t_next - t, |s, state| scenario.derivative(s, state))?;
        if let Some(worst) = y.iter().map(|v| v.abs()).find(|v| !(*v <= limit)) {
            return Err(SimError::Divergence {
                t: to_f64(t_next),
                value: to_f64(worst),
            });
        }
        scenario
            .target
            .with_state(&y[..scenario.target.state().len()])
            .check()?;
        t = t_next;
        let next = scenario.sample(t, &y)?;
        for (a, b) in current.agents.iter().zip(&next.agents) {
            stats.max_agent_v_rise = stats.max_agent_v_rise.max(b.v - a.v);
        }
        if let (Some(prev), Some(now), Some(rise)) =
            (current.composite_v, next.composite_v, stats.max_composite_rise.as_mut())
        {
            *rise = rise.max(now - prev);
        }
        if k % scenario.record_stride == 0 || k == steps {
            samples.push(next.clone());
        }
        current = next;
    }
    Ok(TrajectoryRecord {
        header,
        samples,
        steps: stats,
    })
}

/// Thresholds used by [`metrics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTolerances<T> {
    /// On `‖Φ‖²`.
    pub phi_sq: T,
    /// On `|θ_i − θ_j − Δ[i, j]|`.
    pub edge: T,
}

impl<T: Real> Default for MetricTolerances<T> {
    fn default() -> Self {
        Self {
            phi_sq: T::lit(1e-4),
            edge: T::lit(1e-2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics<T> {
    pub final_phi_sq: Vec<T>,
    pub max_phi_sq: Vec<T>,
    /// First recorded time after which the agent's `‖Φ‖²` stays below tolerance.
    pub time_to_tolerance: Vec<Option<T>>,
    pub final_edge_errors: Vec<T>,
    /// First recorded time after which every edge error stays below tolerance.
    pub time_to_coordination: Option<T>,
    pub max_agent_v_rise: T,
    pub max_composite_rise: Option<T>,
}

fn settle_time<T: Real>(times: &[T], ok: impl Fn(usize) -> bool) -> Option<T> {
    let mut settled = None;
    for (k, &t) in times.iter().enumerate() {
        if ok(k) {
            settled.get_or_insert(t);
        } else {
            settled = None;
        }
    }
    settled
}

pub fn metrics<T: Real>(record: &TrajectoryRecord<T>, tol: MetricTolerances<T>) -> Result<Metrics<T>, SimError> {
    let last = record
        .samples
        .last()
        .ok_or_else(|| SimError::Invalid("empty trajectory record".into()))?;
    let times: Vec<T> = record.samples.iter().map(|s| s.t).collect();
    let phi_sq = |k: usize, i: usize| record.samples[k].agents[i].phi_norm.powi(2);
    let agents = last.agents.len();
    let final_phi_sq = (0..agents).map(|i| phi_sq(times.len() - 1, i)).collect();
    let max_phi_sq = (0..agents)
        .map(|i| (0..times.len()).map(|k| phi_sq(k, i)).fold(T::zero(), T::max))
        .collect();
    let time_to_tolerance = (0..agents)
        .map(|i| settle_time(&times, |k| phi_sq(k, i) < tol.phi_sq))
        .collect();
    let time_to_coordination = if last.edge_errors.is_empty() {
        None
    } else {
        settle_time(&times, |k| {
            record.samples[k].edge_errors.iter().all(|e| e.abs() < tol.edge)
        })
    };
    Ok(Metrics {
        final_phi_sq,
        max_phi_sq,
        time_to_tolerance,
        final_edge_errors: last.edge_errors.clone(),
        time_to_coordination,
        max_agent_v_rise: record.steps.max_agent_v_rise,
        max_composite_rise: record.steps.max_composite_rise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{ProfileTerm, TimeProfile, UnicycleTarget};
    use crate::paths::builtin_ellipse;
    use std::f64::consts::FRAC_PI_4;

    fn v(xs: &[f64]) -> VecN<f64> {
        VecN::from_slice(xs).unwrap()
    }

    fn static_single(x: &[f64], theta: f64) -> Scenario<f64> {
        Scenario {
            path: builtin_ellipse(),
            target: Target::Static { dim: 2 },
            agents: vec![ExtendedState::extend(v(x), theta)],
            gains: GainSet::unit(2),
            coordination: None,
            dt: 1e-2,
            t_end: 2.0,
            record_stride: 10,
        }
    }

    fn moving_pair() -> Scenario<f64> {
        Scenario {
            path: builtin_ellipse(),
            target: Target::Unicycle(UnicycleTarget {
                x: 0.0,
                y: 0.0,
                heading: 0.0,
                speed: TimeProfile::constant(1.0),
                turn_rate: TimeProfile::new(vec![ProfileTerm::sin(0.5, 1.0)]),
            }),
            agents: vec![
                ExtendedState::extend(v(&[2.0, 1.0]), 0.0),
                ExtendedState::extend(v(&[1.0, -2.0]), 0.0),
            ],
            gains: GainSet {
                k_c: 1.0,
                ..GainSet::unit(2)
            },
            coordination: Some(CoordinationSpec {
                graph: CommGraph::chain(2).unwrap(),
                pattern: FormationPattern::new(vec![FRAC_PI_4, 0.0]).unwrap(),
            }),
            dt: 1e-2,
            t_end: 3.0,
            record_stride: 5,
        }
    }

    #[test]
    fn on_path_start_stays_on_path() {
        let sc = Scenario {
            dt: DEFAULT_DT,
            ..static_single(&[2.0, 0.0], 0.0)
        };
        let record = run(&sc).unwrap();
        for s in &record.samples {
            assert!(s.agents[0].phi_norm < 1e-9, "{}", s.agents[0].phi_norm);
        }
        let m = metrics(&record, MetricTolerances::default()).unwrap();
        assert!(m.final_phi_sq[0] < 1e-9);
        assert_eq!(m.time_to_tolerance[0], Some(0.0));
    }

    #[test]
    fn sample_times_and_stride() {
        let sc = Scenario {
            t_end: 1.005,
            ..static_single(&[1.0, 1.0], 0.0)
        };
        assert_eq!(sc.step_count(), 101);
        let record = run(&sc).unwrap();
        let times: Vec<f64> = record.samples.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 12);
        assert_eq!(*times.last().unwrap(), 1.005);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(record.header.steps, 101);
    }

    #[test]
    fn deterministic_records() {
        let a = run(&moving_pair()).unwrap();
        let b = run(&moving_pair()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recorded_path_frame_positions_are_consistent() {
        let sc = moving_pair();
        let record = run(&sc).unwrap();
        for s in &record.samples {
            let frame = sc.target.with_state(&s.target_state).frame(s.t).unwrap();
            for a in &s.agents {
                let x_p = frame.apply(&a.x_i).unwrap();
                assert!(x_p.checked_sub(&a.x_p).unwrap().max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coordinated_descent_per_step() {
        let record = run(&moving_pair()).unwrap();
        let rise = record.steps.max_composite_rise.unwrap();
        assert!(rise <= 1e-8, "{rise:e}");
        assert!(record.steps.max_agent_v_rise <= 1e-8);
    }

    #[test]
    fn validation_errors() {
        let mut sc = static_single(&[1.0, 1.0], 0.0);
        sc.agents.clear();
        assert!(matches!(run(&sc), Err(SimError::Invalid(_))));
        let sc = Scenario {
            dt: 0.0,
            ..static_single(&[1.0, 1.0], 0.0)
        };
        assert!(run(&sc).unwrap_err().is_validation());
        let sc = Scenario {
            t_end: 0.001,
            ..static_single(&[1.0, 1.0], 0.0)
        };
        assert!(run(&sc).is_err());
        let mut sc = moving_pair();
        sc.gains.g_diag = vec![1.0, 1.0, 1.5];
        assert!(run(&sc).unwrap_err().is_validation());
        let mut sc = moving_pair();
        sc.agents.push(ExtendedState::extend(v(&[0.0, 0.0]), 0.0));
        assert!(run(&sc).is_err());
        let sc = Scenario {
            target: Target::Static { dim: 3 },
            ..static_single(&[1.0, 1.0], 0.0)
        };
        assert!(run(&sc).is_err());
    }

    #[test]
    fn divergence_guard() {
        let mut sc = static_single(&[1.0, 1.0], 0.0);
        sc.agents[0].x = v(&[2e6, 0.0]);
        assert!(matches!(run(&sc), Err(SimError::Divergence { .. })));
    }

    #[test]
    fn metrics_report_settling() {
        // ‖∇V‖² ≥ 2V gives ‖Φ‖² ≤ 2e^{-2t}, below 1e-2 by t = 2.65
        let sc = Scenario {
            t_end: 4.0,
            ..static_single(&[3.0, 1.0], 0.0)
        };
        let record = run(&sc).unwrap();
        let m = metrics(
            &record,
            MetricTolerances {
                phi_sq: 1e-2,
                edge: 1e-2,
            },
        )
        .unwrap();
        let settle = m.time_to_tolerance[0].unwrap();
        assert!(settle > 0.0 && settle <= 2.65, "{settle}");
        assert!(m.max_phi_sq[0] >= m.final_phi_sq[0]);
        assert!(m.final_edge_errors.is_empty());
        assert!(m.time_to_coordination.is_none());
    }

    #[test]
    fn settle_time_resets_on_excursion() {
        let times = [0.0, 1.0, 2.0, 3.0];
        let ok = [true, false, true, true];
        assert_eq!(settle_time(&times, |k| ok[k]), Some(2.0));
        assert_eq!(settle_time(&times, |_| false), None);
    }
}
