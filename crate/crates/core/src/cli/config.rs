//! TOML scenario documents.
//!
//! Keys carry their units (`_m`, `_rad`, `_s`, `_mps`, `_radps`). Unknown
//! keys are rejected. Agents and graph edges are numbered from 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coop::{CommGraph, FormationPattern};
use crate::frames::{AircraftTarget, FrameError, Target, TimeProfile, UnicycleTarget};
use crate::gvf::GainSet;
use crate::linalg::VecN;
use crate::paths::{
    builtin, builtin_ellipse, builtin_lissajous, ExtendedState, FourierPath, FourierTerm, ParametricPath,
};
use crate::sim::{CoordinationSpec, Scenario, SimError, DEFAULT_DT};

pub const SIM1_CFG: &str = include_str!("../../configs/sim1.cfg");
pub const SIM2_CFG: &str = include_str!("../../configs/sim2.cfg");

pub const DEFAULT_RECORD_STRIDE: usize = 10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("config value: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] SimError),
}

impl From<FrameError> for ConfigError {
    fn from(e: FrameError) -> Self {
        ConfigError::Scenario(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub path: PathConfig,
    pub target: TargetConfig,
    pub agents: Vec<AgentConfig>,
    #[serde(default)]
    pub gains: GainsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordination: Option<CoordinationConfig>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either `builtin = "ellipse" | "lissajous"` or per-coordinate Fourier
/// terms `fourier = [[{ k, a, b }, ...], ...]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier: Option<Vec<Vec<FourierTerm<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    Static {},
    Se2Unicycle {
        #[serde(default)]
        x_m: f64,
        #[serde(default)]
        y_m: f64,
        #[serde(default)]
        heading_rad: f64,
        speed_mps: TimeProfile<f64>,
        turn_rate_radps: TimeProfile<f64>,
    },
    Se3Euler {
        #[serde(default)]
        position_m: [f64; 3],
        #[serde(default)]
        euler_rad: [f64; 3],
        body_velocity_mps: [TimeProfile<f64>; 3],
        body_rates_radps: [TimeProfile<f64>; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub position_m: Vec<f64>,
    #[serde(default)]
    pub theta: f64,
}

/// Missing entries default to `k = 1`, `G = H = I`, `k_c = 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    /// Shorthand for the last entry of `G`, the rest being 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_diag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_diag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinationConfig {
    /// 1-based agent pairs.
    pub edges: Vec<[usize; 2]>,
    pub theta_star_rad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default = "default_t_end")]
    pub t_end_s: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_t_end() -> f64 {
    10.0
}

fn default_stride() -> usize {
    DEFAULT_RECORD_STRIDE
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt_s: default_dt(),
            t_end_s: default_t_end(),
            record_stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File stem of the trajectory CSV; defaults to the scenario name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// A validated scenario plus the settings that only matter to the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub name: String,
    pub scenario: Scenario<f64>,
    pub output: OutputConfig,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

fn build_path(cfg: &PathConfig) -> Result<FourierPath<f64>, ConfigError> {
    match (&cfg.builtin, &cfg.fourier) {
        (Some(name), None) => builtin(name).map_or_else(
            || {
                invalid(format!(
                    "[path] unknown builtin \"{name}\" (expected ellipse or lissajous)"
                ))
            },
            Ok,
        ),
        (None, Some(coords)) => {
            FourierPath::new(coords.clone()).map_err(|e| ConfigError::Invalid(format!("[path] {e}")))
        }
        _ => invalid("[path] needs exactly one of `builtin` or `fourier`"),
    }
}

fn build_target(cfg: &TargetConfig, n: usize) -> Result<Target<f64>, ConfigError> {
    let target = match cfg {
        TargetConfig::Static {} => Target::Static { dim: n },
        TargetConfig::Se2Unicycle {
            x_m,
            y_m,
            heading_rad,
            speed_mps,
            turn_rate_radps,
        } => Target::Unicycle(UnicycleTarget {
            x: *x_m,
            y: *y_m,
            heading: *heading_rad,
            speed: speed_mps.clone(),
            turn_rate: turn_rate_radps.clone(),
        }),
        TargetConfig::Se3Euler {
            position_m,
            euler_rad,
            body_velocity_mps,
            body_rates_radps,
        } => Target::Aircraft(AircraftTarget {
            position: *position_m,
            euler: *euler_rad,
            body_velocity: body_velocity_mps.clone(),
            body_rates: body_rates_radps.clone(),
        }),
    };
    let profiles_finite = match &target {
        Target::Unicycle(u) => {
            u.speed.is_finite() && u.turn_rate.is_finite() && u.state().iter().all(|v| v.is_finite())
        }
        Target::Aircraft(a) => {
            a.body_velocity.iter().chain(&a.body_rates).all(TimeProfile::is_finite)
                && a.state().iter().all(|v| v.is_finite())
        }
        _ => true,
    };
    if !profiles_finite {
        return invalid("[target] values must be finite");
    }
    if target.dim() != n {
        return invalid(format!("[target] kind is {}-D but the path is {n}-D", target.dim()));
    }
    target.check()?;
    Ok(target)
}

fn build_gains(cfg: &GainsConfig, n: usize, coordinated: bool) -> Result<GainSet<f64>, ConfigError> {
    let mut gains = GainSet::unit(n);
    if let Some(k) = &cfg.k {
        gains.k = k.clone();
    }
    match (&cfg.g_diag, cfg.g) {
        (Some(_), Some(_)) => return invalid("[gains] give either `g` or `g_diag`, not both"),
        (Some(d), None) => gains.g_diag = d.clone(),
        (None, Some(g)) => gains.g_diag[n] = g,
        (None, None) => {}
    }
    if let Some(h) = &cfg.h_diag {
        gains.h_diag = h.clone();
    }
    if let Some(k_c) = cfg.k_c {
        gains.k_c = k_c;
    } else if coordinated {
        gains.k_c = 1.0;
    }
    if let Some(o) = cfg.orientation {
        gains.orientation = o;
    }
    Ok(gains)
}

fn build_coordination(cfg: &CoordinationConfig, agents: usize) -> Result<CoordinationSpec<f64>, ConfigError> {
    let mut edges = Vec::with_capacity(cfg.edges.len());
    for &[a, b] in &cfg.edges {
        if a == 0 || b == 0 {
            return invalid("[coordination] agents are numbered from 1");
        }
        edges.push((a - 1, b - 1));
    }
    let graph = CommGraph::new(agents, &edges).map_err(|e| ConfigError::Invalid(format!("[coordination] {e}")))?;
    let pattern = FormationPattern::new(cfg.theta_star_rad.clone())
        .map_err(|e| ConfigError::Invalid(format!("[coordination] {e}")))?;
    if pattern.theta_star.len() != agents {
        return invalid(format!(
            "[coordination] theta_star_rad has {} entries for {agents} agents",
            pattern.theta_star.len()
        ));
    }
    Ok(CoordinationSpec { graph, pattern })
}

impl ScenarioConfig {
    /// Builds and validates the scenario, running the gain gate.
    pub fn build(&self) -> Result<ParsedConfig, ConfigError> {
        let path = build_path(&self.path)?;
        let n = path.dim();
        let target = build_target(&self.target, n)?;
        let mut agents = Vec::with_capacity(self.agents.len());
        for (i, a) in self.agents.iter().enumerate() {
            if a.position_m.len() != n {
                return invalid(format!(
                    "[[agents]] #{} has {} coordinates, path is {n}-D",
                    i + 1,
                    a.position_m.len()
                ));
            }
            let x = VecN::from_slice(&a.position_m)
                .map_err(|_| ConfigError::Invalid(format!("[[agents]] #{} position must be finite", i + 1)))?;
            agents.push(ExtendedState::extend(x, a.theta));
        }
        let coordination = self
            .coordination
            .as_ref()
            .map(|c| build_coordination(c, agents.len()))
            .transpose()?;
        let gains = build_gains(&self.gains, n, coordination.is_some())?;
        let scenario = Scenario {
            path,
            target,
            agents,
            gains,
            coordination,
            dt: self.integrator.dt_s,
            t_end: self.integrator.t_end_s,
            record_stride: self.integrator.record_stride,
        };
        scenario.validate()?;
        Ok(ParsedConfig {
            name: self.name.clone().unwrap_or_else(|| "scenario".into()),
            scenario,
            output: self.output.clone(),
        })
    }
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    cfg.build()
}

fn path_config(path: &FourierPath<f64>) -> PathConfig {
    if *path == builtin_ellipse() {
        PathConfig {
            builtin: Some("ellipse".into()),
            fourier: None,
        }
    } else if *path == builtin_lissajous() {
        PathConfig {
            builtin: Some("lissajous".into()),
            fourier: None,
        }
    } else {
        PathConfig {
            builtin: None,
            fourier: Some(path.coords().to_vec()),
        }
    }
}

/// The document for a scenario with every default written out.
pub fn to_config(name: &str, scenario: &Scenario<f64>, output: &OutputConfig) -> Result<ScenarioConfig, ConfigError> {
    let target = match &scenario.target {
        Target::Static { .. } => TargetConfig::Static {},
        Target::Unicycle(u) => TargetConfig::Se2Unicycle {
            x_m: u.x,
            y_m: u.y,
            heading_rad: u.heading,
            speed_mps: u.speed.clone(),
            turn_rate_radps: u.turn_rate.clone(),
        },
        Target::Aircraft(a) => TargetConfig::Se3Euler {
            position_m: a.position,
            euler_rad: a.euler,
            body_velocity_mps: a.body_velocity.clone(),
            body_rates_radps: a.body_rates.clone(),
        },
        Target::Custom { .. } => return invalid("custom transforms have no config representation"),
    };
    let gains = &scenario.gains;
    Ok(ScenarioConfig {
        name: Some(name.to_string()),
        path: path_config(&scenario.path),
        target,
        agents: scenario
            .agents
            .iter()
            .map(|a| AgentConfig {
                position_m: a.x.as_slice().to_vec(),
                theta: a.theta,
            })
            .collect(),
        gains: GainsConfig {
            k: Some(gains.k.clone()),
            g: None,
            g_diag: Some(gains.g_diag.clone()),
            h_diag: Some(gains.h_diag.clone()),
            k_c: Some(gains.k_c),
            orientation: Some(gains.orientation),
        },
        coordination: scenario.coordination.as_ref().map(|c| CoordinationConfig {
            edges: c.graph.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            theta_star_rad: c.pattern.theta_star.clone(),
        }),
        integrator: IntegratorConfig {
            dt_s: scenario.dt,
            t_end_s: scenario.t_end,
            record_stride: scenario.record_stride,
        },
        output: output.clone(),
    })
}

pub fn serialize_config(cfg: &ScenarioConfig) -> Result<String, ConfigError> {
    toml::to_string(cfg).map_err(|e| ConfigError::Invalid(e.to_string()))
}
