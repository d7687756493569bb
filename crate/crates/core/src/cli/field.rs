//! Grid sampling of the commanded field for quiver plots.

use std::path::Path;

use thiserror::Error;

use super::output::{csv_err, io_err, OutputError};
use crate::frames::Target;
use crate::gvf::{chi_mpf, GvfError};
use crate::linalg::VecN;
use crate::paths::{ExtendedState, ParametricPath};
use crate::sim::Scenario;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Gvf(#[from] GvfError),
    #[error("advancing the target to the sample time failed: {0}")]
    Target(String),
    #[error(transparent)]
    Output(#[from] OutputError),
}

/// One axis of the grid: evenly spaced samples, or a fixed slice value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Range { lo: f64, hi: f64, samples: usize },
    Fixed(f64),
}

impl Axis {
    fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Fixed(v) => vec![v],
            Axis::Range { lo, hi, samples } => {
                let step = (hi - lo) / (samples - 1) as f64;
                (0..samples).map(|k| lo + step * k as f64).collect()
            }
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = FieldError;

    /// `lo:hi:n` or a single number.
    fn from_str(s: &str) -> Result<Self, FieldError> {
        let bad = || FieldError::Grid(format!("axis `{s}` is neither `lo:hi:n` nor a number"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => v.trim().parse().map(Axis::Fixed).map_err(|_| bad()),
            [lo, hi, n] => Ok(Axis::Range {
                lo: lo.trim().parse().map_err(|_| bad())?,
                hi: hi.trim().parse().map_err(|_| bad())?,
                samples: n.trim().parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSampleGrid {
    pub axes: Vec<Axis>,
    pub thetas: Vec<f64>,
    /// Target time at which the frame is frozen, in seconds.
    pub time: f64,
}

impl FieldSampleGrid {
    pub fn validate(&self, n: usize) -> Result<(), FieldError> {
        if self.axes.len() != n {
            return Err(FieldError::Grid(format!(
                "{} axes given for a {n}-D path",
                self.axes.len()
            )));
        }
        let mut ranges = 0;
        for a in &self.axes {
            match *a {
                Axis::Range { lo, hi, samples } => {
                    ranges += 1;
                    if samples < 2 {
                        return Err(FieldError::Grid("each axis needs at least 2 samples".into()));
                    }
                    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                        return Err(FieldError::Grid("axis bounds must satisfy lo < hi".into()));
                    }
                }
                Axis::Fixed(v) if !v.is_finite() => {
                    return Err(FieldError::Grid("fixed axis value must be finite".into()))
                }
                Axis::Fixed(_) => {}
            }
        }
        if ranges == 0 {
            return Err(FieldError::Grid("at least one axis must be a range".into()));
        }
        if self.thetas.is_empty() || self.thetas.iter().any(|t| !t.is_finite()) {
            return Err(FieldError::Grid("need at least one finite θ slice".into()));
        }
        if !(self.time.is_finite() && self.time >= 0.0) {
            return Err(FieldError::Grid("time must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldRow {
    pub x: Vec<f64>,
    pub theta: f64,
    /// Commanded `(ẋ_I, θ̇)`; `None` where the Jacobian is singular.
    pub value: Option<(Vec<f64>, f64)>,
    /// `‖(ẋ_I, θ̇)‖`.
    pub norm: f64,
    /// `‖w‖` of the pre-field before frame compensation.
    pub prefield_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    pub dim: usize,
    pub rows: Vec<FieldRow>,
    /// Smallest `norm` over unflagged rows.
    pub min_norm: Option<f64>,
    pub min_prefield_norm: Option<f64>,
    pub flagged: usize,
}

fn target_at(target: &Target<f64>, time: f64, dt: f64) -> Result<Target<f64>, FieldError> {
    let mut tg = target.clone();
    let mut t = 0.0;
    while t < time {
        let h = dt.min(time - t);
        tg = tg.step(t, h).map_err(|e| FieldError::Target(e.to_string()))?;
        t += h;
    }
    Ok(tg)
}

/// Evaluates the field on every grid point and θ slice. Agents in the
/// scenario are ignored. Samples with a singular Jacobian are flagged and
/// skipped; any other failure aborts.
pub fn sample_field(scenario: &Scenario<f64>, grid: &FieldSampleGrid) -> Result<FieldSamples, FieldError> {
    let n = scenario.path.dim();
    grid.validate(n)?;
    scenario.gains.validate(n)?;
    let target = target_at(&scenario.target, grid.time, scenario.dt)?;
    let frame = target.frame(grid.time).map_err(|e| FieldError::Target(e.to_string()))?;

    let axes: Vec<Vec<f64>> = grid.axes.iter().map(Axis::values).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut rows = Vec::with_capacity(total * grid.thetas.len());
    let mut samples = FieldSamples {
        dim: n,
        rows: Vec::new(),
        min_norm: None,
        min_prefield_norm: None,
        flagged: 0,
    };
    for &theta in &grid.thetas {
        for flat in 0..total {
            let mut rem = flat;
            let x: Vec<f64> = axes
                .iter()
                .rev()
                .map(|vals| {
                    let v = vals[rem % vals.len()];
                    rem /= vals.len();
                    v
                })
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .collect();
            let xi = ExtendedState::extend(VecN::from_slice(&x).expect("finite grid"), theta);
            match chi_mpf(&xi, &scenario.path, &frame, &scenario.gains) {
                Ok(out) => {
                    let norm = out.extended().norm();
                    let pre = out.diagnostics.prefield_norm;
                    samples.min_norm = Some(samples.min_norm.map_or(norm, |m| m.min(norm)));
                    samples.min_prefield_norm = Some(samples.min_prefield_norm.map_or(pre, |m| m.min(pre)));
                    rows.push(FieldRow {
                        x,
                        theta,
                        value: Some((out.xdot.into_vec(), out.theta_dot)),
                        norm,
                        prefield_norm: pre,
                    });
                }
                Err(e) if e.is_singular_jacobian() => {
                    samples.flagged += 1;
                    rows.push(FieldRow {
                        x,
                        theta,
                        value: None,
                        norm: f64::NAN,
                        prefield_norm: f64::NAN,
                    });
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    samples.rows = rows;
    Ok(samples)
}

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

pub fn field_header(n: usize) -> Vec<String> {
    let name = |i: usize| {
        AXIS_NAMES
            .get(i)
            .map_or_else(|| format!("x{}", i + 1), |s| s.to_string())
    };
    let mut cols: Vec<String> = (0..n).map(name).collect();
    cols.push("theta".into());
    cols.extend((0..n).map(|i| format!("u_{}", name(i))));
    cols.extend(["theta_dot", "norm", "prefield_norm", "singular"].map(String::from));
    cols
}

/// Writes one CSV row per sample; flagged rows have empty field columns.
pub fn write_field_csv(samples: &FieldSamples, path: &Path) -> Result<(), FieldError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let n = samples.dim;
    w.write_record(field_header(n)).map_err(csv_err(path))?;
    for r in &samples.rows {
        let mut row: Vec<String> = r.x.iter().map(f64::to_string).collect();
        row.push(r.theta.to_string());
        match &r.value {
            Some((u, td)) => {
                row.extend(u.iter().map(f64::to_string));
                row.extend([
                    td.to_string(),
                    r.norm.to_string(),
                    r.prefield_norm.to_string(),
                    "0".into(),
                ]);
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), n + 3));
                row.push("1".into());
            }
        }
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
