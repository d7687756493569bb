//! Parametric desired paths `θ ↦ f(θ)`, their level-set encoding in the
//! extended space `(x, θ)`, and the closed-form propagation direction.
//!
//! The virtual coordinate θ lives on the whole real line. Periodic paths are
//! never wrapped: unrolling a closed curve into a line in `R^(n+1)` is what
//! removes the singular points of the guiding field.

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{finite_diff_curve, LinalgError, VecN, DEFAULT_FD_STEP};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("path derivative disagrees with finite difference at θ = {theta}: error {error:e}")]
    DerivativeMismatch { theta: f64, error: f64 },
    #[error("path derivatives not bounded on [{lo}, {hi}]")]
    Unbounded { lo: f64, hi: f64 },
    #[error("invalid path: {0}")]
    Invalid(String),
}

/// A desired path `f: R → R^n` with analytic first derivative.
pub trait ParametricPath<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, theta: T) -> VecN<T>;
    fn deriv(&self, theta: T) -> VecN<T>;
    fn second_deriv(&self, _theta: T) -> Option<VecN<T>> {
        None
    }
}

/// One term `a·cos(kθ) + b·sin(kθ)`. A constant offset is the term `k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Deserialize<'de> + num_traits::Zero"))]
pub struct FourierTerm<T> {
    #[serde(rename = "k")]
    pub freq: T,
    #[serde(rename = "a", default = "zero_f")]
    pub cos: T,
    #[serde(rename = "b", default = "zero_f")]
    pub sin: T,
}

fn zero_f<T: num_traits::Zero>() -> T {
    T::zero()
}

impl<T: Real> FourierTerm<T> {
    pub fn new(freq: T, cos: T, sin: T) -> Self {
        Self { freq, cos, sin }
    }

    pub fn cos_term(freq: T, amplitude: T) -> Self {
        Self::new(freq, amplitude, T::zero())
    }

    pub fn sin_term(freq: T, amplitude: T) -> Self {
        Self::new(freq, T::zero(), amplitude)
    }

    fn eval(&self, theta: T) -> T {
        let (s, c) = (self.freq * theta).sin_cos();
        self.cos * c + self.sin * s
    }

    fn deriv(&self, theta: T) -> T {
        let (s, c) = (self.freq * theta).sin_cos();
        self.freq * (self.sin * c - self.cos * s)
    }

    fn second_deriv(&self, theta: T) -> T {
        let k2 = self.freq * self.freq;
        -k2 * self.eval(theta)
    }
}

/// Path whose coordinates are finite trigonometric sums, so every
/// derivative is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPath<T> {
    coords: Vec<Vec<FourierTerm<T>>>,
}

impl<T: Real> FourierPath<T> {
    pub fn new(coords: Vec<Vec<FourierTerm<T>>>) -> Result<Self, PathError> {
        if coords.is_empty() {
            return Err(PathError::Invalid("path needs at least one coordinate".into()));
        }
        for (i, terms) in coords.iter().enumerate() {
            for t in terms {
                if !(t.freq.is_finite() && t.cos.is_finite() && t.sin.is_finite()) {
                    return Err(PathError::Invalid(format!(
                        "coordinate {i} has a non-finite Fourier coefficient"
                    )));
                }
            }
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[Vec<FourierTerm<T>>] {
        &self.coords
    }

    fn sum(&self, theta: T, f: impl Fn(&FourierTerm<T>, T) -> T) -> VecN<T> {
        VecN::from_fn(self.coords.len(), |i| {
            self.coords[i].iter().fold(T::zero(), |acc, t| acc + f(t, theta))
        })
    }
}

impl<T: Real> ParametricPath<T> for FourierPath<T> {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn eval(&self, theta: T) -> VecN<T> {
        self.sum(theta, FourierTerm::eval)
    }

    fn deriv(&self, theta: T) -> VecN<T> {
        self.sum(theta, FourierTerm::deriv)
    }

    fn second_deriv(&self, theta: T) -> Option<VecN<T>> {
        Some(self.sum(theta, FourierTerm::second_deriv))
    }
}

/// Ellipse `(2cos θ, sin θ)`.
pub fn builtin_ellipse<T: Real>() -> FourierPath<T> {
    FourierPath {
        coords: vec![
            vec![FourierTerm::cos_term(T::one(), T::lit(2.0))],
            vec![FourierTerm::sin_term(T::one(), T::one())],
        ],
    }
}

/// Lissajous curve `(2cos θ, sin θ, cos(θ/2))`.
pub fn builtin_lissajous<T: Real>() -> FourierPath<T> {
    FourierPath {
        coords: vec![
            vec![FourierTerm::cos_term(T::one(), T::lit(2.0))],
            vec![FourierTerm::sin_term(T::one(), T::one())],
            vec![FourierTerm::cos_term(T::lit(0.5), T::one())],
        ],
    }
}

/// Looks up a builtin path by name (`ellipse`, `lissajous`).
pub fn builtin<T: Real>(name: &str) -> Option<FourierPath<T>> {
    match name {
        "ellipse" => Some(builtin_ellipse()),
        "lissajous" => Some(builtin_lissajous()),
        _ => None,
    }
}

/// Adapter for a path known only through its values. The derivative is a
/// central difference, which degrades the accuracy of the extended
/// gradients, so construction logs a warning.
pub struct NumericPath<F> {
    dim: usize,
    eval: F,
    step: f64,
}

impl<F> NumericPath<F> {
    pub fn new(dim: usize, eval: F) -> Self {
        warn!("numeric path derivative in use; supply an analytic derivative for accurate gradients");
        Self {
            dim,
            eval,
            step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

impl<T, F> ParametricPath<T> for NumericPath<F>
where
    T: Real,
    F: Fn(T) -> VecN<T> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, theta: T) -> VecN<T> {
        (self.eval)(theta)
    }

    fn deriv(&self, theta: T) -> VecN<T> {
        finite_diff_curve(&self.eval, theta, T::lit(self.step)).unwrap_or_else(|_| VecN::zeros(self.dim))
    }
}

/// Agent state extended by the virtual coordinate: `ξ = (x, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState<T> {
    pub x: VecN<T>,
    pub theta: T,
}

impl<T: Real> ExtendedState<T> {
    pub fn extend(x: VecN<T>, theta: T) -> Self {
        Self { x, theta }
    }

    /// Drops the virtual coordinate.
    pub fn project(&self) -> VecN<T> {
        self.x.clone()
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn to_vector(&self) -> VecN<T> {
        self.x.extended(self.theta)
    }

    pub fn from_vector(v: &VecN<T>) -> Result<Self, LinalgError> {
        let (x, theta) = v
            .split_last()
            .ok_or_else(|| LinalgError::InvalidArgument("extended state needs at least one entry".into()))?;
        Ok(Self { x, theta })
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.theta.is_finite()
    }
}

/// Projection `π: (x, θ) ↦ x`.
pub fn project<T: Real>(xi: &ExtendedState<T>) -> VecN<T> {
    xi.project()
}

/// Path errors `φ_i = x_i − f_i(θ)` and their gradients in `(x, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetErrors<T> {
    pub phi: VecN<T>,
    /// `∇φ_i = (e_i, −f_i′(θ))`, one vector of length `n + 1` per coordinate.
    pub grads: Vec<VecN<T>>,
}

pub fn level_set_errors<T: Real, P: ParametricPath<T> + ?Sized>(
    path: &P,
    x_p: &VecN<T>,
    theta: T,
) -> Result<LevelSetErrors<T>, PathError> {
    let n = path.dim();
    if x_p.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            context: "level-set errors",
            expected: n,
            found: x_p.dim(),
        }
        .into());
    }
    let f = path.eval(theta);
    let df = path.deriv(theta);
    let phi = x_p.checked_sub(&f)?;
    let grads = (0..n)
        .map(|i| {
            VecN::from_fn(n + 1, |j| {
                if j == i {
                    T::one()
                } else if j == n {
                    -df[i]
                } else {
                    T::zero()
                }
            })
        })
        .collect();
    Ok(LevelSetErrors { phi, grads })
}

/// `(−1)^n · (f′(θ), 1)`: the generalized cross product of the level-set
/// gradients, in closed form. Its last entry is ±1 so it never vanishes.
pub fn wedge_closed_form<T: Real, P: ParametricPath<T> + ?Sized>(path: &P, theta: T) -> VecN<T> {
    let sign = if path.dim() % 2 == 0 { T::one() } else { -T::one() };
    path.deriv(theta).extended(T::one()).scale(sign)
}

/// Compares the supplied derivative against a central difference of `eval`
/// at each θ, with absolute tolerance `tol` per component.
pub fn check_derivatives<T: Real, P: ParametricPath<T> + ?Sized>(
    path: &P,
    thetas: &[T],
    tol: T,
) -> Result<(), PathError> {
    let h = T::lit(DEFAULT_FD_STEP);
    for &theta in thetas {
        let numeric = finite_diff_curve(|s| path.eval(s), theta, h)?;
        let error = path.deriv(theta).checked_sub(&numeric)?.max_abs();
        if !(error <= tol) {
            return Err(PathError::DerivativeMismatch {
                theta: theta.to_f64().unwrap_or(f64::NAN),
                error: error.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// Largest `|f_i′|` and `|f_i″|` found on a sampled window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBounds<T> {
    pub max_first: T,
    pub max_second: T,
}

/// Samples `samples` evenly spaced θ in `[lo, hi]` and reports derivative
/// bounds. Second derivatives fall back to finite differences of `deriv`.
/// Fails when any sampled value is not finite.
pub fn derivative_bounds<T: Real, P: ParametricPath<T> + ?Sized>(
    path: &P,
    lo: T,
    hi: T,
    samples: usize,
) -> Result<DerivativeBounds<T>, PathError> {
    if samples < 2 || !(hi > lo) {
        return Err(PathError::Invalid(
            "need at least two samples on a non-empty window".into(),
        ));
    }
    let h = T::lit(DEFAULT_FD_STEP);
    let step = (hi - lo) / T::from_usize(samples - 1).unwrap();
    let mut bounds = DerivativeBounds {
        max_first: T::zero(),
        max_second: T::zero(),
    };
    for s in 0..samples {
        let theta = lo + step * T::from_usize(s).unwrap();
        let d1 = path.deriv(theta);
        let d2 = match path.second_deriv(theta) {
            Some(d2) => d2,
            None => finite_diff_curve(|s| path.deriv(s), theta, h)?,
        };
        if !(d1.is_finite() && d2.is_finite()) {
            return Err(PathError::Unbounded {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        bounds.max_first = bounds.max_first.max(d1.max_abs());
        bounds.max_second = bounds.max_second.max(d2.max_abs());
    }
    Ok(bounds)
}
