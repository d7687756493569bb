//! Time-varying frame transformations `x_P = F(x_I, ζ(t))` and the moving
//! targets that generate `ζ(t)`.
//!
//! A [`FrameTransform`] is a snapshot of the transform at one instant: it
//! knows the target pose and its rates, and exposes the map, its inverse,
//! its Jacobian `∇F` and the drift `(∂F/∂ζ)·ζ̇`, so that
//! `ẋ_P = ∇F·ẋ_I + drift`. Targets are co-simulated rather than integrated
//! in closed form.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{finite_diff_curve, LinalgError, MatN, VecN};
use crate::ode::{rk4_step, OdeError};
use crate::scalar::Real;

/// Margin kept from ±π/2 pitch, in radians.
pub const EULER_GUARD_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error(transparent)]
    Linalg(LinalgError),
    #[error("transform Jacobian is singular at the evaluated state (pivot {pivot:e})")]
    SingularJacobian { pivot: f64 },
    #[error("Euler pitch {pitch} rad is within {margin} rad of ±π/2")]
    EulerSingularity { pitch: f64, margin: f64 },
    #[error("transform self-check failed: {0}")]
    SelfCheck(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

impl From<LinalgError> for FrameError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular { pivot } => FrameError::SingularJacobian { pivot },
            other => FrameError::Linalg(other),
        }
    }
}

/// Snapshot of a frame transformation at one instant.
pub trait FrameTransform<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError>;
    fn inverse_apply(&self, x_p: &VecN<T>) -> Result<VecN<T>, FrameError>;
    fn jacobian(&self, x_i: &VecN<T>) -> Result<MatN<T>, FrameError>;
    /// The part of `ẋ_P` caused by target motion alone.
    fn drift(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError>;

    /// `(∇F)⁻¹·v`; a singular Jacobian is an error.
    fn solve_jacobian(&self, x_i: &VecN<T>, v: &VecN<T>) -> Result<VecN<T>, FrameError> {
        Ok(self.jacobian(x_i)?.solve(v)?)
    }
}

fn check_len<T>(context: &'static str, expected: usize, v: &VecN<T>) -> Result<(), FrameError>
where
    T: Real,
{
    if v.dim() == expected {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch {
            context,
            expected,
            found: v.dim(),
        }
        .into())
    }
}

/// `x_P = x_I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityFrame {
    pub dim: usize,
}

impl<T: Real> FrameTransform<T> for IdentityFrame {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("identity frame", self.dim, x_i)?;
        Ok(x_i.clone())
    }

    fn inverse_apply(&self, x_p: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("identity frame", self.dim, x_p)?;
        Ok(x_p.clone())
    }

    fn jacobian(&self, x_i: &VecN<T>) -> Result<MatN<T>, FrameError> {
        check_len("identity frame", self.dim, x_i)?;
        Ok(MatN::identity(self.dim))
    }

    fn drift(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("identity frame", self.dim, x_i)?;
        Ok(VecN::zeros(self.dim))
    }

    fn solve_jacobian(&self, _x_i: &VecN<T>, v: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("identity frame", self.dim, v)?;
        Ok(v.clone())
    }
}

/// Planar rotation `ᴵR_P(φ) = [[cos φ, −sin φ], [sin φ, cos φ]]`.
pub fn rotation2<T: Real>(heading: T) -> MatN<T> {
    let (s, c) = heading.sin_cos();
    MatN::new(2, 2, vec![c, -s, s, c]).expect("finite heading")
}

/// Snapshot of the frame attached to a planar unicycle target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se2Frame<T> {
    pub origin: [T; 2],
    pub heading: T,
    pub origin_rate: [T; 2],
    pub heading_rate: T,
}

impl<T: Real> Se2Frame<T> {
    fn origin_vec(&self) -> VecN<T> {
        VecN::from_fn(2, |i| self.origin[i])
    }

    fn origin_rate_vec(&self) -> VecN<T> {
        VecN::from_fn(2, |i| self.origin_rate[i])
    }
}

impl<T: Real> FrameTransform<T> for Se2Frame<T> {
    fn dim(&self) -> usize {
        2
    }

    fn apply(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("SE(2) frame", 2, x_i)?;
        Ok(rotation2(self.heading)
            .transpose()
            .mul_vec(&(x_i - &self.origin_vec()))?)
    }

    fn inverse_apply(&self, x_p: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("SE(2) frame", 2, x_p)?;
        Ok(&rotation2(self.heading).mul_vec(x_p)? + &self.origin_vec())
    }

    fn jacobian(&self, x_i: &VecN<T>) -> Result<MatN<T>, FrameError> {
        check_len("SE(2) frame", 2, x_i)?;
        Ok(rotation2(self.heading).transpose())
    }

    /// `S(ω)·x_P − ᴾR_I·ẋ_d`.
    fn drift(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        let x_p = self.apply(x_i)?;
        let spin = crate::linalg::skew2(self.heading_rate).mul_vec(&x_p)?;
        let carried = rotation2(self.heading).transpose().mul_vec(&self.origin_rate_vec())?;
        Ok(&spin - &carried)
    }
}

fn rot_x<T: Real>(a: T) -> [[T; 3]; 3] {
    let (s, c) = a.sin_cos();
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, c, -s], [z, s, c]]
}

fn rot_y<T: Real>(a: T) -> [[T; 3]; 3] {
    let (s, c) = a.sin_cos();
    let (o, z) = (T::one(), T::zero());
    [[c, z, s], [z, o, z], [-s, z, c]]
}

fn rot_z<T: Real>(a: T) -> [[T; 3]; 3] {
    let (s, c) = a.sin_cos();
    let (o, z) = (T::one(), T::zero());
    [[c, -s, z], [s, c, z], [z, z, o]]
}

fn d_rot_x<T: Real>(a: T) -> [[T; 3]; 3] {
    let (s, c) = a.sin_cos();
    let z = T::zero();
    [[z, z, z], [z, -s, -c], [z, c, -s]]
}

fn d_rot_y<T: Real>(a: T) -> [[T; 3]; 3] {
    let (s, c) = a.sin_cos();
    let z = T::zero();
    [[-s, z, c], [z, z, z], [-c, z, -s]]
}

fn d_rot_z<T: Real>(a: T) -> [[T; 3]; 3] {
    let (s, c) = a.sin_cos();
    let z = T::zero();
    [[-s, -c, z], [c, -s, z], [z, z, z]]
}

fn mul3<T: Real>(a: &[[T; 3]; 3], b: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    let mut out = [[T::zero(); 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).fold(T::zero(), |acc, k| acc + a[r][k] * b[k][c]);
        }
    }
    out
}

fn to_mat<T: Real>(m: [[T; 3]; 3]) -> MatN<T> {
    MatN::new(3, 3, m.iter().flatten().copied().collect()).expect("finite rotation")
}

/// Body-to-inertial rotation `ᴵC_P` for the x–y–z Euler sequence
/// `(ψ₁, ψ₂, ψ₃)`, i.e. `R_z(ψ₃)·R_y(ψ₂)·R_x(ψ₁)`. The transform uses its
/// transpose `ᴾC_I`.
pub fn euler_matrix<T: Real>(euler: [T; 3]) -> MatN<T> {
    to_mat(mul3(&rot_z(euler[2]), &mul3(&rot_y(euler[1]), &rot_x(euler[0]))))
}

/// Partial derivatives of [`euler_matrix`] with respect to each angle.
fn euler_matrix_partials<T: Real>(euler: [T; 3]) -> [MatN<T>; 3] {
    let (rx, ry, rz) = (rot_x(euler[0]), rot_y(euler[1]), rot_z(euler[2]));
    let (dx, dy, dz) = (d_rot_x(euler[0]), d_rot_y(euler[1]), d_rot_z(euler[2]));
    [
        to_mat(mul3(&rz, &mul3(&ry, &dx))),
        to_mat(mul3(&rz, &mul3(&dy, &rx))),
        to_mat(mul3(&dz, &mul3(&ry, &rx))),
    ]
}

/// Rejects pitch angles within [`EULER_GUARD_MARGIN`] of ±π/2.
pub fn euler_guard<T: Real>(pitch: T) -> Result<(), FrameError> {
    let limit = T::FRAC_PI_2() - T::lit(EULER_GUARD_MARGIN);
    if pitch.abs() < limit {
        Ok(())
    } else {
        Err(FrameError::EulerSingularity {
            pitch: pitch.to_f64().unwrap_or(f64::NAN),
            margin: EULER_GUARD_MARGIN,
        })
    }
}

/// Euler-angle rates from body rates `(p, q, r)`.
pub fn euler_rates<T: Real>(euler: [T; 3], body_rates: [T; 3]) -> Result<[T; 3], FrameError> {
    euler_guard(euler[1])?;
    let [p, q, r] = body_rates;
    let (s1, c1) = euler[0].sin_cos();
    let (t2, c2) = (euler[1].tan(), euler[1].cos());
    Ok([p + (r * c1 + q * s1) * t2, q * c1 - r * s1, (r * c1 + q * s1) / c2])
}

/// Snapshot of the frame attached to an aircraft target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3EulerFrame<T> {
    pub origin: [T; 3],
    pub euler: [T; 3],
    pub origin_rate: [T; 3],
    pub euler_rate: [T; 3],
}

impl<T: Real> Se3EulerFrame<T> {
    pub fn new(origin: [T; 3], euler: [T; 3], origin_rate: [T; 3], euler_rate: [T; 3]) -> Result<Self, FrameError> {
        euler_guard(euler[1])?;
        Ok(Self {
            origin,
            euler,
            origin_rate,
            euler_rate,
        })
    }

    fn origin_vec(&self) -> VecN<T> {
        VecN::from_fn(3, |i| self.origin[i])
    }
}

impl<T: Real> FrameTransform<T> for Se3EulerFrame<T> {
    fn dim(&self) -> usize {
        3
    }

    fn apply(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("SE(3) frame", 3, x_i)?;
        Ok(euler_matrix(self.euler)
            .transpose()
            .mul_vec(&(x_i - &self.origin_vec()))?)
    }

    fn inverse_apply(&self, x_p: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("SE(3) frame", 3, x_p)?;
        Ok(&euler_matrix(self.euler).mul_vec(x_p)? + &self.origin_vec())
    }

    fn jacobian(&self, x_i: &VecN<T>) -> Result<MatN<T>, FrameError> {
        check_len("SE(3) frame", 3, x_i)?;
        Ok(euler_matrix(self.euler).transpose())
    }

    /// Chain rule: `Σ_k (∂ᴾC_I/∂ψ_k)·ψ̇_k·(x_I − x_d) − ᴾC_I·ẋ_d`.
    fn drift(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        check_len("SE(3) frame", 3, x_i)?;
        let rel = x_i - &self.origin_vec();
        let partials = euler_matrix_partials(self.euler);
        let mut out = euler_matrix(self.euler)
            .transpose()
            .mul_vec(&VecN::from_fn(3, |i| self.origin_rate[i]))?
            .scale(-T::one());
        for (k, dc) in partials.iter().enumerate() {
            let term = dc.transpose().mul_vec(&rel)?.scale(self.euler_rate[k]);
            out = &out + &term;
        }
        Ok(out)
    }
}

/// Kind of one [`TimeProfile`] term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Const,
    Sin,
    Cos,
}

/// `amplitude`, `amplitude·sin(ω t + φ)` or `amplitude·cos(ω t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(deserialize = "T: Deserialize<'de> + num_traits::Zero + num_traits::One")
)]
pub struct ProfileTerm<T> {
    pub kind: ProfileKind,
    pub amplitude: T,
    #[serde(rename = "frequency_radps", default = "one_f")]
    pub frequency: T,
    #[serde(rename = "phase_rad", default = "zero_f")]
    pub phase: T,
}

fn zero_f<T: num_traits::Zero>() -> T {
    T::zero()
}

fn one_f<T: num_traits::One>() -> T {
    T::one()
}

impl<T: Real> ProfileTerm<T> {
    pub fn constant(amplitude: T) -> Self {
        Self {
            kind: ProfileKind::Const,
            amplitude,
            frequency: T::zero(),
            phase: T::zero(),
        }
    }

    pub fn sin(amplitude: T, frequency: T) -> Self {
        Self {
            kind: ProfileKind::Sin,
            amplitude,
            frequency,
            phase: T::zero(),
        }
    }

    pub fn cos(amplitude: T, frequency: T) -> Self {
        Self {
            kind: ProfileKind::Cos,
            amplitude,
            frequency,
            phase: T::zero(),
        }
    }

    fn eval(&self, t: T) -> T {
        let arg = self.frequency * t + self.phase;
        match self.kind {
            ProfileKind::Const => self.amplitude,
            ProfileKind::Sin => self.amplitude * arg.sin(),
            ProfileKind::Cos => self.amplitude * arg.cos(),
        }
    }

    fn deriv(&self, t: T) -> T {
        let arg = self.frequency * t + self.phase;
        match self.kind {
            ProfileKind::Const => T::zero(),
            ProfileKind::Sin => self.amplitude * self.frequency * arg.cos(),
            ProfileKind::Cos => -self.amplitude * self.frequency * arg.sin(),
        }
    }
}

/// Scalar signal of time given as a sum of terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(
    transparent,
    bound(deserialize = "T: Deserialize<'de> + num_traits::Zero + num_traits::One")
)]
pub struct TimeProfile<T> {
    pub terms: Vec<ProfileTerm<T>>,
}

impl<T: Real> TimeProfile<T> {
    pub fn new(terms: Vec<ProfileTerm<T>>) -> Self {
        Self { terms }
    }

    pub fn constant(value: T) -> Self {
        Self::new(vec![ProfileTerm::constant(value)])
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn eval(&self, t: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, term| acc + term.eval(t))
    }

    pub fn deriv(&self, t: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, term| acc + term.deriv(t))
    }

    pub fn is_finite(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.amplitude.is_finite() && t.frequency.is_finite() && t.phase.is_finite())
    }
}

/// Planar unicycle target: `ẋ = v cos φ`, `ẏ = v sin φ`, `φ̇ = ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnicycleTarget<T> {
    pub x: T,
    pub y: T,
    pub heading: T,
    pub speed: TimeProfile<T>,
    pub turn_rate: TimeProfile<T>,
}

impl<T: Real> UnicycleTarget<T> {
    pub fn state(&self) -> [T; 3] {
        [self.x, self.y, self.heading]
    }

    pub fn with_state(&self, state: &[T]) -> Self {
        Self {
            x: state[0],
            y: state[1],
            heading: state[2],
            ..self.clone()
        }
    }

    /// `(ẋ_d, ẏ_d, φ̇_d)` at time `t`.
    pub fn rates(&self, t: T) -> [T; 3] {
        let v = self.speed.eval(t);
        let (s, c) = self.heading.sin_cos();
        [v * c, v * s, self.turn_rate.eval(t)]
    }
}

/// Frame snapshot of a unicycle target at time `t`.
pub fn se2_transform<T: Real>(target: &UnicycleTarget<T>, t: T) -> Se2Frame<T> {
    let [vx, vy, w] = target.rates(t);
    Se2Frame {
        origin: [target.x, target.y],
        heading: target.heading,
        origin_rate: [vx, vy],
        heading_rate: w,
    }
}

/// Advances a unicycle target by one RK4 step.
pub fn step_unicycle<T: Real>(target: &UnicycleTarget<T>, t: T, dt: T) -> Result<UnicycleTarget<T>, FrameError> {
    let next = rk4_step(&target.state(), t, dt, |s, y| {
        Ok::<_, FrameError>(target.with_state(y).rates(s).to_vec())
    })?;
    Ok(target.with_state(&next))
}

/// Aircraft target with translational and Euler rotational kinematics.
#[derive(Debug, Clone, PartialEq)]
pub struct AircraftTarget<T> {
    pub position: [T; 3],
    /// `(ψ₁, ψ₂, ψ₃)`, x–y–z sequence.
    pub euler: [T; 3],
    /// `(u, v, w)` measured in the body frame.
    pub body_velocity: [TimeProfile<T>; 3],
    /// `(p, q, r)` measured in the body frame.
    pub body_rates: [TimeProfile<T>; 3],
}

impl<T: Real> AircraftTarget<T> {
    pub fn state(&self) -> [T; 6] {
        let [x, y, z] = self.position;
        let [a, b, c] = self.euler;
        [x, y, z, a, b, c]
    }

    pub fn with_state(&self, state: &[T]) -> Self {
        Self {
            position: [state[0], state[1], state[2]],
            euler: [state[3], state[4], state[5]],
            ..self.clone()
        }
    }

    pub fn body_velocity_at(&self, t: T) -> [T; 3] {
        [0, 1, 2].map(|i| self.body_velocity[i].eval(t))
    }

    pub fn body_rates_at(&self, t: T) -> [T; 3] {
        [0, 1, 2].map(|i| self.body_rates[i].eval(t))
    }

    /// `(ẋ_d, ẏ_d, ż_d, ψ̇₁, ψ̇₂, ψ̇₃)` at time `t`.
    pub fn rates(&self, t: T) -> Result<[T; 6], FrameError> {
        let psi_dot = euler_rates(self.euler, self.body_rates_at(t))?;
        let body = VecN::from_fn(3, |i| self.body_velocity_at(t)[i]);
        let vel = euler_matrix(self.euler).mul_vec(&body)?;
        Ok([vel[0], vel[1], vel[2], psi_dot[0], psi_dot[1], psi_dot[2]])
    }
}

/// Frame snapshot of an aircraft target at time `t`.
pub fn se3_euler_transform<T: Real>(target: &AircraftTarget<T>, t: T) -> Result<Se3EulerFrame<T>, FrameError> {
    let r = target.rates(t)?;
    Se3EulerFrame::new(target.position, target.euler, [r[0], r[1], r[2]], [r[3], r[4], r[5]])
}

/// Advances an aircraft target by one RK4 step, checking the Euler guard
/// at every stage.
pub fn step_aircraft<T: Real>(target: &AircraftTarget<T>, t: T, dt: T) -> Result<AircraftTarget<T>, FrameError> {
    let next = rk4_step(&target.state(), t, dt, |s, y| {
        Ok::<_, FrameError>(target.with_state(y).rates(s)?.to_vec())
    })?;
    euler_guard(next[4])?;
    Ok(target.with_state(&next))
}

/// A user transform given in closed form in time.
pub trait TimeVaryingTransform<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x_i: &VecN<T>, t: T) -> Result<VecN<T>, FrameError>;
    fn inverse_apply(&self, x_p: &VecN<T>, t: T) -> Result<VecN<T>, FrameError>;
    fn jacobian(&self, x_i: &VecN<T>, t: T) -> Result<MatN<T>, FrameError>;
    fn drift(&self, x_i: &VecN<T>, t: T) -> Result<VecN<T>, FrameError>;
}

/// A custom transform that passed the registration self-checks.
#[derive(Clone)]
pub struct RegisteredTransform<T> {
    inner: Arc<dyn TimeVaryingTransform<T>>,
}

impl<T> fmt::Debug for RegisteredTransform<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RegisteredTransform(..)")
    }
}

impl<T> PartialEq for RegisteredTransform<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }
}

/// Tolerance of the inverse round-trip check.
pub const ROUND_TRIP_TOL: f64 = 1e-10;
/// Tolerance of the drift and Jacobian finite-difference checks.
pub const DRIFT_FD_TOL: f64 = 1e-5;

/// Registers a custom transform after checking, at every probe point and
/// time: Jacobian invertibility, `inverse_apply(apply(x)) = x`, the Jacobian
/// against finite differences in `x`, and the drift against finite
/// differences in `t`.
pub fn register_transform<T: Real>(
    transform: Arc<dyn TimeVaryingTransform<T>>,
    probes: &[VecN<T>],
    times: &[T],
) -> Result<RegisteredTransform<T>, FrameError> {
    if probes.is_empty() || times.is_empty() {
        return Err(FrameError::SelfCheck("need at least one probe point and time".into()));
    }
    let h = T::lit(crate::linalg::DEFAULT_FD_STEP);
    let n = transform.dim();
    for &t in times {
        for x in probes {
            check_len("custom transform probe", n, x)?;
            let jac = transform.jacobian(x, t)?;
            jac.solve(&VecN::zeros(n))?;
            let back = transform.inverse_apply(&transform.apply(x, t)?, t)?;
            let rt = back.checked_sub(x)?.max_abs();
            if !(rt <= T::lit(ROUND_TRIP_TOL) * (T::one() + x.max_abs())) {
                return Err(FrameError::SelfCheck(format!("inverse round-trip error {rt}")));
            }
            let fd_drift = finite_diff_curve(|s| transform.apply(x, s).unwrap_or_else(|_| VecN::zeros(n)), t, h)?;
            let drift_err = transform.drift(x, t)?.checked_sub(&fd_drift)?.max_abs();
            if !(drift_err <= T::lit(DRIFT_FD_TOL)) {
                return Err(FrameError::SelfCheck(format!("drift mismatch {drift_err}")));
            }
            for c in 0..n {
                let e = VecN::basis(n, c)?;
                let col = finite_diff_curve(
                    |s| {
                        transform
                            .apply(&(x + &e.scale(s)), t)
                            .unwrap_or_else(|_| VecN::zeros(n))
                    },
                    T::zero(),
                    h,
                )?;
                for r in 0..n {
                    let err = (jac.get(r, c) - col[r]).abs();
                    if !(err <= T::lit(DRIFT_FD_TOL)) {
                        return Err(FrameError::SelfCheck(format!(
                            "Jacobian entry ({r},{c}) mismatch {err}"
                        )));
                    }
                }
            }
        }
    }
    Ok(RegisteredTransform { inner: transform })
}

/// A registered transform frozen at one time.
#[derive(Clone)]
pub struct CustomFrame<T> {
    inner: Arc<dyn TimeVaryingTransform<T>>,
    t: T,
}

impl<T: Real> FrameTransform<T> for CustomFrame<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        self.inner.apply(x_i, self.t)
    }
    fn inverse_apply(&self, x_p: &VecN<T>) -> Result<VecN<T>, FrameError> {
        self.inner.inverse_apply(x_p, self.t)
    }
    fn jacobian(&self, x_i: &VecN<T>) -> Result<MatN<T>, FrameError> {
        self.inner.jacobian(x_i, self.t)
    }
    fn drift(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        self.inner.drift(x_i, self.t)
    }
}

/// Moving target (or none) that defines the path frame over time.
#[derive(Debug, Clone, PartialEq)]
pub enum Target<T> {
    Static {
        dim: usize,
    },
    Unicycle(UnicycleTarget<T>),
    Aircraft(AircraftTarget<T>),
    Custom {
        dim: usize,
        transform: RegisteredTransform<T>,
    },
}

/// Frame snapshot produced by a [`Target`].
#[derive(Clone)]
pub enum Frame<T> {
    Identity(IdentityFrame),
    Se2(Se2Frame<T>),
    Se3(Se3EulerFrame<T>),
    Custom(CustomFrame<T>),
}

impl<T: Real> Target<T> {
    pub fn dim(&self) -> usize {
        match self {
            Target::Static { dim } | Target::Custom { dim, .. } => *dim,
            Target::Unicycle(_) => 2,
            Target::Aircraft(_) => 3,
        }
    }

    /// Flat kinematic state integrated alongside the agents.
    pub fn state(&self) -> Vec<T> {
        match self {
            Target::Static { .. } | Target::Custom { .. } => Vec::new(),
            Target::Unicycle(u) => u.state().to_vec(),
            Target::Aircraft(a) => a.state().to_vec(),
        }
    }

    pub fn with_state(&self, state: &[T]) -> Self {
        match self {
            Target::Static { .. } | Target::Custom { .. } => self.clone(),
            Target::Unicycle(u) => Target::Unicycle(u.with_state(state)),
            Target::Aircraft(a) => Target::Aircraft(a.with_state(state)),
        }
    }

    /// Time derivative of [`Target::state`].
    pub fn state_rates(&self, t: T) -> Result<Vec<T>, FrameError> {
        Ok(match self {
            Target::Static { .. } | Target::Custom { .. } => Vec::new(),
            Target::Unicycle(u) => u.rates(t).to_vec(),
            Target::Aircraft(a) => a.rates(t)?.to_vec(),
        })
    }

    pub fn frame(&self, t: T) -> Result<Frame<T>, FrameError> {
        Ok(match self {
            Target::Static { dim } => Frame::Identity(IdentityFrame { dim: *dim }),
            Target::Unicycle(u) => Frame::Se2(se2_transform(u, t)),
            Target::Aircraft(a) => Frame::Se3(se3_euler_transform(a, t)?),
            Target::Custom { transform, .. } => Frame::Custom(CustomFrame {
                inner: transform.inner.clone(),
                t,
            }),
        })
    }

    /// Checks the state against kinematic guards.
    pub fn check(&self) -> Result<(), FrameError> {
        match self {
            Target::Aircraft(a) => euler_guard(a.euler[1]),
            _ => Ok(()),
        }
    }

    pub fn step(&self, t: T, dt: T) -> Result<Self, FrameError> {
        Ok(match self {
            Target::Static { .. } | Target::Custom { .. } => self.clone(),
            Target::Unicycle(u) => Target::Unicycle(step_unicycle(u, t, dt)?),
            Target::Aircraft(a) => Target::Aircraft(step_aircraft(a, t, dt)?),
        })
    }
}

macro_rules! dispatch {
    ($self:ident, $f:ident, $($arg:expr),*) => {
        match $self {
            Frame::Identity(fr) => FrameTransform::<T>::$f(fr, $($arg),*),
            Frame::Se2(fr) => fr.$f($($arg),*),
            Frame::Se3(fr) => fr.$f($($arg),*),
            Frame::Custom(fr) => fr.$f($($arg),*),
        }
    };
}

impl<T: Real> FrameTransform<T> for Frame<T> {
    fn dim(&self) -> usize {
        match self {
            Frame::Identity(fr) => fr.dim,
            Frame::Se2(_) => 2,
            Frame::Se3(_) => 3,
            Frame::Custom(fr) => fr.dim(),
        }
    }
    fn apply(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        dispatch!(self, apply, x_i)
    }
    fn inverse_apply(&self, x_p: &VecN<T>) -> Result<VecN<T>, FrameError> {
        dispatch!(self, inverse_apply, x_p)
    }
    fn jacobian(&self, x_i: &VecN<T>) -> Result<MatN<T>, FrameError> {
        dispatch!(self, jacobian, x_i)
    }
    fn drift(&self, x_i: &VecN<T>) -> Result<VecN<T>, FrameError> {
        dispatch!(self, drift, x_i)
    }
    fn solve_jacobian(&self, x_i: &VecN<T>, v: &VecN<T>) -> Result<VecN<T>, FrameError> {
        dispatch!(self, solve_jacobian, x_i, v)
    }
}
