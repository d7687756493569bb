//! The single-agent extended guiding vector field.
//!
//! With `V = Σ k_i φ_i² / 2`, the pre-field in the extended space is
//! `w = −G·∇V + s·H·(∇φ_1 ∧ … ∧ ∇φ_n)`, with `s = ±1` the orientation flag.
//! The commanded inertial velocity then removes the frame motion:
//! `ẋ_I = (∇F)⁻¹·(w[..n] − drift)` and `θ̇ = w[n]`, which makes
//! `V̇ = ∇V·w` no matter how the target moves.

use thiserror::Error;

use crate::frames::{rotation2, FrameError, FrameTransform, UnicycleTarget};
use crate::linalg::{generalized_cross, LinalgError, VecN};
use crate::paths::{level_set_errors, ExtendedState, LevelSetErrors, ParametricPath, PathError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GvfError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("invalid gains: {0}")]
    InvalidGains(String),
}

impl GvfError {
    pub fn is_singular_jacobian(&self) -> bool {
        matches!(self, GvfError::Frame(FrameError::SingularJacobian { .. }))
    }
}

/// Field gains for an `n`-dimensional path.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet<T> {
    /// Lyapunov weights `k_i`, length `n`.
    pub k: Vec<T>,
    /// Diagonal of `G`, length `n + 1`; the last entry is `g`.
    pub g_diag: Vec<T>,
    /// Diagonal of `H`, length `n + 1`.
    pub h_diag: Vec<T>,
    /// Consensus gain.
    pub k_c: T,
    /// `+1` or `−1`; flips the traversal direction.
    pub orientation: T,
}

impl<T: Real> GainSet<T> {
    /// `k = 1`, `G = H = I`, `k_c = 0`, positive orientation.
    pub fn unit(n: usize) -> Self {
        Self {
            k: vec![T::one(); n],
            g_diag: vec![T::one(); n + 1],
            h_diag: vec![T::one(); n + 1],
            k_c: T::zero(),
            orientation: T::one(),
        }
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// The last entry of `G`.
    pub fn g(&self) -> T {
        *self.g_diag.last().expect("validated gains are non-empty")
    }

    pub fn validate(&self, n: usize) -> Result<(), GvfError> {
        let bad = |msg: String| Err(GvfError::InvalidGains(msg));
        if n == 0 {
            return bad("path dimension must be at least 1".into());
        }
        if self.k.len() != n {
            return bad(format!("expected {n} Lyapunov weights, got {}", self.k.len()));
        }
        if self.g_diag.len() != n + 1 || self.h_diag.len() != n + 1 {
            return bad(format!(
                "G and H need {} diagonal entries, got {} and {}",
                n + 1,
                self.g_diag.len(),
                self.h_diag.len()
            ));
        }
        let positive = |xs: &[T]| xs.iter().all(|&x| x.is_finite() && x > T::zero());
        if !positive(&self.k) {
            return bad("Lyapunov weights must be positive".into());
        }
        if !positive(&self.g_diag) || !positive(&self.h_diag) {
            return bad("G and H entries must be positive".into());
        }
        if !(self.k_c.is_finite() && self.k_c >= T::zero()) {
            return bad("consensus gain must be non-negative".into());
        }
        if self.orientation != T::one() && self.orientation != -T::one() {
            return bad("orientation must be +1 or -1".into());
        }
        Ok(())
    }
}

/// `V = Σ k_i φ_i² / 2`.
pub fn lyapunov_v<T: Real>(phi: &VecN<T>, k: &[T]) -> Result<T, GvfError> {
    if phi.dim() != k.len() {
        return Err(LinalgError::DimensionMismatch {
            context: "Lyapunov weights",
            expected: phi.dim(),
            found: k.len(),
        }
        .into());
    }
    let half = T::lit(0.5);
    Ok(phi
        .iter()
        .zip(k)
        .fold(T::zero(), |acc, (&p, &ki)| acc + half * ki * p * p))
}

/// `∇V = Σ k_i φ_i ∇φ_i` in the extended space.
pub fn grad_xi_v<T: Real>(errors: &LevelSetErrors<T>, k: &[T]) -> Result<VecN<T>, GvfError> {
    let n = errors.phi.dim();
    if k.len() != n || errors.grads.len() != n {
        return Err(LinalgError::DimensionMismatch {
            context: "Lyapunov gradient",
            expected: n,
            found: k.len(),
        }
        .into());
    }
    let mut out = VecN::zeros(n + 1);
    for (i, (grad, &ki)) in errors.grads.iter().zip(k).enumerate() {
        out = out.checked_add(&grad.scale(ki * errors.phi[i]))?;
    }
    Ok(out)
}

/// The pre-field `w` together with the pieces it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PreField<T> {
    pub w: VecN<T>,
    pub grad_v: VecN<T>,
    pub wedge: VecN<T>,
    pub v: T,
}

/// `w = −G∇V + s·H·wedge`, with the wedge from the generalized cross product.
pub fn prefield<T: Real>(errors: &LevelSetErrors<T>, gains: &GainSet<T>) -> Result<PreField<T>, GvfError> {
    let n = errors.phi.dim();
    gains.validate(n)?;
    let v = lyapunov_v(&errors.phi, &gains.k)?;
    let grad_v = grad_xi_v(errors, &gains.k)?;
    let wedge = generalized_cross(&errors.grads)?;
    let w = VecN::from_fn(n + 1, |j| {
        -gains.g_diag[j] * grad_v[j] + gains.orientation * gains.h_diag[j] * wedge[j]
    });
    Ok(PreField { w, grad_v, wedge, v })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDiagnostics<T> {
    pub v: T,
    pub grad_norm: T,
    pub phi_norm: T,
    pub prefield_norm: T,
}

/// Commanded velocity of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOutput<T> {
    pub xdot: VecN<T>,
    pub theta_dot: T,
    /// Position in the path frame at evaluation time.
    pub x_p: VecN<T>,
    pub diagnostics: FieldDiagnostics<T>,
}

impl<T: Real> FieldOutput<T> {
    /// `(ẋ_I, θ̇)` as one vector.
    pub fn extended(&self) -> VecN<T> {
        self.xdot.extended(self.theta_dot)
    }
}

/// The moving-path-following field evaluated in the inertial frame.
pub fn chi_mpf<T, P, F>(
    xi: &ExtendedState<T>,
    path: &P,
    frame: &F,
    gains: &GainSet<T>,
) -> Result<FieldOutput<T>, GvfError>
where
    T: Real,
    P: ParametricPath<T> + ?Sized,
    F: FrameTransform<T> + ?Sized,
{
    let n = path.dim();
    let x_p = frame.apply(&xi.x)?;
    let errors = level_set_errors(path, &x_p, xi.theta)?;
    let pre = prefield(&errors, gains)?;
    let (spatial, theta_dot) = pre.w.split_last().expect("pre-field has n + 1 entries");
    let drift = frame.drift(&xi.x)?;
    let xdot = frame.solve_jacobian(&xi.x, &spatial.checked_sub(&drift)?)?;
    debug_assert_eq!(xdot.dim(), n);
    Ok(FieldOutput {
        xdot,
        theta_dot,
        x_p,
        diagnostics: FieldDiagnostics {
            v: pre.v,
            grad_norm: pre.grad_v.norm(),
            phi_norm: errors.phi.norm(),
            prefield_norm: pre.w.norm(),
        },
    })
}

/// The planar closed form for a unicycle target:
/// `u = ẋ_d − R·S(ω)·x_P + R·w[..2]`, `θ̇ = w[2]`, with `R = ᴵR_P(φ_d)`.
///
/// Written out with explicit 2-D formulas so it can serve as an oracle for
/// [`chi_mpf`].
pub fn chi_se2_closed_form<T, P>(
    xi: &ExtendedState<T>,
    t: T,
    path: &P,
    target: &UnicycleTarget<T>,
    gains: &GainSet<T>,
) -> Result<FieldOutput<T>, GvfError>
where
    T: Real,
    P: ParametricPath<T> + ?Sized,
{
    if path.dim() != 2 || xi.dim() != 2 {
        return Err(LinalgError::DimensionMismatch {
            context: "planar closed-form field",
            expected: 2,
            found: path.dim().max(xi.dim()),
        }
        .into());
    }
    gains.validate(2)?;
    let (s, c) = target.heading.sin_cos();
    let (dx, dy) = (xi.x[0] - target.x, xi.x[1] - target.y);
    let (px, py) = (c * dx + s * dy, -s * dx + c * dy);
    let f = path.eval(xi.theta);
    let df = path.deriv(xi.theta);
    let (phi1, phi2) = (px - f[0], py - f[1]);
    let (k1, k2) = (gains.k[0], gains.k[1]);
    // ∇φ1 = (1, 0, −f1′), ∇φ2 = (0, 1, −f2′); their cross product is (f1′, f2′, 1)
    let grad = [k1 * phi1, k2 * phi2, -(k1 * phi1 * df[0] + k2 * phi2 * df[1])];
    let wedge = [df[0], df[1], T::one()];
    let w: [T; 3] = [0, 1, 2].map(|j| -gains.g_diag[j] * grad[j] + gains.orientation * gains.h_diag[j] * wedge[j]);

    let [vx, vy, omega] = target.rates(t);
    // S(ω)·x_P = (ω·py, −ω·px)
    let (sx, sy) = (omega * py, -omega * px);
    let r = rotation2(target.heading);
    let rs = r.mul_vec(&VecN::from_fn(2, |i| [sx, sy][i]))?;
    let rw = r.mul_vec(&VecN::from_fn(2, |i| w[i]))?;
    let xdot = VecN::from_fn(2, |i| [vx, vy][i] - rs[i] + rw[i]);

    let half = T::lit(0.5);
    let v = half * (k1 * phi1 * phi1 + k2 * phi2 * phi2);
    let norm3 = |a: [T; 3]| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    Ok(FieldOutput {
        xdot,
        theta_dot: w[2],
        x_p: VecN::from_fn(2, |i| [px, py][i]),
        diagnostics: FieldDiagnostics {
            v,
            grad_norm: norm3(grad),
            phi_norm: (phi1 * phi1 + phi2 * phi2).sqrt(),
            prefield_norm: norm3(w),
        },
    })
}

/// One trajectory sample for [`lyapunov_rate_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateSample<T> {
    pub t: T,
    pub v: T,
    pub grad_v: VecN<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport<T> {
    /// Largest `|dV/dt + ∇Vᵀ G ∇V|`.
    pub max_deviation: T,
    /// Largest `|dV/dt + ∇Vᵀ G ∇V| / (1 + ∇Vᵀ G ∇V)`.
    pub max_relative_deviation: T,
    /// Largest numerical `dV/dt`; non-positive means descent.
    pub max_rate: T,
    pub samples_checked: usize,
}

/// Differentiates `V` along stored samples by central differences and
/// compares against the predicted rate `−∇Vᵀ G ∇V`. The prediction is exact
/// only when `H` is a multiple of the identity; otherwise only `max_rate`
/// is meaningful.
pub fn lyapunov_rate_check<T: Real>(samples: &[RateSample<T>], g_diag: &[T]) -> Result<RateReport<T>, GvfError> {
    let mut report = RateReport {
        max_deviation: T::zero(),
        max_relative_deviation: T::zero(),
        max_rate: T::neg_infinity(),
        samples_checked: 0,
    };
    if samples.len() < 3 {
        return Err(GvfError::InvalidGains("need at least three samples".into()));
    }
    for win in samples.windows(3) {
        let (a, b, c) = (&win[0], &win[1], &win[2]);
        if b.grad_v.dim() != g_diag.len() {
            return Err(LinalgError::DimensionMismatch {
                context: "rate check gains",
                expected: b.grad_v.dim(),
                found: g_diag.len(),
            }
            .into());
        }
        let rate = (c.v - a.v) / (c.t - a.t);
        let dissipation = b
            .grad_v
            .iter()
            .zip(g_diag)
            .fold(T::zero(), |acc, (&gv, &gi)| acc + gi * gv * gv);
        let dev = (rate + dissipation).abs();
        report.max_deviation = report.max_deviation.max(dev);
        report.max_relative_deviation = report.max_relative_deviation.max(dev / (T::one() + dissipation));
        report.max_rate = report.max_rate.max(rate);
        report.samples_checked += 1;
    }
    Ok(report)
}
