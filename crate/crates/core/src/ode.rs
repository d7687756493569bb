//! Classical fixed-step Runge–Kutta integration over flat state vectors.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("derivative has length {found}, state has length {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

fn axpy<T: Real>(y: &[T], a: T, k: &[T]) -> Vec<T> {
    y.iter().zip(k).map(|(&yi, &ki)| yi + a * ki).collect()
}

/// One classical RK4 step of `y' = f(t, y)`.
///
/// Stage times are `t`, `t + dt/2`, `t + dt/2`, `t + dt`. Errors returned by
/// `f` are propagated unchanged.
pub fn rk4_step<T, E, F>(y: &[T], t: T, dt: T, mut f: F) -> Result<Vec<T>, E>
where
    T: Real,
    E: From<OdeError>,
    F: FnMut(T, &[T]) -> Result<Vec<T>, E>,
{
    if !(dt > T::zero()) {
        return Err(OdeError::NonPositiveStep(dt.to_f64().unwrap_or(f64::NAN)).into());
    }
    let check = |k: &Vec<T>| -> Result<(), E> {
        if k.len() == y.len() {
            Ok(())
        } else {
            Err(OdeError::LengthMismatch {
                expected: y.len(),
                found: k.len(),
            }
            .into())
        }
    };
    let half = dt / T::lit(2.0);
    let k1 = f(t, y)?;
    check(&k1)?;
    let k2 = f(t + half, &axpy(y, half, &k1))?;
    check(&k2)?;
    let k3 = f(t + half, &axpy(y, half, &k2))?;
    check(&k3)?;
    let k4 = f(t + dt, &axpy(y, dt, &k3))?;
    check(&k4)?;
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    Ok(y.iter()
        .enumerate()
        .map(|(i, &yi)| yi + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect())
}
