//! Non-singular guiding vector fields for following paths attached to moving
//! targets, with distributed coordination of the agents' virtual coordinates.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32`, `f64`); the
//! dense linear algebra also accepts exact rationals. The aliases below fix
//! the common choices.

// `!(a <= b)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coop;
pub mod frames;
pub mod gvf;
pub mod linalg;
pub mod ode;
pub mod paths;
pub mod scalar;
pub mod sim;
pub mod verify;

pub use coop::{CommGraph, FormationPattern, GainCase};
pub use frames::{FrameTransform, Target};
pub use gvf::{FieldOutput, GainSet};
pub use linalg::{generalized_cross, MatN, VecN};
pub use paths::{ExtendedState, FourierPath, ParametricPath};
pub use scalar::{Real, Scalar};
pub use sim::{run, Scenario, TrajectoryRecord};

pub type Vec64 = VecN<f64>;
pub type Mat64 = MatN<f64>;
pub type Vec32 = VecN<f32>;
pub type Mat32 = MatN<f32>;
/// Exact rational vectors for determinant identities.
pub type VecQ = VecN<num_rational::Ratio<i64>>;
pub type MatQ = MatN<num_rational::Ratio<i64>>;

pub type Scenario64 = Scenario<f64>;
pub type Scenario32 = Scenario<f32>;
pub type GainSet64 = GainSet<f64>;
pub type Record64 = TrajectoryRecord<f64>;
