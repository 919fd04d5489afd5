//! Lévy motions, the stable-driven SDE proxy of SGD, and SGD itself.

pub mod levy;
pub mod sde;
pub mod sgd;
pub mod trajectory;

pub use levy::simulate_levy;
pub use sde::{
    simulate_sde, Coefficient, Drift, DrivingSpec, GradientField, MatrixField, QuadraticBowl, SdeOptions,
    DEFAULT_DIVERGENCE_CAP,
};
pub use sgd::{run_sgd, run_sgd_observed, MinibatchSampler, SgdConfig};
pub use trajectory::{interpolate, Trajectory, TrajectoryMeta};
