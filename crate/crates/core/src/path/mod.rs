//! Cadlag paths on `[0, 1]`, partitions, and the deviation integral `J(f)`.

mod cadlag;
mod integral;
mod partition;

pub use cadlag::{uniform_norm_distance, CadlagPath, PathSpec, PiecewiseLinear, StepPath};
pub use integral::{
    deviation_integral_j, integral_i, interpolant_integral, interpolate, interval_function, DeviationIntegralResult,
    RefinementKind, RefinementSchedule, Verdict,
};
pub use partition::{Partition, MIN_SPACING};
