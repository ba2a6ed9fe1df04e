//! Numerical laboratory for large deviation principles of random processes.
//!
//! The crate is split into four layers:
//!
//! - [`convex`]: fundamental functions `A(μ)`, their Legendre–Fenchel
//!   conjugates `D(α)`, and structural checks (essential smoothness,
//!   compact level sets).
//! - [`path`]: cadlag paths on `[0, 1]`, partitions, piecewise-linear
//!   interpolants and the deviation integral `J(f)`.
//! - [`process`]: simulators for walks, compound renewal processes and
//!   noise-perturbed variants, plus empirical cumulant and oscillation checks.
//! - [`verify`]: crude and exponentially tilted Monte Carlo estimators for
//!   local, finite-dimensional and functional large deviation probabilities.

// `!(x > 0.0)` style checks reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convex;
pub mod error;
pub mod extended;
pub mod io;
pub mod path;
pub mod process;
pub mod rng;
pub mod stats;
pub mod verify;

pub use convex::{
    biconjugate, check_essential_smoothness, check_goodness, conjugate_point, legendre_transform, Bound, FamilySpec,
    FundamentalFunction, Interval, MuSearch, RateFunction,
};
pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use path::{
    deviation_integral_j, integral_i, interpolate, interval_function, uniform_norm_distance, CadlagPath,
    DeviationIntegralResult, Partition, PiecewiseLinear, RefinementSchedule, StepPath,
};
pub use process::{
    check_condition_b, empirical_cgf, rescale, simulate, Conditioning, DiscreteLaw, InitialLaw, ModelSpec,
    OscillationBudget, ProcessModel, StepLaw, Trajectory,
};
pub use verify::{
    estimate_fdd, estimate_functional, estimate_local, exponential_tightness_scan, fit_rate, tilt_for_target,
    varadhan_functional, EpsilonSchedule, MCEstimate, Method, Phi, SamplingMethod, TiltedLaw,
};
