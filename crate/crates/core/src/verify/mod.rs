//! Crude and exponentially tilted Monte Carlo checks of the local,
//! finite-dimensional and functional limits, the Varadhan functional and
//! exponential tightness.

mod estimate;
mod events;
mod fit;
mod schedule;
mod tightness;
mod tilt;
mod varadhan;

pub use estimate::{MCEstimate, Method, SamplingMethod};
pub use events::{estimate_fdd, estimate_functional, estimate_local, uniformity_scan, UniformityReport, MIN_SAMPLES};
pub use fit::{fit_rate, RateFit};
pub use schedule::EpsilonSchedule;
pub use tightness::{exponential_tightness_scan, TightnessReport, TightnessRow};
pub use tilt::{resolve_tilt, tilt_for_target, ResolvedTilt, TiltedLaw};
pub use varadhan::{varadhan_functional, varadhan_reference, Phi, VaradhanEstimate};
