//! Concrete processes for the experiments: bounded-step and Gaussian walks,
//! compound renewal processes and noise-perturbed variants.

mod cgf;
mod condition_b;
mod law;
mod model;
mod simulate;

pub use cgf::{empirical_cgf, CgfEstimate};
pub use condition_b::{check_condition_b, ConditionBReport, DeltaCheck, Growth, Modulus, OscillationBudget};
pub use law::{DiscreteLaw, StepLaw};
pub use model::{
    Conditioning, InitialLaw, Interarrival, ModelSpec, NoiseModel, NoiseSpec, ProcessFamily, ProcessModel, StepSpec,
};
pub use simulate::{rescale, sample_cadlag, sample_values_at, simulate, simulate_many, Trajectory};
