//! Fundamental functions, Legendre–Fenchel conjugation, and the structural
//! checks (essential smoothness, goodness) the limit theorems rely on.

mod checks;
mod conjugate;
mod domain;
mod fundamental;
mod rate;

pub use checks::{
    check_essential_smoothness, check_goodness, GoodnessLevel, GoodnessReport, ProbeSpec, SmoothnessReport,
    SteepnessSide,
};
pub use conjugate::{
    biconjugate, conjugate_of_rate, conjugate_point, legendre_transform, sup_concave, ConjugatePoint, MuSearch,
};
pub use domain::{Bound, Interval};
pub use fundamental::{FamilySpec, FundamentalFunction};
pub use rate::{RateFunction, Representation};
