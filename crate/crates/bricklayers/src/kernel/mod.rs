//! Rate-function algebra and the one-parameter family of one-site measures.

pub mod measure;
pub mod profile;
pub mod rate;

pub use measure::{build_measure, shift_identity_residual, theta_of_u, SiteMeasure, DEFAULT_TAIL_TOL};
pub use profile::{ParameterProfile, ProfileStep};
pub use rate::{RateFunction, RateSpec, RateTable};
