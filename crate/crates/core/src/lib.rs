pub mod cli;
pub mod config;
pub mod covariance;
pub mod error;
pub mod expr;
pub mod grid;
pub mod harness;
pub mod integrators;
pub mod noise;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Field, GridSpec};
pub use integrators::{Coefficients, SchemeKind, Trajectory};
pub use spectral::SpectralPlan;
