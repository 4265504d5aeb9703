pub mod betti;
pub mod birman_schwinger;
pub mod error;
pub mod geometry;
pub mod inequality;
pub mod measure;
pub mod perturbation;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod suite;
pub mod surface_report;

pub use error::{Error, Result};
