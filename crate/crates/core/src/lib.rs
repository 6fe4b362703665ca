pub mod calculus;
pub mod cli;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod hamilton;
pub mod kcc;
pub mod lagrange;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod surface;
pub mod validation;

pub use error::{Error, Result};
pub use linalg::{ComplexSpectrum, Mat};
pub use model::{CovidModel, ModelParams, VectorField};
