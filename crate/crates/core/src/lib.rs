pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
