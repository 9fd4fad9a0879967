//! Random maximal isotropic subspaces of quadratic spaces over `F_p` and
//! the Selmer-group distributions they induce.

pub mod cli;
pub mod distributions;
pub mod enumeration;
pub mod error;
pub mod field;
pub mod linalg;
pub mod montecarlo;
pub mod qspace;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod tower;

pub use error::{Error, Result};
pub use field::FpVec;
pub use linalg::Subspace;
pub use qspace::QuadraticSpace;
