pub mod analytic;
pub mod error;
pub mod extremal;
pub mod geometry;
pub mod harmonic;
pub mod inner;
pub mod kernels;
pub mod laurent;
pub mod probes;
pub mod spaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;
