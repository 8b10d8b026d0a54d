//! Norms of real interpolation spaces with slowly varying weights, and a harness that
//! checks the equivalences between them numerically.

pub mod campaign;
pub mod dyadic;
pub mod error;
pub mod kcalc;
pub mod nested;
pub mod norms;
pub mod quad;
pub mod registry;
pub mod report;
pub mod spaces;
pub mod svfun;
pub mod verify;

pub use error::{Error, Result};
