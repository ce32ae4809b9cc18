//! Exact open intersection numbers of the Kontsevich-Penner matrix model.
//!
//! Correlators are computed as polynomials in the parameter `N` from closed
//! trace formulas over truncated Puiseux series in `x = λ^(-1/2)`.

pub mod error;
pub mod exactmath;
pub mod puiseux;
pub mod asymptotics;
pub mod correlators;
pub mod validators;
pub mod airy_oracle;

pub use error::{KpError, Result};
pub use exactmath::{BigRat, PolyN};
