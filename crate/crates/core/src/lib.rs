//! Frequency-domain Granger causality for vector autoregressions.
//!
//! The crate fits VAR models by least squares, evaluates unconditional and
//! conditional causality spectra from the fitted parameters, and tests them
//! against a stationary-bootstrap null in which the series are resampled
//! independently. A parametric frequency-wise F test, a Hodrick-Prescott
//! filter and a Monte Carlo harness complete the toolkit.

pub mod bc;
pub mod bootstrap;
pub mod error;
pub mod filters;
pub mod io;
mod linalg;
pub mod series;
pub mod sim;
pub mod spectra;
pub mod var;

pub use error::{Error, Result};
pub use series::MultiSeries;
