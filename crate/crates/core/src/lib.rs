//! Seasonal NPZ-T plankton model with thermal performance curves, Floquet
//! persistence thresholds and gridded climate-shift diagnostics.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod diagnostics;
pub mod error;
pub mod forcing;
pub mod npzt;
pub mod ode;
pub mod params;
pub mod stability;
pub mod thermo;

pub use error::{Error, ErrorKind, Result};
