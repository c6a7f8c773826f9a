//! Numerical laboratory for `L^p` bounds of joint semiclassical quasimodes.

pub mod error;
pub mod estimates;
pub mod grid;
pub mod io;
pub mod propagator;
pub mod quasimodes;
pub mod symbols;
pub mod wavelets;

pub use error::{QmlError, Result};
