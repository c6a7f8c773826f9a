//! Continuous wavelet transform in `x1`, dyadic cutoffs in `xi2` and coefficient norms.

mod bounds;
mod cwt;
mod dyadic;
mod mother;

pub use bounds::{coefficient_bound_check, decay_bound, CoefficientBoundReport, CoefficientSample};
pub use cwt::{
    cwt_forward, cwt_forward_line, cwt_inverse, cwt_inverse_line, spatial_coefficients, spectral_coefficients, translations, CoefficientDomain,
    CwtCoefficients, ScaleGrid, ScaleSlice, SCALES_PER_DECADE,
};
pub use dyadic::{coefficient_norm, dyadic_project, flat_model_field, CoefficientNorm, DyadicPartition};
pub use mother::{admissibility_constant, admissibility_constant_with, WaveletSpec};
