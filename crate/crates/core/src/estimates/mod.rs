//! Closed-form growth exponents, the dyadic kernel bounds and power-law fitting of h-sweeps.
mod exponents;
mod fit;
mod kernel;
mod sweep;

pub use exponents::{
    alpha_k, delta_high_branch, delta_low_branch, delta_p_k, mu_p_j, sogge_delta, t_alpha_lower_exponent, to_f64,
    ExponentQuery, Lebesgue,
};
pub use fit::{fit_power_law, ExponentFit};
pub use kernel::{
    band_reach, band_weight_sq, kernel_bound_check, kernel_sample, kernel_sample_times, kernel_sample_with, regime_bound, regime_of,
    regime_threshold, wavelet_overlap, KernelBoundReport, KernelOptions, KernelPhase, KernelSample, Regime,
    RegimeFit, MIN_POINTS_PER_PERIOD,
};
pub use sweep::{
    check_chain, kernel_query, run_sweep, series, sweep_csv, Experiment, GridChoice, HValue, Kind, Measurement, Source,
    Stage, SweepRow, CSV_HEADER,
};
