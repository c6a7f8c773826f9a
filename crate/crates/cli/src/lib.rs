//! Experiment configuration, sweep orchestration and reporting for the `qml` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_number, Assertion, Check, ConfigError, ConfigErrors, Expected, Exponent, ExperimentConfig, Filter};
pub use run::{
    evaluate, parse_sweep_csv, report_from_rows, run, run_with_threads, AssertionResult, FittedExponent, RunReport, EXIT_ASSERTION,
    EXIT_ERROR, EXIT_OK,
};

/// Worker count from `QML_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("QML_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!("QML_THREADS must be a positive integer, got '{v}'")),
        },
    }
}
