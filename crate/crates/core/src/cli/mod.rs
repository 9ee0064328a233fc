//! Command-line front end: scenario configs, reports, sweeps and the
//! verification suites behind the `spectral-ncd` binary.

pub mod config;
pub mod report;
pub mod sweep;
pub mod verify;

pub use config::{ScenarioConfig, CONFIG_VERSION};
pub use report::{analyze, run_analyze, AnalysisReport};
pub use sweep::{run_sweep, sweep, SweepTable};
pub use verify::{run_verify, SuiteResult, VerifyReport, SUITES};

use crate::error::Error;

/// Worker threads for the rayon pool.
pub const THREADS_ENV: &str = "SPECTRAL_NCD_THREADS";

/// Sizes the global rayon pool from `SPECTRAL_NCD_THREADS` when set.
/// Results do not depend on the thread count.
pub fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV}: expected a positive integer, got {v:?}")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// 2 for bad input (config, suite names), 1 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}
