//! Worker-count control.
//!
//! Parallel analysis runs on the ambient rayon pool. Results never depend on
//! the number of workers; this only changes speed.

use crate::error::{invalid, Result};

/// Caps the worker count when set to a positive integer.
pub const THREADS_ENV: &str = "DPSAMPLER_THREADS";

/// Reads [`THREADS_ENV`]. Unset or empty means "let rayon decide".
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(invalid(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
            Ok(t) => Ok(Some(t)),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a pool sized by [`THREADS_ENV`].
pub fn with_env_threads<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads_from_env()? {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
