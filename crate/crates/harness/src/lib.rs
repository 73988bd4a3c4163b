//! Reproduction scenarios and file formats behind the `pdm-causal` CLI.

pub mod io;
pub mod scenarios;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Input(String),
    /// A scenario's built-in expectation did not hold.
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Core(#[from] pdm_causal::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// 2 for numerical inconsistencies and failed checks, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Check(_) => 2,
            HarnessError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PDM_CAUSAL_THREADS";

/// Runs `f` on a pool sized by [`THREADS_ENV`] (rayon's default when unset).
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| HarnessError::Input(format!("{THREADS_ENV}={v} is not a thread count")))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?.install(f))
}
