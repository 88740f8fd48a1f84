pub mod calibrate;
pub mod price;
pub mod rfr;
pub mod surfaces;

use crate::config::{CliError, CliResult};
use crate::output;
use std::path::Path;

/// Send a rendered document to `--out` (atomically) or stdout.
pub fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => output::write_atomic(path, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Days per time unit from the common flag / config (default 252).
pub fn days_per_unit(flag: Option<u32>, file: Option<u32>) -> CliResult<f64> {
    let value = flag.or(file).unwrap_or(252);
    if value == 0 {
        return Err(CliError::Config("annualization must be positive".into()));
    }
    Ok(value as f64)
}

/// Record the seed for commands whose computations may sample.
pub fn note_seed(flag: Option<u64>, file: Option<u64>) {
    if let Some(seed) = flag.or(file) {
        log::debug!("seed {seed} registered for sampled computations");
    }
}
