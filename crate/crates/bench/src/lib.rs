//! Benchmark harness for the fredholm solvers: a JSON experiment config,
//! a parallel runner whose output does not depend on the worker count, and
//! CSV writers for result tables and solution profiles.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::Path;

pub use config::ExperimentConfig;
pub use error::BenchError;
pub use output::{emit_csv, emit_profile, write_csv};
pub use run::{run_experiment, Experiment, RunRecord};

/// File name of the results table inside an output directory.
pub const RESULTS_FILE: &str = "results.csv";

/// Runs `config` and writes `results.csv` (plus `profiles/` when requested)
/// into `out_dir`.
pub fn execute(config: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<Experiment, BenchError> {
    let exp = run_experiment(config, jobs)?;
    let mkdir = |p: &Path| {
        std::fs::create_dir_all(p).map_err(|e| BenchError::Io {
            path: p.to_path_buf(),
            message: e.to_string(),
        })
    };
    mkdir(out_dir)?;
    emit_csv(&exp.records, &out_dir.join(RESULTS_FILE))?;
    if config.profiles {
        let dir = out_dir.join("profiles");
        mkdir(&dir)?;
        for (i, r) in exp.records.iter().enumerate() {
            emit_profile(&r.profile, &exp.grid, &dir.join(format!("{i:03}_{}.csv", r.method)))?;
        }
    }
    Ok(exp)
}
