//! `qlse gen`: writes one instance file per `(N, kappa, seed)`.

use std::fs;
use std::path::{Path, PathBuf};

use qlse_core::problem::{generate_instance, LseInstance};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// `{N}_{kappa}_{seed}.json`.
pub fn file_name(n: usize, kappa: f64, seed: u64) -> String {
    format!("{n}_{kappa}_{seed}.json")
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let mut grid = Vec::new();
    for &n in &cfg.n {
        for &kappa in &cfg.kappa {
            for &seed in &cfg.seeds {
                grid.push((n, kappa, seed));
            }
        }
    }
    let pool = cfg.thread_pool()?;
    let instances: Vec<Result<LseInstance, CliError>> = pool.install(|| {
        grid.par_iter()
            .map(|&(n, kappa, seed)| {
                Ok(generate_instance(
                    n,
                    kappa,
                    cfg.sparsity_for(n),
                    seed,
                    cfg.spectrum,
                )?)
            })
            .collect()
    });

    let mut written = Vec::with_capacity(grid.len());
    for (&(n, kappa, seed), inst) in grid.iter().zip(instances) {
        let path = dir.join(file_name(n, kappa, seed));
        write_instance(&path, &inst?)?;
        written.push(path);
    }
    Ok(written)
}

fn write_instance(path: &Path, inst: &LseInstance) -> Result<(), CliError> {
    let text = inst.to_json()?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Reads and validates an instance; unreadable files are IO errors, malformed
/// ones are instance errors.
pub fn read_instance(path: &Path) -> Result<LseInstance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    LseInstance::from_json(&text).map_err(|source| CliError::Instance {
        path: path.to_path_buf(),
        source,
    })
}
