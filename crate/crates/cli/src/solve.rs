//! `qlse solve`: one JSON line per (instance, method, epsilon, seed).

use std::io::Write;
use std::path::PathBuf;

use qlse_core::driver::{self, Method, SolveOptions, SolveReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::gen::read_instance;
use crate::output::Output;

#[derive(Serialize)]
struct Record<'a> {
    id: String,
    instance: String,
    accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    report: Option<&'a SolveReport>,
}

struct Job {
    file: usize,
    method: Method,
    epsilon: f64,
    seed: u64,
}

/// Ids of the runs whose residual check failed or that errored.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    let files = cfg.input_files()?;
    if files.is_empty() {
        return Err(CliError::Usage(
            "solve needs at least one instance file".into(),
        ));
    }
    cfg.check_out_file()?;
    let instances = files
        .iter()
        .map(|p| read_instance(p))
        .collect::<Result<Vec<_>, _>>()?;

    let mut jobs = Vec::new();
    for file in 0..files.len() {
        for &method in &cfg.methods() {
            for &epsilon in &cfg.epsilon {
                for &seed in &cfg.seeds {
                    jobs.push(Job {
                        file,
                        method,
                        epsilon,
                        seed,
                    });
                }
            }
        }
    }
    let pool = cfg.thread_pool()?;
    let results: Vec<Result<SolveReport, qlse_core::Error>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let opts = SolveOptions {
                    method: job.method,
                    epsilon: job.epsilon,
                    mode: cfg.mode,
                    shots: cfg.shots,
                    seed: job.seed,
                };
                driver::solve(&instances[job.file], &opts)
            })
            .collect()
    });

    let mut out = Output::open(cfg.out.as_deref())?;
    let mut failed = Vec::new();
    for (job, result) in jobs.iter().zip(&results) {
        let path = &files[job.file];
        let id = run_id(path, job);
        let record = match result {
            Ok(report) => Record {
                id: id.clone(),
                instance: path.display().to_string(),
                accepted: report.accepted(),
                residual_limit: Some(report.residual_limit()),
                error: None,
                report: Some(report),
            },
            Err(e) => Record {
                id: id.clone(),
                instance: path.display().to_string(),
                accepted: false,
                residual_limit: None,
                error: Some(e.to_string()),
                report: None,
            },
        };
        if !record.accepted {
            failed.push(id);
        }
        let line = serde_json::to_string(&record).map_err(qlse_core::Error::from)?;
        out.line(&line)?;
    }
    out.finish()?;

    if cfg.methods().len() == 2 {
        report_agreement(&jobs, &results, &files);
    }
    Ok(failed)
}

fn run_id(path: &std::path::Path, job: &Job) -> String {
    let stem = path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into(),
    );
    format!(
        "{stem}:{}:eps={}:seed={}",
        job.method, job.epsilon, job.seed
    )
}

/// Prints the QEF/QRT solution fidelity for every pair that both succeeded.
fn report_agreement(
    jobs: &[Job],
    results: &[Result<SolveReport, qlse_core::Error>],
    files: &[PathBuf],
) {
    let stderr = std::io::stderr();
    let mut err = stderr.lock();
    for (i, a) in jobs.iter().enumerate() {
        if a.method != Method::Qef {
            continue;
        }
        let partner = jobs.iter().position(|b| {
            b.method == Method::Qrt
                && b.file == a.file
                && b.epsilon == a.epsilon
                && b.seed == a.seed
        });
        if let (Some(j), Ok(qef)) = (partner, &results[i]) {
            if let Ok(qrt) = &results[j] {
                let fidelity = qef.x_estimate.fidelity(&qrt.x_estimate);
                let _ = writeln!(
                    err,
                    "{}: eps={} QEF/QRT fidelity {fidelity:.12}",
                    files[a.file].display(),
                    a.epsilon
                );
            }
        }
    }
}
