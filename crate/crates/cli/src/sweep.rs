//! `qlse sweep`: a CSV row per grid point plus least-squares scaling fits.

use std::collections::BTreeMap;

use qlse_core::driver::{self, Method, SolveOptions};
use qlse_core::fit::{fit_linear, fit_through_origin, LinearFit};
use qlse_core::problem::{generate_instance, LseInstance};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::gen::read_instance;
use crate::output::Output;

pub const HEADER_COMMENT: &str = "\
# qlse sweep: kind=run rows are single solves, kind=fit rows summarize them.
# query_count is the number of block-encoding uses of the final solve (QEF: the polynomial degree).
# Fits are ordinary least squares over every completed run of the group, across seeds.
# query_count~kappa and degree_or_time~kappa: y = slope * kappa through the origin, at fixed method, N, epsilon.
# query_count~ln(1/epsilon): y = slope * ln(1/epsilon) + intercept, at fixed method, N, kappa.
# r_squared = 1 - SS_res / SS_tot with SS_tot taken about the mean of y in both fits.
# Rows are in grid order; reruns with the same config and seeds differ only in wall_time.
";

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Row {
    pub kind: &'static str,
    pub method: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub kappa: Option<f64>,
    pub epsilon: Option<f64>,
    pub s: Option<usize>,
    pub degree_or_time: Option<f64>,
    pub query_count: Option<u64>,
    pub residual: Option<f64>,
    pub seed: Option<u64>,
    pub status: String,
    pub fit_variable: Option<&'static str>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub wall_time: Option<f64>,
}

enum Source {
    Generated { n: usize, kappa: f64, seed: u64 },
    File(usize),
}

struct Point {
    source: Source,
    method: Method,
    epsilon: f64,
    seed: u64,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    cfg.check_out_file()?;
    let files = cfg.input_files()?;
    let loaded = files
        .iter()
        .map(|p| read_instance(p))
        .collect::<Result<Vec<_>, _>>()?;

    let mut points = Vec::new();
    for &method in &cfg.methods() {
        if loaded.is_empty() {
            for &n in &cfg.n {
                for &kappa in &cfg.kappa {
                    for &epsilon in &cfg.epsilon {
                        for &seed in &cfg.seeds {
                            points.push(Point {
                                source: Source::Generated { n, kappa, seed },
                                method,
                                epsilon,
                                seed,
                            });
                        }
                    }
                }
            }
        } else {
            for file in 0..loaded.len() {
                for &epsilon in &cfg.epsilon {
                    for &seed in &cfg.seeds {
                        points.push(Point {
                            source: Source::File(file),
                            method,
                            epsilon,
                            seed,
                        });
                    }
                }
            }
        }
    }

    let pool = cfg.thread_pool()?;
    let mut rows: Vec<Row> = pool.install(|| {
        points
            .par_iter()
            .map(|p| run_point(cfg, &loaded, p))
            .collect()
    });
    let fits = fit_rows(&rows);
    rows.extend(fits);

    let mut out = Output::open(cfg.out.as_deref())?;
    out.writer()
        .write_all(HEADER_COMMENT.as_bytes())
        .map_err(|e| CliError::io(cfg.out.as_deref().unwrap_or("<stdout>".as_ref()), e))?;
    {
        let mut writer = csv::Writer::from_writer(out.writer());
        for row in &rows {
            writer.serialize(row)?;
        }
        writer
            .flush()
            .map_err(|e| CliError::io(cfg.out.as_deref().unwrap_or("<stdout>".as_ref()), e))?;
    }
    out.finish()?;
    Ok(rows)
}

fn run_point(cfg: &ExperimentConfig, loaded: &[LseInstance], p: &Point) -> Row {
    let inst = match p.source {
        Source::Generated { n, kappa, seed } => {
            generate_instance(n, kappa, cfg.sparsity_for(n), seed, cfg.spectrum)
        }
        Source::File(i) => Ok(loaded[i].clone()),
    };
    let mut row = Row {
        kind: "run",
        method: p.method.to_string(),
        epsilon: Some(p.epsilon),
        seed: Some(p.seed),
        ..Row::default()
    };
    if let Source::Generated { n, kappa, .. } = p.source {
        row.n = n;
        row.kappa = Some(kappa);
    }
    let inst = match inst {
        Ok(inst) => inst,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    row.n = inst.n();
    row.kappa = Some(inst.kappa);
    row.s = Some(inst.sparsity);
    let opts = SolveOptions {
        method: p.method,
        epsilon: p.epsilon,
        mode: cfg.mode,
        shots: cfg.shots,
        seed: p.seed,
    };
    match driver::solve(&inst, &opts) {
        Ok(report) => {
            row.degree_or_time = Some(report.degree_or_time);
            row.query_count = Some(report.solve_queries);
            row.residual = Some(report.residual);
            row.wall_time = Some(report.wall_time);
            row.status = if report.accepted() { "ok" } else { "rejected" }.into();
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// Fit rows for every group with at least two distinct abscissae.
pub fn fit_rows(rows: &[Row]) -> Vec<Row> {
    let done: Vec<&Row> = rows
        .iter()
        .filter(|r| r.kind == "run" && r.query_count.is_some())
        .collect();
    let mut out = Vec::new();

    // (method, N, epsilon bits) -> points
    let mut by_kappa: BTreeMap<(String, usize, u64), Vec<&Row>> = BTreeMap::new();
    let mut by_eps: BTreeMap<(String, usize, u64), Vec<&Row>> = BTreeMap::new();
    for r in &done {
        let (Some(kappa), Some(eps)) = (r.kappa, r.epsilon) else {
            continue;
        };
        by_kappa
            .entry((r.method.clone(), r.n, eps.to_bits()))
            .or_default()
            .push(r);
        by_eps
            .entry((r.method.clone(), r.n, kappa.to_bits()))
            .or_default()
            .push(r);
    }

    for ((method, n, eps_bits), group) in &by_kappa {
        let x: Vec<f64> = group.iter().map(|r| r.kappa.unwrap_or(0.0)).collect();
        if distinct(&x) < 2 {
            continue;
        }
        let template = Row {
            kind: "fit",
            method: method.clone(),
            n: *n,
            epsilon: Some(f64::from_bits(*eps_bits)),
            ..Row::default()
        };
        let queries: Vec<f64> = group
            .iter()
            .map(|r| r.query_count.unwrap_or(0) as f64)
            .collect();
        out.push(fit_row(
            &template,
            "query_count~kappa",
            fit_through_origin(&x, &queries),
        ));
        let times: Vec<f64> = group
            .iter()
            .map(|r| r.degree_or_time.unwrap_or(0.0))
            .collect();
        out.push(fit_row(
            &template,
            "degree_or_time~kappa",
            fit_through_origin(&x, &times),
        ));
    }
    for ((method, n, kappa_bits), group) in &by_eps {
        let x: Vec<f64> = group
            .iter()
            .map(|r| (1.0 / r.epsilon.unwrap_or(1.0)).ln())
            .collect();
        if distinct(&x) < 2 {
            continue;
        }
        let template = Row {
            kind: "fit",
            method: method.clone(),
            n: *n,
            kappa: Some(f64::from_bits(*kappa_bits)),
            ..Row::default()
        };
        let queries: Vec<f64> = group
            .iter()
            .map(|r| r.query_count.unwrap_or(0) as f64)
            .collect();
        out.push(fit_row(
            &template,
            "query_count~ln(1/epsilon)",
            fit_linear(&x, &queries),
        ));
    }
    out
}

fn distinct(x: &[f64]) -> usize {
    let mut v: Vec<u64> = x.iter().map(|f| f.to_bits()).collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn fit_row(template: &Row, variable: &'static str, fit: qlse_core::Result<LinearFit>) -> Row {
    let mut row = template.clone();
    row.fit_variable = Some(variable);
    match fit {
        Ok(f) => {
            row.slope = Some(f.slope);
            row.intercept = Some(f.intercept);
            row.r_squared = Some(f.r_squared);
            row.status = "ok".into();
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}
