//! `qlse verify`: every structural invariant, per instance, as a table.

use std::path::Path;

use qlse_core::blockenc::{BlockEncoding, OracleCostModel};
use qlse_core::linalg::{ComplexMatrix, StateVector, C64};
use qlse_core::problem::{
    augment, decompose_solution, verify_interlacing, verify_theorem1, AugmentedSystem, LseInstance,
};
use qlse_core::qrt::{
    build_hamiltonian, decay_probability, initial_state, leakage_bound, off_target_population,
    unperturbed_hamiltonian, QrtConfig, QrtSimulator,
};
use qlse_core::qsp::{qef_solve_with, QefOptions};
use qlse_core::tolerances;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::gen::read_instance;
use crate::output::Output;

/// Leakage target used to pick the QRT coupling for the checks.
const LEAKAGE_TARGET: f64 = 1e-2;
const LEAKAGE_SAMPLES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub instance: String,
    pub beta: Option<f64>,
    pub name: &'static str,
    pub value: f64,
    pub limit: String,
    pub pass: bool,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Check>, CliError> {
    let files = cfg.input_files()?;
    if files.is_empty() {
        return Err(CliError::Usage(
            "verify needs at least one instance file".into(),
        ));
    }
    cfg.check_out_file()?;
    let epsilon = cfg.epsilon[0];
    let pool = cfg.thread_pool()?;
    let per_file: Vec<Result<Vec<Check>, CliError>> = pool.install(|| {
        files
            .par_iter()
            .map(|path| verify_file(path, epsilon))
            .collect()
    });

    let mut checks = Vec::new();
    for result in per_file {
        checks.extend(result?);
    }
    let mut out = Output::open(cfg.out.as_deref())?;
    for line in render(&checks) {
        out.line(&line)?;
    }
    out.finish()?;
    Ok(checks)
}

fn verify_file(path: &Path, epsilon: f64) -> Result<Vec<Check>, CliError> {
    let label = path.display().to_string();
    let inst = match read_instance(path) {
        Ok(inst) => inst,
        Err(CliError::Instance { source, .. }) => {
            return Ok(vec![Check {
                instance: label,
                beta: None,
                name: "load",
                value: f64::NAN,
                limit: format!("valid instance ({source})"),
                pass: false,
            }])
        }
        Err(e) => return Err(e),
    };
    Ok(verify_instance(&label, &inst, epsilon))
}

/// Runs the checks at `beta = kappa` and at `beta = ||x||` clamped to `[1, kappa]`.
pub fn verify_instance(label: &str, inst: &LseInstance, epsilon: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut push = |beta: Option<f64>, name, value: f64, limit: String, pass: bool| {
        checks.push(Check {
            instance: label.to_string(),
            beta,
            name,
            value,
            limit,
            pass,
        })
    };
    let x = match inst.classical_solution() {
        Ok(x) => x,
        Err(e) => {
            push(None, "classical_solve", f64::NAN, e.to_string(), false);
            return checks;
        }
    };
    let measured = inst.measured_sparsity() as f64;
    push(
        None,
        "row_sparsity",
        measured,
        format!("<= {}", inst.sparsity),
        measured <= inst.sparsity as f64,
    );

    let mut betas = vec![inst.kappa, x.norm().clamp(1.0, inst.kappa)];
    betas.dedup();
    for beta in betas {
        let sys = match augment(inst, beta) {
            Ok(sys) => sys,
            Err(e) => {
                push(Some(beta), "augment", f64::NAN, e.to_string(), false);
                continue;
            }
        };
        for c in system_checks(inst, &sys, &x, epsilon) {
            push(Some(beta), c.0, c.1, c.2, c.3);
        }
    }
    checks
}

type Row = (&'static str, f64, String, bool);

fn le(name: &'static str, value: f64, limit: f64) -> Row {
    (name, value, format!("<= {limit:.3e}"), value <= limit)
}

fn system_checks(
    inst: &LseInstance,
    sys: &AugmentedSystem,
    x: &StateVector,
    epsilon: f64,
) -> Vec<Row> {
    let mut rows = Vec::new();
    let t1 = verify_theorem1(sys, x);
    rows.push(le("theorem1_angle", t1.angle, tolerances::THEOREM1_ANGLE));
    rows.push(le(
        "null_singular_value",
        t1.residual,
        tolerances::NULL_SINGULAR_VALUE,
    ));
    let interlaced = verify_interlacing(inst, sys);
    rows.push((
        "interlacing",
        f64::from(u8::from(interlaced)),
        "= 1".into(),
        interlaced,
    ));
    let gap_floor = 1.0 / inst.kappa - tolerances::SPECTRAL_BOUND;
    rows.push((
        "gap",
        sys.gap,
        format!(">= {gap_floor:.6e}"),
        sys.gap >= gap_floor,
    ));
    let sigma1 = sys.singular_values()[0];
    rows.push(le(
        "sigma1_bound",
        sigma1,
        sys.sigma_a[0] + 1.0 / sys.beta + tolerances::SPECTRAL_BOUND,
    ));
    if sys.beta >= 1.0 {
        rows.push(le("sigma1_at_most_2", sigma1, 2.0));
    }

    let reconstruction =
        OracleCostModel::new(&sys.c, &inst.b, inst.sparsity).and_then(|mut m| m.reconstruct());
    match reconstruction {
        Ok(c) => rows.push(le("oracle_reconstruction", c.max_abs_diff(&sys.c), 0.0)),
        Err(e) => rows.push(("oracle_reconstruction", f64::NAN, e.to_string(), false)),
    }
    match BlockEncoding::dilate(&sys.b, sys.alpha) {
        Ok(enc) => {
            rows.push(le(
                "encoding_error",
                enc.epsilon_enc,
                tolerances::DILATION_ERROR,
            ));
            rows.push(le(
                "encoding_unitarity",
                enc.u.unitarity_defect(),
                tolerances::UNITARY,
            ));
        }
        Err(e) => rows.push(("encoding", f64::NAN, e.to_string(), false)),
    }

    let d1 = match decompose_solution(sys) {
        Ok(d) => d.d1,
        Err(e) => {
            rows.push(("decomposition", f64::NAN, e.to_string(), false));
            return rows;
        }
    };
    let mut cost = OracleCostModel::counter_only(inst.sparsity);
    match qef_solve_with(
        sys,
        epsilon,
        &mut cost,
        QefOptions {
            verify_against_direct: true,
        },
    ) {
        Ok(res) => {
            let deviation = res.oracle_deviation.unwrap_or(f64::NAN);
            rows.push(le("qsp_vs_direct", deviation, tolerances::QSP_VS_DIRECT));
            let floor = 1.0 - epsilon * epsilon / (d1 * d1) - 1e-9;
            rows.push((
                "qef_fidelity",
                res.fidelity_vs_target,
                format!(">= {floor:.12}"),
                res.fidelity_vs_target >= floor,
            ));
            let charged = res.query_count.o_c1 as f64;
            rows.push((
                "qef_queries_equal_degree",
                charged,
                format!("= {}", res.degree_used),
                charged == res.degree_used as f64,
            ));
        }
        Err(e) => rows.push(("qef", f64::NAN, e.to_string(), false)),
    }
    rows.extend(qrt_checks(sys, d1));
    rows
}

fn expectation(h: &ComplexMatrix, bra: &StateVector, ket: &StateVector) -> C64 {
    bra.inner(&StateVector::new(h.matvec(ket.amplitudes())))
}

fn qrt_checks(sys: &AugmentedSystem, d1: f64) -> Vec<Row> {
    let mut rows = Vec::new();
    let cfg = match QrtConfig::for_system(sys, LEAKAGE_TARGET, d1, 0) {
        Ok(cfg) => cfg,
        Err(e) => return vec![("qrt_config", f64::NAN, e.to_string(), false)],
    };
    let (h0, h) = match (
        unperturbed_hamiltonian(sys, &cfg),
        build_hamiltonian(sys, &cfg),
    ) {
        (Ok(h0), Ok(h)) => (h0, h),
        (Err(e), _) | (_, Err(e)) => {
            return vec![("qrt_hamiltonian", f64::NAN, e.to_string(), false)]
        }
    };
    let start = initial_state(sys);
    let target = sys
        .target_state()
        .concat(&StateVector::zeros(sys.dilation_dim()));
    let e_start = expectation(&h0, &start, &start).re;
    let e_target = expectation(&h0, &target, &target).re;
    rows.push(le("resonance_initial", (e_start + 0.5).abs(), 1e-12));
    rows.push(le("resonance_target", (e_target + 0.5).abs(), 1e-12));
    let coupling = expectation(&h, &target, &start).norm();
    rows.push(le(
        "two_level_coupling",
        (coupling - cfg.c * d1).abs(),
        1e-12,
    ));

    let sim = match QrtSimulator::new(sys, cfg) {
        Ok(sim) => sim,
        Err(e) => {
            rows.push(("qrt_simulator", f64::NAN, e.to_string(), false));
            return rows;
        }
    };
    let bound = leakage_bound(sys, cfg.c, d1);
    let leak = (0..=LEAKAGE_SAMPLES)
        .map(|j| {
            off_target_population(
                sys,
                &sim.evolve_for(&start, cfg.t * j as f64 / LEAKAGE_SAMPLES as f64),
            )
        })
        .fold(0.0, f64::max);
    rows.push(le("leakage", leak, bound));
    let p = decay_probability(&sim.evolve_once(&start));
    rows.push(le("decay_at_pi_over_2cd1", (1.0 - p).abs(), bound + 0.01));
    rows
}

pub fn render(checks: &[Check]) -> Vec<String> {
    let width = checks
        .iter()
        .map(|c| c.instance.len())
        .max()
        .unwrap_or(8)
        .max(8);
    let mut lines = vec![format!(
        "{:<width$}  {:>10}  {:<26}  {:>12}  {:<24}  result",
        "instance", "beta", "check", "value", "limit"
    )];
    for c in checks {
        let beta = c
            .beta
            .map_or_else(|| "-".to_string(), |b| format!("{b:.4}"));
        lines.push(format!(
            "{:<width$}  {:>10}  {:<26}  {:>12.4e}  {:<24}  {}",
            c.instance,
            beta,
            c.name,
            c.value,
            c.limit,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    lines.push(format!("{} checks, {failed} failed", checks.len()));
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use qlse_core::problem::{generate_instance, SpectrumShape};

    #[test]
    fn generated_instance_passes_everything() {
        let inst = generate_instance(6, 5.0, 7, 3, SpectrumShape::TwoCluster).unwrap();
        let checks = verify_instance("t", &inst, 1e-6);
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(checks.iter().any(|c| c.name == "leakage"));
    }

    #[test]
    fn render_counts_failures() {
        let check = Check {
            instance: "x".into(),
            beta: Some(1.0),
            name: "gap",
            value: 0.1,
            limit: ">= 0.2".into(),
            pass: false,
        };
        let lines = render(&[check]);
        assert!(lines[1].ends_with("FAIL"));
        assert_eq!(lines.last().unwrap(), "1 checks, 1 failed");
    }
}
