//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed on every run.
//! The process exits non-zero if any criterion fails.

use std::time::Instant;

use num_complex::Complex64 as C64;
use qlse_core::blockenc::{BlockEncoding, OracleCostModel};
use qlse_core::driver::{self, calibrate_beta, estimate_d1, Method, Mode, SolveOptions};
use qlse_core::fit::{fit_linear, fit_through_origin};
use qlse_core::linalg::{eig_hermitian, StateVector};
use qlse_core::problem::{
    augment, decompose_solution, generate_instance, interlaces, verify_theorem1, AugmentedSystem,
    LseInstance, SpectrumShape,
};
use qlse_core::qrt::{
    decay_probability, estimate_qrt_queries, initial_state, leakage_bound, off_target_population,
    rabi_transition_probability, two_level_transition, QrtConfig, QrtSimulator,
};
use qlse_core::qsp::{
    apply_qsp, build_filter, direct_filter_apply, qef_solve, solve_phases, FilterPolynomial,
};
use qlse_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const SHAPES: [SpectrumShape; 3] = [
    SpectrumShape::Geometric,
    SpectrumShape::TwoCluster,
    SpectrumShape::Linear,
];
const KAPPAS: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

type Criterion = fn() -> Result<Verdict>;

fn main() {
    let criteria: [(&str, Criterion); 12] = [
        ("null vector encodes the solution", criterion_1),
        ("interlacing and gap", criterion_2),
        ("norm bound on sigma_1(C)", criterion_3),
        ("QSP circuit equals the matrix filter", criterion_4),
        ("filter quality", criterion_5),
        ("QEF end to end", criterion_6),
        ("QEF degree scaling", criterion_7),
        ("QRT resonance", criterion_8),
        ("QRT leakage bound", criterion_9),
        ("QRT scaling", criterion_10),
        ("cross-method agreement", criterion_11),
        ("sampled-mode statistics", criterion_12),
    ];
    let results: Vec<(bool, String, f64)> = criteria
        .par_iter()
        .map(|(_, run)| {
            let started = Instant::now();
            let verdict = run().unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
            (
                verdict.pass,
                verdict.detail,
                started.elapsed().as_secs_f64(),
            )
        })
        .collect();

    let mut failed = 0;
    for (i, ((name, _), (pass, detail, secs))) in criteria.iter().zip(&results).enumerate() {
        let tag = if *pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {detail} [{secs:.1}s]", i + 1);
        failed += usize::from(!pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn instance(
    n: usize,
    kappa: f64,
    s: usize,
    seed: u64,
    shape: SpectrumShape,
) -> Result<LseInstance> {
    generate_instance(n, kappa, s, seed, shape)
}

fn x_norm(inst: &LseInstance) -> Result<f64> {
    Ok(inst.classical_solution()?.norm())
}

/// The grid of instances shared by criteria 2 and 3.
fn spectral_grid() -> Result<Vec<(LseInstance, f64)>> {
    let mut out = Vec::new();
    for (ki, &kappa) in KAPPAS.iter().enumerate() {
        for (si, &shape) in SHAPES.iter().enumerate() {
            for (ni, &n) in [4usize, 8, 16, 32].iter().enumerate() {
                let seed = 1000 + (ki * 100 + si * 10 + ni) as u64;
                let s = if ni % 2 == 0 { n + 1 } else { 3 };
                let inst = instance(n, kappa, s, seed, shape)?;
                for beta in [1.0, kappa] {
                    out.push((inst.clone(), beta));
                }
            }
        }
    }
    Ok(out)
}

fn criterion_1() -> Result<Verdict> {
    let ns = [2usize, 4, 8, 16, 32];
    let cases: Vec<Result<(f64, f64)>> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let n = ns[i as usize % ns.len()];
            let kappa = KAPPAS[(i / 5) as usize % KAPPAS.len()];
            let shape = SHAPES[i as usize % 3];
            let s = [2, 3, n + 1][(i / 3) as usize % 3];
            let inst = instance(n, kappa, s, 7_000 + i, shape)?;
            let x = inst.classical_solution()?;
            let beta = match i % 4 {
                0 => 1.0,
                1 => kappa,
                2 => x.norm().clamp(1.0, kappa),
                _ => 0.5 + 2.0 * kappa * ((i * 37 % 101) as f64 / 101.0),
            };
            let sys = augment(&inst, beta)?;
            let report = verify_theorem1(&sys, &x);
            Ok((report.angle, report.residual))
        })
        .collect();
    let cases = cases.into_iter().collect::<Result<Vec<_>>>()?;
    let max_angle = cases.iter().map(|c| c.0).fold(0.0, f64::max);
    let max_res = cases.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(Verdict::new(
        max_angle <= 1e-8 && max_res <= 1e-10,
        format!("200 instances, max angle {max_angle:.2e} rad (<= 1e-8), max ||C v|| {max_res:.2e} (<= 1e-10)"),
    ))
}

fn criterion_2() -> Result<Verdict> {
    let grid = spectral_grid()?;
    let checks: Vec<Result<(bool, f64)>> = grid
        .par_iter()
        .map(|(inst, beta)| {
            let sys = augment(inst, *beta)?;
            let ok = interlaces(&sys.singular_values(), &sys.sigma_a, 1e-9);
            Ok((ok, sys.gap - 1.0 / inst.kappa))
        })
        .collect();
    let checks = checks.into_iter().collect::<Result<Vec<_>>>()?;
    let interlace_failures = checks.iter().filter(|c| !c.0).count();
    let worst_gap_margin = checks.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    Ok(Verdict::new(
        interlace_failures == 0 && worst_gap_margin >= -1e-8,
        format!(
            "{} systems over kappa in {{1..100}}, interlacing failures {interlace_failures}, \
             min(Delta - 1/kappa) {worst_gap_margin:.2e} (>= -1e-8)",
            checks.len()
        ),
    ))
}

fn criterion_3() -> Result<Verdict> {
    let grid = spectral_grid()?;
    let margins: Vec<Result<(f64, f64)>> = grid
        .par_iter()
        .map(|(inst, beta)| {
            let sys = augment(inst, *beta)?;
            let sigma1 = sys.singular_values()[0];
            Ok((sigma1 - (sys.sigma_a[0] + 1.0 / beta), sigma1))
        })
        .collect();
    let margins = margins.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = margins
        .iter()
        .map(|m| m.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let largest = margins.iter().map(|m| m.1).fold(0.0, f64::max);
    Ok(Verdict::new(
        worst <= 1e-8 && largest <= 2.0,
        format!(
            "{} systems, max(sigma_1 - sbar_1 - 1/beta) {worst:.2e} (<= 1e-8), max sigma_1 {largest:.4} (<= 2)",
            margins.len()
        ),
    ))
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::new(amps)
        .normalized()
        .expect("gaussian vector is nonzero")
}

fn criterion_4() -> Result<Verdict> {
    let inst = instance(8, 10.0, 9, 41, SpectrumShape::Geometric)?;
    let sys = augment(&inst, 10.0)?;
    let delta = sys.gap_lower_bound() / sys.alpha;
    let enc = BlockEncoding::dilate(&sys.b, sys.alpha)?;
    let eig = eig_hermitian(&sys.b.scale(1.0 / sys.alpha))?;
    let ks = [1usize, 2, 7, 40, 150, 300, 500];
    let rows: Vec<Result<(f64, f64)>> = ks
        .par_iter()
        .map(|&k| {
            let poly = FilterPolynomial::with_half_degree(k, delta)?;
            let phases = solve_phases(&poly)?;
            let mut cost = OracleCostModel::counter_only(inst.sparsity);
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let mut random_dev: f64 = 0.0;
            for _ in 0..4 {
                let psi = random_state(sys.dilation_dim(), &mut rng);
                let qsp = apply_qsp(&enc, &phases, &psi, &mut cost)?;
                random_dev =
                    random_dev.max(qsp.sub(&direct_filter_apply(&sys, &poly, &psi)).norm());
            }
            let mut eig_dev: f64 = 0.0;
            for (j, &lambda) in eig.values.iter().enumerate() {
                let u = eig.vector(j);
                let out = apply_qsp(&enc, &phases, &u, &mut cost)?;
                eig_dev = eig_dev.max(out.sub(&u.scaled(C64::new(poly.eval(lambda), 0.0))).norm());
            }
            Ok((random_dev, eig_dev))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let random_dev = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let eig_dev = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Verdict::new(
        random_dev <= 1e-8 && eig_dev <= 1e-8,
        format!(
            "k in {ks:?}, Delta {delta:.4}: max |QSP - direct| {random_dev:.2e}, \
             max eigen-action error {eig_dev:.2e} over {} eigenpairs (<= 1e-8)",
            eig.values.len()
        ),
    ))
}

fn criterion_5() -> Result<Verdict> {
    let deltas = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005];
    let epsilons = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10];
    let cases: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| epsilons.iter().map(move |&e| (d, e)))
        .collect();
    let rows: Vec<Result<(bool, f64)>> = cases
        .par_iter()
        .map(|&(delta, eps)| {
            let poly = build_filter(delta, eps)?;
            let unit = poly.eval(0.0) == 1.0 && poly.eval(-0.0) == 1.0;
            let points = (200 * poly.k).max(20_000);
            let sup = (0..=points)
                .map(|i| delta + (1.0 - delta) * i as f64 / points as f64)
                .flat_map(|w| [poly.eval(w).abs(), poly.eval(-w).abs()])
                .fold(0.0, f64::max);
            Ok((unit, sup / eps))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let all_unit = rows.iter().all(|r| r.0);
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Verdict::new(
        all_unit && worst <= 1.0,
        format!(
            "{} (Delta, eps) pairs, R_k(0) == 1 on all: {all_unit}, max sup|R_k|/eps on dense grid {worst:.4} (<= 1)",
            rows.len()
        ),
    ))
}

fn criterion_6() -> Result<Verdict> {
    let mut cases = Vec::new();
    for &eps in &[1e-4, 1e-6, 1e-8] {
        for &n in &[8usize, 16, 32] {
            cases.push((eps, n));
        }
    }
    let rows: Vec<Result<(f64, f64, f64)>> = cases
        .par_iter()
        .map(|&(eps, n)| {
            let inst = instance(n, 10.0, n + 1, 600 + n as u64, SpectrumShape::Geometric)?;
            let report = driver::solve(&inst, &SolveOptions::exact(Method::Qef, eps, 6))?;
            Ok((eps, report.residual / eps, 1.0 - report.state_fidelity))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let worst_res = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let worst_infid = rows.iter().map(|r| r.2 / r.0).fold(0.0, f64::max);
    Ok(Verdict::new(
        worst_res <= 5.0 && worst_infid <= 1.0,
        format!(
            "eps in {{1e-4,1e-6,1e-8}} x N in {{8,16,32}}, kappa 10: max residual/eps {worst_res:.3} (<= 5), \
             max (1 - fidelity)/eps {worst_infid:.2e} (<= 1)"
        ),
    ))
}

fn criterion_7() -> Result<Verdict> {
    let kappas = [2.0, 5.0, 10.0, 20.0, 50.0];
    let by_kappa: Vec<Result<(f64, f64, bool)>> = kappas
        .par_iter()
        .map(|&kappa| {
            let inst = instance(16, kappa, 17, 70, SpectrumShape::Geometric)?;
            let res = qef_solve(&augment(&inst, kappa)?, 1e-6)?;
            let charged = res.query_count.o_c1 as usize == res.degree_used;
            Ok((kappa, res.degree_used as f64, charged))
        })
        .collect();
    let by_kappa = by_kappa.into_iter().collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = by_kappa.iter().map(|r| r.0).collect();
    let y: Vec<f64> = by_kappa.iter().map(|r| r.1).collect();
    let kappa_fit = fit_through_origin(&x, &y)?;

    let inst = instance(16, 10.0, 17, 71, SpectrumShape::Geometric)?;
    let sys = augment(&inst, 10.0)?;
    let exponents = [2, 3, 4, 5, 6, 7, 8, 9, 10];
    let by_eps: Vec<Result<(f64, f64, bool)>> = exponents
        .par_iter()
        .map(|&p| {
            let eps = 10f64.powi(-p);
            let res = qef_solve(&sys, eps)?;
            let charged = res.query_count.o_c1 as usize == res.degree_used;
            Ok(((1.0 / eps).ln(), res.degree_used as f64, charged))
        })
        .collect();
    let by_eps = by_eps.into_iter().collect::<Result<Vec<_>>>()?;
    let lx: Vec<f64> = by_eps.iter().map(|r| r.0).collect();
    let ly: Vec<f64> = by_eps.iter().map(|r| r.1).collect();
    let eps_fit = fit_linear(&lx, &ly)?;

    let charged = by_kappa.iter().chain(&by_eps).all(|r| r.2);
    Ok(Verdict::new(
        kappa_fit.r_squared >= 0.95 && eps_fit.r_squared >= 0.95 && charged,
        format!(
            "degree vs kappa (eps 1e-6): {y:?}, slope {:.2}, R^2 {:.4}; degree vs ln(1/eps) (kappa 10): {ly:?}, \
             slope {:.2}, R^2 {:.4} (both >= 0.95); query count == degree: {charged}",
            kappa_fit.slope, kappa_fit.r_squared, eps_fit.slope, eps_fit.r_squared
        ),
    ))
}

/// Calibrated system (`beta` clamped to `[1, kappa]` around `||x||`) and its `d1`.
fn calibrated(inst: &LseInstance) -> Result<(AugmentedSystem, f64)> {
    let beta = x_norm(inst)?.clamp(1.0, inst.kappa);
    let sys = augment(inst, beta)?;
    let d1 = decompose_solution(&sys)?.d1;
    Ok((sys, d1))
}

fn criterion_8() -> Result<Verdict> {
    let hand = LseInstance::from_parts(
        qlse_core::linalg::ComplexMatrix::identity(2),
        StateVector::basis(2, 0),
    )?;
    let mut insts = vec![(hand, 1.0)];
    for (i, &(n, kappa)) in [(4usize, 2.0), (8, 5.0), (8, 10.0), (16, 5.0), (16, 20.0)]
        .iter()
        .enumerate()
    {
        let inst = instance(n, kappa, n + 1, 800 + i as u64, SHAPES[i % 3])?;
        let beta = x_norm(&inst)?.clamp(1.0, kappa);
        insts.push((inst, beta));
    }
    let rows: Vec<Result<(f64, f64)>> = insts
        .par_iter()
        .flat_map(|(inst, beta)| {
            [1e-1, 1e-2, 1e-3].into_par_iter().map(move |eps_leak| {
                let sys = augment(inst, *beta)?;
                let d1 = decompose_solution(&sys)?.d1;
                let cfg = QrtConfig::for_system(&sys, eps_leak, d1, 0)?;
                let sim = QrtSimulator::new(&sys, cfg)?;
                let p = decay_probability(&sim.evolve_once(&initial_state(&sys)));
                let predicted = (cfg.c * cfg.t * d1).sin().powi(2);
                Ok(((p - predicted).abs(), leakage_bound(&sys, cfg.c, d1) + 0.01))
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = rows.iter().map(|r| r.0 / r.1).fold(0.0, f64::max);
    let worst_abs = rows.iter().map(|r| r.0).fold(0.0, f64::max);

    let mut rabi_dev: f64 = 0.0;
    for &c in &[0.01, 0.05, 0.2] {
        for &d1 in &[0.0, 0.3, std::f64::consts::FRAC_1_SQRT_2, 0.95] {
            for &e in &[0.0, 0.05, 0.3, 1.0] {
                for j in 0..=8 {
                    let t = j as f64 * 20.0;
                    let exact = two_level_transition(c, d1, e, t)?;
                    rabi_dev =
                        rabi_dev.max((exact - rabi_transition_probability(c, d1, e, t)).abs());
                }
            }
        }
    }
    Ok(Verdict::new(
        worst <= 1.0 && rabi_dev <= 1e-10,
        format!(
            "{} runs at t = pi/(2 c d1): max |p - sin^2(c t d1)| {worst_abs:.2e}, max ratio to \
             (leakage_bound + 0.01) {worst:.3} (<= 1); Rabi formula vs 2x2 exponential {rabi_dev:.2e} (<= 1e-10)",
            rows.len()
        ),
    ))
}

fn criterion_9() -> Result<Verdict> {
    let runs: Vec<(usize, f64, SpectrumShape, f64)> = (0..100)
        .map(|i| {
            let eps_leak = [1e-1, 1e-2, 1e-3][i % 3];
            if i < 50 {
                (16, 50.0, SpectrumShape::TwoCluster, eps_leak)
            } else {
                let n = [4, 8, 16][i % 3];
                let kappa = [2.0, 5.0, 10.0, 20.0, 50.0][(i / 3) % 5];
                (n, kappa, SHAPES[(i / 2) % 3], eps_leak)
            }
        })
        .collect();
    let samples = 48;
    let rows: Vec<Result<f64>> = runs
        .par_iter()
        .enumerate()
        .map(|(i, &(n, kappa, shape, eps_leak))| {
            let inst = instance(n, kappa, n + 1, 900 + i as u64, shape)?;
            let (sys, d1) = calibrated(&inst)?;
            let cfg = QrtConfig::for_system(&sys, eps_leak, d1, 0)?;
            let bound = leakage_bound(&sys, cfg.c, d1);
            let sim = QrtSimulator::new(&sys, cfg)?;
            let psi0 = initial_state(&sys);
            let worst = (0..=samples)
                .map(|j| {
                    let t = cfg.t * j as f64 / samples as f64;
                    off_target_population(&sys, &sim.evolve_for(&psi0, t)) / bound
                })
                .fold(0.0, f64::max);
            Ok(worst)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = rows.iter().copied().fold(0.0, f64::max);
    let worst_cluster = rows[..50].iter().copied().fold(0.0, f64::max);
    Ok(Verdict::new(
        worst <= 1.0,
        format!(
            "100 runs x {} times on [0, pi/(2 c d1)]: max off-target / bound {worst:.3} \
             (two_cluster N=16 kappa=50: {worst_cluster:.3}) (<= 1)",
            samples + 1
        ),
    ))
}

fn criterion_10() -> Result<Verdict> {
    let kappas = [2.0, 5.0, 10.0, 20.0, 50.0];
    let eps_leak = 1e-4;
    let times: Vec<Result<f64>> = kappas
        .par_iter()
        .map(|&kappa| {
            let inst = instance(16, kappa, 17, 100, SpectrumShape::Geometric)?;
            let (sys, d1) = calibrated(&inst)?;
            Ok(QrtConfig::for_system(&sys, eps_leak, d1, 0)?.t)
        })
        .collect();
    let times = times.into_iter().collect::<Result<Vec<_>>>()?;
    let t_fit = fit_through_origin(&kappas, &times)?;

    // Additive regime: alpha t = 1, so the estimate minus the linear term is
    // ln(1/eps) / ln(e + ln(1/eps)).
    let s = 1000;
    let cfg = QrtConfig::resonant(0.01, 1.0, 1, 0);
    let logs: Vec<f64> = (1..=12).map(|p| (10f64.powi(p)).ln()).collect();
    let additive: Vec<f64> = logs
        .iter()
        .map(|&l| (estimate_qrt_queries(&cfg, 1.0, (-l).exp(), s) as f64 - s as f64) / s as f64)
        .collect();
    let increasing = additive.windows(2).all(|w| w[1] > w[0]);
    let sublinear = additive
        .iter()
        .zip(&logs)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1].0 / w[1].1 < w[0].0 / w[0].1);
    let ratios: Vec<f64> = additive
        .iter()
        .zip(&logs)
        .filter(|(_, &l)| l > 3.0 * std::f64::consts::E)
        .map(|(a, &l)| a / (l / l.ln()))
        .collect();
    let ratio_band = ratios.iter().all(|r| (0.5..=1.5).contains(r));
    let (rmin, rmax) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| {
        (lo.min(r), hi.max(r))
    });
    Ok(Verdict::new(
        t_fit.r_squared >= 0.95 && increasing && sublinear && ratio_band,
        format!(
            "t vs kappa: slope {:.1}, R^2 {:.4} (>= 0.95); additive term increasing {increasing}, \
             sublinear in ln(1/eps) {sublinear}, ratio to L/ln L in [{rmin:.3}, {rmax:.3}]",
            t_fit.slope, t_fit.r_squared
        ),
    ))
}

fn criterion_11() -> Result<Verdict> {
    let cases = [
        (8usize, 5.0, 1e-4, SpectrumShape::Geometric),
        (8, 20.0, 1e-4, SpectrumShape::TwoCluster),
        (16, 10.0, 1e-4, SpectrumShape::Linear),
        (16, 20.0, 1e-5, SpectrumShape::Geometric),
        (32, 50.0, 1e-5, SpectrumShape::Geometric),
    ];
    let rows: Vec<Result<f64>> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(n, kappa, eps, shape))| {
            let inst = instance(n, kappa, n + 1, 1100 + i as u64, shape)?;
            let qef = driver::solve(&inst, &SolveOptions::exact(Method::Qef, eps, 11))?;
            let qrt = driver::solve(&inst, &SolveOptions::exact(Method::Qrt, eps, 11))?;
            Ok((1.0 - qef.x_estimate.fidelity(&qrt.x_estimate)) / (10.0 * eps))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = rows.iter().copied().fold(0.0, f64::max);
    Ok(Verdict::new(
        worst <= 1.0,
        format!(
            "{} instances up to N=32, kappa=50: max (1 - F(QEF, QRT)) / (10 eps) {worst:.2e} (<= 1)",
            rows.len()
        ),
    ))
}

fn criterion_12() -> Result<Verdict> {
    let shots = 10_000;
    let stats: Vec<Result<f64>> = (0..30u64)
        .into_par_iter()
        .map(|i| {
            let n = [4, 8, 16][i as usize % 3];
            let kappa = [2.0, 5.0, 10.0, 50.0][i as usize % 4];
            let inst = instance(n, kappa, n + 1, 1200 + i, SHAPES[i as usize % 3])?;
            let sys = augment(&inst, [1.0, kappa][i as usize % 2])?;
            let target = sys.target_state();
            let d1 = decompose_solution(&sys)?.d1;
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let (est, _) = estimate_d1(&target, Mode::Sampled, shots, &mut rng)?;
            let p = d1 * d1;
            let sigma = (p * (1.0 - p) / shots as f64).sqrt() / (2.0 * d1);
            Ok((est - d1).abs() / sigma)
        })
        .collect();
    let stats = stats.into_iter().collect::<Result<Vec<_>>>()?;
    let worst_z = stats.iter().copied().fold(0.0, f64::max);

    let (lo, hi) = (0.4, 0.8);
    let landed: Vec<Result<bool>> = (0..60u64)
        .into_par_iter()
        .map(|i| {
            let n = [4, 8, 16][i as usize % 3];
            let kappa = [2.0, 5.0, 10.0, 20.0, 50.0][i as usize % 5];
            let inst = instance(n, kappa, n + 1, 1300 + i, SHAPES[(i / 5) as usize % 3])?;
            let opts = SolveOptions {
                method: Method::Qef,
                epsilon: 1e-3,
                mode: Mode::Sampled,
                shots,
                seed: i,
            };
            let mut cost = OracleCostModel::counter_only(inst.sparsity);
            let cal = calibrate_beta(&inst, &opts, &mut cost)?;
            let d = decompose_solution(&cal.system)?;
            Ok((lo..=hi).contains(&d.d0) && (lo..=hi).contains(&d.d1))
        })
        .collect();
    let landed = landed.into_iter().collect::<Result<Vec<_>>>()?;
    let rate = landed.iter().filter(|&&b| b).count() as f64 / landed.len() as f64;
    Ok(Verdict::new(
        worst_z <= 3.0 && rate >= 0.95,
        format!(
            "d1 estimates at 10^4 shots: max |error|/sigma {worst_z:.2} over {} states (<= 3); \
             calibrated d0, d1 in [0.4, 0.8] on {:.1}% of {} instances (>= 95%)",
            stats.len(),
            100.0 * rate,
            landed.len()
        ),
    ))
}
