//! End-to-end solves: two-phase `beta` calibration, a QEF or QRT run at the
//! calibrated `beta`, post-selection of the solution block, and a residual
//! check against the direct solution.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::blockenc::{OracleCostModel, QueryCounts};
use crate::error::{Error, Result, SolvePhase};
use crate::linalg::{StateVector, C64};
use crate::problem::{augment, AugmentedSystem, LseInstance};
use crate::qrt::{estimate_qrt_queries, qrt_solve, QrtConfig};
use crate::qsp::{qef_solve_with, QefOptions};
use crate::tolerances;

/// `d1` assumed by the first QRT run, before anything has been measured.
/// With `beta = kappa >= ||x||` the true value lies in `[1/√2, 1]`.
const PHASE1_D1_PRIOR: f64 = 0.85;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "QEF")]
    Qef,
    #[serde(rename = "QRT")]
    Qrt,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qef" => Ok(Self::Qef),
            "qrt" => Ok(Self::Qrt),
            other => Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Qef => "qef",
            Self::Qrt => "qrt",
        })
    }
}

/// Whether measurement statistics are read off the amplitudes or sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Self::Exact),
            "sampled" => Ok(Self::Sampled),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: Method,
    pub epsilon: f64,
    pub mode: Mode,
    pub shots: usize,
    pub seed: u64,
}

impl SolveOptions {
    pub fn exact(method: Method, epsilon: f64, seed: u64) -> Self {
        Self {
            method,
            epsilon,
            mode: Mode::Exact,
            shots: 10_000,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.1) {
            return Err(Error::InvalidInput(format!(
                "epsilon = {}; need 0 < epsilon <= 0.1",
                self.epsilon
            )));
        }
        if self.shots == 0 {
            return Err(Error::InvalidInput("shots must be at least 1".into()));
        }
        Ok(())
    }
}

/// One solver run at fixed `beta`.
#[derive(Clone, Debug)]
pub struct MethodRun {
    /// Normalized output in the dilation space.
    pub state: StateVector,
    /// Filter degree for QEF, evolution time for QRT.
    pub degree_or_time: f64,
    pub queries: QueryCounts,
    pub rounds: usize,
}

/// Runs one solver at the `beta` of `sys`.
///
/// The accuracy targets are tightened from `epsilon` by `8 beta` because the
/// residual scales the state error by `||x|| ≈ beta` and by `1/(d0 d1²)`.
pub fn run_method(
    sys: &AugmentedSystem,
    method: Method,
    epsilon: f64,
    d1_prior: f64,
    seed: u64,
    cost: &mut OracleCostModel,
) -> Result<MethodRun> {
    let inner = epsilon / (8.0 * sys.beta);
    let before = cost.counts();
    let (state, degree_or_time, rounds) = match method {
        Method::Qef => {
            let res = qef_solve_with(sys, inner, cost, QefOptions::default())?;
            (res.output_state, res.degree_used as f64, 1)
        }
        Method::Qrt => {
            let cfg = QrtConfig::for_system(sys, inner * inner, d1_prior, seed)?;
            let rec = qrt_solve(sys, &cfg)?;
            let per_round = estimate_qrt_queries(&cfg, sys.alpha, epsilon, cost.sparsity());
            cost.charge_block_encoding_use(per_round * rec.rounds as u64);
            (rec.final_state, cfg.t, rec.rounds)
        }
    };
    let after = cost.counts();
    Ok(MethodRun {
        state,
        degree_or_time,
        queries: QueryCounts {
            o_c1: after.o_c1 - before.o_c1,
            o_c2: after.o_c2 - before.o_c2,
            o_b: after.o_b - before.o_b,
            o_b1: after.o_b1 - before.o_b1,
            alpha_model: after.alpha_model,
        },
        rounds,
    })
}

/// `d1` from the probability of the last basis outcome of `state`, with its
/// binomial standard error propagated through the square root.
pub fn estimate_d1(
    state: &StateVector,
    mode: Mode,
    shots: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    let p = state.probability(state.dim() - 1).clamp(0.0, 1.0);
    match mode {
        Mode::Exact => Ok((p.sqrt(), 0.0)),
        Mode::Sampled => {
            let hits = sample_binomial(shots, p, rng)?;
            if hits == 0 {
                return Err(Error::Estimation { shots });
            }
            let freq = hits as f64 / shots as f64;
            let d1 = freq.sqrt();
            let se_freq = (freq * (1.0 - freq) / shots as f64).sqrt();
            Ok((d1, se_freq / (2.0 * d1)))
        }
    }
}

fn sample_binomial(shots: usize, p: f64, rng: &mut impl Rng) -> Result<u64> {
    let dist = Binomial::new(shots as u64, p)
        .map_err(|e| Error::Numerical(format!("binomial({shots}, {p}): {e}")))?;
    Ok(dist.sample(rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationStep {
    pub beta: f64,
    pub d1: f64,
    pub d1_std_error: f64,
    /// `beta d0 / d1`.
    pub x_norm_estimate: f64,
}

impl CalibrationStep {
    fn new(beta: f64, d1: f64, d1_std_error: f64) -> Self {
        let d0 = (1.0 - d1 * d1).max(0.0).sqrt();
        Self {
            beta,
            d1,
            d1_std_error,
            x_norm_estimate: beta * d0 / d1,
        }
    }

    pub fn d0(&self) -> f64 {
        (1.0 - self.d1 * self.d1).max(0.0).sqrt()
    }

    /// Both `d0` and `d1` inside the calibrated interval.
    pub fn in_range(&self) -> bool {
        let (lo, hi) = tolerances::CALIBRATED_AMPLITUDE_RANGE;
        let inside = |v: f64| (lo..=hi).contains(&v);
        inside(self.d1) && inside(self.d0())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CalibrationTrace {
    pub steps: Vec<CalibrationStep>,
    pub recalibrated: bool,
    pub in_range: bool,
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub beta1: f64,
    pub beta2: f64,
    pub trace: CalibrationTrace,
    /// The last solver run, at `beta2`.
    pub run: MethodRun,
    pub system: AugmentedSystem,
}

fn clamp_beta(beta: f64, kappa: f64) -> f64 {
    beta.clamp(1.0, kappa.max(1.0))
}

/// Predicted `d1` for a run at `beta` when `||x||` is about `x_norm`.
fn predicted_d1(beta: f64, x_norm: f64) -> f64 {
    beta / beta.hypot(x_norm)
}

/// Phase 1 at `beta1 = kappa`, phase 2 at `beta2 = clamp(beta1 d0/d1, 1, kappa)`,
/// and one more pass if `d0` or `d1` still falls outside the target interval.
pub fn calibrate_beta(
    inst: &LseInstance,
    opts: &SolveOptions,
    cost: &mut OracleCostModel,
) -> Result<Calibration> {
    opts.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let kappa = inst.kappa;
    let mut trace = CalibrationTrace::default();

    let beta1 = clamp_beta(kappa, kappa);
    let sys1 = augment(inst, beta1)?;
    let run1 = run_method(
        &sys1,
        opts.method,
        opts.epsilon,
        PHASE1_D1_PRIOR,
        rng.gen(),
        cost,
    )?;
    let (d1, se) = estimate_d1(&run1.state, opts.mode, opts.shots, &mut rng)?;
    let step1 = CalibrationStep::new(beta1, d1, se);
    trace.steps.push(step1);

    let mut estimate = step1.x_norm_estimate;
    let mut beta = clamp_beta(estimate, kappa);
    let mut sys = augment(inst, beta)?;
    let mut run = run_method(
        &sys,
        opts.method,
        opts.epsilon,
        predicted_d1(beta, estimate),
        rng.gen(),
        cost,
    )?;
    let (d1, se) = estimate_d1(&run.state, opts.mode, opts.shots, &mut rng)?;
    let mut step = CalibrationStep::new(beta, d1, se);
    trace.steps.push(step);

    if !step.in_range() {
        estimate = step.x_norm_estimate;
        let retry = clamp_beta(estimate, kappa);
        if retry != beta {
            beta = retry;
            sys = augment(inst, beta)?;
            run = run_method(
                &sys,
                opts.method,
                opts.epsilon,
                predicted_d1(beta, estimate),
                rng.gen(),
                cost,
            )?;
            let (d1, se) = estimate_d1(&run.state, opts.mode, opts.shots, &mut rng)?;
            step = CalibrationStep::new(beta, d1, se);
            trace.steps.push(step);
            trace.recalibrated = true;
        }
    }
    trace.in_range = step.in_range();
    Ok(Calibration {
        beta1,
        beta2: beta,
        trace,
        run,
        system: sys,
    })
}

/// Post-selected solution direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extraction {
    pub x: StateVector,
    pub acceptance_rate: f64,
}

/// Keeps the first `N` entries of an `(N+1)`-vector `v` and renormalizes.
///
/// The phase is fixed so that `v = (-d0 x/||x||, d1)` with `d1 >= 0`, which
/// makes the returned vector `x/||x||` itself rather than a phase multiple.
pub fn extract_solution(
    v: &StateVector,
    mode: Mode,
    shots: usize,
    rng: &mut impl Rng,
) -> Result<Extraction> {
    let n = v.dim() - 1;
    let v = v.normalized()?.with_real_entry(n);
    let top = v.slice(0, n);
    let exact_rate = top.norm_sqr();
    let acceptance_rate = match mode {
        Mode::Exact => exact_rate,
        Mode::Sampled => {
            sample_binomial(shots, exact_rate.clamp(0.0, 1.0), rng)? as f64 / shots as f64
        }
    };
    if acceptance_rate < tolerances::POST_SELECTION_FLOOR {
        return Err(Error::PostSelectionStarvation {
            rate: acceptance_rate,
            floor: tolerances::POST_SELECTION_FLOOR,
        });
    }
    let sign = if v.amplitudes()[n].norm() > 0.0 {
        -1.0
    } else {
        1.0
    };
    Ok(Extraction {
        x: top.scaled(C64::new(sign, 0.0)).normalized()?,
        acceptance_rate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub beta_phase1: f64,
    pub d1_estimate: f64,
    pub d1_std_error: f64,
    pub beta_phase2: f64,
    pub x_estimate: StateVector,
    /// `||A x̂ ||x||_est - b|| / ||b||`.
    pub residual: f64,
    pub state_fidelity: f64,
    pub queries: QueryCounts,
    /// Seconds.
    pub wall_time: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub mode: Mode,
    pub x_norm_estimate: f64,
    /// Degree or evolution time of the final run.
    pub degree_or_time: f64,
    /// Block-encoding uses of the final run alone.
    pub solve_queries: u64,
    pub post_selection_rate: f64,
    pub calibration: CalibrationTrace,
}

impl SolveReport {
    /// Residual limit: `5 epsilon`, widened in sampled mode by five standard
    /// errors of the norm estimate `beta d0/d1`.
    pub fn residual_limit(&self) -> f64 {
        let base = tolerances::RESIDUAL_CONSTANT * self.epsilon;
        match self.mode {
            Mode::Exact => base,
            Mode::Sampled => {
                let d1 = self.d1_estimate;
                let d0_sq = (1.0 - d1 * d1).max(f64::MIN_POSITIVE);
                base + 5.0 * self.d1_std_error / (d1 * d0_sq)
            }
        }
    }

    pub fn accepted(&self) -> bool {
        self.residual <= self.residual_limit()
    }
}

/// `||A y - b|| / ||b||`.
pub fn relative_residual(inst: &LseInstance, y: &StateVector) -> f64 {
    let ay = inst.a.matvec(y.amplitudes());
    StateVector::new(ay).sub(&inst.b).norm() / inst.b.norm()
}

pub fn solve(inst: &LseInstance, opts: &SolveOptions) -> Result<SolveReport> {
    let started = Instant::now();
    let mut cost = OracleCostModel::counter_only(inst.sparsity);
    let cal =
        calibrate_beta(inst, opts, &mut cost).map_err(|e| e.in_phase(SolvePhase::Calibration))?;
    let last = *cal
        .trace
        .steps
        .last()
        .expect("calibration records its steps");

    let n = inst.n();
    let v = cal.run.state.slice(n, n + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let extraction = extract_solution(&v, opts.mode, opts.shots, &mut rng)
        .map_err(|e| e.in_phase(SolvePhase::Extraction))?;

    let x_classical = inst
        .classical_solution()
        .and_then(|x| x.normalized())
        .map_err(|e| e.in_phase(SolvePhase::Solve))?;
    let scaled = extraction.x.scaled(C64::new(last.x_norm_estimate, 0.0));
    Ok(SolveReport {
        method: opts.method,
        beta_phase1: cal.beta1,
        d1_estimate: last.d1,
        d1_std_error: last.d1_std_error,
        beta_phase2: cal.beta2,
        residual: relative_residual(inst, &scaled),
        state_fidelity: extraction.x.fidelity(&x_classical),
        x_estimate: extraction.x,
        queries: cost.counts(),
        wall_time: started.elapsed().as_secs_f64(),
        seed: opts.seed,
        epsilon: opts.epsilon,
        mode: opts.mode,
        x_norm_estimate: last.x_norm_estimate,
        degree_or_time: cal.run.degree_or_time,
        solve_queries: cal.run.queries.block_encoding_uses(),
        post_selection_rate: extraction.acceptance_rate,
        calibration: cal.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::problem::{decompose_solution, generate_instance, SpectrumShape};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hand_instance() -> LseInstance {
        LseInstance::from_parts(ComplexMatrix::identity(2), StateVector::basis(2, 0)).unwrap()
    }

    #[test]
    fn exact_d1_on_hand_example() {
        let sys = augment(&hand_instance(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (d1, se) = estimate_d1(&sys.target_state(), Mode::Exact, 1, &mut rng).unwrap();
        assert!((d1 - FRAC_1_SQRT_2).abs() < 1e-15 && se == 0.0);
    }

    #[test]
    fn sampled_d1_of_certain_outcome_has_no_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (d1, se) =
            estimate_d1(&StateVector::basis(3, 2), Mode::Sampled, 100, &mut rng).unwrap();
        assert_eq!((d1, se), (1.0, 0.0));
        assert!(matches!(
            estimate_d1(&StateVector::basis(3, 0), Mode::Sampled, 100, &mut rng),
            Err(Error::Estimation { shots: 100 })
        ));
    }

    #[test]
    fn extraction_of_hand_vector() {
        let v = StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = extract_solution(&v, Mode::Exact, 1, &mut rng).unwrap();
        assert!(e.x.sub(&StateVector::basis(2, 0)).norm() < 1e-15);
        assert!((e.acceptance_rate - 0.5).abs() < 1e-15);
        // without a last component the block is returned as is
        let v = StateVector::from_real(&[0.6, 0.8, 0.0]);
        let e = extract_solution(&v, Mode::Exact, 1, &mut rng).unwrap();
        assert!(e.x.sub(&StateVector::from_real(&[0.6, 0.8])).norm() < 1e-15);
        let v = StateVector::from_real(&[0.01, 0.0, 1.0]);
        assert!(matches!(
            extract_solution(&v, Mode::Exact, 1, &mut rng),
            Err(Error::PostSelectionStarvation { .. })
        ));
    }

    #[test]
    fn extraction_recovers_classical_direction() {
        let inst = generate_instance(6, 5.0, 7, 11, SpectrumShape::Linear).unwrap();
        let x = inst.classical_solution().unwrap().normalized().unwrap();
        let sys = augment(&inst, 3.0).unwrap();
        let dec = decompose_solution(&sys).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = extract_solution(&dec.v, Mode::Exact, 1, &mut rng).unwrap();
        assert!(e.x.sub(&x).norm() < 1e-10);
    }

    #[test]
    fn hand_example_end_to_end() {
        for method in [Method::Qef, Method::Qrt] {
            let rep = solve(&hand_instance(), &SolveOptions::exact(method, 1e-6, 1)).unwrap();
            assert_eq!(rep.beta_phase1, 1.0);
            assert_eq!(rep.beta_phase2, 1.0);
            assert!(rep.residual <= 1e-5, "{method}: {}", rep.residual);
            assert!(rep.state_fidelity >= 1.0 - 1e-6);
            assert!(rep.accepted());
        }
    }

    #[test]
    fn calibration_lands_in_range_and_report_is_deterministic() {
        let inst = generate_instance(8, 20.0, 9, 2, SpectrumShape::Geometric).unwrap();
        let opts = SolveOptions::exact(Method::Qef, 1e-4, 5);
        let a = solve(&inst, &opts).unwrap();
        assert!(a.calibration.in_range);
        assert!((1.0..=20.0).contains(&a.beta_phase2));
        let b = solve(&inst, &opts).unwrap();
        assert_eq!(a.x_estimate, b.x_estimate);
        assert_eq!(a.queries, b.queries);
    }

    #[test]
    fn bad_options_rejected() {
        let opts = SolveOptions::exact(Method::Qef, 0.5, 0);
        assert!(solve(&hand_instance(), &opts).is_err());
    }

    #[test]
    fn method_and_mode_parse() {
        assert_eq!("QEF".parse::<Method>().unwrap(), Method::Qef);
        assert_eq!("qrt".parse::<Method>().unwrap(), Method::Qrt);
        assert_eq!("sampled".parse::<Mode>().unwrap(), Mode::Sampled);
        assert!("both".parse::<Method>().is_err());
        assert_eq!(serde_json::to_string(&Method::Qef).unwrap(), "\"QEF\"");
    }
}
