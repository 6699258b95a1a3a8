//! Resonant transition: a probe qubit tuned to the zero-energy transition of
//! the dilation drives `|1>|𝟏>` into `|0>|v_{N+1}>`; a probe readout of 0
//! heralds success.
//!
//! States live on `probe ⊗ register` with the probe as the most significant
//! index, so `|p>|r>` is entry `p·D + r` with `D = 2N + 1`.

use std::f64::consts::{E, FRAC_PI_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianEvolver, StateVector, C64, ONE};
use crate::problem::AugmentedSystem;

/// Probe frequency, reference energy, coupling and evolution time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QrtConfig {
    pub omega: f64,
    pub epsilon0: f64,
    pub c: f64,
    pub t: f64,
    pub max_rounds: usize,
    pub rng_seed: u64,
}

impl QrtConfig {
    /// `omega = 1`, `epsilon0 = -1`: the zero-energy state is resonant.
    pub fn resonant(c: f64, t: f64, max_rounds: usize, rng_seed: u64) -> Self {
        Self {
            omega: 1.0,
            epsilon0: -1.0,
            c,
            t,
            max_rounds,
            rng_seed,
        }
    }

    /// Coupling `min(Δ*/2, σ √ε_leak / 2)`, which keeps the leakage bound at
    /// or below `eps_leak` whenever `sigma` does not exceed `σ_N`.
    pub fn coupling(delta_star: f64, sigma: f64, eps_leak: f64) -> f64 {
        (0.5 * delta_star).min(0.5 * sigma * eps_leak.sqrt())
    }

    /// Configuration for `sys`: coupling from the certified gap `1/kappa`,
    /// `t = π / (2 c d1_est)` and a cap of `⌈10 / p⌉` rounds.
    pub fn for_system(
        sys: &AugmentedSystem,
        eps_leak: f64,
        d1_est: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        if !(d1_est > 0.0 && d1_est <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "d1 estimate {d1_est} outside (0, 1]"
            )));
        }
        if !(eps_leak > 0.0) {
            return Err(Error::InvalidInput(format!(
                "leakage target {eps_leak} must be positive"
            )));
        }
        let delta_star = sys.gap_lower_bound();
        let c = Self::coupling(delta_star, delta_star, eps_leak);
        let t = FRAC_PI_2 / (c * d1_est);
        let p = (c * t * d1_est).sin().powi(2);
        let max_rounds = (10.0 / p).ceil() as usize;
        Ok(Self::resonant(c, t, max_rounds, rng_seed))
    }

    pub fn validate(&self, sys: &AugmentedSystem) -> Result<()> {
        if (self.omega + self.epsilon0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "off resonance: omega = {}, epsilon0 = {}",
                self.omega, self.epsilon0
            )));
        }
        let delta_star = sys.gap_lower_bound();
        if !(self.c > 0.0 && self.c < delta_star) {
            return Err(Error::InvalidInput(format!(
                "coupling c = {} must lie in (0, 1/kappa = {delta_star})",
                self.c
            )));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "evolution time {} is invalid",
                self.t
            )));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidInput("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one resonant-transition run.
#[derive(Clone, Debug, Serialize)]
pub struct QrtRunRecord {
    pub rounds: usize,
    #[serde(rename = "outcomes")]
    pub probe_outcomes: Vec<u8>,
    /// Register state after the heralding readout, normalized.
    #[serde(skip)]
    pub final_state: StateVector,
    /// Born probability of reading 0 after the first evolution.
    #[serde(rename = "p_emp")]
    pub decay_probability_estimate: f64,
    /// `sin²(c t d1)`.
    #[serde(rename = "p_pred")]
    pub predicted_p: f64,
    /// `4c²(1 - d1²) / σ_N²`.
    #[serde(rename = "leakage_bound")]
    pub error_budget: f64,
    /// Overlap of `final_state` with `|v_{N+1}>`; zero when the probe never decayed.
    pub fidelity: f64,
}

/// `H = -(ω/2) σ_z ⊗ I + ε0 |1><1| ⊗ |𝟏><𝟏| + |0><0| ⊗ B + c σ_x ⊗ I`.
pub fn build_hamiltonian(sys: &AugmentedSystem, cfg: &QrtConfig) -> Result<ComplexMatrix> {
    let mut h = unperturbed_hamiltonian(sys, cfg)?;
    let d = sys.dilation_dim();
    for r in 0..d {
        h[(r, d + r)] += cfg.c;
        h[(d + r, r)] += cfg.c;
    }
    Ok(h)
}

/// `H_0 = H - c σ_x ⊗ I`.
pub fn unperturbed_hamiltonian(sys: &AugmentedSystem, cfg: &QrtConfig) -> Result<ComplexMatrix> {
    let d = sys.dilation_dim();
    if !sys.b.is_square() || sys.b.rows() != d {
        return Err(Error::InvalidInput(format!(
            "dilation is {}x{}, expected {d}x{d}",
            sys.b.rows(),
            sys.b.cols()
        )));
    }
    let mut h = ComplexMatrix::zeros(2 * d, 2 * d);
    for r in 0..d {
        h[(r, r)] -= 0.5 * cfg.omega;
        h[(d + r, d + r)] += 0.5 * cfg.omega;
        for s in 0..d {
            h[(r, s)] += sys.b[(r, s)];
        }
    }
    h[(2 * d - 1, 2 * d - 1)] += cfg.epsilon0;
    Ok(h)
}

/// `|1>|𝟏>`.
pub fn initial_state(sys: &AugmentedSystem) -> StateVector {
    let d = sys.dilation_dim();
    StateVector::basis(2 * d, 2 * d - 1)
}

/// Eigendata of `H` cached for repeated evolution.
#[derive(Clone, Debug)]
pub struct QrtSimulator {
    pub cfg: QrtConfig,
    pub h: ComplexMatrix,
    evolver: HermitianEvolver,
}

impl QrtSimulator {
    pub fn new(sys: &AugmentedSystem, cfg: QrtConfig) -> Result<Self> {
        cfg.validate(sys)?;
        let h = build_hamiltonian(sys, &cfg)?;
        let evolver = HermitianEvolver::new(&h)?;
        Ok(Self { cfg, h, evolver })
    }

    /// `exp(-i H t) state` for the configured `t`.
    pub fn evolve_once(&self, state: &StateVector) -> StateVector {
        self.evolver.evolve(state, self.cfg.t)
    }

    /// `exp(-i H t) state` for any `t`.
    pub fn evolve_for(&self, state: &StateVector, t: f64) -> StateVector {
        self.evolver.evolve(state, t)
    }
}

/// `exp(-i H t) state` with the eigendata cached in `sim`.
pub fn evolve_once(sim: &QrtSimulator, state: &StateVector) -> StateVector {
    sim.evolve_once(state)
}

/// `||(<0| ⊗ I) state||²`.
pub fn decay_probability(state: &StateVector) -> f64 {
    let d = state.dim() / 2;
    state.slice(0, d).norm_sqr() / state.norm_sqr()
}

/// Born-samples the probe and collapses the state onto the observed branch.
pub fn measure_probe(state: &StateVector, rng: &mut impl Rng) -> (u8, StateVector) {
    let d = state.dim() / 2;
    let p0 = decay_probability(state);
    let outcome = u8::from(rng.gen::<f64>() >= p0);
    let keep = if outcome == 0 { 0..d } else { d..2 * d };
    let collapsed: Vec<C64> = (0..2 * d)
        .map(|i| {
            if keep.contains(&i) {
                state.amplitudes()[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    // A branch of zero weight is never sampled since rng.gen() lies in [0, 1).
    let collapsed = StateVector::new(collapsed)
        .normalized()
        .expect("sampled branch has positive weight");
    (outcome, collapsed)
}

/// Population of `|0>|φ_j>` over all `E_j != 0`, i.e. the probe-0 weight
/// outside `|0>|v_{N+1}>`.
pub fn off_target_population(sys: &AugmentedSystem, state: &StateVector) -> f64 {
    let d = sys.dilation_dim();
    let probe0 = state.slice(0, d);
    let norm = state.norm_sqr();
    let on_target = sys.target_state().inner(&probe0).norm_sqr();
    ((probe0.norm_sqr() - on_target) / norm).max(0.0)
}

/// Repeats evolve-and-measure until the probe reads 0.
pub fn qrt_solve(sys: &AugmentedSystem, cfg: &QrtConfig) -> Result<QrtRunRecord> {
    let sim = QrtSimulator::new(sys, *cfg)?;
    qrt_solve_with(sys, &sim)
}

pub fn qrt_solve_with(sys: &AugmentedSystem, sim: &QrtSimulator) -> Result<QrtRunRecord> {
    let cfg = sim.cfg;
    let d1 = sys.null_vector().amplitudes()[sys.n()].re;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut state = initial_state(sys);
    let mut record = QrtRunRecord {
        rounds: 0,
        probe_outcomes: Vec::new(),
        final_state: StateVector::zeros(sys.dilation_dim()),
        decay_probability_estimate: 0.0,
        predicted_p: (cfg.c * cfg.t * d1).sin().powi(2),
        error_budget: leakage_bound(sys, cfg.c, d1),
        fidelity: 0.0,
    };
    while record.rounds < cfg.max_rounds {
        state = sim.evolve_once(&state);
        if record.rounds == 0 {
            record.decay_probability_estimate = decay_probability(&state);
        }
        record.rounds += 1;
        let (outcome, collapsed) = measure_probe(&state, &mut rng);
        record.probe_outcomes.push(outcome);
        if outcome == 0 {
            let register = collapsed.slice(0, sys.dilation_dim());
            record.fidelity = register.fidelity(&sys.target_state());
            record.final_state = register;
            return Ok(record);
        }
        state = collapsed;
    }
    Err(Error::NoDecay {
        record: Box::new(record),
    })
}

/// Rabi transition probability for coupling `c √(1 - d1²)` at detuning `e`.
pub fn rabi_transition_probability(c: f64, d1: f64, e: f64, t: f64) -> f64 {
    let g2 = 4.0 * c * c * (1.0 - d1 * d1);
    let omega2 = g2 + e * e;
    if omega2 == 0.0 {
        return 0.0;
    }
    g2 / omega2 * (0.5 * t * omega2.sqrt()).sin().powi(2)
}

/// `4c²(1 - d1²) / σ_N²` with `σ_N` the smallest nonzero singular value of `C`.
pub fn leakage_bound(sys: &AugmentedSystem, c: f64, d1: f64) -> f64 {
    let sigma = sys.sigma_min_nonzero();
    4.0 * c * c * (1.0 - d1 * d1) / (sigma * sigma)
}

/// Analytic query count of simulating `exp(-i H t)` with a block encoding of
/// normalization `alpha` built from an `s`-sparse oracle:
/// `s (alpha t + ln(1/ε) / ln(e + ln(1/ε) / (alpha t)))`, rounded up.
pub fn estimate_qrt_queries(cfg: &QrtConfig, alpha: f64, epsilon: f64, s: usize) -> u64 {
    let at = alpha * cfg.t;
    let log_eps = (1.0 / epsilon).ln();
    let additive = if at > 0.0 {
        log_eps / (E + log_eps / at).ln()
    } else {
        log_eps
    };
    (s as f64 * (at + additive)).ceil() as u64
}

/// `exp(-i H_err t)` on the two-level pair `{|1>|𝟏>, |0>|φ>}` with coupling
/// `c √(1 - d1²)` and detuning `e`, returning the transferred population.
pub fn two_level_transition(c: f64, d1: f64, e: f64, t: f64) -> Result<f64> {
    let g = c * (1.0 - d1 * d1).sqrt();
    let h = ComplexMatrix::from_real_rows(&[&[0.0, g], &[g, e]]);
    let u = crate::linalg::expm_i(&h, t)?;
    Ok(u.matvec(&[ONE, C64::new(0.0, 0.0)])[1].norm_sqr())
}
