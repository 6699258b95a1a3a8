//! Linear-system instances with prescribed spectra, the augmented matrix
//! `C = (A | b / beta)`, its Hermitian dilation `B`, and checks of the
//! spectral facts the solvers rely on.

use std::path::Path;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_complex, svd, ComplexMatrix, StateVector, SvdResult, C64, ZERO};
use crate::tolerances;

/// Placement of the singular values between `1` and `1 / kappa`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumShape {
    /// `sigma_j = kappa^{-j/(N-1)}`.
    Geometric,
    /// Everything in `[0.9, 1]` except an isolated `sigma_N = 1/kappa`.
    TwoCluster,
    /// Evenly spaced from `1` down to `1/kappa`.
    Linear,
}

impl SpectrumShape {
    pub fn singular_values(self, n: usize, kappa: f64) -> Vec<f64> {
        let floor = 1.0 / kappa;
        let last = (n - 1) as f64;
        let mut values: Vec<f64> = match self {
            SpectrumShape::Geometric => (0..n).map(|j| kappa.powf(-(j as f64) / last)).collect(),
            SpectrumShape::Linear => (0..n)
                .map(|j| 1.0 - (1.0 - floor) * j as f64 / last)
                .collect(),
            SpectrumShape::TwoCluster => {
                let bulk = n - 1;
                let mut v: Vec<f64> = (0..bulk)
                    .map(|j| {
                        let spread = if bulk > 1 {
                            j as f64 / (bulk - 1) as f64
                        } else {
                            0.0
                        };
                        (1.0 - 0.1 * spread).max(floor)
                    })
                    .collect();
                v.push(floor);
                v
            }
        };
        values[0] = 1.0;
        values[n - 1] = floor;
        values.sort_by(|a, b| b.total_cmp(a));
        values
    }
}

impl std::str::FromStr for SpectrumShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(Self::Geometric),
            "two_cluster" => Ok(Self::TwoCluster),
            "linear" => Ok(Self::Linear),
            other => Err(Error::InvalidInput(format!(
                "unknown spectrum shape {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for SpectrumShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Geometric => "geometric",
            Self::TwoCluster => "two_cluster",
            Self::Linear => "linear",
        })
    }
}

/// `A x = b` with `||A|| <= 1`, `||b|| = 1` and known condition number.
#[derive(Clone, Debug, PartialEq)]
pub struct LseInstance {
    pub a: ComplexMatrix,
    pub b: StateVector,
    pub kappa: f64,
    /// Upper bound on the nonzeros per row of `C`.
    pub sparsity: usize,
    pub seed: u64,
    pub spectrum_shape: Option<SpectrumShape>,
}

impl LseInstance {
    /// Wraps a hand-built system, measuring `kappa` and the row sparsity of `C`.
    pub fn from_parts(a: ComplexMatrix, b: StateVector) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || b.dim() != n || n == 0 {
            return Err(Error::InvalidInput(format!(
                "A is {}x{} but b has length {}",
                a.rows(),
                a.cols(),
                b.dim()
            )));
        }
        let s = svd(&a)?;
        let sparsity = (0..n).map(|i| a.row_nonzeros(i) + 1).max().unwrap_or(1);
        Ok(Self {
            a,
            b,
            kappa: s.condition_number(),
            sparsity,
            seed: 0,
            spectrum_shape: None,
        })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Maximum nonzeros per row of `C = (A | b / beta)` actually present.
    pub fn measured_sparsity(&self) -> usize {
        (0..self.n())
            .map(|i| self.a.row_nonzeros(i) + usize::from(self.b.amplitudes()[i] != ZERO))
            .max()
            .unwrap_or(0)
    }

    /// Direct solution `A^{-1} b` by pivoted elimination.
    pub fn classical_solution(&self) -> Result<StateVector> {
        Ok(StateVector::new(solve_complex(
            &self.a,
            self.b.amplitudes(),
        )?))
    }

    /// Checks the normalization and conditioning contracts.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 2 {
            return Err(Error::InvalidInput(format!("N = {n}; need N >= 2")));
        }
        self.a.ensure_finite()?;
        if self.b.dim() != n {
            return Err(Error::InvalidInput(format!(
                "b has length {}, expected {n}",
                self.b.dim()
            )));
        }
        if (self.b.norm() - 1.0).abs() > tolerances::UNIT_NORM {
            return Err(Error::InvalidInput(format!(
                "||b|| = {}, expected 1",
                self.b.norm()
            )));
        }
        let s = svd(&self.a)?;
        if s.values[0] > 1.0 + tolerances::UNIT_NORM {
            return Err(Error::InvalidInput(format!(
                "||A|| = {} exceeds 1",
                s.values[0]
            )));
        }
        let cond = s.condition_number();
        if (cond - self.kappa).abs() > tolerances::CONDITION_NUMBER * self.kappa.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "declared kappa {} but cond(A) = {cond}",
                self.kappa
            )));
        }
        if self.measured_sparsity() > self.sparsity {
            return Err(Error::InvalidInput(format!(
                "declared sparsity {} but C has a row with {} nonzeros",
                self.sparsity,
                self.measured_sparsity()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let inst = file.into_instance()?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// On-disk instance layout; `A` is row-major `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct InstanceFile {
    N: usize,
    kappa: f64,
    s: usize,
    seed: u64,
    spectrum_shape: Option<SpectrumShape>,
    A: Vec<[f64; 2]>,
    b: Vec<[f64; 2]>,
}

impl From<&LseInstance> for InstanceFile {
    fn from(inst: &LseInstance) -> Self {
        let pair = |z: &C64| [z.re, z.im];
        InstanceFile {
            N: inst.n(),
            kappa: inst.kappa,
            s: inst.sparsity,
            seed: inst.seed,
            spectrum_shape: inst.spectrum_shape,
            A: inst.a.data().iter().map(pair).collect(),
            b: inst.b.amplitudes().iter().map(pair).collect(),
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<LseInstance> {
        let to_c = |p: &[f64; 2]| C64::new(p[0], p[1]);
        let a = ComplexMatrix::from_row_major(self.N, self.N, self.A.iter().map(to_c).collect())?;
        if self.b.len() != self.N {
            return Err(Error::InvalidInput(format!(
                "b has {} entries, expected {}",
                self.b.len(),
                self.N
            )));
        }
        Ok(LseInstance {
            a,
            b: StateVector::new(self.b.iter().map(to_c).collect()),
            kappa: self.kappa,
            sparsity: self.s,
            seed: self.seed,
            spectrum_shape: self.spectrum_shape,
        })
    }
}

/// Generates `A = Q1 diag(sigma) Q2^dagger` with exact singular values and a
/// random unit `b`, deterministic in `seed`.
///
/// When `s <= N` the unitary factors are built from layers of disjoint Givens
/// rotations so that every row of `A` keeps at most `s - 1` nonzeros.
pub fn generate_instance(
    n: usize,
    kappa: f64,
    s: usize,
    seed: u64,
    shape: SpectrumShape,
) -> Result<LseInstance> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("N = {n}; need N >= 2")));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidInput(format!(
            "kappa = {kappa}; need kappa >= 1"
        )));
    }
    if s < 2 {
        return Err(Error::InvalidSparsity { s });
    }
    if s > n + 1 {
        return Err(Error::InvalidInput(format!(
            "s = {s} exceeds N + 1 = {}",
            n + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = shape.singular_values(n, kappa);

    let a_budget = s - 1;
    let layers = usize::BITS as usize - 1 - a_budget.leading_zeros() as usize; // floor(log2)
    let (q1, q2) = if a_budget >= n || (1usize << layers) >= n {
        (haar_unitary(n, &mut rng), haar_unitary(n, &mut rng))
    } else {
        let left_layers = layers.div_ceil(2);
        (
            sparse_unitary(n, left_layers, &mut rng),
            sparse_unitary(n, layers - left_layers, &mut rng),
        )
    };
    let d =
        ComplexMatrix::from_diagonal(&sigma.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    let a = q1.matmul(&d).matmul(&q2.adjoint());

    let b = StateVector::new((0..n).map(|_| gaussian_c64(&mut rng)).collect()).normalized()?;

    Ok(LseInstance {
        a,
        b,
        kappa,
        sparsity: s,
        seed,
        spectrum_shape: Some(shape),
    })
}

fn gaussian_c64(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary via Gram-Schmidt on a complex Gaussian matrix.
fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut c: Vec<C64> = (0..n).map(|_| gaussian_c64(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let proj: C64 = q.iter().zip(&c).map(|(x, y)| x.conj() * y).sum();
                for (ci, qi) in c.iter_mut().zip(q) {
                    *ci -= proj * qi;
                }
            }
        }
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(c.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut q = ComplexMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        q.set_column(j, c);
    }
    q
}

/// Random phased permutation followed by `layers` layers of disjoint Givens
/// rotations; each row and column ends with at most `2^layers` nonzeros.
fn sparse_unitary(n: usize, layers: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut q = ComplexMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        q[(i, j)] = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    }
    for _ in 0..layers {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            let (p, r) = (pair[0], pair[1]);
            let theta: f64 = rng.gen_range(0.1..(std::f64::consts::FRAC_PI_2 - 0.1));
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (c, s) = (theta.cos(), theta.sin());
            let e = C64::from_polar(1.0, phi);
            for col in 0..n {
                let x = q[(p, col)];
                let y = q[(r, col)];
                q[(p, col)] = x * c - e * y * s;
                q[(r, col)] = e.conj() * x * s + y * c;
            }
        }
    }
    q
}

/// `C = (A | b / beta)` with its dilation and cached spectral data.
#[derive(Clone, Debug)]
pub struct AugmentedSystem {
    pub beta: f64,
    pub kappa: f64,
    pub c: ComplexMatrix,
    pub b: ComplexMatrix,
    pub svd_c: SvdResult,
    /// Singular values of `A`, descending.
    pub sigma_a: Vec<f64>,
    /// `sigma_N(C) - sigma_{N+1}(C)`.
    pub gap: f64,
    /// Certified upper bound `||A|| + 1/beta >= sigma_1(C)`.
    pub alpha: f64,
    /// `||C v_{N+1}||`, the numerically realized `sigma_{N+1}`.
    pub null_singular_value: f64,
}

impl AugmentedSystem {
    pub fn n(&self) -> usize {
        self.c.rows()
    }

    /// Dimension `2N + 1` of the dilation.
    pub fn dilation_dim(&self) -> usize {
        self.b.rows()
    }

    /// `sigma_1 >= ... >= sigma_N >= sigma_{N+1}` of `C`.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut v = self.svd_c.values.clone();
        v.push(self.null_singular_value);
        v
    }

    pub fn sigma_min_nonzero(&self) -> f64 {
        *self.svd_c.values.last().expect("N >= 1")
    }

    /// `Delta* = 1/kappa`.
    pub fn gap_lower_bound(&self) -> f64 {
        1.0 / self.kappa
    }

    /// Right null vector `v_{N+1}` with its last entry real and positive.
    pub fn null_vector(&self) -> StateVector {
        StateVector::new(self.svd_c.right_vector(self.n())).with_real_entry(self.n())
    }

    /// `|v_{N+1}> = (0_N, v_{N+1})`, the zero-energy eigenvector of `B`.
    pub fn target_state(&self) -> StateVector {
        StateVector::zeros(self.n()).concat(&self.null_vector())
    }

    /// `|1> = (0, ..., 0, 1)` in the dilation space.
    pub fn initial_state(&self) -> StateVector {
        StateVector::basis(self.dilation_dim(), self.dilation_dim() - 1)
    }
}

pub fn augment(inst: &LseInstance, beta: f64) -> Result<AugmentedSystem> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta = {beta}; need beta > 0")));
    }
    let n = inst.n();
    let svd_a = svd(&inst.a)?;
    let sigma_min = *svd_a.values.last().expect("N >= 1");
    if sigma_min < tolerances::RANK_DEFICIENCY {
        return Err(Error::RankDeficient { sigma_min });
    }
    let inv_beta = 1.0 / beta;
    let c = ComplexMatrix::from_fn(n, n + 1, |i, j| {
        if j < n {
            inst.a[(i, j)]
        } else {
            inst.b.amplitudes()[i] * inv_beta
        }
    });
    let dim = 2 * n + 1;
    let b = ComplexMatrix::from_fn(dim, dim, |i, j| match (i < n, j < n) {
        (true, false) => c[(i, j - n)],
        (false, true) => c[(j, i - n)].conj(),
        _ => ZERO,
    });
    let svd_c = svd(&c)?;
    let null = svd_c.right_vector(n);
    let null_singular_value = c
        .matvec(&null)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let gap = svd_c.values[n - 1] - null_singular_value;
    Ok(AugmentedSystem {
        beta,
        kappa: inst.kappa,
        c,
        b,
        svd_c,
        alpha: svd_a.values[0] + inv_beta,
        sigma_a: svd_a.values,
        gap,
        null_singular_value,
    })
}

/// Angle between `v_{N+1}` and `(x, -beta)`, and `||C v_{N+1}||`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub angle: f64,
    pub residual: f64,
}

impl Theorem1Report {
    pub fn holds(&self) -> bool {
        self.angle <= tolerances::THEOREM1_ANGLE && self.residual <= tolerances::NULL_SINGULAR_VALUE
    }
}

/// Compares the null right singular vector with the classical solution.
pub fn verify_theorem1(sys: &AugmentedSystem, x_classical: &StateVector) -> Theorem1Report {
    let mut stacked = x_classical.amplitudes().to_vec();
    stacked.push(C64::new(-sys.beta, 0.0));
    let expected = StateVector::new(stacked);
    Theorem1Report {
        angle: sys.null_vector().ray_angle(&expected),
        residual: sys.null_singular_value,
    }
}

/// `sigma_1 >= sbar_1 >= sigma_2 >= ... >= sbar_N > sigma_{N+1} = 0`, each
/// comparison with `slack`.
pub fn interlaces(sigma_c: &[f64], sigma_a: &[f64], slack: f64) -> bool {
    let n = sigma_a.len();
    if sigma_c.len() != n + 1 {
        return false;
    }
    for i in 0..n {
        if sigma_c[i] + slack < sigma_a[i] {
            return false;
        }
        let next = sigma_c[i + 1];
        if i + 1 < n {
            if sigma_a[i] + slack < next {
                return false;
            }
        } else if !(sigma_a[i] > next - slack) || next.abs() > slack {
            return false;
        }
    }
    true
}

pub fn verify_interlacing(inst: &LseInstance, sys: &AugmentedSystem) -> bool {
    let _ = inst;
    interlaces(
        &sys.singular_values(),
        &sys.sigma_a,
        tolerances::INTERLACING_SLACK,
    )
}

/// `v_{N+1} = (-d0 x/||x||, d1)` with `d1 > 0`.
///
/// `(x, -beta)` fixes the relative sign of the two blocks, so once `d1` is
/// made positive the solution block carries `-x/||x||`; `x_normalized`
/// undoes that sign and equals `x/||x||` exactly.
#[derive(Clone, Debug)]
pub struct SolutionDecomposition {
    pub d0: f64,
    pub d1: f64,
    pub x_normalized: StateVector,
    pub v: StateVector,
}

pub fn decompose_solution(sys: &AugmentedSystem) -> Result<SolutionDecomposition> {
    if sys.null_singular_value > tolerances::NULL_SINGULAR_VALUE {
        return Err(Error::Numerical(format!(
            "sigma_(N+1) = {:e} is not numerically zero",
            sys.null_singular_value
        )));
    }
    decompose_vector(&sys.null_vector())
}

/// Splits an `(N+1)`-vector into its solution block and last component.
pub fn decompose_vector(v: &StateVector) -> Result<SolutionDecomposition> {
    let n = v.dim() - 1;
    let v = v.normalized()?;
    let last = v.amplitudes()[n];
    if last.norm() < tolerances::DEGENERATE_D1 {
        return Err(Error::DegenerateDecomposition { d1: last.norm() });
    }
    let v = v.with_real_entry(n);
    let top = v.slice(0, n);
    let d0 = top.norm();
    let d1 = v.amplitudes()[n].re;
    let x_normalized = top.scaled(C64::new(-1.0, 0.0)).normalized()?;
    Ok(SolutionDecomposition {
        d0,
        d1,
        x_normalized,
        v,
    })
}

/// Loads every instance, naming the file on failure.
pub fn load_instances(paths: &[impl AsRef<Path>]) -> Result<Vec<LseInstance>> {
    paths
        .iter()
        .map(|p| {
            LseInstance::load(p.as_ref())
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.as_ref().display())))
        })
        .collect()
}
