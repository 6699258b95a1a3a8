//! Block encodings of the dilation: the exact one-ancilla unitary used for
//! state evolution, and a sparse-access oracle model used for query counting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, StateVector, C64, ZERO};
use crate::tolerances;

/// `U` with `(<0^m| ⊗ I) U (|0^m> ⊗ I) = M / alpha` for Hermitian `M`.
///
/// The ancilla is the most significant index: entry `(a·n + i, b·n + j)` is
/// block `(a, b)`, entry `(i, j)`.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub alpha: f64,
    pub m: usize,
    pub u: ComplexMatrix,
    /// `||M - alpha · block|| ` measured entrywise after construction.
    pub epsilon_enc: f64,
}

impl BlockEncoding {
    /// Encodes `matrix / alpha` with the reflection
    /// `U = [[H, S], [S, -H]]`, `S = sqrt(I - H^2)`.
    pub fn dilate(matrix: &ComplexMatrix, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "alpha = {alpha}; need alpha > 0"
            )));
        }
        let h = matrix.scale(1.0 / alpha);
        let eig = eig_hermitian(&h)?;
        let norm = eig.values.iter().map(|l| l.abs()).fold(0.0, f64::max);
        if norm > 1.0 + tolerances::NORMALIZATION_SLACK {
            return Err(Error::Normalization { norm });
        }
        // Clamp rounding residues so the square root stays real.
        let s = eig.map_spectrum(|l| C64::new((1.0 - l * l).max(0.0).sqrt(), 0.0));
        let n = h.rows();
        let u = ComplexMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let (a, i) = (r / n, r % n);
            let (b, j) = (c / n, c % n);
            match (a, b) {
                (0, 0) => h[(i, j)],
                (1, 1) => -h[(i, j)],
                _ => s[(i, j)],
            }
        });
        let mut enc = Self {
            alpha,
            m: 1,
            u,
            epsilon_enc: 0.0,
        };
        enc.epsilon_enc = enc.block().scale(alpha).max_abs_diff(matrix);
        Ok(enc)
    }

    /// Size of the encoded register.
    pub fn register_dim(&self) -> usize {
        self.u.rows() >> self.m
    }

    /// The top-left block `(<0| ⊗ I) U (|0> ⊗ I)`.
    pub fn block(&self) -> ComplexMatrix {
        let n = self.register_dim();
        ComplexMatrix::from_fn(n, n, |i, j| self.u[(i, j)])
    }

    /// `U · v` on the `ancilla ⊗ register` space.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.u.matvec(v)
    }
}

/// Oracle call counts, serialized with the oracle names.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryCounts {
    #[serde(rename = "O_C1")]
    pub o_c1: u64,
    #[serde(rename = "O_C2")]
    pub o_c2: u64,
    #[serde(rename = "O_b")]
    pub o_b: u64,
    #[serde(rename = "O_b1")]
    pub o_b1: u64,
    pub alpha_model: f64,
}

impl QueryCounts {
    /// Block-encoding uses, counted through `O_C1`.
    pub fn block_encoding_uses(&self) -> u64 {
        self.o_c1
    }

    pub fn total(&self) -> u64 {
        self.o_c1 + self.o_c2 + self.o_b + self.o_b1
    }
}

/// Sparse-access model of `C`: a column oracle, a value oracle and the two
/// oracles for `b`, each with a monotone call counter.
///
/// Indices are zero-based. Rows with fewer than `s` nonzeros are padded: the
/// column oracle answers `None` for the missing ordinals.
#[derive(Clone, Debug)]
pub struct OracleCostModel {
    s: usize,
    c: ComplexMatrix,
    b: StateVector,
    /// Column indices of the nonzeros of each row, ascending.
    support: Vec<Vec<usize>>,
    counts: QueryCounts,
}

impl OracleCostModel {
    pub fn new(c: &ComplexMatrix, b: &StateVector, s: usize) -> Result<Self> {
        if b.dim() != c.rows() {
            return Err(Error::InvalidInput(format!(
                "b has length {} but C has {} rows",
                b.dim(),
                c.rows()
            )));
        }
        let support: Vec<Vec<usize>> = (0..c.rows())
            .map(|i| (0..c.cols()).filter(|&j| c[(i, j)] != ZERO).collect())
            .collect();
        if let Some(widest) = support.iter().map(Vec::len).max() {
            if widest > s {
                return Err(Error::InvalidInput(format!(
                    "C has a row with {widest} nonzeros, more than s = {s}"
                )));
            }
        }
        Ok(Self {
            s,
            c: c.clone(),
            b: b.clone(),
            support,
            counts: QueryCounts {
                alpha_model: s as f64,
                ..QueryCounts::default()
            },
        })
    }

    /// A model that only counts; every oracle lookup on it fails.
    pub fn counter_only(s: usize) -> Self {
        Self {
            s,
            c: ComplexMatrix::zeros(0, 0),
            b: StateVector::zeros(0),
            support: Vec::new(),
            counts: QueryCounts {
                alpha_model: s as f64,
                ..QueryCounts::default()
            },
        }
    }

    pub fn sparsity(&self) -> usize {
        self.s
    }

    pub fn alpha_model(&self) -> f64 {
        self.s as f64
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts
    }

    /// `O_{C,1}`: column of the `l`-th nonzero in row `j`.
    pub fn oracle_c_col(&mut self, j: usize, l: usize) -> Result<Option<usize>> {
        if j >= self.c.rows() || l >= self.s {
            return Err(Error::InvalidInput(format!(
                "O_C1 query (j = {j}, l = {l}) outside {} rows x {} ordinals",
                self.c.rows(),
                self.s
            )));
        }
        self.counts.o_c1 += 1;
        Ok(self.support[j].get(l).copied())
    }

    /// `O_{C,2}`: the entry `C[j, k]`.
    pub fn oracle_c_val(&mut self, j: usize, k: usize) -> Result<C64> {
        if j >= self.c.rows() || k >= self.c.cols() {
            return Err(Error::InvalidInput(format!(
                "O_C2 query ({j}, {k}) outside a {}x{} matrix",
                self.c.rows(),
                self.c.cols()
            )));
        }
        self.counts.o_c2 += 1;
        Ok(self.c[(j, k)])
    }

    /// `O_b`: prepares `|b>`.
    pub fn prepare_b(&mut self) -> StateVector {
        self.counts.o_b += 1;
        self.b.clone()
    }

    /// `O_{b,1}`: the entry `b[j]`.
    pub fn oracle_b_entry(&mut self, j: usize) -> Result<C64> {
        let v = self.b.amplitudes().get(j).copied().ok_or_else(|| {
            Error::InvalidInput(format!("O_b1 query {j} outside length {}", self.b.dim()))
        })?;
        self.counts.o_b1 += 1;
        Ok(v)
    }

    /// Records `times` uses of the sparse-access block encoding of `C`, each
    /// costing one `O_{C,1}` and one `O_{C,2}` query.
    pub fn charge_block_encoding_use(&mut self, times: u64) {
        self.counts.o_c1 += times;
        self.counts.o_c2 += times;
    }

    /// Rebuilds `C` from oracle answers alone.
    pub fn reconstruct(&mut self) -> Result<ComplexMatrix> {
        let (rows, cols) = (self.c.rows(), self.c.cols());
        let mut out = ComplexMatrix::zeros(rows, cols);
        for j in 0..rows {
            for l in 0..self.s {
                if let Some(k) = self.oracle_c_col(j, l)? {
                    out[(j, k)] = self.oracle_c_val(j, k)?;
                }
            }
        }
        Ok(out)
    }
}
