use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::{C64, ZERO};
use crate::error::{Error, Result};

/// Vector of complex amplitudes.
///
/// Block outputs of filters and projections are carried unnormalized; call
/// [`StateVector::normalized`] before treating one as a physical state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![ZERO; dim])
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amplitudes[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cannot normalize a state with norm {n}"
            )));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::new(self.amplitudes.iter().map(|&z| z * factor).collect())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<a|b>|^2 / (||a||^2 ||b||^2)`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return 0.0;
        }
        (self.inner(other).norm_sqr() / denom).min(1.0)
    }

    /// Angle between the rays of two nonzero vectors, accurate near zero.
    pub fn ray_angle(&self, other: &StateVector) -> f64 {
        let (Ok(a), Ok(b)) = (self.normalized(), other.normalized()) else {
            return std::f64::consts::FRAC_PI_2;
        };
        let overlap = a.inner(&b);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        // ||b - e^{i arg<a|b>} a|| = 2 sin(theta / 2)
        let chord = b.sub(&a.scaled(phase)).norm();
        2.0 * (chord / 2.0).min(1.0).asin()
    }

    /// Born probability of basis index `i` for the normalized state.
    pub fn probability(&self, i: usize) -> f64 {
        self.amplitudes[i].norm_sqr() / self.norm_sqr()
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        assert_eq!(self.dim(), other.dim());
        Self::new(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Contiguous sub-block `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> StateVector {
        Self::new(self.amplitudes[start..start + len].to_vec())
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &StateVector) -> StateVector {
        let mut amps = self.amplitudes.clone();
        amps.extend_from_slice(&other.amplitudes);
        Self::new(amps)
    }

    /// Multiplies by a global phase so that entry `i` is real and non-negative.
    pub fn with_real_entry(&self, i: usize) -> StateVector {
        let z = self.amplitudes[i];
        if z.norm() == 0.0 {
            return self.clone();
        }
        self.scaled(z.conj() / z.norm())
    }
}

impl From<Vec<C64>> for StateVector {
    fn from(amplitudes: Vec<C64>) -> Self {
        Self::new(amplitudes)
    }
}

// Serialized as a list of `[re, im]` pairs.
impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.amplitudes.iter().map(|z| [z.re, z.im]))
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Ok(Self::new(
            pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
        ))
    }
}
