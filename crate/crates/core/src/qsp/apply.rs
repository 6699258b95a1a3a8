//! The QSP circuit on a block encoding, simulated on the full
//! `ancilla ⊗ register` state.

use super::phases::PhaseFactorSequence;
use crate::blockenc::{BlockEncoding, OracleCostModel};
use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64, ZERO};

/// `(<0| ⊗ I) U_φ (|0> ⊗ I) |state>` with
/// `U_φ = e^{iφ_1 Z} U e^{iφ_2 Z} U ... e^{iφ_l Z} U`, keeping the real part of
/// the realized polynomial.
///
/// The real part is the average of the sequences `φ` and `-φ`: on each
/// eigenvalue the dilation is a real 2x2 reflection, so negating every phase
/// conjugates the scalar response there. Both branches share every application of `U` and differ only in
/// the phase rotations, so the combination is charged `l` uses, not `2l`.
pub fn apply_qsp(
    enc: &BlockEncoding,
    phases: &PhaseFactorSequence,
    state: &StateVector,
    cost: &mut OracleCostModel,
) -> Result<StateVector> {
    let l = phases.degree();
    if l % 2 == 1 {
        return Err(Error::Parity { degree: l });
    }
    let n = enc.register_dim();
    if state.dim() != n {
        return Err(Error::InvalidInput(format!(
            "state has dimension {} but the encoding acts on {n}",
            state.dim()
        )));
    }
    let plus = run_sequence(enc, &phases.phases, 1.0, state);
    let minus = run_sequence(enc, &phases.phases, -1.0, state);
    cost.charge_block_encoding_use(l as u64);
    Ok(StateVector::new(
        plus.iter()
            .zip(&minus)
            .map(|(a, b)| (a + b) * 0.5)
            .collect(),
    ))
}

fn run_sequence(enc: &BlockEncoding, phases: &[f64], sign: f64, state: &StateVector) -> Vec<C64> {
    let n = state.dim();
    let mut v = state.amplitudes().to_vec();
    v.resize(2 * n, ZERO);
    for &phi in phases.iter().rev() {
        v = enc.apply(&v);
        let e = C64::from_polar(1.0, sign * phi);
        let (top, bottom) = v.split_at_mut(n);
        top.iter_mut().for_each(|z| *z *= e);
        bottom.iter_mut().for_each(|z| *z *= e.conj());
    }
    v.truncate(n);
    v
}
