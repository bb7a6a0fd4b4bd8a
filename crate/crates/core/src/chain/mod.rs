//! The oscillator chain: physical parameters, position and momentum
//! operators, and the closed-form Fock and ladder modules.

mod fock;
mod ladder;
mod model;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::odd::{EigenvectorExpansion, SpectrumReport};
use crate::scalars::Surd;

pub use fock::{fock_eigenvectors, fock_probabilities, FockEigenvector, FockRep, FockState};
pub use ladder::{ladder_eigen, LadderEigenvector, LadderRep, LadderState};
pub use model::{
    betas, chain_operator, critical_coupling, hamiltonian_matrix, mode_data, mode_frequencies,
    mode_phase, momentum_operator, position_operator, stationary_energies, triple_relation_defect,
    ChainConfig, ChainOperator, ModeData, Observable,
};

/// Probability of measuring `value`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub value: f64,
    pub probability: f64,
}

/// `sum |<psi|m>|^2` per spectrum level, for the basis vector `state`.
/// Every eigenvector must sit on one of the report's levels.
pub fn overlap_probabilities(
    report: &SpectrumReport,
    vectors: &[EigenvectorExpansion],
    state: usize,
) -> Result<Vec<Outcome>> {
    let radius = report
        .levels
        .iter()
        .fold(report.scale, |m, l| m.max(l.value.abs()));
    let tol = 1e-8 * radius.max(1e-300);
    let mut out: Vec<Outcome> = report
        .levels
        .iter()
        .map(|l| Outcome {
            value: l.value,
            probability: 0.0,
        })
        .collect();
    for v in vectors {
        let slot = out
            .iter_mut()
            .find(|o| (o.value - v.eigenvalue).abs() <= tol)
            .ok_or_else(|| {
                Error::Internal(format!(
                    "eigenvalue {} is not in the spectrum",
                    v.eigenvalue
                ))
            })?;
        let c = v
            .coefficients
            .get(state)
            .ok_or_else(|| Error::InvalidState(format!("state index {state} is out of range")))?;
        slot.probability += c.norm_sqr();
    }
    Ok(out)
}

/// First entry where two exact matrices differ, treating absent entries
/// as zero.
pub(crate) fn exact_mismatch(a: &SparseMatrix<Surd>, b: &SparseMatrix<Surd>) -> Option<String> {
    if a.dim() != b.dim() {
        return Some(format!("dimension {} vs {}", a.dim(), b.dim()));
    }
    let zero = Surd::zero();
    for col in 0..a.dim() {
        for &(row, _) in a.column(col).iter().chain(b.column(col)) {
            let x = a.get(row, col).unwrap_or(&zero);
            let y = b.get(row, col).unwrap_or(&zero);
            if !x.square_equal(y) {
                return Some(format!("({row},{col}): {x:?} vs {y:?}"));
            }
        }
    }
    None
}
