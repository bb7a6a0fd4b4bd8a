use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::odd::branch::{SpectrumLevel, SpectrumReport};
use crate::scalars::ComplexF;

/// Dense Hermitian eigendecomposition used as an independent check.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub report: SpectrumReport,
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<ComplexF>,
}

pub fn oracle_diagonalize(matrix: &SparseMatrix<ComplexF>, scale: f64) -> Result<OracleResult> {
    let dev = matrix.hermitian_deviation();
    if dev > 1e-12 * matrix.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let dense = matrix.to_dense();
    let herm = (&dense + dense.adjoint()) * ComplexF::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(OracleResult {
        report: cluster(&values, scale),
        values,
        vectors,
    })
}

/// Groups sorted eigenvalues whose gaps are below `1e-8 * spectral radius`.
pub fn cluster(sorted: &[f64], scale: f64) -> SpectrumReport {
    let radius = sorted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = 1e-8 * radius;
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for &v in sorted {
        match groups.last_mut() {
            Some(g) if v - g.last().copied().unwrap_or(v) <= gap => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    SpectrumReport {
        scale,
        levels: groups
            .into_iter()
            .map(|g| {
                let mean = g.iter().sum::<f64>() / g.len() as f64;
                SpectrumLevel {
                    value: if mean.abs() <= gap { 0.0 } else { mean },
                    multiplicity: g.len(),
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl11_doublet() {
        let s = 3f64.sqrt();
        let m = SparseMatrix::from_columns(vec![
            vec![(1, ComplexF::new(s, 0.0))],
            vec![(0, ComplexF::new(s, 0.0))],
        ]);
        let r = oracle_diagonalize(&m, 1.0).unwrap();
        assert_eq!(r.report.levels.len(), 2);
        assert!((r.values[0] + s).abs() < 1e-14 && (r.values[1] - s).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let r = oracle_diagonalize(&SparseMatrix::empty(4), 1.0).unwrap();
        assert_eq!(
            r.report.levels,
            vec![SpectrumLevel {
                value: 0.0,
                multiplicity: 4
            }]
        );
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = SparseMatrix::from_columns(vec![vec![], vec![(0, ComplexF::new(1.0, 0.0))]]);
        assert!(matches!(
            oracle_diagonalize(&m, 1.0),
            Err(Error::NotHermitian(_))
        ));
    }
}
