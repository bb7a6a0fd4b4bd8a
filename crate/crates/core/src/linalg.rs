//! Column-stored sparse matrices and dense complex vector helpers.

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::scalars::ComplexF;

/// Square sparse matrix stored by column; rows within a column are sorted
/// and unique.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    dim: usize,
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Clone> SparseMatrix<T> {
    pub fn empty(dim: usize) -> Self {
        SparseMatrix {
            dim,
            cols: vec![Vec::new(); dim],
        }
    }

    /// Columns must already be sorted by row with no duplicates.
    pub fn from_columns(cols: Vec<Vec<(usize, T)>>) -> Self {
        debug_assert!(cols.iter().all(|c| c.windows(2).all(|w| w[0].0 < w[1].0)));
        SparseMatrix {
            dim: cols.len(),
            cols,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, col: usize) -> &[(usize, T)] {
        &self.cols[col]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&T> {
        let c = &self.cols[col];
        c.binary_search_by_key(&row, |(r, _)| *r)
            .ok()
            .map(|idx| &c[idx].1)
    }

    /// `(row, col, value)` in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> SparseMatrix<U> {
        SparseMatrix {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|(r, v)| (*r, f(v))).collect())
                .collect(),
        }
    }

    /// Transpose with `f` applied to each entry.
    pub fn transpose_with<F: Fn(&T) -> T>(&self, f: F) -> SparseMatrix<T> {
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.dim];
        for (r, c, v) in self.entries() {
            cols[r].push((c, f(v)));
        }
        for col in &mut cols {
            col.sort_by_key(|(r, _)| *r);
        }
        SparseMatrix {
            dim: self.dim,
            cols,
        }
    }
}

impl SparseMatrix<ComplexF> {
    pub fn identity(dim: usize) -> Self {
        SparseMatrix::from_columns(
            (0..dim)
                .map(|i| vec![(i, ComplexF::new(1.0, 0.0))])
                .collect(),
        )
    }

    pub fn diagonal(values: &[ComplexF]) -> Self {
        SparseMatrix::from_columns(
            values
                .iter()
                .enumerate()
                .map(|(i, v)| if v.is_zero() { vec![] } else { vec![(i, *v)] })
                .collect(),
        )
    }

    pub fn adjoint(&self) -> Self {
        self.transpose_with(|v| v.conj())
    }

    pub fn matvec(&self, x: &[ComplexF]) -> Vec<ComplexF> {
        let mut y = vec![ComplexF::zero(); self.dim];
        for (c, col) in self.cols.iter().enumerate() {
            let xc = x[c];
            if xc.is_zero() {
                continue;
            }
            for (r, v) in col {
                y[*r] += v * xc;
            }
        }
        y
    }

    /// `alpha * self + beta * other`, dropping exact zeros.
    pub fn lincomb(&self, alpha: ComplexF, other: &Self, beta: ComplexF) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    let (r, v) = if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                        i += 1;
                        (a[i - 1].0, alpha * a[i - 1].1)
                    } else if i == a.len() || b[j].0 < a[i].0 {
                        j += 1;
                        (b[j - 1].0, beta * b[j - 1].1)
                    } else {
                        i += 1;
                        j += 1;
                        (a[i - 1].0, alpha * a[i - 1].1 + beta * b[j - 1].1)
                    };
                    if !v.is_zero() {
                        out.push((r, v));
                    }
                }
                out
            })
            .collect();
        SparseMatrix {
            dim: self.dim,
            cols,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let one = ComplexF::new(1.0, 0.0);
        self.lincomb(one, other, one)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lincomb(ComplexF::new(1.0, 0.0), other, ComplexF::new(-1.0, 0.0))
    }

    pub fn scale(&self, k: ComplexF) -> Self {
        self.map(|v| v * k)
    }

    /// Sparse product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut acc = vec![ComplexF::zero(); self.dim];
        let mut touched = vec![false; self.dim];
        let mut rows: Vec<usize> = Vec::new();
        let cols = rhs
            .cols
            .iter()
            .map(|bcol| {
                rows.clear();
                for (k, bv) in bcol {
                    for (r, av) in &self.cols[*k] {
                        if !touched[*r] {
                            touched[*r] = true;
                            rows.push(*r);
                        }
                        acc[*r] += av * bv;
                    }
                }
                rows.sort_unstable();
                let mut out = Vec::with_capacity(rows.len());
                for &r in &rows {
                    let v = acc[r];
                    if !v.is_zero() {
                        out.push((r, v));
                    }
                    acc[r] = ComplexF::zero();
                    touched[r] = false;
                }
                out
            })
            .collect();
        SparseMatrix {
            dim: self.dim,
            cols,
        }
    }

    /// Graded commutator `A B - sign B A`.
    pub fn graded_commutator(&self, rhs: &Self, sign: f64) -> Self {
        self.mul(rhs).lincomb(
            ComplexF::new(1.0, 0.0),
            &rhs.mul(self),
            ComplexF::new(-sign, 0.0),
        )
    }

    pub fn to_dense(&self) -> DMatrix<ComplexF> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = *v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Frobenius norm, an upper bound on the spectral norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries()
            .map(|(_, _, v)| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Spectral norm estimate by power iteration on `A^dagger A`.
    pub fn spectral_norm(&self) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        let adj = self.adjoint();
        // deterministic start with no special structure
        let mut x: Vec<ComplexF> = (0..self.dim)
            .map(|i| ComplexF::new(1.0 + (i as f64 * 0.618_033_988_7).fract(), 0.0))
            .collect();
        normalize(&mut x);
        let mut estimate = 0.0;
        for _ in 0..200 {
            let mut y = adj.matvec(&self.matvec(&x));
            let nrm = norm(&y);
            if nrm == 0.0 {
                return 0.0;
            }
            for v in &mut y {
                *v /= nrm;
            }
            let converged = (nrm - estimate).abs() <= 1e-13 * nrm;
            estimate = nrm;
            x = y;
            if converged {
                break;
            }
        }
        estimate.sqrt()
    }
}

/// `sum_i conj(a_i) b_i`
pub fn dot(a: &[ComplexF], b: &[ComplexF]) -> ComplexF {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[ComplexF]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(a: &mut [ComplexF]) -> f64 {
    let nrm = norm(a);
    if nrm > 0.0 {
        for v in a.iter_mut() {
            *v /= nrm;
        }
    }
    nrm
}

/// `y += k * x`
pub fn axpy(y: &mut [ComplexF], k: ComplexF, x: &[ComplexF]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += k * xi;
    }
}

pub fn unit_vector(dim: usize, idx: usize) -> Vec<ComplexF> {
    let mut v = vec![ComplexF::zero(); dim];
    v[idx] = ComplexF::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> ComplexF {
        ComplexF::new(re, 0.0)
    }

    #[test]
    fn product_and_commutator() {
        // [[0,1],[0,0]] and its transpose
        let raise = SparseMatrix::from_columns(vec![vec![], vec![(0, c(1.0))]]);
        let lower = raise.adjoint();
        let anti = raise.graded_commutator(&lower, -1.0);
        assert!(anti.max_abs_diff(&SparseMatrix::identity(2)) < 1e-15);
        let comm = raise.graded_commutator(&lower, 1.0);
        assert_eq!(comm.to_dense()[(0, 0)], c(1.0));
        assert_eq!(comm.to_dense()[(1, 1)], c(-1.0));
    }

    #[test]
    fn lincomb_cancels() {
        let a = SparseMatrix::from_columns(vec![vec![(0, c(2.0)), (1, c(1.0))], vec![]]);
        let z = a.sub(&a);
        assert_eq!(z.nnz(), 0);
        assert_eq!(a.add(&a).get(0, 0), Some(&c(4.0)));
        assert_eq!(a.get(1, 1), None);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = SparseMatrix::diagonal(&[c(1.0), c(-3.0), c(2.0)]);
        assert!((d.spectral_norm() - 3.0).abs() < 1e-9);
        assert_eq!(SparseMatrix::empty(3).spectral_norm(), 0.0);
    }
}
