use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalars::ComplexF;

/// Unitary Hessenberg matrix whose last row is `conj(alpha)/|alpha|`.
///
/// `E_j0 = sum_l U_jl e_l0` and `E_0j = sum_l conj(U_jl) e_0l`, so the odd
/// element `sum_j alpha_j e_0j + conj(alpha_j) e_j0` equals
/// `|alpha| (E_0n + E_n0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationU {
    u: DMatrix<ComplexF>,
    norm: f64,
    /// Rows built by the closed-form recipe; false where a zero coefficient
    /// forced the Gram-Schmidt completion.
    closed_form: bool,
}

impl RotationU {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<ComplexF> {
        &self.u
    }

    /// `U_jl` with 1-based indices.
    pub fn entry(&self, j: usize, l: usize) -> ComplexF {
        self.u[(j - 1, l - 1)]
    }

    /// Last row `c_l = U_nl`.
    pub fn coefficients(&self) -> Vec<ComplexF> {
        let n = self.n();
        (0..n).map(|l| self.u[(n - 1, l)]).collect()
    }

    /// `|alpha|`, the scale of the odd element.
    pub fn alpha_norm(&self) -> f64 {
        self.norm
    }

    pub fn is_closed_form(&self) -> bool {
        self.closed_form
    }

    /// `max |U U^dagger - 1|`
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n();
        let prod = &self.u * self.u.adjoint();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - ComplexF::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

const DEGENERATE: f64 = 1e-200;

pub fn build_rotation(alpha: &[ComplexF]) -> Result<RotationU> {
    let n = alpha.len();
    if n == 0 {
        return Err(Error::InvalidState(
            "odd element needs n >= 1 coefficients".into(),
        ));
    }
    let norm = alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroOddElement);
    }
    let c: Vec<ComplexF> = alpha.iter().map(|a| a.conj() / norm).collect();
    let mut u = DMatrix::<ComplexF>::zeros(n, n);
    for l in 0..n {
        u[(n - 1, l)] = c[l];
    }
    let mut closed_form = true;
    let mut partial = 0.0;
    for j in 0..n.saturating_sub(1) {
        // row j (0-based) lives on columns 0..=j+1
        partial += c[j].norm_sqr();
        let next = c[j + 1].norm_sqr();
        if partial > DEGENERATE && next > DEGENERATE {
            let k = 1.0 / (1.0 / partial + 1.0 / next).sqrt();
            for l in 0..=j {
                u[(j, l)] = c[l] * (k / partial);
            }
            u[(j, j + 1)] = -c[j + 1] * (k / next);
        } else {
            closed_form = false;
            let row = complete_row(&u, &c, j);
            for l in 0..n {
                u[(j, l)] = row[l];
            }
        }
    }
    let rot = RotationU {
        u,
        norm,
        closed_form,
    };
    let defect = rot.unitarity_defect();
    if defect > 1e-10 {
        return Err(Error::Internal(format!(
            "rotation is not unitary (defect {defect:e})"
        )));
    }
    Ok(rot)
}

/// Unit vector on columns `0..=j+1` orthogonal to rows `0..j` and to `c`,
/// trying `e_j`, `e_{j+1}`, then the remaining columns.
fn complete_row(u: &DMatrix<ComplexF>, c: &[ComplexF], j: usize) -> Vec<ComplexF> {
    let n = c.len();
    let mut against: Vec<Vec<ComplexF>> = (0..j)
        .map(|r| (0..n).map(|l| u[(r, l)]).collect())
        .collect();
    let mut cut: Vec<ComplexF> = (0..n)
        .map(|l| if l <= j + 1 { c[l] } else { ComplexF::zero() })
        .collect();
    for prev in &against {
        let overlap: ComplexF = prev.iter().zip(&cut).map(|(p, x)| p.conj() * x).sum();
        for (x, p) in cut.iter_mut().zip(prev) {
            *x -= overlap * p;
        }
    }
    let cut_norm = cut.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if cut_norm > 1e-12 {
        against.push(cut.iter().map(|x| x / cut_norm).collect());
    }
    let order = [j, j + 1].into_iter().chain((0..j).rev());
    for col in order {
        let mut v = vec![ComplexF::zero(); n];
        v[col] = ComplexF::new(1.0, 0.0);
        for _ in 0..2 {
            for prev in &against {
                let overlap: ComplexF = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= overlap * p;
                }
            }
        }
        let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if nv > 1e-8 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
    unreachable!("a Hessenberg completion always exists")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cplx(re: f64, im: f64) -> ComplexF {
        ComplexF::new(re, im)
    }

    #[test]
    fn unit_last_coordinate_gives_identity() {
        for n in 1..=5 {
            let mut alpha = vec![cplx(0.0, 0.0); n];
            alpha[n - 1] = cplx(1.0, 0.0);
            let rot = build_rotation(&alpha).unwrap();
            assert!((rot.matrix() - DMatrix::<ComplexF>::identity(n, n))
                .iter()
                .all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn two_mode_rows() {
        let (g1, g2, r) = (0.7f64, 1.3f64, 1.0f64);
        let ph = |j: f64| ComplexF::from_polar(1.0, -2.0 * PI * j * r / 2.0);
        let alpha = vec![ph(1.0) * g1, ph(2.0) * g2];
        let rot = build_rotation(&alpha).unwrap();
        let g = (g1 * g1 + g2 * g2).sqrt();
        // row 1 = (g2 e^{2 pi i r/2}, -g1 e^{4 pi i r/2}) / sqrt(gamma)
        let expect = [ph(1.0).conj() * g2 / g, -ph(2.0).conj() * g1 / g];
        assert!((rot.entry(1, 1) - expect[0]).norm() < 1e-14);
        assert!((rot.entry(1, 2) - expect[1]).norm() < 1e-14);
        assert!((rot.entry(2, 1) - ph(1.0).conj() * g1 / g).norm() < 1e-14);
        assert!(rot.is_closed_form());
    }

    #[test]
    fn zero_alpha_rejected() {
        assert!(matches!(
            build_rotation(&[cplx(0.0, 0.0); 3]),
            Err(Error::ZeroOddElement)
        ));
    }

    #[test]
    fn degenerate_coefficients_complete() {
        for alpha in [
            vec![
                cplx(0.0, 0.0),
                cplx(1.0, 0.0),
                cplx(0.0, 0.0),
                cplx(0.5, 0.5),
            ],
            vec![
                cplx(1.0, 0.0),
                cplx(0.0, 0.0),
                cplx(0.0, 0.0),
                cplx(0.0, 0.0),
            ],
            vec![
                cplx(0.0, 0.0),
                cplx(0.0, 0.0),
                cplx(0.0, 2.0),
                cplx(0.0, 0.0),
            ],
        ] {
            let rot = build_rotation(&alpha).unwrap();
            assert!(rot.unitarity_defect() < 1e-12);
            assert!(!rot.is_closed_form());
            for j in 1..=4 {
                for l in (j + 2)..=4 {
                    assert_eq!(rot.entry(j, l), cplx(0.0, 0.0));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn random_alpha_is_unitary_hessenberg(parts in proptest::collection::vec(-2.0f64..2.0, 10)) {
            let alpha: Vec<ComplexF> = parts.chunks(2).map(|p| cplx(p[0], p[1])).collect();
            prop_assume!(alpha.iter().all(|a| a.norm() > 1e-6));
            let rot = build_rotation(&alpha).unwrap();
            prop_assert!(rot.unitarity_defect() < 1e-12);
            let norm = rot.alpha_norm();
            for (l, a) in alpha.iter().enumerate() {
                prop_assert!((rot.entry(5, l + 1) - a.conj() / norm).norm() < 1e-14);
            }
            for j in 1..=5 {
                for l in (j + 2)..=5 {
                    prop_assert_eq!(rot.entry(j, l), cplx(0.0, 0.0));
                }
            }
        }
    }
}
