use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{norm, SparseMatrix};
use crate::odd::rotation::RotationU;
use crate::rep::GeneratorSet;
use crate::scalars::ComplexF;

/// Matrices of the rotated basis `E_ij` in e-coordinates.
#[derive(Clone, Debug)]
pub struct EBasis {
    n: usize,
    mats: Vec<SparseMatrix<ComplexF>>,
}

impl EBasis {
    pub fn new(set: &GeneratorSet, rot: &RotationU) -> Result<Self> {
        let n = set.n();
        if rot.n() != n {
            return Err(Error::InvalidState(format!(
                "rotation is {}x{}, module has n={n}",
                rot.n(),
                rot.n()
            )));
        }
        let dim = set.dim();
        let one = ComplexF::new(1.0, 0.0);
        let mut mats = vec![SparseMatrix::empty(dim); (n + 1) * (n + 1)];
        mats[0] = set.complex(0, 0).clone();
        for j in 1..=n {
            let mut up = SparseMatrix::empty(dim);
            let mut down = SparseMatrix::empty(dim);
            for l in 1..=n {
                let u = rot.entry(j, l);
                if u.is_zero() {
                    continue;
                }
                up = up.lincomb(one, set.complex(l, 0), u);
                down = down.lincomb(one, set.complex(0, l), u.conj());
            }
            mats[j * (n + 1)] = up;
            mats[j] = down;
        }
        for j in 1..=n {
            for k in 1..=n {
                let mut acc = SparseMatrix::empty(dim);
                for l in 1..=n {
                    let ujl = rot.entry(j, l);
                    if ujl.is_zero() {
                        continue;
                    }
                    for lp in 1..=n {
                        let c = ujl * rot.entry(k, lp).conj();
                        if c.is_zero() {
                            continue;
                        }
                        acc = acc.lincomb(one, set.complex(l, lp), c);
                    }
                }
                mats[j * (n + 1) + k] = acc;
            }
        }
        Ok(EBasis { n, mats })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &SparseMatrix<ComplexF> {
        &self.mats[i * (self.n + 1) + j]
    }
}

/// Coefficient vector of `|Lambda>_E` in the e-basis with a report of how
/// it was obtained.
#[derive(Clone, Debug)]
pub struct RotatedHighest {
    pub coefficients: Vec<ComplexF>,
    /// Largest `|E_0j v|` or `|E_{j,j+1} v|`.
    pub residual: f64,
    pub closed_form: bool,
}

fn binomial_f64(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `visit(d)` for `d_{n-1} in [M_n, M_{n-1}]`, `d_i in [d_{i+1}, M_i]`.
pub(crate) fn for_each_diagonal(top: &[i64], visit: &mut dyn FnMut(&[i64])) {
    let n = top.len();
    let mut d = vec![0i64; n.saturating_sub(1)];
    fn rec(i: usize, top: &[i64], d: &mut Vec<i64>, visit: &mut dyn FnMut(&[i64])) {
        // i counts down from n-1 to 1 (1-based position of d)
        if i == 0 {
            visit(d);
            return;
        }
        let lo = if i == d.len() { top[i] } else { d[i] };
        for v in lo..=top[i - 1] {
            d[i - 1] = v;
            rec(i - 1, top, d, visit);
        }
    }
    let len = d.len();
    rec(len, top, &mut d, visit);
}

/// Pattern `m(d)`: rows `n` and above equal the top row, row `k < n` is
/// `[M_1, ..., M_{k-1}, d_k]`.
pub(crate) fn diagonal_pattern(top: &[i64], d: &[i64]) -> crate::gz::GzPattern {
    let n = top.len();
    let mut rows = vec![top.to_vec()];
    for k in (1..n).rev() {
        let mut row = top[..k - 1].to_vec();
        row.push(d[k - 1]);
        rows.push(row);
    }
    crate::gz::GzPattern::from_rows(rows)
}

fn closed_form_highest(set: &GeneratorSet, rot: &RotationU) -> Option<Vec<ComplexF>> {
    let hw = set.basis().highest_weight();
    let top = hw.top_offsets();
    let n = top.len();
    let u = rot.coefficients();
    if u.iter().any(|x| x.norm() < 1e-12) {
        return None;
    }
    let mut log_norm = 0.0;
    let mut partial = u[0].norm_sqr();
    for k in 1..n {
        partial += u[k].norm_sqr();
        log_norm += (top[k - 1] - top[k]) as f64 * partial.ln();
    }
    let inv_sqrt_norm = (-0.5 * log_norm).exp();
    let mut coeffs = vec![ComplexF::zero(); set.dim()];
    let mut ok = true;
    for_each_diagonal(top, &mut |d| {
        let mut binom = 1.0;
        for k in 1..n {
            let next = if k == n - 1 { top[n - 1] } else { d[k] };
            binom *= binomial_f64(top[k - 1] - next, top[k - 1] - d[k - 1]);
        }
        let mut value = ComplexF::new(binom.sqrt() * inv_sqrt_norm, 0.0);
        for l in 1..=n {
            let exp = match l {
                1 => top[0] - d.first().copied().unwrap_or(top[0]),
                _ if l == n => d[n - 2] - top[n - 1],
                _ => d[l - 2] - d[l - 1],
            };
            if n == 1 {
                break;
            }
            value *= u[l - 1].conj().powi(exp as i32);
        }
        if d.iter().sum::<i64>().rem_euclid(2) == 1 {
            value = -value;
        }
        match set.basis().position(&diagonal_pattern(top, d)) {
            Some(idx) => coeffs[idx] = value,
            None => ok = false,
        }
    });
    ok.then_some(coeffs)
}

fn highest_residual(eb: &EBasis, v: &[ComplexF]) -> f64 {
    let n = eb.n();
    let mut worst: f64 = 0.0;
    for j in 1..=n {
        worst = worst.max(norm(&eb.get(0, j).matvec(v)));
    }
    for j in 1..n {
        worst = worst.max(norm(&eb.get(j, j + 1).matvec(v)));
    }
    worst
}

/// Null vector of all raising E-operators on the theta = 0 subspace.
fn null_space_highest(set: &GeneratorSet, eb: &EBasis) -> Vec<ComplexF> {
    let basis = set.basis();
    let hw = basis.highest_weight();
    let n = set.n();
    let support: Vec<usize> = (0..basis.len())
        .filter(|&i| basis.pattern(i).theta(hw).iter().all(|&t| t == 0))
        .collect();
    let m = support.len();
    let mut gram = DMatrix::<ComplexF>::zeros(m, m);
    let mut raising: Vec<&SparseMatrix<ComplexF>> = (1..=n).map(|j| eb.get(0, j)).collect();
    raising.extend((1..n).map(|j| eb.get(j, j + 1)));
    for op in raising {
        let cols: Vec<Vec<ComplexF>> = support
            .iter()
            .map(|&c| {
                let mut e = vec![ComplexF::zero(); set.dim()];
                e[c] = ComplexF::new(1.0, 0.0);
                op.matvec(&e)
            })
            .collect();
        for a in 0..m {
            for b in a..m {
                let v: ComplexF = cols[a]
                    .iter()
                    .zip(&cols[b])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                gram[(a, b)] += v;
                if a != b {
                    gram[(b, a)] += v.conj();
                }
            }
        }
    }
    let eig = SymmetricEigen::new(gram);
    let idx = eig.eigenvalues.imin();
    let col = eig.eigenvectors.column(idx);
    let mut out = vec![ComplexF::zero(); set.dim()];
    for (k, &c) in support.iter().enumerate() {
        out[c] = col[k];
    }
    fix_phase(&mut out);
    out
}

/// Rotate so the first entry above `1e-8` in modulus is real positive.
pub(crate) fn fix_phase(v: &mut [ComplexF]) {
    if let Some(first) = v.iter().find(|x| x.norm() > 1e-8).copied() {
        let ph = first.conj() / first.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}

/// `|Lambda>_E` expanded in the e-basis. Fails if the annihilation
/// residual exceeds `1e-8`.
pub fn rotated_highest_weight(
    set: &GeneratorSet,
    rot: &RotationU,
    eb: &EBasis,
) -> Result<RotatedHighest> {
    if let Some(v) = closed_form_highest(set, rot).filter(|_| rot.is_closed_form()) {
        let residual = highest_residual(eb, &v);
        let nv = norm(&v);
        if residual <= 1e-8 && (nv - 1.0).abs() <= 1e-10 {
            return Ok(RotatedHighest {
                coefficients: v,
                residual,
                closed_form: true,
            });
        }
    }
    let v = null_space_highest(set, eb);
    let residual = highest_residual(eb, &v);
    if residual > 1e-8 {
        return Err(Error::Internal(format!(
            "rotated highest weight vector has residual {residual:e}"
        )));
    }
    Ok(RotatedHighest {
        coefficients: v,
        residual,
        closed_form: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gz::{enumerate_basis, HighestWeight};
    use crate::odd::rotation::build_rotation;
    use crate::rep::OddElement;

    fn setup(labels: &[i64], alpha: &[ComplexF]) -> (GeneratorSet, RotationU, EBasis) {
        let hw = HighestWeight::from_ints(labels).unwrap();
        let set = GeneratorSet::new(enumerate_basis(&hw).unwrap()).unwrap();
        let rot = build_rotation(alpha).unwrap();
        let eb = EBasis::new(&set, &rot).unwrap();
        (set, rot, eb)
    }

    fn alpha3() -> Vec<ComplexF> {
        vec![
            ComplexF::new(0.4, -0.3),
            ComplexF::new(-0.7, 0.2),
            ComplexF::new(0.1, 0.9),
        ]
    }

    #[test]
    fn odd_element_is_scaled_e0n_plus_en0() {
        let a = alpha3();
        let (set, rot, eb) = setup(&[4, 2, 1, 0], &a);
        let q = set.odd_element(&OddElement::new(a));
        let s = ComplexF::new(rot.alpha_norm(), 0.0);
        let rotated = eb.get(0, 3).add(eb.get(3, 0)).scale(s);
        assert!(q.max_abs_diff(&rotated) < 1e-12);
    }

    #[test]
    fn rotated_generators_keep_relations() {
        let (_, _, eb) = setup(&[3, 2, 0, 0], &alpha3());
        let one = ComplexF::new(1.0, 0.0);
        for j in 1..=3 {
            for k in 1..=3 {
                let anti = eb.get(j, 0).graded_commutator(eb.get(k, 0), -1.0);
                assert!(anti.max_abs() < 1e-12);
                let ejk = eb.get(j, 0).graded_commutator(eb.get(0, k), -1.0);
                let expect = if j == k {
                    eb.get(j, j).add(eb.get(0, 0))
                } else {
                    eb.get(j, k).scale(one)
                };
                assert!(ejk.max_abs_diff(&expect) < 1e-12);
                for l in 1..=3 {
                    let lhs = ejk.graded_commutator(eb.get(l, 0), 1.0);
                    let mut rhs = SparseMatrix::empty(lhs.dim());
                    if k == l {
                        rhs = rhs.add(eb.get(j, 0));
                    }
                    if j == k {
                        rhs = rhs.sub(eb.get(l, 0));
                    }
                    assert!(lhs.max_abs_diff(&rhs) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_highest_weight() {
        for labels in [
            vec![4, 2, 1, 0],
            vec![1, 2, 0, 0],
            vec![3, 3, 1, 0],
            vec![3, 2, 1, 0, 0],
        ] {
            let n = labels.len() - 1;
            let alpha: Vec<ComplexF> = (0..n)
                .map(|j| ComplexF::from_polar(0.5 + 0.3 * j as f64, 1.1 * j as f64 + 0.2))
                .collect();
            let (set, rot, eb) = setup(&labels, &alpha);
            let h = rotated_highest_weight(&set, &rot, &eb).unwrap();
            assert!(h.closed_form, "{labels:?}");
            assert!(h.residual < 1e-10);
            assert!((norm(&h.coefficients) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_alpha_uses_null_space() {
        let alpha = vec![
            ComplexF::new(0.0, 0.0),
            ComplexF::new(1.0, 0.0),
            ComplexF::new(0.0, 1.0),
        ];
        let (set, rot, eb) = setup(&[4, 2, 1, 0], &alpha);
        let h = rotated_highest_weight(&set, &rot, &eb).unwrap();
        assert!(!h.closed_form);
        assert!(h.residual < 1e-10);
        assert!((norm(&h.coefficients) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_rotation_keeps_highest_vector() {
        let alpha = vec![
            ComplexF::new(0.0, 0.0),
            ComplexF::new(0.0, 0.0),
            ComplexF::new(2.0, 0.0),
        ];
        let (set, rot, eb) = setup(&[3, 1, 1, 0], &alpha);
        let h = rotated_highest_weight(&set, &rot, &eb).unwrap();
        assert!((h.coefficients[0] - ComplexF::new(1.0, 0.0)).norm() < 1e-12);
    }
}
