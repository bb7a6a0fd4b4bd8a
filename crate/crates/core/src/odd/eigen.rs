use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gz::{BasisIndex, GzPattern};
use crate::linalg::{axpy, dot, norm, SparseMatrix};
use crate::odd::branch::{spectrum, SpectrumReport};
use crate::odd::ebasis::{rotated_highest_weight, EBasis};
use crate::odd::oracle::oracle_diagonalize;
use crate::odd::rotation::{build_rotation, RotationU};
use crate::rep::{GeneratorSet, OddElement};
use crate::scalars::{rational_to_f64, ComplexF, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct EigenvectorExpansion {
    pub eigenvalue: f64,
    /// Dense coefficients in the basis order of the module.
    pub coefficients: Vec<ComplexF>,
}

impl EigenvectorExpansion {
    /// Nonzero coefficients keyed by pattern.
    pub fn to_map(&self, basis: &BasisIndex, tol: f64) -> BTreeMap<GzPattern, ComplexF> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(i, c)| (basis.pattern(i).clone(), *c))
            .collect()
    }

    /// `{"eigenvalue": x, "coefficients": {"<pattern>": [re, im], ...}}`
    pub fn to_json(&self, basis: &BasisIndex, tol: f64) -> Value {
        let hw = basis.highest_weight();
        let coeffs: serde_json::Map<String, Value> = self
            .to_map(basis, tol)
            .into_iter()
            .map(|(p, c)| (p.display(hw), json!([c.re, c.im])))
            .collect();
        json!({"eigenvalue": self.eigenvalue, "coefficients": coeffs})
    }
}

/// Which self-adjoint combination of `E_0n` and `E_n0` the odd element is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combination {
    /// `s (E_0n + E_n0)`, eigenvectors `(v +- w)/sqrt 2` at `+-s sqrt(a+b)`
    Position,
    /// `i s (E_0n - E_n0)`, eigenvectors `(v +- i w)/sqrt 2` at `-+s sqrt(a+b)`
    Momentum,
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub scale: f64,
    pub vectors: Vec<EigenvectorExpansion>,
    /// Set when the construction broke down and dense diagonalization was
    /// used instead.
    pub oracle_fallback: bool,
    pub highest_closed_form: bool,
}

impl EigenSystem {
    /// Largest `|M v - lambda v|` over the emitted vectors.
    pub fn max_residual(&self, m: &SparseMatrix<ComplexF>) -> f64 {
        self.vectors
            .iter()
            .map(|v| {
                let mut r = m.matvec(&v.coefficients);
                axpy(&mut r, ComplexF::new(-v.eigenvalue, 0.0), &v.coefficients);
                norm(&r)
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let g = dot(&a.coefficients, &b.coefficients);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - ComplexF::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn spectrum(&self) -> SpectrumReport {
        let mut values: Vec<f64> = self.vectors.iter().map(|v| v.eigenvalue).collect();
        values.sort_by(f64::total_cmp);
        crate::odd::oracle::cluster(&values, self.scale)
    }
}

/// Integer weight key (offsets of the `e_kk` eigenvalues).
fn weight_key(basis: &BasisIndex, p: &GzPattern) -> Vec<i64> {
    let hw = basis.highest_weight();
    let n = hw.n();
    let mut out = Vec::with_capacity(n + 1);
    out.push(-p.theta(hw).iter().sum::<i64>());
    for k in 1..=n {
        let upper: i64 = p.row(k).iter().sum();
        let lower: i64 = if k > 1 { p.row(k - 1).iter().sum() } else { 0 };
        out.push(upper - lower);
    }
    out
}

/// Columns `T e_m` of the unitary map sending the e-basis vector of each
/// pattern to the E-basis vector with the same pattern.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    columns: Vec<Vec<ComplexF>>,
}

impl Intertwiner {
    pub fn column(&self, m: usize) -> &[ComplexF] {
        &self.columns[m]
    }

    pub fn apply(&self, z: &[ComplexF]) -> Vec<ComplexF> {
        let dim = self.columns.len();
        let mut out = vec![ComplexF::zero(); dim];
        for (m, c) in z.iter().enumerate() {
            if !c.is_zero() {
                axpy(&mut out, *c, &self.columns[m]);
            }
        }
        out
    }
}

/// Builds `T` weight space by weight space from `T e_Lambda = |Lambda>_E`
/// and `T M(e_ij) = M(E_ij) T` for the lowering generators. Returns `None`
/// when some weight space cannot be spanned.
pub fn build_intertwiner(
    set: &GeneratorSet,
    eb: &EBasis,
    highest: &[ComplexF],
) -> Option<Intertwiner> {
    let basis = set.basis();
    let n = set.n();
    let dim = set.dim();
    let mut groups: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in basis.patterns().iter().enumerate() {
        groups.entry(weight_key(basis, p)).or_default().push(i);
    }
    let height =
        |w: &Vec<i64>| -> i64 { w.iter().enumerate().map(|(k, x)| (n - k) as i64 * x).sum() };
    let mut order: Vec<&Vec<i64>> = groups.keys().collect();
    order.sort_by(|a, b| height(b).cmp(&height(a)).then_with(|| b.cmp(a)));
    let lowering: Vec<(usize, usize)> = (1..=n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let mut columns: Vec<Option<Vec<ComplexF>>> = vec![None; dim];
    columns[0] = Some(highest.to_vec());
    for key in order {
        let members = &groups[key];
        if members.len() == 1 && members[0] == 0 {
            continue;
        }
        let local: HashMap<usize, usize> =
            members.iter().enumerate().map(|(k, &m)| (m, k)).collect();
        let d = members.len();
        let mut qs: Vec<Vec<ComplexF>> = Vec::with_capacity(d);
        let mut ys: Vec<Vec<ComplexF>> = Vec::with_capacity(d);
        'outer: for &(i, j) in &lowering {
            let mut src_key = key.clone();
            src_key[i] -= 1;
            src_key[j] += 1;
            let Some(sources) = groups.get(&src_key) else {
                continue;
            };
            for &s in sources {
                let mut x = vec![ComplexF::zero(); d];
                for (r, v) in set.complex(i, j).column(s) {
                    x[*local.get(r)?] += *v;
                }
                let x_norm = norm(&x);
                if x_norm < 1e-12 {
                    continue;
                }
                let mut coeffs = vec![ComplexF::zero(); qs.len()];
                for _ in 0..2 {
                    for (k, q) in qs.iter().enumerate() {
                        let c = dot(q, &x);
                        coeffs[k] += c;
                        axpy(&mut x, -c, q);
                    }
                }
                let r = norm(&x);
                if r <= 1e-8 * x_norm {
                    continue;
                }
                let src = columns[s].as_ref()?;
                let mut y = eb.get(i, j).matvec(src);
                for (k, c) in coeffs.iter().enumerate() {
                    axpy(&mut y, -c, &ys[k]);
                }
                for v in x.iter_mut() {
                    *v /= r;
                }
                for v in y.iter_mut() {
                    *v /= r;
                }
                qs.push(x);
                ys.push(y);
                if qs.len() == d {
                    break 'outer;
                }
            }
        }
        if qs.len() < d {
            return None;
        }
        for (k, &m) in members.iter().enumerate() {
            let mut col = vec![ComplexF::zero(); dim];
            for (q, y) in qs.iter().zip(&ys) {
                axpy(&mut col, q[k].conj(), y);
            }
            columns[m] = Some(col);
        }
    }
    Some(Intertwiner {
        columns: columns.into_iter().collect::<Option<Vec<_>>>()?,
    })
}

/// Eigenvectors of `scale (E_0n + E_n0)` (or the momentum form) expressed
/// in abstract pattern coordinates, before mapping through `T`.
fn block_eigenvectors(
    set: &GeneratorSet,
    scale: f64,
    comb: Combination,
) -> Vec<(f64, Vec<ComplexF>)> {
    let basis = set.basis();
    let hw = basis.highest_weight();
    let n = set.n();
    let dim = set.dim();
    let mut blocks: BTreeMap<Vec<Vec<i64>>, Vec<usize>> = BTreeMap::new();
    for (i, p) in basis.patterns().iter().enumerate() {
        blocks.entry(p.rows()[1..].to_vec()).or_default().push(i);
    }
    let down = set.complex(0, n);
    let up = set.complex(n, 0);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for members in blocks.values() {
        let w = basis.pattern(members[0]).weight(hw);
        let c: Rational = &w[0] + &w[n];
        if c.is_zero() {
            for &m in members {
                let mut v = vec![ComplexF::zero(); dim];
                v[m] = ComplexF::new(1.0, 0.0);
                out.push((0.0, v));
            }
            continue;
        }
        let sqrt_c = rational_to_f64(&c).sqrt();
        let mut vs: Vec<Vec<ComplexF>> = Vec::new();
        for &m in members {
            let mut x = vec![ComplexF::zero(); dim];
            for (r, val) in down.column(m) {
                x[*r] = *val;
            }
            for _ in 0..2 {
                for q in &vs {
                    let k = dot(q, &x);
                    axpy(&mut x, -k, q);
                }
            }
            let r = norm(&x);
            if r > 1e-8 * sqrt_c {
                vs.push(x.into_iter().map(|z| z / r).collect());
            }
        }
        for v in vs {
            let w: Vec<ComplexF> = up.matvec(&v).into_iter().map(|z| z / sqrt_c).collect();
            let (plus, minus, lam) = match comb {
                Combination::Position => (
                    ComplexF::new(1.0, 0.0),
                    ComplexF::new(-1.0, 0.0),
                    scale * sqrt_c,
                ),
                Combination::Momentum => (
                    ComplexF::new(0.0, 1.0),
                    ComplexF::new(0.0, -1.0),
                    -scale * sqrt_c,
                ),
            };
            for (phase, value) in [(plus, lam), (minus, -lam)] {
                let mut psi = v.clone();
                axpy(&mut psi, phase, &w);
                for z in psi.iter_mut() {
                    *z *= inv_sqrt2;
                }
                out.push((value, psi));
            }
        }
    }
    out
}

fn check_alpha(set: &GeneratorSet, alpha: &[ComplexF]) -> Result<()> {
    if alpha.len() != set.n() {
        return Err(Error::InvalidState(format!(
            "odd element has {} coefficients, module has n={}",
            alpha.len(),
            set.n()
        )));
    }
    Ok(())
}

fn assemble(
    set: &GeneratorSet,
    rot: &RotationU,
    comb: Combination,
    alpha: &[ComplexF],
) -> Result<EigenSystem> {
    let eb = EBasis::new(set, rot)?;
    let scale = rot.alpha_norm();
    let highest = rotated_highest_weight(set, rot, &eb)?;
    let Some(t) = build_intertwiner(set, &eb, &highest.coefficients) else {
        return oracle_fallback(set, alpha, highest.closed_form);
    };
    let mut vectors: Vec<EigenvectorExpansion> = block_eigenvectors(set, scale, comb)
        .into_iter()
        .map(|(value, z)| EigenvectorExpansion {
            eigenvalue: value,
            coefficients: t.apply(&z),
        })
        .collect();
    vectors.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    Ok(EigenSystem {
        scale,
        vectors,
        oracle_fallback: false,
        highest_closed_form: highest.closed_form,
    })
}

fn oracle_fallback(set: &GeneratorSet, alpha: &[ComplexF], closed: bool) -> Result<EigenSystem> {
    let m = set.odd_element(&OddElement::new(alpha.to_vec()));
    let scale = alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let oracle = oracle_diagonalize(&m, scale)?;
    let vectors = oracle
        .values
        .iter()
        .enumerate()
        .map(|(k, &value)| EigenvectorExpansion {
            eigenvalue: value,
            coefficients: oracle.vectors.column(k).iter().copied().collect(),
        })
        .collect();
    Ok(EigenSystem {
        scale,
        vectors,
        oracle_fallback: true,
        highest_closed_form: closed,
    })
}

/// Orthonormal eigenvectors of `sum_j alpha_j e_0j + conj(alpha_j) e_j0`.
pub fn eigenvectors(set: &GeneratorSet, alpha: &[ComplexF]) -> Result<EigenSystem> {
    check_alpha(set, alpha)?;
    let rot = build_rotation(alpha)?;
    assemble(set, &rot, Combination::Position, alpha)
}

/// Same operator written as `i s (E_0n - E_n0)` with the rotation built from
/// `alpha / i`; eigenvectors are `(v +- i w)/sqrt 2`.
pub fn momentum_variant(
    set: &GeneratorSet,
    alpha: &[ComplexF],
) -> Result<(SpectrumReport, EigenSystem)> {
    check_alpha(set, alpha)?;
    let shifted: Vec<ComplexF> = alpha.iter().map(|a| a * ComplexF::new(0.0, -1.0)).collect();
    let rot = build_rotation(&shifted)?;
    let system = assemble(set, &rot, Combination::Momentum, alpha)?;
    let report = spectrum(set.basis().highest_weight(), alpha)?;
    Ok((report, system))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gz::{enumerate_basis, HighestWeight};

    fn set(labels: &[i64]) -> GeneratorSet {
        let hw = HighestWeight::from_ints(labels).unwrap();
        GeneratorSet::new(enumerate_basis(&hw).unwrap()).unwrap()
    }

    fn alpha(n: usize, seed: f64) -> Vec<ComplexF> {
        (0..n)
            .map(|j| {
                ComplexF::from_polar(
                    0.4 + 0.37 * ((j as f64 + seed) * 1.7).sin().abs(),
                    seed * 2.3 + j as f64,
                )
            })
            .collect()
    }

    #[test]
    fn intertwiner_is_unitary_and_intertwines() {
        let g = set(&[4, 2, 1, 0]);
        let rot = build_rotation(&alpha(3, 0.3)).unwrap();
        let eb = EBasis::new(&g, &rot).unwrap();
        let h = rotated_highest_weight(&g, &rot, &eb).unwrap();
        let t = build_intertwiner(&g, &eb, &h.coefficients).unwrap();
        let dim = g.dim();
        for a in 0..dim {
            for b in 0..dim {
                let v = dot(t.column(a), t.column(b));
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((v - ComplexF::new(target, 0.0)).norm() < 1e-10);
            }
        }
        for (i, j) in [(0, 1), (2, 3), (3, 0), (1, 3)] {
            for m in 0..dim {
                let lhs = eb.get(i, j).matvec(t.column(m));
                let mut e = vec![ComplexF::zero(); dim];
                e[m] = ComplexF::new(1.0, 0.0);
                let rhs = t.apply(&g.complex(i, j).matvec(&e));
                let diff: Vec<ComplexF> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
                assert!(norm(&diff) < 1e-10);
            }
        }
    }

    #[test]
    fn eigenvectors_diagonalize() {
        for labels in [
            vec![4, 2, 1, 0],
            vec![1, 2, 0, 0],
            vec![5, 0, 0, 0],
            vec![2, 0, 0, 0],
            vec![3, 1],
            vec![2, 2, 1],
        ] {
            let g = set(&labels);
            let a = alpha(labels.len() - 1, 1.1);
            let sys = eigenvectors(&g, &a).unwrap();
            assert!(!sys.oracle_fallback);
            let m = g.odd_element(&OddElement::new(a.clone()));
            assert_eq!(sys.vectors.len(), g.dim());
            assert!(
                sys.max_residual(&m) < 1e-10 * m.spectral_norm().max(1.0),
                "{labels:?}"
            );
            assert!(sys.gram_defect() < 1e-10);
            let theory = spectrum(g.basis().highest_weight(), &a).unwrap();
            assert!(sys.spectrum().agrees_with(&theory, 1e-10));
        }
    }

    #[test]
    fn momentum_pairing() {
        let g = set(&[3, 1, 0]);
        let a: Vec<ComplexF> = alpha(2, 0.7)
            .into_iter()
            .map(|z| z * ComplexF::new(0.0, 1.0))
            .collect();
        let (report, sys) = momentum_variant(&g, &a).unwrap();
        let m = g.odd_element(&OddElement::new(a));
        assert!(sys.max_residual(&m) < 1e-10);
        assert!(sys.gram_defect() < 1e-10);
        assert!(sys.spectrum().agrees_with(&report, 1e-10));
    }

    #[test]
    fn degenerate_alpha_still_exact() {
        let g = set(&[4, 2, 1, 0]);
        let a = vec![
            ComplexF::new(0.0, 0.0),
            ComplexF::new(0.6, 0.0),
            ComplexF::new(0.0, -0.8),
        ];
        let sys = eigenvectors(&g, &a).unwrap();
        let m = g.odd_element(&OddElement::new(a));
        assert!(!sys.highest_closed_form);
        assert!(sys.max_residual(&m) < 1e-10);
        assert!(sys.gram_defect() < 1e-10);
    }
}
