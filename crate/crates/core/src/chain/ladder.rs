use std::collections::HashMap;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::chain::model::{mode_data, mode_phase, position_operator, ChainConfig};
use crate::chain::{exact_mismatch, overlap_probabilities, Outcome};
use crate::error::{Error, Result};
use crate::gz::{enumerate_basis, HighestWeight};
use crate::linalg::{norm, SparseMatrix};
use crate::odd::{build_rotation, spectrum, EBasis, EigenvectorExpansion, SpectrumReport};
use crate::rep::{diagonal_action, GeneratorSet};
use crate::scalars::{rat, ComplexF, Surd};
use crate::verify::CheckReport;

/// Label `(theta; s_1, ..., s_n)` of a ladder basis vector, `theta + sum s = p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LadderState {
    pub theta: u8,
    pub s: Vec<u64>,
}

impl LadderState {
    pub fn new(theta: u8, s: Vec<u64>, p: i64) -> Result<Self> {
        if theta > 1 {
            return Err(Error::InvalidState(format!(
                "theta must be 0 or 1, got {theta}"
            )));
        }
        let total = theta as i64 + s.iter().sum::<u64>() as i64;
        if total != p {
            return Err(Error::InvalidState(format!(
                "theta + sum s = {total}, expected p = {p}"
            )));
        }
        Ok(LadderState { theta, s })
    }

    fn moved(&self, k: usize, delta: i64) -> Option<LadderState> {
        let s = self.s[k - 1] as i64 + delta;
        (s >= 0).then(|| {
            let mut out = self.clone();
            out.theta = 1 - self.theta;
            out.s[k - 1] = s as u64;
            out
        })
    }
}

/// One position eigenvector `(v(1;t,p-1-K) +- v(0;t,p-K))/sqrt 2` or a zero
/// mode `v(0;t,0)`.
#[derive(Clone, Debug)]
pub struct LadderEigenvector {
    /// `+1`, `-1`, or `0` for the zero level.
    pub sign: i8,
    /// `t` with `n - 1` entries summing to `K`.
    pub label: Vec<u64>,
    pub expansion: EigenvectorExpansion,
}

/// The ladder module `V(p) = W([1,p-1,0,...,0])` with its `(theta; s)`
/// labelling.
#[derive(Clone, Debug)]
pub struct LadderRep {
    p: i64,
    set: GeneratorSet,
    states: Vec<LadderState>,
    index: HashMap<LadderState, usize>,
}

impl LadderRep {
    pub fn new(n: usize, p: i64) -> Result<Self> {
        let hw = HighestWeight::ladder(n, p)?;
        let set = GeneratorSet::new(enumerate_basis(&hw)?)?;
        // theta is the e_00 eigenvalue and s_k the e_kk eigenvalue
        let label = |k: usize, pat| {
            diagonal_action(k, &hw, pat)
                .to_integer()
                .to_u64()
                .expect("nonnegative label")
        };
        let states: Vec<LadderState> = set
            .basis()
            .patterns()
            .iter()
            .map(|pat| {
                LadderState::new(
                    label(0, pat) as u8,
                    (1..=n).map(|k| label(k, pat)).collect(),
                    p,
                )
            })
            .collect::<Result<_>>()?;
        let index: HashMap<LadderState, usize> = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        if index.len() != states.len() {
            return Err(Error::Internal("ladder labels are not unique".into()));
        }
        Ok(LadderRep {
            p,
            set,
            states,
            index,
        })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.set.n()
    }

    pub fn set(&self) -> &GeneratorSet {
        &self.set
    }

    pub fn states(&self) -> &[LadderState] {
        &self.states
    }

    pub fn index_of(&self, state: &LadderState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Exact matrix of `e_00`, `e_kk`, `e_k0`, `e_0k`, `e_{k+1,k}` or
    /// `e_{k,k+1}` from the ladder actions.
    pub fn closed_form(&self, i: usize, j: usize) -> Option<SparseMatrix<Surd>> {
        let n = self.n();
        if i > n || j > n || (i != j && i != 0 && j != 0 && i.abs_diff(j) != 1) {
            return None;
        }
        let cols = self
            .states
            .iter()
            .map(|w| {
                let s = |k: usize| w.s[k - 1] as i64;
                let entry = match (i, j) {
                    (0, 0) => Some((w.clone(), Surd::from_rational(&rat(w.theta as i64)))),
                    (k, l) if k == l => Some((w.clone(), Surd::from_rational(&rat(s(k))))),
                    (k, 0) if w.theta == 1 => w
                        .moved(k, 1)
                        .map(|t| (t, Surd::new(1, rat(s(k) + 1)).expect("positive"))),
                    (0, k) if w.theta == 0 => w
                        .moved(k, -1)
                        .map(|t| (t, Surd::new(1, rat(s(k))).expect("positive"))),
                    (k, l) if k >= 1 && l >= 1 => {
                        // one quantum from slot l to slot k
                        let mut t = w.clone();
                        (s(l) > 0).then(|| {
                            t.s[l - 1] -= 1;
                            t.s[k - 1] += 1;
                            (t, Surd::new(1, rat(s(l) * (s(k) + 1))).expect("positive"))
                        })
                    }
                    _ => None,
                };
                entry
                    .filter(|(_, v)| !v.is_zero())
                    .and_then(|(target, v)| self.index_of(&target).map(|row| (row, v)))
                    .into_iter()
                    .collect()
            })
            .collect();
        Some(SparseMatrix::from_columns(cols))
    }

    pub fn closed_form_check(&self) -> CheckReport {
        let n = self.n();
        let mut report = CheckReport::new("ladder closed-form actions");
        let mut pairs = vec![(0, 0)];
        for k in 1..=n {
            pairs.extend([(k, k), (k, 0), (0, k)]);
            if k < n {
                pairs.extend([(k + 1, k), (k, k + 1)]);
            }
        }
        for (i, j) in pairs {
            report.checked += 1;
            let closed = self.closed_form(i, j).expect("supported element");
            match self.set.get(i, j).exact() {
                Some(generic) => {
                    if let Some(msg) = exact_mismatch(&closed, generic) {
                        report.failures.push(format!("e_{i}{j} {msg}"));
                    }
                }
                None => report
                    .failures
                    .push(format!("e_{i}{j} has no exact matrix")),
            }
        }
        report
    }

    /// `|Lambda>_E = v(1;p-1,0,...,0)` from its two-term closed form over
    /// `w(1;u,p-1-u,0,...,0)`.
    pub fn rotated_highest(&self, cfg: &ChainConfig, r: i64) -> Result<Vec<ComplexF>> {
        let n = self.n();
        let modes = mode_data(cfg)?;
        let (g1, g2) = (modes.gamma_j[0], modes.gamma_j[1]);
        let g = g1 * g1 + g2 * g2;
        if g == 0.0 {
            return Err(Error::InvalidState(
                "gamma_1 = gamma_2 = 0 leaves |Lambda>_E undefined".into(),
            ));
        }
        let top = self.p - 1;
        let mut out = vec![ComplexF::zero(); self.set.dim()];
        let mut binom: f64 = 1.0;
        for u in 0..=top {
            let mut s = vec![0u64; n];
            s[0] = u as u64;
            s[1] = (top - u) as u64;
            let idx = self
                .index_of(&LadderState { theta: 1, s })
                .expect("diagonal vector");
            let sign = if u % 2 == 0 { 1.0 } else { -1.0 };
            // e^{-2 pi i r u / n} is the u-th power of the j = 1 phase
            let phase = mode_phase(1, r, n).powi(u as i32);
            let mag = binom.sqrt()
                * g1.powi((top - u) as i32)
                * g2.powi(u as i32)
                * g.powf(-0.5 * top as f64);
            out[idx] = phase * (sign * mag);
            binom = binom * (top - u) as f64 / (u + 1) as f64;
        }
        Ok(out)
    }

    fn position_spectrum(
        &self,
        cfg: &ChainConfig,
        r: i64,
    ) -> Result<(SpectrumReport, Vec<ComplexF>)> {
        let hw = self.set.basis().highest_weight();
        let q = position_operator(cfg, r, hw)?;
        Ok((spectrum(hw, &q.element.alpha)?, q.element.alpha))
    }

    /// `v(phi; t)` for every label, built by lowering `|Lambda>_E` with
    /// `E_10^{1-phi}` and then `E_{k+1,k}^{a_k}`, `a_k = p - phi - t_1 - ... - t_k`.
    fn e_basis_vectors(
        &self,
        eb: &EBasis,
        highest: &[ComplexF],
    ) -> HashMap<LadderState, Vec<ComplexF>> {
        let n = self.n();
        let p = self.p;
        let mut out = HashMap::new();
        for (phi, t) in self.states.iter().map(|s| (s.theta, &s.s)) {
            let mut v = highest.to_vec();
            let mut norm2 = 1.0;
            if phi == 0 {
                v = eb.get(1, 0).matvec(&v);
                norm2 *= p as f64;
            }
            let mut partial = 0i64;
            for k in 1..n {
                partial += t[k - 1] as i64;
                let a = p - phi as i64 - partial;
                for step in 0..a {
                    v = eb.get(k + 1, k).matvec(&v);
                    // a! (t_k + 1)_a
                    norm2 *= ((step + 1) * (t[k - 1] as i64 + 1 + step)) as f64;
                }
            }
            let k = 1.0 / norm2.sqrt();
            v.iter_mut().for_each(|z| *z *= k);
            out.insert(
                LadderState {
                    theta: phi,
                    s: t.clone(),
                },
                v,
            );
        }
        out
    }

    /// Position eigenvectors expanded in the stationary basis.
    pub fn eigenvectors(
        &self,
        cfg: &ChainConfig,
        r: i64,
    ) -> Result<(SpectrumReport, Vec<LadderEigenvector>)> {
        let n = self.n();
        let p = self.p;
        let (report, alpha) = self.position_spectrum(cfg, r)?;
        let rot = build_rotation(&alpha)?;
        let eb = EBasis::new(&self.set, &rot)?;
        let highest = self.rotated_highest(cfg, r)?;
        let v = self.e_basis_vectors(&eb, &highest);
        let get = |theta: u8, t: &[u64], last: i64| -> &Vec<ComplexF> {
            let mut s = t.to_vec();
            s.push(last as u64);
            &v[&LadderState { theta, s }]
        };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::new();
        for k in 0..=p {
            for t in compositions(k as u64, n - 1) {
                if k == p {
                    out.push(LadderEigenvector {
                        sign: 0,
                        label: t.clone(),
                        expansion: EigenvectorExpansion {
                            eigenvalue: 0.0,
                            coefficients: get(0, &t, 0).clone(),
                        },
                    });
                    continue;
                }
                let (a, b) = (get(1, &t, p - 1 - k), get(0, &t, p - k));
                let x = report.scale * ((p - k) as f64).sqrt();
                for sign in [1i8, -1] {
                    let c = sign as f64;
                    out.push(LadderEigenvector {
                        sign,
                        label: t.clone(),
                        expansion: EigenvectorExpansion {
                            eigenvalue: c * x,
                            coefficients: a.iter().zip(b).map(|(x, y)| (x + y * c) * h).collect(),
                        },
                    });
                }
            }
        }
        if out.len() != self.set.dim() {
            return Err(Error::Internal(format!(
                "{} ladder eigenvectors for dimension {}",
                out.len(),
                self.set.dim()
            )));
        }
        for e in &out {
            let nv = norm(&e.expansion.coefficients);
            if (nv - 1.0).abs() > 1e-8 {
                return Err(Error::Internal(format!(
                    "ladder eigenvector {:?} has norm {nv}",
                    e.label
                )));
            }
        }
        Ok((report, out))
    }

    /// Measurement probabilities of `q_r` in `w(theta; s)` from overlaps.
    pub fn probabilities_from_overlaps(
        &self,
        cfg: &ChainConfig,
        state: &LadderState,
        r: i64,
    ) -> Result<Vec<Outcome>> {
        let idx = self.index_of(state).ok_or_else(|| {
            Error::InvalidState(format!("{state:?} is not a basis vector of V({})", self.p))
        })?;
        let (report, vectors) = self.eigenvectors(cfg, r)?;
        let vectors: Vec<EigenvectorExpansion> = vectors.into_iter().map(|e| e.expansion).collect();
        overlap_probabilities(&report, &vectors, idx)
    }
}

/// Weak compositions of `total` into `parts` nonnegative parts, in
/// descending lexicographic order.
fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Spectrum and position eigenvectors of `V(p)`.
pub fn ladder_eigen(
    p: i64,
    cfg: &ChainConfig,
    r: i64,
) -> Result<(SpectrumReport, Vec<EigenvectorExpansion>)> {
    let rep = LadderRep::new(cfg.n, p)?;
    let (report, vectors) = rep.eigenvectors(cfg, r)?;
    Ok((report, vectors.into_iter().map(|e| e.expansion).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::odd::{oracle_diagonalize, rotated_highest_weight, EigenSystem, SpectrumLevel};

    fn cfg(n: usize) -> ChainConfig {
        ChainConfig::new(n, 0.8, 1.2, 0.3, 1.0).unwrap()
    }

    #[test]
    fn labels_count() {
        // C(p+n-1, n-1) + C(p+n-2, n-1)
        for (n, p, dim) in [(2, 2, 5), (3, 3, 16), (4, 2, 14)] {
            assert_eq!(LadderRep::new(n, p).unwrap().states().len(), dim);
        }
    }

    #[test]
    fn closed_form_matches_generic_exactly() {
        for (n, p) in [(2, 1), (2, 4), (3, 3), (4, 2)] {
            let report = LadderRep::new(n, p).unwrap().closed_form_check();
            assert!(report.passed(), "V({p}), n={n}: {:?}", report.failures);
        }
    }

    #[test]
    fn highest_vector_matches_generic_construction() {
        for (n, p, r) in [(3, 3, 1), (3, 4, 2), (4, 2, 3), (2, 3, 1)] {
            let cfg = cfg(n);
            let rep = LadderRep::new(n, p).unwrap();
            let q = position_operator(&cfg, r, rep.set().basis().highest_weight()).unwrap();
            let rot = build_rotation(&q.element.alpha).unwrap();
            let eb = EBasis::new(rep.set(), &rot).unwrap();
            let generic = rotated_highest_weight(rep.set(), &rot, &eb).unwrap();
            let closed = rep.rotated_highest(&cfg, r).unwrap();
            assert!((norm(&closed) - 1.0).abs() < 1e-12);
            assert!((dot(&closed, &generic.coefficients).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvectors_diagonalize() {
        for (n, p, r) in [(3, 3, 1), (3, 3, 3), (2, 4, 1), (4, 2, 2), (3, 1, 2)] {
            let cfg = cfg(n);
            let rep = LadderRep::new(n, p).unwrap();
            let q = position_operator(&cfg, r, rep.set().basis().highest_weight()).unwrap();
            let m = rep.set().odd_element(&q.element);
            let (report, vecs) = rep.eigenvectors(&cfg, r).unwrap();
            let system = EigenSystem {
                scale: q.scale,
                vectors: vecs.into_iter().map(|e| e.expansion).collect(),
                oracle_fallback: false,
                highest_closed_form: true,
            };
            assert!(system.max_residual(&m) <= 1e-10 * m.spectral_norm());
            assert!(system.gram_defect() <= 1e-10);
            let oracle = oracle_diagonalize(&m, q.scale).unwrap();
            assert!(report.agrees_with(&oracle.report, 1e-8 * q.scale));
        }
    }

    #[test]
    fn three_site_ladder_levels() {
        let cfg = cfg(3);
        let (report, _) = ladder_eigen(3, &cfg, 1).unwrap();
        assert_eq!(report.levels.len(), 7);
        let mult: Vec<usize> = report.levels.iter().map(|l| l.multiplicity).collect();
        assert_eq!(mult, vec![1, 2, 3, 4, 3, 2, 1]);
        assert_eq!(
            report.levels[3],
            SpectrumLevel {
                value: 0.0,
                multiplicity: 4
            }
        );
    }

    #[test]
    fn probabilities_sum_to_one() {
        let cfg = cfg(3);
        let rep = LadderRep::new(3, 2).unwrap();
        for s in rep.states() {
            let probs = rep.probabilities_from_overlaps(&cfg, s, 2).unwrap();
            let total: f64 = probs.iter().map(|o| o.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn compositions_enumerate() {
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(3, 1), vec![vec![3]]);
        assert_eq!(compositions(0, 0), vec![Vec::<u64>::new()]);
    }
}
