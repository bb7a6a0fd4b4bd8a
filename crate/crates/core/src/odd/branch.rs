use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gz::{gl_n_dimension, require_unitary, HighestWeight, UnitarityClass};
use crate::scalars::{rat, rational_to_f64, ComplexF, Rational};

/// One `gl(n-1)` label `[m]_{n-1}` of the restriction to
/// `gl(1|1) + gl(n-1)` together with its `gl(1|1)` content.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchingComponent {
    /// `(a, b)`; every summand `W([a-i, b+i])` shares `a + b`.
    pub gl1_weight: (Rational, Rational),
    /// `[m]_{n-1}` as offsets from the highest weight base.
    pub gln1_label: Vec<i64>,
    /// Number of free theta choices.
    pub n_free: usize,
    /// `(i, C(N-1, i))`; empty for the one-dimensional atypical summand.
    pub binom_split: Vec<(usize, u64)>,
    pub dim_v: u64,
    pub singlet: bool,
}

impl BranchingComponent {
    pub fn a_plus_b(&self) -> Rational {
        &self.gl1_weight.0 + &self.gl1_weight.1
    }

    /// Dimension contributed to the full module.
    pub fn dim(&self) -> u64 {
        if self.singlet {
            self.dim_v
        } else {
            self.binom_split.iter().map(|(_, c)| 2 * c).sum::<u64>() * self.dim_v
        }
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Decreasing tuples `r` with `top[i+1] <= r[i] <= top[i] + 1`.
fn candidate_rows(top: &[i64]) -> Vec<Vec<i64>> {
    let n = top.len();
    let mut out = Vec::new();
    let mut row = vec![0i64; n - 1];
    fn fill(i: usize, top: &[i64], row: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == row.len() {
            out.push(row.clone());
            return;
        }
        let hi = if i == 0 {
            top[0] + 1
        } else {
            (top[i] + 1).min(row[i - 1])
        };
        for v in (top[i + 1]..=hi).rev() {
            row[i] = v;
            fill(i + 1, top, row, out);
        }
    }
    fill(0, top, &mut row, &mut out);
    out
}

pub fn branch(hw: &HighestWeight) -> Result<Vec<BranchingComponent>> {
    let class = require_unitary(hw)?;
    let n = hw.n();
    let top = hw.top_offsets();
    let bound = match class {
        UnitarityClass::AtypicalOfType(k) => k - 1,
        _ => n,
    };
    let total_top: Rational = hw.m0() + hw.base() * rat(n as i64) + rat(top.iter().sum());
    let mut out = Vec::new();
    for row in candidate_rows(top) {
        // theta_i is forced to 1 when m_{i,n-1} = m_{i,n+1} + 1 and to 0 when
        // m_{i-1,n-1} = m_{i,n+1}
        let mut forced_one = 0i64;
        let mut feasible = true;
        for i in 1..=n {
            let one = i < n && row[i - 1] == top[i - 1] + 1;
            if one {
                forced_one += 1;
                if i > bound {
                    feasible = false;
                }
            }
        }
        if !feasible {
            continue;
        }
        let n_free = (1..=bound)
            .filter(|&i| {
                let upper_ok = i == 1 || row[i - 2] > top[i - 1];
                let lower_ok = i == n || top[i - 1] - row[i - 1] >= 0;
                upper_ok && lower_ok
            })
            .count();
        let a = hw.m0() - rat(forced_one);
        let total_row: Rational = hw.base() * rat(n as i64 - 1) + rat(row.iter().sum());
        let b = -&a + &total_top - total_row;
        let singlet = n_free == 0;
        if singlet && !(&a + &b).is_zero() {
            return Err(Error::Internal(format!(
                "label {row:?} has no free theta but a+b != 0"
            )));
        }
        let binom_split = if singlet {
            vec![]
        } else {
            (0..n_free)
                .map(|i| (i, binomial(n_free as u64 - 1, i as u64)))
                .collect()
        };
        out.push(BranchingComponent {
            gl1_weight: (a, b),
            dim_v: gl_n_dimension(&row),
            gln1_label: row,
            n_free,
            binom_split,
            singlet,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub value: f64,
    pub multiplicity: usize,
}

/// Distinct eigenvalues with multiplicities, ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub scale: f64,
    pub levels: Vec<SpectrumLevel>,
}

impl SpectrumReport {
    pub fn total_multiplicity(&self) -> usize {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Same levels and multiplicities, values within `tol`.
    pub fn agrees_with(&self, other: &SpectrumReport, tol: f64) -> bool {
        self.levels.len() == other.levels.len()
            && self
                .levels
                .iter()
                .zip(&other.levels)
                .all(|(a, b)| a.multiplicity == b.multiplicity && (a.value - b.value).abs() <= tol)
    }

    /// Every eigenvalue repeated by multiplicity, ascending.
    pub fn multiset(&self) -> Vec<f64> {
        self.levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.value, l.multiplicity))
            .collect()
    }
}

/// `a + b` of each level together with signed multiplicities: the
/// eigenvalues are `+-scale*sqrt(a+b)`.
pub fn level_counts(components: &[BranchingComponent]) -> BTreeMap<Rational, usize> {
    let mut by_k: BTreeMap<Rational, usize> = BTreeMap::new();
    for c in components {
        let per_sign = if c.singlet {
            c.dim_v as usize
        } else {
            (c.binom_split.iter().map(|(_, k)| *k).sum::<u64>() * c.dim_v) as usize
        };
        *by_k.entry(c.a_plus_b()).or_default() += per_sign;
    }
    by_k
}

/// Spectrum of `sum_j alpha_j e_0j + conj(alpha_j) e_j0` from the branching
/// rule alone.
pub fn spectrum(hw: &HighestWeight, alpha: &[ComplexF]) -> Result<SpectrumReport> {
    if alpha.len() != hw.n() {
        return Err(Error::InvalidState(format!(
            "odd element has {} coefficients, module has n={}",
            alpha.len(),
            hw.n()
        )));
    }
    let scale = alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let components = branch(hw)?;
    Ok(spectrum_from_components(&components, scale))
}

pub fn spectrum_from_components(components: &[BranchingComponent], scale: f64) -> SpectrumReport {
    let mut levels = Vec::new();
    for (k, count) in level_counts(components) {
        if k.is_zero() || scale == 0.0 {
            // a zero scale collapses everything onto 0
            let mult = if k.is_zero() { count } else { 2 * count };
            levels.push(SpectrumLevel {
                value: 0.0,
                multiplicity: mult,
            });
        } else {
            let x = scale * rational_to_f64(&k).sqrt();
            levels.push(SpectrumLevel {
                value: x,
                multiplicity: count,
            });
            levels.push(SpectrumLevel {
                value: -x,
                multiplicity: count,
            });
        }
    }
    levels.sort_by(|a, b| a.value.total_cmp(&b.value));
    // merge equal values (only the zero level can repeat)
    let mut merged: Vec<SpectrumLevel> = Vec::new();
    for l in levels {
        match merged.last_mut() {
            Some(last) if last.value == l.value => last.multiplicity += l.multiplicity,
            _ => merged.push(l),
        }
    }
    SpectrumReport {
        scale,
        levels: merged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gz::{enumerate_basis, is_valid_pattern, GzPattern};

    fn counts(report: &SpectrumReport) -> Vec<usize> {
        report.levels.iter().map(|l| l.multiplicity).collect()
    }

    #[test]
    fn fock_typical_components() {
        let (n, p) = (3, 5);
        let comps = branch(&HighestWeight::fock(n, p).unwrap()).unwrap();
        assert_eq!(comps.len(), n);
        for c in &comps {
            let k = c.gln1_label.iter().filter(|&&x| x == 1).count();
            assert_eq!(c.n_free, 1);
            assert_eq!(c.dim_v, binomial(n as u64 - 1, k as u64));
            assert_eq!(c.a_plus_b(), rat(p - k as i64));
        }
    }

    #[test]
    fn fock_spectrum_and_atypical_zero() {
        let alpha = vec![
            ComplexF::new(0.3, 0.1),
            ComplexF::new(-0.2, 0.5),
            ComplexF::new(0.4, 0.0),
        ];
        let s = spectrum(&HighestWeight::fock(3, 5).unwrap(), &alpha).unwrap();
        assert_eq!(counts(&s), vec![1, 2, 1, 1, 2, 1]);
        let scale = s.scale;
        assert!((s.levels[5].value - scale * 5f64.sqrt()).abs() < 1e-14);
        let s = spectrum(&HighestWeight::fock(3, 2).unwrap(), &alpha).unwrap();
        let zero = s.levels.iter().find(|l| l.value == 0.0).unwrap();
        assert_eq!(zero.multiplicity, 1);
        assert_eq!(s.total_multiplicity(), 7);
    }

    #[test]
    fn ladder_components() {
        let (n, p) = (3usize, 3i64);
        let comps = branch(&HighestWeight::ladder(n, p).unwrap()).unwrap();
        let singlets: Vec<_> = comps.iter().filter(|c| c.singlet).collect();
        assert_eq!(singlets.len(), 1);
        assert_eq!(singlets[0].gln1_label, vec![p, 0]);
        assert_eq!(singlets[0].gl1_weight, (rat(0), rat(0)));
        for k in 0..p {
            let c = comps.iter().find(|c| c.gln1_label == vec![k, 0]).unwrap();
            assert_eq!(c.gl1_weight, (rat(1), rat(p - 1 - k)));
        }
        let s = spectrum(
            &HighestWeight::ladder(n, p).unwrap(),
            &[ComplexF::new(1.0, 0.0); 3],
        )
        .unwrap();
        assert_eq!(s.levels.len(), 2 * p as usize + 1);
        assert_eq!(counts(&s), vec![1, 2, 3, 4, 3, 2, 1]);
    }

    #[test]
    fn dimension_and_theta_count() {
        for labels in [
            vec![4, 2, 1, 0],
            vec![1, 2, 0, 0],
            vec![3, 3, 1, 0],
            vec![2, 1],
            vec![-1, 2, 2, 2],
            vec![5, 2, 2, 1, 0],
        ] {
            let hw = HighestWeight::from_ints(&labels).unwrap();
            let comps = branch(&hw).unwrap();
            let basis = enumerate_basis(&hw).unwrap();
            assert_eq!(
                comps.iter().map(BranchingComponent::dim).sum::<u64>(),
                basis.len() as u64,
                "{labels:?}"
            );
            for c in &comps {
                let patterns = basis
                    .patterns()
                    .iter()
                    .filter(|p: &&GzPattern| {
                        hw.n() == 1 || p.row(hw.n() - 1) == c.gln1_label.as_slice()
                    })
                    .count();
                let rows_n: std::collections::BTreeSet<Vec<i64>> = basis
                    .patterns()
                    .iter()
                    .filter(|p| hw.n() == 1 || p.row(hw.n() - 1) == c.gln1_label.as_slice())
                    .map(|p| p.row(hw.n()).to_vec())
                    .collect();
                assert_eq!(rows_n.len(), 1 << c.n_free, "{labels:?} {:?}", c.gln1_label);
                assert_eq!(patterns as u64, c.dim());
                assert!(basis.patterns().iter().all(|p| is_valid_pattern(&hw, p)));
            }
        }
    }

    #[test]
    fn json_shape() {
        let s = spectrum(
            &HighestWeight::from_ints(&[2, 1]).unwrap(),
            &[ComplexF::new(2.0, 0.0)],
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["scale"], 2.0);
        assert_eq!(v["levels"][1]["multiplicity"], 1);
        assert!((v["levels"][1]["value"].as_f64().unwrap() - 2.0 * 3f64.sqrt()).abs() < 1e-15);
    }
}
