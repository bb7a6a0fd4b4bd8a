use std::collections::HashMap;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::chain::model::{mode_data, position_operator, ChainConfig};
use crate::chain::{exact_mismatch, overlap_probabilities, Outcome};
use crate::error::{Error, Result};
use crate::gz::{enumerate_basis, HighestWeight};
use crate::linalg::{norm, SparseMatrix};
use crate::odd::{build_rotation, spectrum, EBasis, EigenvectorExpansion, SpectrumReport};
use crate::rep::{diagonal_action, GeneratorSet};
use crate::scalars::{rat, ComplexF, Surd};
use crate::verify::CheckReport;

/// Occupation bits `phi_i in {0,1}` of a Fock basis vector `w(phi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FockState {
    pub phi: Vec<u8>,
}

impl FockState {
    /// Checks the bits and `|phi| <= min(p, n)`.
    pub fn new(phi: Vec<u8>, p: i64) -> Result<Self> {
        if phi.iter().any(|&b| b > 1) {
            return Err(Error::InvalidState(format!(
                "Fock occupations must be 0 or 1, got {phi:?}"
            )));
        }
        let s = FockState { phi };
        if s.weight() as i64 > p.min(s.phi.len() as i64) {
            return Err(Error::InvalidState(format!(
                "|phi| = {} exceeds min(p, n) = {}",
                s.weight(),
                p.min(s.phi.len() as i64)
            )));
        }
        Ok(s)
    }

    /// `|phi|`
    pub fn weight(&self) -> usize {
        self.phi.iter().map(|&b| b as usize).sum()
    }

    fn sign_before(&self, k: usize) -> i8 {
        if self.phi[..k - 1].iter().map(|&b| b as usize).sum::<usize>() % 2 == 1 {
            -1
        } else {
            1
        }
    }

    fn flipped(&self, k: usize) -> FockState {
        let mut phi = self.phi.clone();
        phi[k - 1] ^= 1;
        FockState { phi }
    }
}

/// One position eigenvector `(v(phi',0) +- (-1)^{|phi'|} v(phi',1))/sqrt 2`,
/// or `v(phi',0)` on the zero level of an atypical module.
#[derive(Clone, Debug)]
pub struct FockEigenvector {
    /// `+1`, `-1`, or `0` for the zero level.
    pub sign: i8,
    /// `phi'` with `n - 1` bits.
    pub label: Vec<u8>,
    pub expansion: EigenvectorExpansion,
}

/// The Fock module `W(p)` with the `phi` labelling of its GZ basis.
#[derive(Clone, Debug)]
pub struct FockRep {
    p: i64,
    set: GeneratorSet,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl FockRep {
    pub fn new(n: usize, p: i64) -> Result<Self> {
        if p < 0 {
            return Err(Error::InvalidWeight(format!(
                "Fock modules need p >= 0, got {p}"
            )));
        }
        let hw = HighestWeight::fock(n, p)?;
        let set = GeneratorSet::new(enumerate_basis(&hw)?)?;
        // phi_k is the e_kk eigenvalue
        let states: Vec<FockState> = set
            .basis()
            .patterns()
            .iter()
            .map(|pat| {
                let phi = (1..=n)
                    .map(|k| {
                        diagonal_action(k, &hw, pat)
                            .to_integer()
                            .to_u8()
                            .expect("Fock occupations are bits")
                    })
                    .collect();
                FockState::new(phi, p)
            })
            .collect::<Result<_>>()?;
        let index: HashMap<FockState, usize> = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        if index.len() != states.len() {
            return Err(Error::Internal("Fock labels are not unique".into()));
        }
        Ok(FockRep {
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

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Atypical exactly when `p <= n - 1`.
    pub fn is_atypical(&self) -> bool {
        self.p < self.n() as i64
    }

    /// Exact matrix of `e_00`, `e_kk`, `e_k0` or `e_0k` from the Fock-space
    /// actions. `None` for other elements.
    pub fn closed_form(&self, i: usize, j: usize) -> Option<SparseMatrix<Surd>> {
        let n = self.n();
        if i > n || j > n || (i != j && i != 0 && j != 0) {
            return None;
        }
        let cols = self
            .states
            .iter()
            .map(|s| {
                let w = s.weight() as i64;
                let entry = match (i, j) {
                    (0, 0) => Some((s.clone(), Surd::from_rational(&rat(self.p - w)))),
                    (k, l) if k == l => {
                        Some((s.clone(), Surd::from_rational(&rat(s.phi[k - 1] as i64))))
                    }
                    (k, 0) if s.phi[k - 1] == 0 && self.p > w => Some((
                        s.flipped(k),
                        Surd::new(s.sign_before(k), rat(self.p - w)).expect("p > |phi|"),
                    )),
                    (0, k) if s.phi[k - 1] == 1 => Some((
                        s.flipped(k),
                        Surd::new(s.sign_before(k), rat(self.p - w + 1)).expect("p >= |phi|"),
                    )),
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

    /// Exact comparison of the Fock-space actions with the generic matrices.
    pub fn closed_form_check(&self) -> CheckReport {
        let n = self.n();
        let mut report = CheckReport::new("Fock closed-form actions");
        let mut pairs = vec![(0, 0)];
        for k in 1..=n {
            pairs.extend([(k, k), (k, 0), (0, k)]);
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

    fn position_spectrum(
        &self,
        cfg: &ChainConfig,
        r: i64,
    ) -> Result<(SpectrumReport, Vec<ComplexF>)> {
        let hw = self.set.basis().highest_weight();
        let q = position_operator(cfg, r, hw)?;
        let report = spectrum(hw, &q.element.alpha)?;
        Ok((report, q.element.alpha))
    }

    /// Position eigenvectors from `v(phi) = E_10^{phi_1} ... E_n0^{phi_n} w(0) / sqrt(p (p-1) ...)`.
    pub fn eigenvectors(&self, cfg: &ChainConfig, r: i64) -> Result<Vec<FockEigenvector>> {
        let n = self.n();
        let (report, alpha) = self.position_spectrum(cfg, r)?;
        let rot = build_rotation(&alpha)?;
        let eb = EBasis::new(&self.set, &rot)?;
        let dim = self.set.dim();
        let highest = self
            .index_of(&FockState { phi: vec![0; n] })
            .expect("highest vector");
        let v = |phi: &[u8]| -> Vec<ComplexF> {
            let mut out = vec![ComplexF::zero(); dim];
            out[highest] = ComplexF::new(1.0, 0.0);
            let mut falling = 1.0;
            for (j, &bit) in phi.iter().enumerate().rev() {
                if bit == 1 {
                    out = eb.get(j + 1, 0).matvec(&out);
                }
            }
            for t in 0..phi.iter().map(|&b| b as i64).sum::<i64>() {
                falling *= (self.p - t) as f64;
            }
            let k = 1.0 / falling.sqrt();
            out.iter_mut().for_each(|z| *z *= k);
            out
        };
        let scale = report.scale;
        let k_max = if self.is_atypical() {
            self.p - 1
        } else {
            n as i64 - 1
        };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::new();
        for label in bit_strings(n - 1) {
            let k = label.iter().map(|&b| b as i64).sum::<i64>();
            let mut lower = label.clone();
            lower.push(0);
            if k <= k_max {
                let mut upper = label.clone();
                upper.push(1);
                let (a, b) = (v(&lower), v(&upper));
                let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
                let x = scale * ((self.p - k) as f64).sqrt();
                for sign in [1i8, -1] {
                    let c = sign as f64 * parity;
                    out.push(FockEigenvector {
                        sign,
                        label: label.clone(),
                        expansion: EigenvectorExpansion {
                            eigenvalue: sign as f64 * x,
                            coefficients: a.iter().zip(&b).map(|(p, q)| (p + q * c) * h).collect(),
                        },
                    });
                }
            } else if k == self.p {
                out.push(FockEigenvector {
                    sign: 0,
                    label: label.clone(),
                    expansion: EigenvectorExpansion {
                        eigenvalue: 0.0,
                        coefficients: v(&lower),
                    },
                });
            }
        }
        if out.len() != dim {
            return Err(Error::Internal(format!(
                "{} Fock eigenvectors for dimension {dim}",
                out.len()
            )));
        }
        for e in &out {
            let nv = norm(&e.expansion.coefficients);
            if (nv - 1.0).abs() > 1e-8 {
                return Err(Error::Internal(format!(
                    "Fock eigenvector {:?} has norm {nv}",
                    e.label
                )));
            }
        }
        Ok(out)
    }

    /// `P(phi, r, x)` from squared overlaps with the eigenvectors.
    pub fn probabilities_from_overlaps(
        &self,
        cfg: &ChainConfig,
        state: &FockState,
        r: i64,
    ) -> Result<Vec<Outcome>> {
        let idx = self.index_of(state).ok_or_else(|| {
            Error::InvalidState(format!(
                "{:?} is not a basis vector of W({})",
                state.phi, self.p
            ))
        })?;
        let (report, _) = self.position_spectrum(cfg, r)?;
        let vectors: Vec<EigenvectorExpansion> = self
            .eigenvectors(cfg, r)?
            .into_iter()
            .map(|e| e.expansion)
            .collect();
        overlap_probabilities(&report, &vectors, idx)
    }
}

fn bit_strings(len: usize) -> Vec<Vec<u8>> {
    (0..1u64 << len)
        .map(|mask| {
            (0..len)
                .map(|i| ((mask >> (len - 1 - i)) & 1) as u8)
                .collect()
        })
        .collect()
}

/// Closed-form measurement law for `q_r` in the stationary state `w(phi)`,
/// over every level of the spectrum in ascending order. Independent of `r`.
pub fn fock_probabilities(p: i64, cfg: &ChainConfig, state: &FockState) -> Result<Vec<Outcome>> {
    let n = cfg.n;
    if state.phi.len() != n {
        return Err(Error::InvalidState(format!(
            "state has {} bits, chain has n={n}",
            state.phi.len()
        )));
    }
    let state = FockState::new(state.phi.clone(), p)?;
    let modes = mode_data(cfg)?;
    let scale = (cfg.hbar * modes.gamma / (cfg.mu * n as f64)).sqrt();
    let g2 = |pick: u8| -> f64 {
        state
            .phi
            .iter()
            .zip(&modes.gamma_j)
            .filter(|(b, _)| **b == pick)
            .map(|(_, g)| g * g)
            .sum::<f64>()
            / (2.0 * modes.gamma)
    };
    let w = state.weight() as i64;
    let law = |k: i64| -> f64 {
        if w == k {
            g2(0)
        } else if w == k + 1 {
            g2(1)
        } else {
            0.0
        }
    };
    let atypical = p < n as i64;
    let k_max = if atypical { p - 1 } else { n as i64 - 1 };
    let mut out = Vec::new();
    for k in 0..=k_max {
        out.push(Outcome {
            value: -scale * ((p - k) as f64).sqrt(),
            probability: law(k),
        });
    }
    if atypical {
        out.push(Outcome {
            value: 0.0,
            probability: 2.0 * law(p),
        });
    }
    for k in (0..=k_max).rev() {
        out.push(Outcome {
            value: scale * ((p - k) as f64).sqrt(),
            probability: law(k),
        });
    }
    Ok(out)
}

/// Position eigenvectors of `W(p)` expanded in the stationary basis.
pub fn fock_eigenvectors(p: i64, cfg: &ChainConfig, r: i64) -> Result<Vec<EigenvectorExpansion>> {
    let rep = FockRep::new(cfg.n, p)?;
    Ok(rep
        .eigenvectors(cfg, r)?
        .into_iter()
        .map(|e| e.expansion)
        .collect())
}
