use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gz::{hamiltonian_energy, HighestWeight};
use crate::linalg::SparseMatrix;
use crate::rep::{GeneratorSet, OddElement};
use crate::scalars::ComplexF;

fn default_one() -> f64 {
    1.0
}

/// Parameters of a periodic chain of `n` identical oscillators coupled by
/// springs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n: usize,
    #[serde(default = "default_one")]
    pub mu: f64,
    #[serde(default = "default_one")]
    pub omega: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "default_one")]
    pub hbar: f64,
}

impl ChainConfig {
    pub fn new(n: usize, mu: f64, omega: f64, c: f64, hbar: f64) -> Result<Self> {
        let cfg = ChainConfig {
            n,
            mu,
            omega,
            c,
            hbar,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `hbar = mu = omega = 1` with coupling `c`.
    pub fn natural(n: usize, c: f64) -> Result<Self> {
        ChainConfig::new(n, 1.0, 1.0, c, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "chain needs n >= 2, got {}",
                self.n
            )));
        }
        for (name, v) in [("mu", self.mu), ("omega", self.omega), ("hbar", self.hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "c must be nonnegative and finite, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

/// Normal-mode data derived from a chain configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeData {
    pub omega_j: Vec<f64>,
    pub beta_j: Vec<f64>,
    /// `sqrt(beta_j) / omega_j`
    pub gamma_j: Vec<f64>,
    /// `sum gamma_j^2`
    pub gamma: f64,
    /// `sum beta_j`
    pub beta: f64,
}

/// `omega_j^2 = omega^2 + 4 c sin^2(pi j / n)`, `j = 1..n`.
pub fn mode_frequencies(n: usize, omega: f64, c: f64) -> Vec<f64> {
    (1..=n)
        .map(|j| {
            let s = (PI * j as f64 / n as f64).sin();
            (omega * omega + 4.0 * c * s * s).sqrt()
        })
        .collect()
}

/// `beta_j = -omega_j + (sum_k omega_k) / (n - 1)`.
pub fn betas(omegas: &[f64]) -> Vec<f64> {
    let n = omegas.len();
    let mean = omegas.iter().sum::<f64>() / (n as f64 - 1.0);
    omegas.iter().map(|w| mean - w).collect()
}

fn min_beta(n: usize, omega: f64, c: f64) -> f64 {
    betas(&mode_frequencies(n, omega, c))
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Supremum of the couplings `c` for which every `beta_j >= 0`, found by
/// scanning a geometric grid for the first sign change of `min_j beta_j`
/// and bisecting it to `1e-10` relative. Infinite when no sign change
/// shows up below `1e12`.
pub fn critical_coupling(n: usize, omega: f64) -> f64 {
    if n <= 2 {
        return f64::INFINITY;
    }
    let scale = omega * omega;
    let mut lo = 0.0;
    let mut hi = 1e-3 * scale;
    while min_beta(n, omega, hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 * scale {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if min_beta(n, omega, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn mode_data(cfg: &ChainConfig) -> Result<ModeData> {
    cfg.validate()?;
    let omega_j = mode_frequencies(cfg.n, cfg.omega, cfg.c);
    let beta_j = betas(&omega_j);
    if beta_j.iter().any(|b| *b < 0.0) {
        return Err(Error::SupercriticalCoupling {
            c: cfg.c,
            c0: critical_coupling(cfg.n, cfg.omega),
        });
    }
    let gamma_j: Vec<f64> = beta_j
        .iter()
        .zip(&omega_j)
        .map(|(b, w)| b.sqrt() / w)
        .collect();
    Ok(ModeData {
        gamma: gamma_j.iter().map(|g| g * g).sum(),
        beta: beta_j.iter().sum(),
        omega_j,
        beta_j,
        gamma_j,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    Position,
    Momentum,
}

/// A position or momentum operator as an odd element, with the prefactor
/// `|alpha|` that multiplies `sqrt(a+b)` in its eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainOperator {
    pub observable: Observable,
    pub element: OddElement,
    pub scale: f64,
}

/// `exp(-2 pi i j r / n)` with `j r` reduced mod `n` first, so `r` and
/// `r + n` give bit-identical phases.
pub fn mode_phase(j: usize, r: i64, n: usize) -> ComplexF {
    let k = (j as i64 * r).rem_euclid(n as i64);
    ComplexF::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)
}

fn check_module(cfg: &ChainConfig, hw: &HighestWeight) -> Result<()> {
    if hw.n() != cfg.n {
        return Err(Error::InvalidConfig(format!(
            "chain has n={} but the module has n={}",
            cfg.n,
            hw.n()
        )));
    }
    Ok(())
}

/// `q_r`: `alpha_j = sqrt(hbar/(mu n)) gamma_j exp(-2 pi i j r/n)`.
pub fn position_operator(cfg: &ChainConfig, r: i64, hw: &HighestWeight) -> Result<ChainOperator> {
    check_module(cfg, hw)?;
    let modes = mode_data(cfg)?;
    let pre = (cfg.hbar / (cfg.mu * cfg.n as f64)).sqrt();
    let alpha = (1..=cfg.n)
        .map(|j| mode_phase(j, r, cfg.n) * (pre * modes.gamma_j[j - 1]))
        .collect();
    Ok(ChainOperator {
        observable: Observable::Position,
        element: OddElement::new(alpha),
        scale: (cfg.hbar * modes.gamma / (cfg.mu * cfg.n as f64)).sqrt(),
    })
}

/// `p_r`: `alpha_j = i sqrt(mu hbar/n) sqrt(beta_j) exp(-2 pi i j r/n)`.
pub fn momentum_operator(cfg: &ChainConfig, r: i64, hw: &HighestWeight) -> Result<ChainOperator> {
    check_module(cfg, hw)?;
    let modes = mode_data(cfg)?;
    let pre = (cfg.mu * cfg.hbar / cfg.n as f64).sqrt();
    let i = ComplexF::new(0.0, 1.0);
    let alpha = (1..=cfg.n)
        .map(|j| i * mode_phase(j, r, cfg.n) * (pre * modes.beta_j[j - 1].sqrt()))
        .collect();
    Ok(ChainOperator {
        observable: Observable::Momentum,
        element: OddElement::new(alpha),
        scale: (cfg.mu * cfg.hbar * modes.beta / cfg.n as f64).sqrt(),
    })
}

pub fn chain_operator(
    cfg: &ChainConfig,
    r: i64,
    hw: &HighestWeight,
    observable: Observable,
) -> Result<ChainOperator> {
    match observable {
        Observable::Position => position_operator(cfg, r, hw),
        Observable::Momentum => momentum_operator(cfg, r, hw),
    }
}

/// `H = hbar (beta e_00 + sum_j beta_j e_jj)`.
pub fn hamiltonian_matrix(cfg: &ChainConfig, set: &GeneratorSet) -> Result<SparseMatrix<ComplexF>> {
    check_module(cfg, set.basis().highest_weight())?;
    let modes = mode_data(cfg)?;
    let one = ComplexF::new(1.0, 0.0);
    let mut h = set
        .complex(0, 0)
        .scale(ComplexF::new(cfg.hbar * modes.beta, 0.0));
    for j in 1..=cfg.n {
        h = h.lincomb(
            one,
            set.complex(j, j),
            ComplexF::new(cfg.hbar * modes.beta_j[j - 1], 0.0),
        );
    }
    Ok(h)
}

/// Stationary energies `hbar E~_m` in basis order.
pub fn stationary_energies(cfg: &ChainConfig, set: &GeneratorSet) -> Result<Vec<f64>> {
    let modes = mode_data(cfg)?;
    let hw = set.basis().highest_weight();
    Ok(set
        .basis()
        .patterns()
        .iter()
        .map(|p| cfg.hbar * hamiltonian_energy(hw, p, &modes.beta_j))
        .collect())
}

/// Largest entry of `[sum_j omega_j (a_j^- a_j^+ + a_j^+ a_j^-), a_k^{+-}] -+ 2 omega_k a_k^{+-}`
/// with `a_j^- = sqrt(2 beta_j/omega_j) e_j0` and `a_j^+ = sqrt(2 beta_j/omega_j) e_0j`.
pub fn triple_relation_defect(cfg: &ChainConfig, set: &GeneratorSet) -> Result<f64> {
    check_module(cfg, set.basis().highest_weight())?;
    let modes = mode_data(cfg)?;
    let n = cfg.n;
    let factor = |j: usize| {
        ComplexF::new(
            (2.0 * modes.beta_j[j - 1] / modes.omega_j[j - 1]).sqrt(),
            0.0,
        )
    };
    let lower: Vec<SparseMatrix<ComplexF>> = (1..=n)
        .map(|j| set.complex(j, 0).scale(factor(j)))
        .collect();
    let raise: Vec<SparseMatrix<ComplexF>> = (1..=n)
        .map(|j| set.complex(0, j).scale(factor(j)))
        .collect();
    let one = ComplexF::new(1.0, 0.0);
    let mut x = SparseMatrix::empty(set.dim());
    for j in 0..n {
        let anti = lower[j].mul(&raise[j]).add(&raise[j].mul(&lower[j]));
        x = x.lincomb(one, &anti, ComplexF::new(modes.omega_j[j], 0.0));
    }
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let w = modes.omega_j[k];
        for (a, sign) in [(&raise[k], 2.0), (&lower[k], -2.0)] {
            let lhs = x.graded_commutator(a, 1.0);
            worst = worst.max(lhs.max_abs_diff(&a.scale(ComplexF::new(sign * w, 0.0))));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gz::enumerate_basis;

    #[test]
    fn two_sites_uncoupled() {
        let cfg = ChainConfig::natural(2, 0.0).unwrap();
        let m = mode_data(&cfg).unwrap();
        assert_eq!(m.omega_j, vec![1.0, 1.0]);
        assert_eq!(m.beta_j, vec![1.0, 1.0]);
        assert_eq!(m.gamma_j, vec![1.0, 1.0]);
        assert_eq!(m.gamma, 2.0);
    }

    #[test]
    fn two_sites_swap_betas() {
        for c in [0.3, 2.0, 17.0] {
            let cfg = ChainConfig::natural(2, c).unwrap();
            let m = mode_data(&cfg).unwrap();
            assert!((m.beta_j[0] - m.omega_j[1]).abs() < 1e-14);
            assert!((m.beta_j[1] - m.omega_j[0]).abs() < 1e-14);
        }
        assert_eq!(critical_coupling(2, 1.0), f64::INFINITY);
    }

    #[test]
    fn uncoupled_betas_positive() {
        for n in 2..7 {
            let m = mode_data(&ChainConfig::natural(n, 0.0).unwrap()).unwrap();
            for b in &m.beta_j {
                assert!((b - 1.0 / (n as f64 - 1.0)).abs() < 1e-14);
            }
            assert!(critical_coupling(n, 1.0) > 0.0);
        }
    }

    #[test]
    fn four_sites_have_finite_critical_coupling() {
        let c0 = critical_coupling(4, 1.0);
        assert!(c0.is_finite() && c0 > 0.0);
        assert!(min_beta(4, 1.0, c0 * (1.0 - 1e-9)) >= 0.0);
        assert!(min_beta(4, 1.0, c0 * (1.0 + 1e-8)) < 0.0);
        let err = mode_data(&ChainConfig::natural(4, c0 * 1.5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SupercriticalCoupling { .. }));
    }

    #[test]
    fn operator_norms_and_periodicity() {
        let cfg = ChainConfig::new(3, 1.7, 0.8, 0.4, 1.3).unwrap();
        let hw = HighestWeight::fock(3, 4).unwrap();
        let m = mode_data(&cfg).unwrap();
        let q = position_operator(&cfg, 1, &hw).unwrap();
        assert!((q.element.norm() - (cfg.hbar * m.gamma / (cfg.mu * 3.0)).sqrt()).abs() < 1e-14);
        assert!((q.element.norm() - q.scale).abs() < 1e-14);
        assert_eq!(q.element, position_operator(&cfg, 4, &hw).unwrap().element);
        let p = momentum_operator(&cfg, 2, &hw).unwrap();
        assert!((p.element.norm() - p.scale).abs() < 1e-14);
        assert_eq!(p.element, momentum_operator(&cfg, -1, &hw).unwrap().element);
    }

    #[test]
    fn two_site_position_coefficients() {
        let cfg = ChainConfig::natural(2, 0.0).unwrap();
        let hw = HighestWeight::fock(2, 3).unwrap();
        let q = position_operator(&cfg, 1, &hw).unwrap();
        let s = 0.5f64.sqrt();
        assert!((q.element.alpha[0] - ComplexF::new(-s, 0.0)).norm() < 1e-15);
        assert!((q.element.alpha[1] - ComplexF::new(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_is_diagonal_with_stationary_energies() {
        let cfg = ChainConfig::new(3, 1.0, 1.0, 0.6, 0.7).unwrap();
        for hw in [
            HighestWeight::fock(3, 4).unwrap(),
            HighestWeight::from_ints(&[4, 2, 1, 0]).unwrap(),
        ] {
            let set = GeneratorSet::new(enumerate_basis(&hw).unwrap()).unwrap();
            let h = hamiltonian_matrix(&cfg, &set).unwrap();
            let e = stationary_energies(&cfg, &set).unwrap();
            for (r, c, v) in h.entries() {
                assert_eq!(r, c);
                assert!((v.re - e[c]).abs() <= 1e-12 * e[c].abs().max(1.0) && v.im == 0.0);
            }
            let q = position_operator(&cfg, 1, &hw).unwrap();
            let qm = set.odd_element(&q.element);
            assert!(h.mul(&qm).sub(&qm.mul(&h)).max_abs() > 1e-3);
        }
    }

    #[test]
    fn triple_relations_hold() {
        let cfg = ChainConfig::natural(3, 0.9).unwrap();
        for hw in [
            HighestWeight::fock(3, 4).unwrap(),
            HighestWeight::ladder(3, 2).unwrap(),
        ] {
            let set = GeneratorSet::new(enumerate_basis(&hw).unwrap()).unwrap();
            assert!(triple_relation_defect(&cfg, &set).unwrap() < 1e-10);
        }
    }

    #[test]
    fn config_parses_from_toml() {
        let cfg: ChainConfig = toml::from_str("n = 3\nc = 0.25\n").unwrap();
        assert_eq!(cfg, ChainConfig::natural(3, 0.25).unwrap());
    }
}
