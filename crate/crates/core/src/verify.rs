//! Structural checks on generator matrices: graded brackets, the star
//! condition and weight bookkeeping.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::norm;
use crate::odd::{
    branch, build_rotation, eigenvectors, momentum_variant, oracle_diagonalize,
    rotated_highest_weight, spectrum, telescoping_identity_check, BranchingComponent, EBasis,
};
use crate::rep::{exact_entries, exact_graded_commutator, GeneratorSet, OddElement, Parity};
use crate::scalars::{rat_frac, ComplexF, RadicalSum, Rational};
use crate::Error;

/// Outcome of one family of checks.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub checked: usize,
    pub max_residual: f64,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport {
            name: name.into(),
            checked: 0,
            max_residual: 0.0,
            failures: vec![],
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Counts one check and records a failure when `residual > tol`.
    pub fn record(&mut self, residual: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        self.max_residual = self.max_residual.max(residual);
        // NaN residuals count as failures
        if residual.is_nan() || residual > tol {
            self.failures
                .push(format!("{} (residual {residual:e})", what()));
        }
    }
}

/// A pair of generators `(e_ij, e_kl)`.
pub type GeneratorPair = ((usize, usize), (usize, usize));

/// `count` generator pairs drawn uniformly with a seeded generator.
pub fn sample_pairs(n: usize, count: usize, seed: u64) -> Vec<GeneratorPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = || (rng.random_range(0..=n), rng.random_range(0..=n));
    (0..count).map(|_| (idx(), idx())).collect()
}

/// Graded brackets on the given pairs: exact when both operands and the
/// right-hand side are surd matrices, otherwise in floats within `tol`.
pub fn bracket_pairs(set: &GeneratorSet, pairs: &[GeneratorPair], tol: f64) -> CheckReport {
    let mut report = CheckReport::new("graded brackets on sampled pairs");
    let one = ComplexF::new(1.0, 0.0);
    for &((i, j), (k, l)) in pairs {
        let sign = Parity::bracket_sign(Parity::of(i, j), Parity::of(k, l));
        if let Some(same) = exact_bracket(set, (i, j), (k, l), sign) {
            report.checked += 1;
            if !same {
                report
                    .failures
                    .push(format!("[[e_{i}{j}, e_{k}{l}]] differs exactly"));
            }
            continue;
        }
        let lhs = set
            .complex(i, j)
            .graded_commutator(set.complex(k, l), sign as f64);
        let rhs = set.complex(i, l).lincomb(
            one * delta(j, k),
            set.complex(k, j),
            -one * (sign as f64) * delta(l, i),
        );
        report.record(lhs.max_abs_diff(&rhs), tol, || {
            format!("[[e_{i}{j}, e_{k}{l}]]")
        });
    }
    report
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Float residual of `[[e_ij, e_kl]] = d_jk e_il - (-1)^{deg deg} d_li e_kj`
/// over every ordered pair.
pub fn bracket_relations(set: &GeneratorSet, tol: f64) -> CheckReport {
    let n = set.n();
    let mut report = CheckReport::new("graded brackets");
    let one = num_complex::Complex64::new(1.0, 0.0);
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                for l in 0..=n {
                    let sign = Parity::bracket_sign(Parity::of(i, j), Parity::of(k, l));
                    let lhs = set
                        .complex(i, j)
                        .graded_commutator(set.complex(k, l), sign as f64);
                    let rhs = set.complex(i, l).lincomb(
                        one * delta(j, k),
                        set.complex(k, j),
                        -one * (sign as f64) * delta(l, i),
                    );
                    let r = lhs.max_abs_diff(&rhs);
                    report.checked += 1;
                    report.max_residual = report.max_residual.max(r);
                    if r > tol {
                        report
                            .failures
                            .push(format!("[[e_{i}{j}, e_{k}{l}]] residual {r:e}"));
                    }
                }
            }
        }
    }
    report
}

/// `Some(equal)` when the bracket can be evaluated exactly.
fn exact_bracket(
    set: &GeneratorSet,
    (i, j): (usize, usize),
    (k, l): (usize, usize),
    sign: i8,
) -> Option<bool> {
    let a = set.get(i, j).exact()?;
    let b = set.get(k, l).exact()?;
    let mut rhs: BTreeMap<(usize, usize), RadicalSum> = BTreeMap::new();
    let mut terms = vec![];
    if j == k {
        terms.push((i, l, Rational::from_integer(1.into())));
    }
    if l == i {
        terms.push((k, j, Rational::from_integer((-(sign as i64)).into())));
    }
    for (p, q, coeff) in terms {
        for (key, v) in exact_entries(set.get(p, q).exact()?) {
            rhs.entry(key).or_default().add(&v.scaled(&coeff));
        }
    }
    rhs.retain(|_, v| !v.is_zero());
    Some(exact_graded_commutator(a, b, sign) == rhs)
}

/// Exact bracket check restricted to pairs whose operands and right-hand
/// side all have surd matrices.
pub fn exact_bracket_relations(set: &GeneratorSet) -> CheckReport {
    let n = set.n();
    let mut report = CheckReport::new("exact graded brackets");
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                for l in 0..=n {
                    let sign = Parity::bracket_sign(Parity::of(i, j), Parity::of(k, l));
                    if let Some(same) = exact_bracket(set, (i, j), (k, l), sign) {
                        report.checked += 1;
                        if !same {
                            report
                                .failures
                                .push(format!("[[e_{i}{j}, e_{k}{l}]] differs exactly"));
                        }
                    }
                }
            }
        }
    }
    report
}

/// `M(e_ij)^dagger = M(e_ji)`, exactly where both sides are surds.
pub fn star_condition(set: &GeneratorSet, tol: f64) -> CheckReport {
    let n = set.n();
    let mut report = CheckReport::new("star condition");
    for i in 0..=n {
        for j in 0..=n {
            report.checked += 1;
            match (set.get(i, j).exact(), set.get(j, i).exact()) {
                (Some(a), Some(b)) => {
                    if a != &b.transpose_with(Clone::clone) {
                        report
                            .failures
                            .push(format!("e_{i}{j} is not the transpose of e_{j}{i}"));
                    }
                }
                _ => {
                    let r = set.complex(i, j).max_abs_diff(&set.complex(j, i).adjoint());
                    report.max_residual = report.max_residual.max(r);
                    if r > tol {
                        report
                            .failures
                            .push(format!("e_{i}{j} star residual {r:e}"));
                    }
                }
            }
        }
    }
    report
}

/// Coefficients with real and imaginary parts uniform in `[-1, 1]`.
pub fn random_alpha(rng: &mut ChaCha8Rng, n: usize) -> Vec<ComplexF> {
    loop {
        let alpha: Vec<ComplexF> = (0..n)
            .map(|_| ComplexF::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if alpha.iter().any(|a| a.norm() > 1e-3) {
            return alpha;
        }
    }
}

/// Branching multiset against dense diagonalization: values within
/// `1e-8 * |alpha|`, multiplicities exact.
pub fn spectrum_vs_oracle(
    set: &GeneratorSet,
    alphas: &[Vec<ComplexF>],
) -> Result<CheckReport, Error> {
    let mut report = CheckReport::new("branching spectrum vs oracle");
    let hw = set.basis().highest_weight();
    for alpha in alphas {
        let theorem = spectrum(hw, alpha)?;
        let m = set.odd_element(&OddElement::new(alpha.clone()));
        let oracle = oracle_diagonalize(&m, theorem.scale)?;
        report.checked += 1;
        let counts_match = theorem.levels.len() == oracle.report.levels.len()
            && theorem
                .levels
                .iter()
                .zip(&oracle.report.levels)
                .all(|(a, b)| a.multiplicity == b.multiplicity);
        let worst = theorem
            .multiset()
            .iter()
            .zip(&oracle.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.max_residual = report.max_residual.max(worst / theorem.scale);
        if !counts_match
            || worst > 1e-8 * theorem.scale
            || oracle.values.len() != theorem.total_multiplicity()
        {
            report.failures.push(format!(
                "alpha {alpha:?}: multiplicities or values disagree (max diff {worst:e})"
            ));
        }
    }
    Ok(report)
}

/// Residuals `|M v - lambda v| <= 1e-10 |M|_2` and Gram defect `<= 1e-10`
/// for both the position-type and momentum-type constructions.
pub fn eigenvector_checks(
    set: &GeneratorSet,
    alphas: &[Vec<ComplexF>],
) -> Result<CheckReport, Error> {
    let mut report = CheckReport::new("eigenvector residuals and orthonormality");
    for alpha in alphas {
        let m = set.odd_element(&OddElement::new(alpha.clone()));
        let scale = m.spectral_norm().max(1e-300);
        let (_, momentum) = momentum_variant(set, alpha)?;
        for (label, system) in [
            ("position", eigenvectors(set, alpha)?),
            ("momentum", momentum),
        ] {
            let r = system.max_residual(&m);
            report.record(r / scale, 1e-10, || {
                format!("{label} relative residual for {alpha:?}")
            });
            let g = system.gram_defect();
            report.record(g, 1e-10, || format!("{label} Gram defect for {alpha:?}"));
            if system.vectors.len() != set.dim() {
                report.failures.push(format!(
                    "{label}: {} vectors for dimension {}",
                    system.vectors.len(),
                    set.dim()
                ));
            }
        }
    }
    Ok(report)
}

/// `E_0j v = E_{j,j+1} v = 0` for the rotated highest weight vector, with
/// unit norm.
pub fn highest_weight_checks(
    set: &GeneratorSet,
    alphas: &[Vec<ComplexF>],
) -> Result<CheckReport, Error> {
    let mut report = CheckReport::new("rotated highest weight vector");
    let n = set.n();
    for alpha in alphas {
        let rot = build_rotation(alpha)?;
        let eb = EBasis::new(set, &rot)?;
        let v = rotated_highest_weight(set, &rot, &eb)?.coefficients;
        let mut worst: f64 = 0.0;
        for j in 1..=n {
            worst = worst.max(norm(&eb.get(0, j).matvec(&v)));
            if j < n {
                worst = worst.max(norm(&eb.get(j, j + 1).matvec(&v)));
            }
        }
        report.record(worst, 1e-10, || format!("annihilation for {alpha:?}"));
        report.record((norm(&v) - 1.0).abs(), 1e-12, || {
            format!("norm for {alpha:?}")
        });
    }
    Ok(report)
}

/// Component dimensions add up to the basis size, and each `gl(n-1)` label
/// carries `2^N` distinct top rows among the enumerated patterns.
pub fn branching_checks(set: &GeneratorSet) -> Result<CheckReport, Error> {
    let mut report = CheckReport::new("branching bookkeeping");
    let basis = set.basis();
    let hw = basis.highest_weight();
    let n = hw.n();
    let comps = branch(hw)?;
    let total: u64 = comps.iter().map(BranchingComponent::dim).sum();
    report.checked += 1;
    if total != basis.len() as u64 {
        report.failures.push(format!(
            "components sum to {total}, basis has {}",
            basis.len()
        ));
    }
    for c in &comps {
        let matching: Vec<_> = basis
            .patterns()
            .iter()
            .filter(|p| n == 1 || p.row(n - 1) == c.gln1_label.as_slice())
            .collect();
        let thetas: BTreeSet<&[i64]> = matching.iter().map(|p| p.row(n)).collect();
        report.checked += 1;
        if thetas.len() != 1 << c.n_free || matching.len() as u64 != c.dim() {
            report.failures.push(format!(
                "label {:?}: {} theta choices for N = {}, {} patterns for dimension {}",
                c.gln1_label,
                thetas.len(),
                c.n_free,
                matching.len(),
                c.dim()
            ));
        }
    }
    Ok(report)
}

/// Random exact instances of the telescoping identity with `j <= 8`;
/// draws with a vanishing denominator are replaced.
pub fn telescoping_checks(count: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("telescoping identity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while report.checked < count {
        let j = rng.random_range(1..=8);
        let mut draw = || rat_frac(rng.random_range(-50..=50), rng.random_range(1..=12));
        let x: Vec<Rational> = (0..j).map(|_| draw()).collect();
        let y: Vec<Rational> = (0..=j).map(|_| draw()).collect();
        match telescoping_identity_check(&x, &y, j) {
            Ok(ok) => {
                report.checked += 1;
                if !ok {
                    report.failures.push(format!("j={j}, x={x:?}, y={y:?}"));
                }
            }
            Err(Error::ZeroDenominator(_)) => {}
            Err(e) => {
                report.checked += 1;
                report.failures.push(e.to_string());
            }
        }
    }
    report
}

/// Every module-level suite with `alpha_count` seeded random odd elements.
pub fn module_suite(
    set: &GeneratorSet,
    seed: u64,
    alpha_count: usize,
) -> Result<Vec<CheckReport>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas: Vec<Vec<ComplexF>> = (0..alpha_count)
        .map(|_| random_alpha(&mut rng, set.n()))
        .collect();
    let n = set.n();
    let mut pairs = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                for l in 0..=n {
                    pairs.push(((i, j), (k, l)));
                }
            }
        }
    }
    Ok(vec![
        star_condition(set, 1e-12),
        bracket_pairs(set, &pairs, 1e-10),
        branching_checks(set)?,
        spectrum_vs_oracle(set, &alphas)?,
        highest_weight_checks(set, &alphas)?,
        eigenvector_checks(set, &alphas)?,
        telescoping_checks(200, seed),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gz::{enumerate_basis, HighestWeight};

    fn set(labels: &[i64]) -> GeneratorSet {
        let hw = HighestWeight::from_ints(labels).unwrap();
        GeneratorSet::new(enumerate_basis(&hw).unwrap()).unwrap()
    }

    #[test]
    fn brackets_hold_for_small_modules() {
        for labels in [
            vec![2, 1],
            vec![3, 2, 0],
            vec![0, 1, 1],
            vec![4, 2, 1, 0],
            vec![1, 1, 0, 0],
            vec![1, 2, 0, 0],
            vec![-1, 2, 2, 2],
            vec![3, 2, 1, 1, 0],
        ] {
            let g = set(&labels);
            let r = bracket_relations(&g, 1e-10);
            assert!(
                r.passed(),
                "{labels:?}: {:?}",
                &r.failures[..r.failures.len().min(5)]
            );
            let e = exact_bracket_relations(&g);
            assert!(
                e.passed(),
                "{labels:?}: {:?}",
                &e.failures[..e.failures.len().min(5)]
            );
            assert!(e.checked > 0);
            assert!(star_condition(&g, 1e-12).passed());
        }
    }

    #[test]
    fn suite_passes() {
        for labels in [
            vec![4, 2, 1, 0],
            vec![1, 1, 0, 0],
            vec![2, 1],
            vec![1, 3, 0],
        ] {
            for r in module_suite(&set(&labels), 7, 2).unwrap() {
                assert!(r.passed(), "{labels:?} {}: {:?}", r.name, r.failures);
                assert!(r.checked > 0);
            }
        }
    }

    #[test]
    fn sampled_pairs_are_deterministic() {
        assert_eq!(sample_pairs(3, 40, 1), sample_pairs(3, 40, 1));
        assert_ne!(sample_pairs(3, 40, 1), sample_pairs(3, 40, 2));
        let r = bracket_pairs(&set(&[3, 2, 1, 0]), &sample_pairs(3, 40, 1), 1e-12);
        assert!(r.passed() && r.checked == 40);
    }
}
