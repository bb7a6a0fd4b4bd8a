//! Matrices of the gl(1|n) basis elements `e_ij` over a GZ basis.
//!
//! Diagonal, adjacent even (`e_{k-1,k}`, `e_{k,k-1}`) and all odd
//! (`e_{0j}`, `e_{j0}`) generators have closed-form matrix elements, each a
//! single signed surd, and are kept exact. Remaining even elements are
//! built from brackets of adjacent ones and stored as complex floats.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gz::{is_valid_pattern, require_unitary, BasisIndex, GzPattern, HighestWeight};
use crate::linalg::SparseMatrix;
use crate::scalars::{rat, ComplexF, RadicalSum, Rational, Surd};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(i: usize, j: usize) -> Parity {
        if (i == 0) != (j == 0) {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// Sign `(-1)^{deg a * deg b}` of the graded bracket.
    pub fn bracket_sign(a: Parity, b: Parity) -> i8 {
        if a == Parity::Odd && b == Parity::Odd {
            -1
        } else {
            1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `e_{k-1,k}`
    Raise,
    /// `e_{k,k-1}`
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OddGenerator {
    /// `e_{0j}`, lowers one theta
    E0j,
    /// `e_{j0}`, raises one theta
    Ej0,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixEntries {
    Exact(SparseMatrix<Surd>),
    Float(SparseMatrix<ComplexF>),
}

/// Matrix of one basis element `e_ij` in the ordering of a [`BasisIndex`].
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix {
    pub i: usize,
    pub j: usize,
    pub entries: MatrixEntries,
}

impl GeneratorMatrix {
    pub fn parity(&self) -> Parity {
        Parity::of(self.i, self.j)
    }

    pub fn dim(&self) -> usize {
        match &self.entries {
            MatrixEntries::Exact(m) => m.dim(),
            MatrixEntries::Float(m) => m.dim(),
        }
    }

    pub fn exact(&self) -> Option<&SparseMatrix<Surd>> {
        match &self.entries {
            MatrixEntries::Exact(m) => Some(m),
            MatrixEntries::Float(_) => None,
        }
    }

    pub fn to_complex(&self) -> SparseMatrix<ComplexF> {
        match &self.entries {
            MatrixEntries::Exact(m) => exact_to_complex(m),
            MatrixEntries::Float(m) => m.clone(),
        }
    }
}

pub fn exact_to_complex(m: &SparseMatrix<Surd>) -> SparseMatrix<ComplexF> {
    let cols = (0..m.dim())
        .map(|c| {
            m.column(c)
                .iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(r, v)| (*r, ComplexF::new(v.to_f64(), 0.0)))
                .collect()
        })
        .collect();
    SparseMatrix::from_columns(cols)
}

/// Self-adjoint odd element `sum_j alpha_j e_0j + conj(alpha_j) e_j0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OddElement {
    pub alpha: Vec<ComplexF>,
}

impl OddElement {
    pub fn new(alpha: Vec<ComplexF>) -> Self {
        OddElement { alpha }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn norm(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Eigenvalue of `e_kk` on a basis vector.
pub fn diagonal_action(k: usize, hw: &HighestWeight, pattern: &GzPattern) -> Rational {
    pattern.weight(hw).swap_remove(k)
}

/// Product of integer factors kept as an unreduced fraction.
struct Radicand {
    num: BigInt,
    den: BigInt,
}

impl Radicand {
    fn one() -> Self {
        Radicand {
            num: BigInt::one(),
            den: BigInt::one(),
        }
    }

    fn times(&mut self, f: i64) {
        self.num *= f;
    }

    fn over(&mut self, f: i64) {
        self.den *= f;
    }

    fn finish(self, what: &str) -> Result<Rational> {
        if self.den.is_zero() {
            return Err(Error::ZeroDenominator(what.to_string()));
        }
        Ok(Rational::new(self.num, self.den))
    }
}

/// `l_{ik} = m_{ik} - i` as an integer offset; row `n+1` reads the top row.
struct Shifted<'a> {
    hw: &'a HighestWeight,
    p: &'a GzPattern,
}

impl Shifted<'_> {
    fn l(&self, i: usize, k: usize) -> i64 {
        let n = self.hw.n();
        let m = if k == n + 1 {
            self.hw.top_offset(i)
        } else {
            self.p.label(i, k)
        };
        m - i as i64
    }

    /// `l_{i,n+1} + l_{0,n+1} + 1`, the only factor involving `m_{0,n+1}`.
    fn odd_prefactor(&self, i: usize) -> Rational {
        let n = self.hw.n();
        self.hw.offset_value(self.l(i, n + 1)) + self.hw.m0() + rat(1)
    }
}

fn sqrt_checked(radicand: Rational, what: &str) -> Result<Surd> {
    Surd::sqrt(radicand).map_err(|_| Error::Internal(format!("negative radicand in {what}")))
}

fn push_entry(col: &mut BTreeMap<usize, Surd>, row: usize, value: Surd, what: &str) -> Result<()> {
    if value.is_zero() {
        return Ok(());
    }
    if col.insert(row, value).is_some() {
        return Err(Error::Internal(format!("{what}: repeated target pattern")));
    }
    Ok(())
}

fn finish_columns(cols: Vec<BTreeMap<usize, Surd>>) -> SparseMatrix<Surd> {
    SparseMatrix::from_columns(cols.into_iter().map(|c| c.into_iter().collect()).collect())
}

/// `e_{k-1,k}` (raise) or `e_{k,k-1}` (lower) for `2 <= k <= n`.
pub fn raise_lower_even(
    k: usize,
    direction: Direction,
    basis: &BasisIndex,
) -> Result<GeneratorMatrix> {
    let hw = basis.highest_weight();
    let n = hw.n();
    if !(2..=n).contains(&k) {
        return Err(Error::InvalidState(format!(
            "adjacent even generator needs 2 <= k <= n, got k={k}"
        )));
    }
    let what = match direction {
        Direction::Raise => format!("e_{{{},{}}}", k - 1, k),
        Direction::Lower => format!("e_{{{},{}}}", k, k - 1),
    };
    let mut cols = vec![BTreeMap::new(); basis.len()];
    for (col, p) in basis.patterns().iter().enumerate() {
        let s = Shifted { hw, p };
        for j in 1..k {
            let mut target = p.clone();
            let shift: i64 = if direction == Direction::Raise { 1 } else { -1 };
            *target.label_mut(j, k - 1) += shift;
            if !is_valid_pattern(hw, &target) {
                continue;
            }
            let ljk = s.l(j, k - 1);
            let mut r = Radicand::one();
            match direction {
                Direction::Raise => {
                    for i in 1..=k {
                        r.times(s.l(i, k) - ljk);
                    }
                    for i in 1..k.saturating_sub(1) {
                        r.times(s.l(i, k - 2) - ljk - 1);
                    }
                    for i in (1..k).filter(|&i| i != j) {
                        r.over(s.l(i, k - 1) - ljk);
                        r.over(s.l(i, k - 1) - ljk - 1);
                    }
                }
                Direction::Lower => {
                    for i in 1..=k {
                        r.times(s.l(i, k) - ljk + 1);
                    }
                    for i in 1..k.saturating_sub(1) {
                        r.times(s.l(i, k - 2) - ljk);
                    }
                    for i in (1..k).filter(|&i| i != j) {
                        r.over(s.l(i, k - 1) - ljk);
                        r.over(s.l(i, k - 1) - ljk + 1);
                    }
                }
            }
            let value = sqrt_checked(-r.finish(&what)?, &what)?;
            let row = basis.position(&target).ok_or_else(|| {
                Error::Internal(format!("{what}: valid target missing from basis"))
            })?;
            push_entry(&mut cols[col], row, value, &what)?;
        }
    }
    let (i, j) = match direction {
        Direction::Raise => (k - 1, k),
        Direction::Lower => (k, k - 1),
    };
    Ok(GeneratorMatrix {
        i,
        j,
        entries: MatrixEntries::Exact(finish_columns(cols)),
    })
}

/// Calls `visit` with every index path `(i_j, ..., i_n)`, `1 <= i_r <= r`.
fn for_each_path(j: usize, n: usize, visit: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let len = n - j + 1;
    let mut path: Vec<usize> = vec![1; len];
    loop {
        visit(&path)?;
        let mut pos = 0;
        loop {
            if pos == len {
                return Ok(());
            }
            let row = j + pos;
            if path[pos] < row {
                path[pos] += 1;
                break;
            }
            path[pos] = 1;
            pos += 1;
        }
    }
}

/// `e_{0j}` or `e_{j0}` for `1 <= j <= n` from the nested-sum formulas.
pub fn odd_action(
    j: usize,
    generator: OddGenerator,
    basis: &BasisIndex,
) -> Result<GeneratorMatrix> {
    let hw = basis.highest_weight();
    let n = hw.n();
    if !(1..=n).contains(&j) {
        return Err(Error::InvalidState(format!(
            "odd generator needs 1 <= j <= n, got j={j}"
        )));
    }
    let lowering = generator == OddGenerator::E0j;
    let what = if lowering {
        format!("e_{{0,{j}}}")
    } else {
        format!("e_{{{j},0}}")
    };
    let shift: i64 = if lowering { -1 } else { 1 };
    // shift inside the factors that differ between e_0j and e_j0
    let d: i64 = if lowering { 0 } else { -1 };
    let mut cols = vec![BTreeMap::new(); basis.len()];
    for (col, p) in basis.patterns().iter().enumerate() {
        let s = Shifted { hw, p };
        let theta = p.theta(hw);
        for_each_path(j, n, &mut |path| {
            // path[r - j] = i_r
            let idx = |r: usize| path[r - j];
            let i_n = idx(n);
            let wanted = if lowering { 1 } else { 0 };
            if theta[i_n - 1] != wanted {
                return Ok(());
            }
            let mut target = p.clone();
            for r in j..=n {
                *target.label_mut(idx(r), r) += shift;
            }
            if !is_valid_pattern(hw, &target) {
                return Ok(());
            }
            let mut sign: i8 = if theta[..i_n - 1].iter().sum::<i64>() % 2 == 0 {
                1
            } else {
                -1
            };
            let mut value = sqrt_checked(s.odd_prefactor(i_n), &what)?;
            for r in (j + 1)..=n {
                let (ir, irm) = (idx(r), idx(r - 1));
                if ir > irm {
                    sign = -sign;
                }
                let mut rad = Radicand::one();
                for k in (1..r).filter(|&k| k != irm) {
                    rad.times(s.l(k, r - 1) - s.l(ir, r) + d);
                    rad.over(s.l(k, r - 1) - s.l(irm, r - 1) + 1 + 2 * d);
                }
                for k in (1..=r).filter(|&k| k != ir) {
                    rad.times(s.l(k, r) - s.l(irm, r - 1) + 1 + d);
                    rad.over(s.l(k, r) - s.l(ir, r));
                }
                value = &value * &sqrt_checked(rad.finish(&what)?, &what)?;
            }
            let mut rad = Radicand::one();
            for k in (1..=n).filter(|&k| k != i_n) {
                rad.times(s.l(k, n) - s.l(i_n, n));
                rad.over(s.l(k, n + 1) - s.l(i_n, n + 1));
            }
            value = &value * &sqrt_checked(rad.finish(&what)?, &what)?;
            let i_j = idx(j);
            let mut rad = Radicand::one();
            for k in 1..j {
                rad.times(s.l(k, j - 1) - s.l(i_j, j) + d);
            }
            for k in (1..=j).filter(|&k| k != i_j) {
                rad.over(s.l(k, j) - s.l(i_j, j));
            }
            value = &value * &sqrt_checked(rad.finish(&what)?, &what)?;
            if sign < 0 {
                value = -value;
            }
            let row = basis.position(&target).ok_or_else(|| {
                Error::Internal(format!("{what}: valid target missing from basis"))
            })?;
            push_entry(&mut cols[col], row, value, &what)
        })?;
    }
    let (i, jj) = if lowering { (0, j) } else { (j, 0) };
    Ok(GeneratorMatrix {
        i,
        j: jj,
        entries: MatrixEntries::Exact(finish_columns(cols)),
    })
}

fn diagonal_matrix(k: usize, basis: &BasisIndex) -> GeneratorMatrix {
    let hw = basis.highest_weight();
    let cols = basis
        .patterns()
        .iter()
        .enumerate()
        .map(|(c, p)| {
            let v = Surd::from_rational(&diagonal_action(k, hw, p));
            if v.is_zero() {
                vec![]
            } else {
                vec![(c, v)]
            }
        })
        .collect();
    GeneratorMatrix {
        i: k,
        j: k,
        entries: MatrixEntries::Exact(SparseMatrix::from_columns(cols)),
    }
}

/// Matrix of any `e_ij`, `0 <= i, j <= n`.
pub fn element_matrix(i: usize, j: usize, basis: &BasisIndex) -> Result<GeneratorMatrix> {
    let n = basis.n();
    if i > n || j > n {
        return Err(Error::InvalidState(format!(
            "e_{{{i},{j}}} out of range for n={n}"
        )));
    }
    if i == j {
        return Ok(diagonal_matrix(i, basis));
    }
    if j == 0 {
        return odd_action(i, OddGenerator::Ej0, basis);
    }
    if i == 0 {
        return odd_action(j, OddGenerator::E0j, basis);
    }
    if j == i + 1 {
        return raise_lower_even(j, Direction::Raise, basis);
    }
    if i == j + 1 {
        return raise_lower_even(i, Direction::Lower, basis);
    }
    // e_ij = [e_{i,m}, e_{m,j}] with m the neighbour of i towards j
    let m = if i < j { i + 1 } else { i - 1 };
    let left = element_matrix(i, m, basis)?.to_complex();
    let right = element_matrix(m, j, basis)?.to_complex();
    Ok(GeneratorMatrix {
        i,
        j,
        entries: MatrixEntries::Float(left.graded_commutator(&right, 1.0)),
    })
}

/// All `(n+1)^2` generator matrices of one module, with complex copies.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    basis: BasisIndex,
    exact: Vec<GeneratorMatrix>,
    complex: Vec<SparseMatrix<ComplexF>>,
}

impl GeneratorSet {
    /// Fails with `NotUnitary` for weights outside (U1)/(U2), where the
    /// matrix element formulas have no real values.
    pub fn new(basis: BasisIndex) -> Result<Self> {
        require_unitary(basis.highest_weight())?;
        let n = basis.n();
        let mut exact: Vec<Option<GeneratorMatrix>> = vec![None; (n + 1) * (n + 1)];
        let at = |i: usize, j: usize| i * (n + 1) + j;
        for i in 0..=n {
            for j in 0..=n {
                let direct = i == j || i == 0 || j == 0 || i.abs_diff(j) == 1;
                if direct {
                    exact[at(i, j)] = Some(element_matrix(i, j, &basis)?);
                }
            }
        }
        // non-adjacent even elements, nearest neighbours first
        for gap in 2..n {
            for i in 1..=n {
                for j in [i + gap, i.wrapping_sub(gap)] {
                    if j == 0 || j > n {
                        continue;
                    }
                    let m = if i < j { i + 1 } else { i - 1 };
                    let left = exact[at(i, m)].as_ref().expect("built").to_complex();
                    let right = exact[at(m, j)].as_ref().expect("built").to_complex();
                    exact[at(i, j)] = Some(GeneratorMatrix {
                        i,
                        j,
                        entries: MatrixEntries::Float(left.graded_commutator(&right, 1.0)),
                    });
                }
            }
        }
        let exact: Vec<GeneratorMatrix> =
            exact.into_iter().map(|m| m.expect("all built")).collect();
        let complex = exact.iter().map(GeneratorMatrix::to_complex).collect();
        Ok(GeneratorSet {
            basis,
            exact,
            complex,
        })
    }

    pub fn basis(&self) -> &BasisIndex {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &GeneratorMatrix {
        &self.exact[i * (self.n() + 1) + j]
    }

    pub fn complex(&self, i: usize, j: usize) -> &SparseMatrix<ComplexF> {
        &self.complex[i * (self.n() + 1) + j]
    }

    /// `sum_j alpha_j M(e_0j) + conj(alpha_j) M(e_j0)`.
    pub fn odd_element(&self, element: &OddElement) -> SparseMatrix<ComplexF> {
        let mut out = SparseMatrix::empty(self.dim());
        for (idx, a) in element.alpha.iter().enumerate() {
            let j = idx + 1;
            if a.norm() == 0.0 {
                continue;
            }
            out = out.lincomb(ComplexF::new(1.0, 0.0), self.complex(0, j), *a);
            out = out.lincomb(ComplexF::new(1.0, 0.0), self.complex(j, 0), a.conj());
        }
        out
    }
}

/// Hermitian matrix of a self-adjoint odd element.
pub fn assemble_odd(element: &OddElement, basis: &BasisIndex) -> Result<SparseMatrix<ComplexF>> {
    if element.n() != basis.n() {
        return Err(Error::InvalidState(format!(
            "odd element has {} coefficients, module has n={}",
            element.n(),
            basis.n()
        )));
    }
    let mut out = SparseMatrix::empty(basis.len());
    for (idx, a) in element.alpha.iter().enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        let j = idx + 1;
        let down = odd_action(j, OddGenerator::E0j, basis)?.to_complex();
        let up = odd_action(j, OddGenerator::Ej0, basis)?.to_complex();
        out = out.lincomb(ComplexF::new(1.0, 0.0), &down, *a);
        out = out.lincomb(ComplexF::new(1.0, 0.0), &up, a.conj());
    }
    Ok(out)
}

/// Exact entries of `A B - sign B A` for surd matrices.
pub fn exact_graded_commutator(
    a: &SparseMatrix<Surd>,
    b: &SparseMatrix<Surd>,
    sign: i8,
) -> BTreeMap<(usize, usize), RadicalSum> {
    let mut out: BTreeMap<(usize, usize), RadicalSum> = BTreeMap::new();
    let mut accumulate = |x: &SparseMatrix<Surd>, y: &SparseMatrix<Surd>, negate: bool| {
        for (k, c, yv) in y.entries() {
            for (r, xv) in x.column(k) {
                let mut term = xv * yv;
                if negate {
                    term = -term;
                }
                out.entry((*r, c)).or_default().add_surd(&term);
            }
        }
    };
    accumulate(a, b, false);
    accumulate(b, a, sign > 0);
    out.retain(|_, v| !v.is_zero());
    out
}

/// Exact entries of a surd matrix as radical sums (for comparisons).
pub fn exact_entries(m: &SparseMatrix<Surd>) -> BTreeMap<(usize, usize), RadicalSum> {
    m.entries()
        .filter(|(_, _, v)| !v.is_zero())
        .map(|(r, c, v)| ((r, c), RadicalSum::from_surd(v)))
        .collect()
}

/// Coordinate list `row col re im`, zero-based ordinals, one entry per line.
pub fn write_coo_float<W: Write>(m: &SparseMatrix<ComplexF>, out: &mut W) -> std::io::Result<()> {
    for (r, c, v) in m.entries() {
        writeln!(out, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
    }
    Ok(())
}

/// Exact coordinate list `row col sign num den` meaning `sign*sqrt(num/den)`.
pub fn write_coo_exact<W: Write>(m: &SparseMatrix<Surd>, out: &mut W) -> std::io::Result<()> {
    for (r, c, v) in m.entries() {
        if v.is_zero() {
            continue;
        }
        writeln!(
            out,
            "{r} {c} {} {} {}",
            v.sign(),
            v.radicand().numer(),
            v.radicand().denom()
        )?;
    }
    Ok(())
}

impl fmt::Display for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.entries {
            MatrixEntries::Exact(_) => "exact",
            MatrixEntries::Float(_) => "float",
        };
        write!(
            f,
            "e_{{{},{}}} ({kind}, dim {})",
            self.i,
            self.j,
            self.dim()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gz::enumerate_basis;
    use crate::scalars::rat_frac;

    fn set(labels: &[i64]) -> GeneratorSet {
        let hw = HighestWeight::from_ints(labels).unwrap();
        GeneratorSet::new(enumerate_basis(&hw).unwrap()).unwrap()
    }

    fn surd(sign: i8, r: Rational) -> Surd {
        Surd::new(sign, r).unwrap()
    }

    #[test]
    fn gl11_actions() {
        let (a, b) = (3i64, 2i64);
        let g = set(&[a, b]);
        let basis = g.basis();
        let hw = basis.highest_weight();
        let v = basis.position(&basis.highest_pattern()).unwrap();
        let w = 1 - v;
        assert_eq!(diagonal_action(0, hw, basis.pattern(w)), rat(a - 1));
        assert_eq!(diagonal_action(1, hw, basis.pattern(w)), rat(b + 1));
        let e01 = g.get(0, 1).exact().unwrap();
        let e10 = g.get(1, 0).exact().unwrap();
        assert_eq!(e01.get(v, w), Some(&surd(1, rat(a + b))));
        assert_eq!(e10.get(w, v), Some(&surd(1, rat(a + b))));
        assert_eq!(e01.column(v).len(), 0);
        assert_eq!(e10.column(w).len(), 0);
    }

    #[test]
    fn highest_vector_is_annihilated() {
        for labels in [[4, 2, 1, 0], [1, 1, 0, 0], [5, 0, 0, 0]] {
            let g = set(&labels);
            let top = 0;
            for j in 1..=3 {
                assert!(g.get(0, j).exact().unwrap().column(top).is_empty());
            }
            for k in 2..=3 {
                assert!(g.get(k - 1, k).exact().unwrap().column(top).is_empty());
            }
        }
    }

    #[test]
    fn gl12_raise_entry() {
        // [a, b1, b2] with the pattern m_11 = b2 (theta = 0): e_12 raises m_11
        let g = set(&[3, 2, 0]);
        let basis = g.basis();
        let hw = basis.highest_weight();
        let source = GzPattern::from_rows(vec![vec![2, 0], vec![0]]);
        let target = GzPattern::from_rows(vec![vec![2, 0], vec![1]]);
        let (s, t) = (
            basis.position(&source).unwrap(),
            basis.position(&target).unwrap(),
        );
        // l_12 = 1, l_22 = -2, l_11 = -1: -(l_12 - l_11)(l_22 - l_11) = 2 = (b1 - b2) * 1
        let e12 = g.get(1, 2).exact().unwrap();
        assert_eq!(e12.get(t, s), Some(&surd(1, rat(2))));
        assert_eq!(diagonal_action(0, hw, &source), rat(3));
        // bracket route: {e_10, e_02} = e_12
        let via_bracket = g.complex(1, 0).graded_commutator(g.complex(0, 2), -1.0);
        assert!(via_bracket.max_abs_diff(g.complex(1, 2)) < 1e-12);
    }

    #[test]
    fn ladder_e21_moves_one_quantum() {
        // V(p), n = 2: w(theta; s1, s2) with s1 = m_11, s2 = m_12 - m_11
        let p = 4;
        let g = set(&[1, p - 1, 0]);
        let basis = g.basis();
        let e21 = g.get(2, 1).exact().unwrap();
        for theta in 0..=1i64 {
            for s1 in 0..=(p - theta) {
                let s2 = p - theta - s1;
                let src = GzPattern::from_rows(vec![vec![p - 1 + (1 - theta), 0], vec![s1]]);
                let Some(c) = basis.position(&src) else {
                    continue;
                };
                if s1 == 0 {
                    assert!(e21.column(c).is_empty());
                    continue;
                }
                let dst = GzPattern::from_rows(vec![vec![p - theta, 0], vec![s1 - 1]]);
                let r = basis.position(&dst).unwrap();
                assert_eq!(e21.get(r, c), Some(&surd(1, rat(s1 * (s2 + 1)))));
            }
        }
    }

    #[test]
    fn star_condition_exact_small() {
        for labels in [vec![4, 2, 1, 0], vec![1, 1, 0, 0], vec![3, 1, 0]] {
            let g = set(&labels);
            let n = labels.len() - 1;
            for i in 0..=n {
                for j in 0..=n {
                    let (Some(a), Some(b)) = (g.get(i, j).exact(), g.get(j, i).exact()) else {
                        let d = g.complex(i, j).max_abs_diff(&g.complex(j, i).adjoint());
                        assert!(d < 1e-12);
                        continue;
                    };
                    assert_eq!(a, &b.transpose_with(Surd::clone), "e_{i}{j}");
                }
            }
        }
    }

    #[test]
    fn anticommutator_of_conjugate_odd_pair() {
        let g = set(&[4, 2, 1, 0]);
        for j in 1..=3 {
            let anti = g.complex(j, 0).graded_commutator(g.complex(0, j), -1.0);
            let expected = g.complex(0, 0).add(g.complex(j, j));
            assert!(anti.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn rational_shift_is_supported() {
        let hw = HighestWeight::new(vec![
            rat_frac(9, 4),
            rat_frac(5, 2),
            rat_frac(3, 2),
            rat_frac(1, 2),
        ])
        .unwrap();
        let g = GeneratorSet::new(enumerate_basis(&hw).unwrap()).unwrap();
        let anti = g.complex(3, 0).graded_commutator(g.complex(0, 3), -1.0);
        assert!(anti.max_abs_diff(&g.complex(0, 0).add(g.complex(3, 3))) < 1e-12);
    }

    #[test]
    fn assemble_matches_generator_set() {
        let g = set(&[4, 2, 1, 0]);
        let el = OddElement::new(vec![
            ComplexF::new(0.3, -0.2),
            ComplexF::new(1.0, 0.0),
            ComplexF::new(-0.5, 0.7),
        ]);
        let a = assemble_odd(&el, g.basis()).unwrap();
        assert!(a.max_abs_diff(&g.odd_element(&el)) < 1e-15);
        assert!(a.hermitian_deviation() < 1e-15);
        let unit = OddElement::new(vec![
            ComplexF::new(1.0, 0.0),
            ComplexF::new(0.0, 0.0),
            ComplexF::new(0.0, 0.0),
        ]);
        let m = assemble_odd(&unit, g.basis()).unwrap();
        assert!(m.max_abs_diff(&g.complex(0, 1).add(g.complex(1, 0))) < 1e-15);
        let zero = OddElement::new(vec![ComplexF::new(0.0, 0.0); 3]);
        assert_eq!(assemble_odd(&zero, g.basis()).unwrap().nnz(), 0);
    }

    #[test]
    fn non_unitary_rejected() {
        let hw = HighestWeight::from_ints(&[2, 5, 3, 1, 0]).unwrap();
        let r = GeneratorSet::new(enumerate_basis(&hw).unwrap());
        assert!(matches!(r, Err(Error::NotUnitary(_))));
    }

    #[test]
    fn coo_export() {
        let g = set(&[2, 1]);
        let mut buf = Vec::new();
        write_coo_exact(g.get(0, 1).exact().unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 1 1 3 1\n");
        let mut buf = Vec::new();
        write_coo_float(&g.complex(0, 1).clone(), &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        let parts: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(parts[..2], ["0", "1"]);
        assert!((parts[2].parse::<f64>().unwrap() - 3f64.sqrt()).abs() < 1e-16);
    }
}
