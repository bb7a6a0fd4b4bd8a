//! Gel'fand-Zetlin basis of the unitary gl(1|n) modules `W([m]_{n+1})`.
//!
//! A pattern is stored as integer offsets from `m_{n,n+1}`: every label in
//! rows `1..=n+1` (excluding `m_{0,n+1}`) differs from it by an integer, while
//! the overall shift and `m_{0,n+1}` may be any rationals.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalars::{format_rational, parse_rational, rat, rational_to_f64, Rational};

/// Default upper bound on the number of enumerated patterns.
pub const DEFAULT_DIM_CAP: usize = 1_000_000;

/// Highest weight `[m_{0,n+1}, m_{1,n+1}, ..., m_{n,n+1}]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HighestWeight {
    n: usize,
    m0: Rational,
    base: Rational,
    top: Vec<i64>,
}

impl HighestWeight {
    /// `labels` holds all `n+1` entries; `m_{i,n+1} - m_{j,n+1}` must be a
    /// nonnegative integer for `1 <= i < j <= n`.
    pub fn new(labels: Vec<Rational>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidWeight(format!(
                "need at least 2 labels (n >= 1), got {}",
                labels.len()
            )));
        }
        let n = labels.len() - 1;
        let base = labels[n].clone();
        let mut top = Vec::with_capacity(n);
        for (i, label) in labels[1..].iter().enumerate() {
            let diff = label - &base;
            if !diff.is_integer() {
                return Err(Error::InvalidWeight(format!(
                    "m_{{{},n+1}} - m_{{n,n+1}} = {} is not an integer",
                    i + 1,
                    format_rational(&diff)
                )));
            }
            let z = diff
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::InvalidWeight("label out of range".into()))?;
            top.push(z);
        }
        if let Some(i) = (1..n).find(|&i| top[i - 1] < top[i]) {
            return Err(Error::InvalidWeight(format!(
                "labels must be weakly decreasing: m_{{{i},n+1}} < m_{{{},n+1}}",
                i + 1
            )));
        }
        Ok(HighestWeight {
            n,
            m0: labels[0].clone(),
            base,
            top,
        })
    }

    pub fn from_ints(labels: &[i64]) -> Result<Self> {
        HighestWeight::new(labels.iter().map(|&v| rat(v)).collect())
    }

    /// Comma separated labels, e.g. `"4,2,1,0"` or `"1/2,1,0"`.
    pub fn parse(s: &str) -> Result<Self> {
        let labels = s
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        HighestWeight::new(labels)
    }

    /// Fock module `W(p) = W([p,0,...,0])`.
    pub fn fock(n: usize, p: i64) -> Result<Self> {
        let mut labels = vec![0; n + 1];
        labels[0] = p;
        HighestWeight::from_ints(&labels)
    }

    /// Ladder module `V(p) = W([1,p-1,0,...,0])`, `n >= 2`.
    pub fn ladder(n: usize, p: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidWeight("ladder modules need n >= 2".into()));
        }
        if p < 1 {
            return Err(Error::InvalidWeight("ladder modules need p >= 1".into()));
        }
        let mut labels = vec![0; n + 1];
        labels[0] = 1;
        labels[1] = p - 1;
        HighestWeight::from_ints(&labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m0(&self) -> &Rational {
        &self.m0
    }

    /// Common shift of every even label, `m_{n,n+1}`.
    pub fn base(&self) -> &Rational {
        &self.base
    }

    /// Integer offset of `m_{i,n+1}` from the base, `1 <= i <= n`.
    pub fn top_offset(&self, i: usize) -> i64 {
        self.top[i - 1]
    }

    pub fn top_offsets(&self) -> &[i64] {
        &self.top
    }

    /// `m_{i,n+1}` for `0 <= i <= n`.
    pub fn label(&self, i: usize) -> Rational {
        if i == 0 {
            self.m0.clone()
        } else {
            self.offset_value(self.top[i - 1])
        }
    }

    pub fn labels(&self) -> Vec<Rational> {
        (0..=self.n).map(|i| self.label(i)).collect()
    }

    pub fn offset_value(&self, z: i64) -> Rational {
        &self.base + rat(z)
    }

    /// The `k` with `m_{0,n+1} + m_{k,n+1} = k - 1`, if any. At most one
    /// exists since the left side minus `k` strictly decreases in `k`.
    pub fn atypical_index(&self) -> Option<usize> {
        (1..=self.n).find(|&k| &self.m0 + self.label(k) == rat(k as i64 - 1))
    }
}

impl fmt::Display for HighestWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(format_rational).collect();
        write!(f, "[{}]", labels.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitarityClass {
    Typical,
    AtypicalOfType(usize),
    NotUnitary,
}

impl UnitarityClass {
    pub fn is_unitary(self) -> bool {
        !matches!(self, UnitarityClass::NotUnitary)
    }
}

impl fmt::Display for UnitarityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitarityClass::Typical => write!(f, "typical"),
            UnitarityClass::AtypicalOfType(k) => write!(f, "atypical of type {k}"),
            UnitarityClass::NotUnitary => write!(f, "not unitary"),
        }
    }
}

pub fn classify_unitary(hw: &HighestWeight) -> UnitarityClass {
    let n = hw.n as i64;
    if hw.m0() + hw.label(hw.n) - rat(n - 1) > Rational::zero() {
        return UnitarityClass::Typical;
    }
    if let Some(k) = hw.atypical_index() {
        let mk = hw.top_offset(k);
        if (k..=hw.n).all(|i| hw.top_offset(i) == mk) {
            return UnitarityClass::AtypicalOfType(k);
        }
    }
    UnitarityClass::NotUnitary
}

/// Gate used by every operation that needs the star condition.
pub fn require_unitary(hw: &HighestWeight) -> Result<UnitarityClass> {
    match classify_unitary(hw) {
        UnitarityClass::NotUnitary => Err(Error::NotUnitary(hw.to_string())),
        c => Ok(c),
    }
}

/// One GZ pattern: rows `n, n-1, ..., 1` (top-down) as integer offsets from
/// the base label of the highest weight. The fixed top row lives in the
/// [`HighestWeight`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GzPattern {
    rows: Vec<Vec<i64>>,
}

impl GzPattern {
    /// `rows[0]` is row `n` (length `n`), the last entry is row 1.
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        GzPattern { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// Row `k` for `1 <= k <= n`.
    pub fn row(&self, k: usize) -> &[i64] {
        &self.rows[self.rows.len() - k]
    }

    /// Offset of `m_{ik}`, `1 <= i <= k <= n`.
    pub fn label(&self, i: usize, k: usize) -> i64 {
        self.row(k)[i - 1]
    }

    pub(crate) fn label_mut(&mut self, i: usize, k: usize) -> &mut i64 {
        let n = self.rows.len();
        &mut self.rows[n - k][i - 1]
    }

    /// `theta_i = m_{in} - m_{i,n+1}`.
    pub fn theta(&self, hw: &HighestWeight) -> Vec<i64> {
        let n = hw.n();
        (1..=n)
            .map(|i| self.label(i, n) - hw.top_offset(i))
            .collect()
    }

    /// Eigenvalues of `e_00, e_11, ..., e_nn` on this vector.
    pub fn weight(&self, hw: &HighestWeight) -> Vec<Rational> {
        let n = hw.n();
        let theta_sum: i64 = self.theta(hw).iter().sum();
        let mut out = Vec::with_capacity(n + 1);
        out.push(hw.m0() - rat(theta_sum));
        for k in 1..=n {
            let upper: i64 = self.row(k).iter().sum();
            let lower: i64 = if k > 1 {
                self.row(k - 1).iter().sum()
            } else {
                0
            };
            out.push(hw.base() + rat(upper - lower));
        }
        out
    }

    /// Nested arrays top-down; every label is an exact string.
    pub fn to_json(&self, hw: &HighestWeight) -> Value {
        let mut rows = Vec::with_capacity(self.n() + 1);
        rows.push(Value::Array(
            hw.labels()
                .iter()
                .map(|r| Value::String(format_rational(r)))
                .collect(),
        ));
        for row in &self.rows {
            rows.push(Value::Array(
                row.iter()
                    .map(|&z| Value::String(format_rational(&hw.offset_value(z))))
                    .collect(),
            ));
        }
        Value::Array(rows)
    }

    /// Inverse of [`GzPattern::to_json`]; the top row must match `hw`.
    pub fn from_json(hw: &HighestWeight, value: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("pattern JSON: {msg}"));
        let rows = value.as_array().ok_or_else(|| bad("expected an array"))?;
        let n = hw.n();
        if rows.len() != n + 1 {
            return Err(bad("wrong number of rows"));
        }
        let parse_row = |v: &Value, len: usize| -> Result<Vec<Rational>> {
            let arr = v.as_array().ok_or_else(|| bad("row is not an array"))?;
            if arr.len() != len {
                return Err(bad("row has the wrong length"));
            }
            arr.iter()
                .map(|x| match x {
                    Value::String(s) => parse_rational(s),
                    Value::Number(num) => parse_rational(&num.to_string()),
                    _ => Err(bad("label is not a string")),
                })
                .collect()
        };
        if parse_row(&rows[0], n + 1)? != hw.labels() {
            return Err(bad("top row does not match the highest weight"));
        }
        let mut out = Vec::with_capacity(n);
        for (idx, v) in rows[1..].iter().enumerate() {
            let k = n - idx;
            let labels = parse_row(v, k)?;
            let mut row = Vec::with_capacity(k);
            for label in labels {
                let diff = label - hw.base();
                if !diff.is_integer() {
                    return Err(bad("label not congruent to the highest weight"));
                }
                row.push(
                    diff.to_integer()
                        .to_i64()
                        .ok_or_else(|| bad("label out of range"))?,
                );
            }
            out.push(row);
        }
        Ok(GzPattern { rows: out })
    }

    /// Compact single-line rendering, rows separated by `|`.
    pub fn display(&self, hw: &HighestWeight) -> String {
        let mut parts = vec![hw
            .labels()
            .iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(",")];
        for row in &self.rows {
            parts.push(
                row.iter()
                    .map(|&z| format_rational(&hw.offset_value(z)))
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        parts.join("|")
    }
}

/// Checks (GZ1)-(GZ4) directly. Kept separate from the enumerator so the
/// two can be tested against each other.
pub fn is_valid_pattern(hw: &HighestWeight, p: &GzPattern) -> bool {
    let n = hw.n();
    if p.n() != n || (1..=n).any(|k| p.row(k).len() != k) {
        return false;
    }
    let theta = p.theta(hw);
    if theta.iter().any(|&t| t != 0 && t != 1) {
        return false;
    }
    if let Some(k) = hw.atypical_index() {
        if theta[k - 1] != 0 {
            return false;
        }
    }
    for j in 1..n {
        for i in 1..=j {
            if p.label(i, j + 1) < p.label(i, j) || p.label(i, j) < p.label(i + 1, j + 1) {
                return false;
            }
        }
    }
    true
}

/// Ordered basis with a pattern-to-ordinal map. Patterns are sorted by
/// `sum theta` ascending, then descending lexicographic on the top-down
/// row-major labels, so the highest weight pattern is always first.
#[derive(Clone, Debug)]
pub struct BasisIndex {
    hw: HighestWeight,
    patterns: Vec<GzPattern>,
    index: HashMap<GzPattern, usize>,
}

impl BasisIndex {
    pub fn highest_weight(&self) -> &HighestWeight {
        &self.hw
    }

    pub fn n(&self) -> usize {
        self.hw.n()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[GzPattern] {
        &self.patterns
    }

    pub fn pattern(&self, idx: usize) -> &GzPattern {
        &self.patterns[idx]
    }

    pub fn position(&self, p: &GzPattern) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Pattern with every row repeating the top row.
    pub fn highest_pattern(&self) -> GzPattern {
        highest_pattern(&self.hw)
    }
}

pub fn highest_pattern(hw: &HighestWeight) -> GzPattern {
    let n = hw.n();
    GzPattern {
        rows: (1..=n)
            .rev()
            .map(|k| hw.top_offsets()[..k].to_vec())
            .collect(),
    }
}

fn visit_lower_rows(
    rows: &mut Vec<Vec<i64>>,
    visit: &mut dyn FnMut(&[Vec<i64>]) -> Result<()>,
) -> Result<()> {
    let upper = rows.last().expect("row n is always present").clone();
    if upper.len() == 1 {
        return visit(rows);
    }
    let k = upper.len() - 1;
    let mut current: Vec<i64> = (0..k).map(|i| upper[i + 1]).collect();
    if (0..k).any(|i| upper[i + 1] > upper[i]) {
        return Ok(());
    }
    // odometer over the betweenness intervals upper[i+1] ..= upper[i]
    loop {
        rows.push(current.clone());
        visit_lower_rows(rows, visit)?;
        rows.pop();
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(());
            }
            if current[pos] < upper[pos] {
                current[pos] += 1;
                break;
            }
            current[pos] = upper[pos + 1];
            pos += 1;
        }
    }
}

fn for_each_pattern(
    hw: &HighestWeight,
    visit: &mut dyn FnMut(&[Vec<i64>]) -> Result<()>,
) -> Result<()> {
    let n = hw.n();
    let forced_zero = hw.atypical_index();
    for mask in 0u64..(1u64 << n) {
        let theta: Vec<i64> = (0..n).map(|i| ((mask >> i) & 1) as i64).collect();
        if let Some(k) = forced_zero {
            if theta[k - 1] == 1 {
                continue;
            }
        }
        let row_n: Vec<i64> = (0..n).map(|i| hw.top_offsets()[i] + theta[i]).collect();
        let mut rows = vec![row_n];
        visit_lower_rows(&mut rows, visit)?;
    }
    Ok(())
}

/// Number of GZ patterns without materializing them.
pub fn count_patterns(hw: &HighestWeight, cap: usize) -> Result<usize> {
    let mut count = 0usize;
    for_each_pattern(hw, &mut |_| {
        count += 1;
        if count > cap {
            return Err(Error::DimensionCap { cap });
        }
        Ok(())
    })?;
    Ok(count)
}

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "GL1N_DIM_CAP";

/// The pattern cap: `GL1N_DIM_CAP` when set to a positive integer,
/// otherwise the default.
pub fn dimension_cap() -> Result<usize> {
    match std::env::var(DIM_CAP_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(cap) if cap > 0 => Ok(cap),
            _ => Err(Error::Parse(format!(
                "{DIM_CAP_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(DEFAULT_DIM_CAP),
    }
}

/// Enumerates under [`dimension_cap`].
pub fn enumerate_basis(hw: &HighestWeight) -> Result<BasisIndex> {
    enumerate_basis_with_cap(hw, dimension_cap()?)
}

pub fn enumerate_basis_with_cap(hw: &HighestWeight, cap: usize) -> Result<BasisIndex> {
    let mut patterns = Vec::new();
    for_each_pattern(hw, &mut |rows| {
        if patterns.len() >= cap {
            return Err(Error::DimensionCap { cap });
        }
        patterns.push(GzPattern {
            rows: rows.to_vec(),
        });
        Ok(())
    })?;
    let top = hw.top_offsets();
    let theta_sum = |p: &GzPattern| -> i64 { p.rows[0].iter().zip(top).map(|(m, t)| m - t).sum() };
    patterns.sort_by(|a, b| theta_sum(a).cmp(&theta_sum(b)).then_with(|| b.cmp(a)));
    let index = patterns
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    Ok(BasisIndex {
        hw: hw.clone(),
        patterns,
        index,
    })
}

/// Stationary energy `E~_m` (without the factor hbar) of a basis vector.
pub fn hamiltonian_energy(hw: &HighestWeight, pattern: &GzPattern, beta: &[f64]) -> f64 {
    let weight = pattern.weight(hw);
    let beta_sum: f64 = beta.iter().sum();
    let mut energy = beta_sum * rational_to_f64(&weight[0]);
    for (j, b) in beta.iter().enumerate() {
        energy += b * rational_to_f64(&weight[j + 1]);
    }
    energy
}

/// Weyl dimension of the gl(k) module with weakly decreasing integer label.
pub fn gl_n_dimension(label: &[i64]) -> u64 {
    let k = label.len();
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for i in 0..k {
        for j in (i + 1)..k {
            num *= BigInt::from(label[i] - label[j] + (j - i) as i64);
            den *= BigInt::from((j - i) as i64);
        }
    }
    let q = num / den;
    q.to_u64().expect("gl(k) dimension does not fit in u64")
}
