//! Numeric tower: exact rationals, signed square roots of rationals, and
//! complex floats.
//!
//! Every matrix element of a Gel'fand-Zetlin generator is a single signed
//! surd `sign * sqrt(radicand)`. Products of surds stay surds; sums do not,
//! so anything that needs a sum either drops to [`ComplexF`] or, for exact
//! verification, goes through [`RadicalSum`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Mul, Neg};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always reduced with a positive denominator.
pub type Rational = BigRational;

/// Complex float used by every floating matrix.
pub type ComplexF = num_complex::Complex64;

pub fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn rat_frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    // Direct conversion keeps full precision for the moderate sizes used here.
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `"3"`, `"-2"`, `"1/4"` or a short decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let whole: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().map_err(|_| bad())?
        };
        let frac: BigInt = frac_part.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac_part.len());
        let mut value = Rational::new(whole * &scale + frac, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `sign * sqrt(radicand)` with `radicand >= 0`.
///
/// The representation is canonical: `sign == 0` exactly when the radicand is
/// zero, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    sign: i8,
    radicand: Rational,
}

impl Surd {
    pub fn zero() -> Self {
        Surd {
            sign: 0,
            radicand: Rational::zero(),
        }
    }

    pub fn one() -> Self {
        Surd {
            sign: 1,
            radicand: Rational::one(),
        }
    }

    /// Builds `sign * sqrt(radicand)`; the radicand must be nonnegative.
    pub fn new(sign: i8, radicand: Rational) -> Result<Self> {
        if radicand.is_negative() {
            return Err(Error::Internal(format!(
                "negative radicand {}",
                format_rational(&radicand)
            )));
        }
        if sign == 0 || radicand.is_zero() {
            return Ok(Surd::zero());
        }
        Ok(Surd {
            sign: sign.signum(),
            radicand,
        })
    }

    /// The exact surd for a rational value `r` (radicand `r^2`).
    pub fn from_rational(r: &Rational) -> Self {
        let sign = if r.is_zero() {
            0
        } else if r.is_negative() {
            -1
        } else {
            1
        };
        Surd {
            sign,
            radicand: r * r,
        }
    }

    /// Positive square root of a nonnegative rational.
    pub fn sqrt(radicand: Rational) -> Result<Self> {
        Surd::new(1, radicand)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// `sign * sqrt(radicand)` rounded to the nearest float.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let v = rational_to_f64(&self.radicand).sqrt();
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    /// Exact comparison of sign and radicand.
    pub fn square_equal(&self, other: &Surd) -> bool {
        self == other
    }

    /// The square `sign * radicand`, which is always a rational.
    pub fn signed_square(&self) -> Rational {
        if self.sign < 0 {
            -self.radicand.clone()
        } else {
            self.radicand.clone()
        }
    }
}

impl Mul for &Surd {
    type Output = Surd;

    fn mul(self, rhs: &Surd) -> Surd {
        if self.sign == 0 || rhs.sign == 0 {
            return Surd::zero();
        }
        Surd {
            sign: self.sign * rhs.sign,
            radicand: &self.radicand * &rhs.radicand,
        }
    }
}

impl Mul for Surd {
    type Output = Surd;

    fn mul(self, rhs: Surd) -> Surd {
        &self * &rhs
    }
}

impl Neg for Surd {
    type Output = Surd;

    fn neg(self) -> Surd {
        Surd {
            sign: -self.sign,
            radicand: self.radicand,
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => {
                let sign = if s < 0 { "-" } else { "" };
                write!(f, "{sign}sqrt({})", format_rational(&self.radicand))
            }
        }
    }
}

pub fn surd_mul(a: &Surd, b: &Surd) -> Surd {
    a * b
}

pub fn surd_to_float(a: &Surd) -> f64 {
    a.to_f64()
}

pub fn surd_square_equal(a: &Surd, b: &Surd) -> bool {
    a.square_equal(b)
}

/// Splits a positive integer into `(s, f)` with `v = s^2 * f` and `f`
/// squarefree. Trial division; radicands here are products of small label
/// differences so their prime factors are small.
fn squarefree_split(v: &BigUint) -> (BigUint, BigUint) {
    let mut rest = v.clone();
    let mut square = BigUint::one();
    let mut free = BigUint::one();
    let mut d = BigUint::from(2u32);
    while &d * &d <= rest {
        let mut count = 0u32;
        loop {
            let (q, r) = rest.div_rem(&d);
            if !r.is_zero() {
                break;
            }
            rest = q;
            count += 1;
        }
        if count > 0 {
            square *= num_traits::pow(d.clone(), (count / 2) as usize);
            if count % 2 == 1 {
                free *= &d;
            }
        }
        d += 1u32;
    }
    free *= rest;
    (square, free)
}

/// Exact finite sum `sum_f c_f * sqrt(f)` over distinct squarefree integers
/// `f` with rational coefficients.
///
/// Square roots of distinct squarefree integers are linearly independent
/// over the rationals, so this normal form decides equality of surd sums.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RadicalSum {
    terms: BTreeMap<BigUint, Rational>,
}

impl RadicalSum {
    pub fn zero() -> Self {
        RadicalSum::default()
    }

    pub fn from_surd(s: &Surd) -> Self {
        let mut out = RadicalSum::zero();
        out.add_surd(s);
        out
    }

    pub fn add_surd(&mut self, s: &Surd) {
        if s.is_zero() {
            return;
        }
        // sqrt(p/q) = sqrt(p*q)/q
        let p = s.radicand.numer().magnitude();
        let q = s.radicand.denom().magnitude();
        let (square, free) = squarefree_split(&(p * q));
        let mut coeff = Rational::new(
            BigInt::from_biguint(Sign::Plus, square),
            BigInt::from_biguint(Sign::Plus, q.clone()),
        );
        if s.sign < 0 {
            coeff = -coeff;
        }
        self.add_term(free, coeff);
    }

    fn add_term(&mut self, free: BigUint, coeff: Rational) {
        let entry = self
            .terms
            .entry(free.clone())
            .or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&free);
        }
    }

    pub fn add(&mut self, other: &RadicalSum) {
        for (f, c) in &other.terms {
            self.add_term(f.clone(), c.clone());
        }
    }

    pub fn scaled(&self, k: &Rational) -> RadicalSum {
        if k.is_zero() {
            return RadicalSum::zero();
        }
        RadicalSum {
            terms: self.terms.iter().map(|(f, c)| (f.clone(), c * k)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(f, c)| rational_to_f64(c) * f.to_f64().unwrap_or(f64::NAN).sqrt())
            .sum()
    }
}
