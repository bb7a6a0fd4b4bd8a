use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalars::Rational;

/// Exact check of
/// `P(1..j)/Q(1..j-1) + sum_{l<j} (y_l - y_{l+1}) P(l+1..j)/Q(l..j-1) = x_j - y_j`
/// with `P(a..b) = prod (x_i - y_i)` and `Q(a..b) = prod (x_i - y_{i+1})`.
/// `x` and `y` are 1-based in the formula; `y` needs `j` entries.
pub fn telescoping_identity_check(x: &[Rational], y: &[Rational], j: usize) -> Result<bool> {
    if j == 0 || x.len() < j || y.len() < j {
        return Err(Error::InvalidState(format!(
            "need j >= 1 and at least j values, got j={j}"
        )));
    }
    let p = |a: usize, b: usize| -> Rational { (a..=b).map(|i| &x[i - 1] - &y[i - 1]).product() };
    let q = |a: usize, b: usize| -> Result<Rational> {
        let mut acc = Rational::one();
        for i in a..=b {
            let f = &x[i - 1] - &y[i];
            if f.is_zero() {
                return Err(Error::ZeroDenominator(format!("x_{i} - y_{}", i + 1)));
            }
            acc *= f;
        }
        Ok(acc)
    };
    let mut lhs = p(1, j) / q(1, j - 1)?;
    for l in 1..j {
        lhs += (&y[l - 1] - &y[l]) * p(l + 1, j) / q(l, j - 1)?;
    }
    Ok(lhs == &x[j - 1] - &y[j - 1])
}

fn binomial_big(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

/// Both sides of the normalization identity for the rotated highest weight
/// vector: `prod_k (g_1 + ... + g_{k+1})^{M_k - M_{k+1}}` and the sum over
/// diagonals `d` of the squared coefficients, with `g_l = |u_l|^2`.
pub fn normalization_identity(top: &[i64], g: &[Rational]) -> (Rational, Rational) {
    let n = top.len();
    assert_eq!(g.len(), n);
    let mut product = Rational::one();
    let mut partial = g[0].clone();
    for k in 1..n {
        partial += &g[k];
        let e = (top[k - 1] - top[k]) as i32;
        product *= num_traits::pow(partial.clone(), e as usize);
    }
    let mut sum = Rational::zero();
    crate::odd::ebasis::for_each_diagonal(top, &mut |d| {
        let mut term = Rational::one();
        for k in 1..n {
            let next = if k == n - 1 { top[n - 1] } else { d[k] };
            term *= Rational::from_integer(binomial_big(top[k - 1] - next, top[k - 1] - d[k - 1]));
        }
        for l in 1..=n {
            if n == 1 {
                break;
            }
            let exp = match l {
                1 => top[0] - d[0],
                _ if l == n => d[n - 2] - top[n - 1],
                _ => d[l - 2] - d[l - 1],
            };
            term *= num_traits::pow(g[l - 1].clone(), exp as usize);
        }
        sum += term;
    });
    (product, sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{rat, rat_frac};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_cases() {
        assert!(telescoping_identity_check(&[rat(7)], &[rat(2)], 1).unwrap());
        assert!(telescoping_identity_check(&[rat(3), rat(5)], &[rat(1), rat(2)], 2).unwrap());
    }

    #[test]
    fn zero_denominator_rejected() {
        let r = telescoping_identity_check(&[rat(2), rat(5)], &[rat(1), rat(2)], 2);
        assert!(matches!(r, Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 300 {
            let j = rng.random_range(1..=8);
            let draw = |rng: &mut ChaCha8Rng| {
                rat_frac(rng.random_range(-40..=40), rng.random_range(1..=9))
            };
            let x: Vec<Rational> = (0..j).map(|_| draw(&mut rng)).collect();
            let y: Vec<Rational> = (0..=j).map(|_| draw(&mut rng)).collect();
            match telescoping_identity_check(&x, &y, j) {
                Ok(ok) => {
                    assert!(ok);
                    done += 1;
                }
                Err(Error::ZeroDenominator(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn normalization_expands() {
        let g = vec![
            rat_frac(1, 3),
            rat_frac(2, 5),
            rat_frac(7, 4),
            rat_frac(1, 9),
        ];
        for top in [vec![3, 1, 1, 0], vec![5, 3, 2, 0], vec![0, 0, 0, 0]] {
            let (a, b) = normalization_identity(&top, &g);
            assert_eq!(a, b);
        }
        let (a, b) = normalization_identity(&[4, 0], &[rat(2), rat(3)]);
        assert_eq!(a, rat(625));
        assert_eq!(b, rat(625));
    }
}
