use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::TruncatedSeries;
use crate::enumerate::catalan_table;
use crate::rational::{from_int, ratio};

/// Exponents `e` for which `(1-4t)^e` is available in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfExponent {
    PlusHalf,
    MinusHalf,
    MinusThreeHalves,
    MinusOne,
}

fn int(v: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `(1-4t)^e` from explicit coefficient formulas, no numeric roots:
///
/// * `+1/2`: `1`, then `-2/(2n-1) · binom(2n-1, n)`
/// * `-1/2`: `(n+1) C_n`
/// * `-3/2`: `(n+1)(n+2) C_{n+1} / 2`
/// * `-1`: `4^n`
pub fn binomial_sqrt(e: HalfExponent, order: usize) -> TruncatedSeries {
    let c = catalan_table(order + 1);
    TruncatedSeries::from_fn(order, |n| match e {
        HalfExponent::PlusHalf => {
            if n == 0 {
                BigRational::one()
            } else {
                let b: BigUint = num_integer::binomial(BigUint::from(2 * n - 1), BigUint::from(n));
                -int(b) * ratio(2, 2 * n - 1)
            }
        }
        HalfExponent::MinusHalf => int(&c[n] * (n + 1)),
        HalfExponent::MinusThreeHalves => int(&c[n + 1] * ((n + 1) * (n + 2))) / from_int(2),
        HalfExponent::MinusOne => int(BigUint::from(4u32).pow(n as u32)),
    })
}

/// `C(t) = (1 - sqrt(1-4t)) / (2t)`, built from the `+1/2` binomial series.
pub fn catalan_gf(order: usize) -> TruncatedSeries {
    let root = binomial_sqrt(HalfExponent::PlusHalf, order + 1);
    TruncatedSeries::from_fn(order, |n| -root.coeff(n + 1) / from_int(2))
}

/// `1 / (1 - 2tC(t))`.
pub(crate) fn inverse_kernel(order: usize) -> TruncatedSeries {
    let c = catalan_gf(order);
    let kernel = &TruncatedSeries::one(order) - &c.shift(1).scalar_mul(&from_int(2));
    kernel.reciprocal().expect("constant term is 1")
}

/// Generating function `Σ C_n s_n t^n` of the expected count of one cluster
/// pattern over `S_n^{av(231)}`: `t^k C / (1-2tC)` for patterns other than
/// `k…1`, and `t^{k-1} (C-1) / (1-2tC)` for `k…1`.
pub fn g_closed(k: usize, star: bool, order: usize) -> TruncatedSeries {
    let c = catalan_gf(order);
    let inv = inverse_kernel(order);
    let num = if star {
        (&c - &TruncatedSeries::one(order)).shift(k - 1)
    } else {
        c.shift(k)
    };
    &num * &inv
}

/// `s_0 ..= s_T` from the recursion over the position of the maximum:
/// `s_n = 0` for `n < k`, otherwise
/// `s_n = 2 Σ_j C_{j-1} C_{n-j} s_{j-1} / C_n + C_{n-k} / C_n`
/// (`C_{n-k+1} / C_n` for the pattern `k…1`).
pub fn s_from_recursion(k: usize, star: bool, order: usize) -> Vec<BigRational> {
    let c: Vec<BigInt> = catalan_table(order).into_iter().map(BigInt::from).collect();
    let mut s: Vec<BigRational> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        if n < k {
            s.push(BigRational::zero());
            continue;
        }
        let mut acc = BigRational::zero();
        for j in 1..=n {
            if !s[j - 1].is_zero() {
                acc += &s[j - 1] * BigRational::from_integer(&c[j - 1] * &c[n - j]);
            }
        }
        acc *= from_int(2);
        acc += BigRational::from_integer(if star { c[n - k + 1].clone() } else { c[n - k].clone() });
        s.push(acc / BigRational::from_integer(c[n].clone()));
    }
    s
}

/// `Σ C_n s_n t^n` with `s_n` from [`s_from_recursion`].
pub fn g_from_recursion(k: usize, star: bool, order: usize) -> TruncatedSeries {
    let c = catalan_table(order);
    let s = s_from_recursion(k, star, order);
    TruncatedSeries::from_fn(order, |n| &s[n] * int(c[n].clone()))
}
