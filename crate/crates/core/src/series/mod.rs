//! Truncated formal power series with exact rational coefficients, and the
//! generating functions of expected cluster counts over `S_n^{av(231)}`.

mod gf;
mod identities;

pub use gf::{binomial_sqrt, catalan_gf, g_closed, g_from_recursion, s_from_recursion, HalfExponent};
pub use identities::{
    domination_check, second_moment_bounds, second_moment_check, verify_identities, verify_identities_for,
    DominationReport, SecondMomentRow, SeriesIdentity,
};

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rational;

/// Coefficients `a_0 ..= a_T` of a power series known up to `t^T`.
///
/// Binary operations truncate to the smaller order of their operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    /// Series with the given coefficients; the order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("a truncated series needs at least one coefficient");
        }
        Ok(Self { coeffs })
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> BigRational) -> Self {
        Self { coeffs: (0..=order).map(f).collect() }
    }

    pub fn zero(order: usize) -> Self {
        Self::from_fn(order, |_| BigRational::zero())
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(BigRational::one(), 0, order)
    }

    /// `c·t^m`, truncated at `order`.
    pub fn monomial(c: BigRational, m: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if m <= order {
            s.coeffs[m] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `t^n`; panics beyond the truncation order.
    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self { coeffs: self.coeffs[..=order.min(self.order())].to_vec() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let t = self.order().min(other.order());
        Self::from_fn(t, |i| &self.coeffs[i] + &other.coeffs[i])
    }

    pub fn sub(&self, other: &Self) -> Self {
        let t = self.order().min(other.order());
        Self::from_fn(t, |i| &self.coeffs[i] - &other.coeffs[i])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let t = self.order().min(other.order());
        let mut out = vec![BigRational::zero(); t + 1];
        for (i, a) in self.coeffs[..=t].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=t - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self { coeffs: out }
    }

    pub fn scalar_mul(&self, c: &BigRational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// `t^m · self`, kept at the same order.
    pub fn shift(&self, m: usize) -> Self {
        let t = self.order();
        Self::from_fn(t, |i| if i < m { BigRational::zero() } else { self.coeffs[i - m].clone() })
    }

    /// `1 / self`; needs a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return invalid("reciprocal of a series with zero constant term");
        }
        let inv0 = a0.recip();
        let mut out: Vec<BigRational> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for n in 1..self.coeffs.len() {
            let mut acc = BigRational::zero();
            for i in 1..=n {
                if !self.coeffs[i].is_zero() {
                    acc += &self.coeffs[i] * &out[n - i];
                }
            }
            out.push(-acc * &inv0);
        }
        Ok(Self { coeffs: out })
    }

    /// `self / other`, as multiplication by the reciprocal.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.reciprocal()?))
    }

    /// Formal derivative; the order drops by one, so order-0 input is refused.
    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return invalid("derivative of an order-0 truncation is unknown");
        }
        Ok(Self::from_fn(self.order() - 1, |i| &self.coeffs[i + 1] * rational::from_int(i + 1)))
    }

    /// Index of the first coefficient where the two series differ, up to the
    /// smaller order.
    pub fn first_mismatch(&self, other: &Self) -> Option<usize> {
        let t = self.order().min(other.order());
        (0..=t).find(|&i| self.coeffs[i] != other.coeffs[i])
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::add(self, rhs)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::sub(self, rhs)
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::mul(self, rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }
}

impl Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&rational::to_string(c))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{from_int, ratio};

    fn ints(v: &[i64]) -> TruncatedSeries {
        TruncatedSeries::new(v.iter().map(|&x| from_int(x)).collect()).unwrap()
    }

    #[test]
    fn product_of_conjugates() {
        let a = ints(&[1, 1, 0, 0]);
        let b = ints(&[1, -1, 0, 0]);
        assert_eq!(&a * &b, ints(&[1, 0, -1, 0]));
        assert_eq!((&a * &ints(&[1, -1])).order(), 1);
    }

    #[test]
    fn exponential_is_its_own_derivative() {
        let mut fact = BigRational::one();
        let e = TruncatedSeries::from_fn(12, |n| {
            if n > 0 {
                fact /= from_int(n);
            }
            fact.clone()
        });
        let d = e.derivative().unwrap();
        assert_eq!(d, e.truncate(11));
        assert!(ints(&[5]).derivative().is_err());
    }

    #[test]
    fn geometric_reciprocal() {
        let s = ints(&[1, -4, 0, 0, 0, 0, 0, 0]).reciprocal().unwrap();
        for n in 0..8 {
            assert_eq!(s.coeff(n), &from_int(4i64.pow(n as u32)));
        }
        assert!(ints(&[0, 1]).reciprocal().is_err());
        let q = ints(&[2, 3, 5]);
        assert_eq!(&q * &q.reciprocal().unwrap(), TruncatedSeries::one(2));
    }

    #[test]
    fn shift_and_scale() {
        let s = ints(&[1, 2, 3]).shift(1).scalar_mul(&ratio(1, 2));
        assert_eq!(s, TruncatedSeries::new(vec![from_int(0), ratio(1, 2), from_int(1)]).unwrap());
        assert_eq!(ints(&[1, 2]).first_mismatch(&ints(&[1, 3, 4])), Some(1));
        assert_eq!(ints(&[1, 2]).first_mismatch(&ints(&[1, 2, 4])), None);
    }
}
