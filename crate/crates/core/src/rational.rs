//! Helpers for exact rationals and their text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serializer;

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn from_int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Lowest-terms `p/q` form; integers are still written with `/1`.
pub fn to_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Float value of a rational whose numerator and denominator may both be
/// far outside `f64` range.
pub fn to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Scale both sides down to ~60 significant bits before dividing.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (q.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&to_string(q))
}

pub fn serialize_bigint<S: Serializer>(
    v: &num_bigint::BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_is_lowest_terms() {
        assert_eq!(to_string(&ratio(10, 14)), "5/7");
        assert_eq!(to_string(&from_int(3)), "3/1");
        assert_eq!(parse("10/14"), Some(ratio(5, 7)));
        assert_eq!(parse("4"), Some(from_int(4)));
        assert_eq!(parse("1/0"), None);
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = BigInt::from(3) * BigInt::from(2).pow(2000);
        let q = BigRational::new(big.clone(), big * BigInt::from(4));
        assert!((to_f64(&q) - 0.25).abs() < 1e-15);
    }
}
