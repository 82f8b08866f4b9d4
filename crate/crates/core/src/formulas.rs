//! Closed-form expectations of cluster counts and their large-n constants.
//!
//! Classes avoiding a single pattern of length three are reduced to `{231}`
//! or `{321}` by reversal/complementation; classes of simple patterns use the
//! count ratio `(n-k+1)|S_{n-k+1}| / |S_n|`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::enumerate::{catalan_table, count_class, sw_ratio};
use crate::error::{invalid, Result};
use crate::perm::{avoids_all, contains, is_simple, AvoidanceClass, Permutation, Symmetry};
use crate::rational::{self, from_int, ratio, to_f64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Star,
    NonStar,
    /// The count-ratio formula for classes of simple patterns.
    Multi,
    /// `τ` contains a forbidden pattern, so the count is identically zero.
    Excluded,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Star => "star",
            Branch::NonStar => "nonstar",
            Branch::Multi => "multi",
            Branch::Excluded => "excluded",
        })
    }
}

/// An exact expectation together with the formula branch that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    #[serde(serialize_with = "rational::serialize")]
    pub value: BigRational,
    pub branch: Branch,
}

impl Evaluation {
    /// Set when `τ` was not in the class and the value is the trivial zero.
    pub fn excluded(&self) -> bool {
        self.branch == Branch::Excluded
    }
}

fn check_range(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return invalid(format!("need 2 <= k <= n, got n={n}, k={k}"));
    }
    Ok(())
}

fn s3_pattern(eta: &Permutation) -> Result<()> {
    if eta.len() != 3 {
        return invalid(format!("eta={eta} is not a pattern of length 3"));
    }
    Ok(())
}

/// The distinguished monotone pattern: `k…1` for 231, 312 and 123, `1…k`
/// for 132, 213 and 321.
pub fn tau_star(eta: &Permutation, k: usize) -> Result<Permutation> {
    s3_pattern(eta)?;
    if k < 2 {
        return invalid(format!("k={k} must be at least 2"));
    }
    Ok(match eta.as_slice() {
        [2, 3, 1] | [3, 1, 2] | [1, 2, 3] => Permutation::decreasing(k),
        _ => Permutation::identity(k),
    })
}

/// The symmetry carrying `η` to 231 or 321, if any is needed.
fn canonical_symmetry(eta: &Permutation) -> Option<Symmetry> {
    match eta.as_slice() {
        [1, 3, 2] | [1, 2, 3] => Some(Symmetry::Reverse),
        [2, 1, 3] => Some(Symmetry::Complement),
        [3, 1, 2] => Some(Symmetry::ReverseComplement),
        _ => None,
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn big(v: &BigUint) -> BigInt {
    BigInt::from(v.clone())
}

/// Uniform measure on `S_n`: `(n-k+1)·k!(n-k)!/n!` for one start value and
/// `(n-k+1)²·k!(n-k)!/n!` for the expected cluster count.
pub fn uniform_baseline(n: usize, k: usize) -> Result<(BigRational, BigRational)> {
    check_range(n, k)?;
    let base = BigRational::new(big(&(factorial(k) * factorial(n - k))), big(&factorial(n)));
    let m = from_int(n - k + 1);
    let per_l = &base * &m;
    let total = &per_l * &m;
    Ok((per_l, total))
}

/// `E N_n^{(k;τ)}` over `S_n^{av(231)}`, star branch iff `τ = k…1`.
fn e231(n: usize, k: usize, star: bool, c: &[BigUint]) -> BigRational {
    let cn = big(&c[n]);
    let a = n - k + 1;
    let nonstar = BigRational::new(BigInt::from(a + 1) * big(&c[a]), BigInt::from(2) * &cn);
    if !star {
        return nonstar;
    }
    let first = BigRational::new(BigInt::from(a + 2) * big(&c[a + 1]), BigInt::from(2) * &cn);
    first - nonstar * from_int(2)
}

/// `E N_n^{(k;τ)}` over `S_n^{av(321)}`, star branch iff `τ = 1…k`.
fn e321(n: usize, k: usize, star: bool, c: &[BigUint]) -> BigRational {
    let a = n - k + 1;
    let base = BigRational::new(big(&c[a]), big(&c[n]));
    if star {
        base * from_int(a)
    } else {
        base
    }
}

/// Exact `E_n^{av(η)} N_n^{(k;τ)}` for `η ∈ S_3`. Patterns `τ` containing
/// `η` give zero with [`Branch::Excluded`].
pub fn expectation_s3(n: usize, k: usize, tau: &Permutation, eta: &Permutation) -> Result<Evaluation> {
    check_range(n, k)?;
    s3_pattern(eta)?;
    if tau.len() != k {
        return invalid(format!("tau={tau} does not have length k={k}"));
    }
    if contains(tau, eta) {
        return Ok(Evaluation { value: BigRational::zero(), branch: Branch::Excluded });
    }
    let (eta, tau) = match canonical_symmetry(eta) {
        Some(s) => (eta.symmetry(s), tau.symmetry(s)),
        None => (eta.clone(), tau.clone()),
    };
    let c = catalan_table(n + 1);
    let (value, star) = if eta.as_slice() == [2, 3, 1] {
        let star = tau.is_decreasing();
        (e231(n, k, star, &c), star)
    } else {
        let star = tau.is_identity();
        (e321(n, k, star, &c), star)
    };
    let branch = if star { Branch::Star } else { Branch::NonStar };
    Ok(Evaluation { value, branch })
}

/// Exact `E_n^{av(η)} N_n^{(k)}` for `η ∈ S_3`.
pub fn expectation_s3_total(n: usize, k: usize, eta: &Permutation) -> Result<BigRational> {
    check_range(n, k)?;
    s3_pattern(eta)?;
    let c = catalan_table(n + 1);
    let a = n - k + 1;
    let ck = big(&c[k]);
    let ca = big(&c[a]);
    let cn = big(&c[n]);
    let monotone = matches!(eta.as_slice(), [1, 2, 3] | [3, 2, 1]);
    Ok(if monotone {
        BigRational::new(ca * (BigInt::from(n - k) + ck), cn)
    } else {
        BigRational::new(
            ca * (BigInt::from(n - k + 2) * ck + BigInt::from(n - k)),
            BigInt::from(2) * cn,
        )
    })
}

/// Rejects classes that are not made of simple patterns of length ≥ 4.
pub fn check_simple_class(class: &AvoidanceClass) -> Result<()> {
    if class.is_unrestricted() {
        return invalid("the class needs at least one pattern");
    }
    for p in class.patterns() {
        if p.len() < 4 {
            return invalid(format!("pattern {p} has length {} < 4", p.len()));
        }
        if !is_simple(p) {
            return invalid(format!("pattern {p} is not simple"));
        }
    }
    Ok(())
}

/// `(n-k+1)|S_{n-k+1}^{av(c)}| / |S_n^{av(c)}|` for a class of simple
/// patterns; the same for every admissible `τ`. Class sizes beyond the
/// Catalan case are enumerated, subject to `cap`.
pub fn expectation_simple_multi(
    n: usize,
    k: usize,
    tau: &Permutation,
    class: &AvoidanceClass,
    cap: u64,
) -> Result<Evaluation> {
    check_range(n, k)?;
    check_simple_class(class)?;
    if tau.len() != k {
        return invalid(format!("tau={tau} does not have length k={k}"));
    }
    if !avoids_all(tau, class) {
        return Ok(Evaluation { value: BigRational::zero(), branch: Branch::Excluded });
    }
    Ok(Evaluation { value: simple_ratio(n, k, class, cap)?, branch: Branch::Multi })
}

fn simple_ratio(n: usize, k: usize, class: &AvoidanceClass, cap: u64) -> Result<BigRational> {
    let a = n - k + 1;
    let num = big(&count_class(a, class, cap)?) * BigInt::from(a);
    let den = big(&count_class(n, class, cap)?);
    Ok(BigRational::new(num, den))
}

/// `E_n^{av(c)} N_n^{(k)}` for a class of simple patterns: the per-pattern
/// value times `|S_k^{av(c)}|`.
pub fn expectation_simple_multi_total(
    n: usize,
    k: usize,
    class: &AvoidanceClass,
    cap: u64,
) -> Result<BigRational> {
    check_range(n, k)?;
    check_simple_class(class)?;
    let sk = BigRational::from_integer(big(&count_class(k, class, cap)?));
    Ok(simple_ratio(n, k, class, cap)? * sk)
}

/// Closed-form expectation for any class this module covers: a single
/// pattern of length three, or a set of simple patterns of length ≥ 4.
pub fn expectation(
    n: usize,
    k: usize,
    tau: &Permutation,
    class: &AvoidanceClass,
    cap: u64,
) -> Result<Evaluation> {
    match class.single_s3() {
        Some(eta) => expectation_s3(n, k, tau, eta),
        None => expectation_simple_multi(n, k, tau, class, cap),
    }
}

/// Closed-form `E N_n^{(k)}` for the same classes as [`expectation`].
pub fn expectation_total(n: usize, k: usize, class: &AvoidanceClass, cap: u64) -> Result<BigRational> {
    match class.single_s3() {
        Some(eta) => expectation_s3_total(n, k, eta),
        None => expectation_simple_multi_total(n, k, class, cap),
    }
}

/// Which limit an [`AsymptoticReport`] is about. `Nonmon*` uses the class
/// `{231}`, `Mon*` the class `{321}`, `Separable*` the class `{2413,3142}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticKind {
    NonmonNonstar,
    NonmonStar,
    NonmonTotal,
    MonNonstar,
    MonStar,
    MonTotal,
    Separable,
    SeparableTotal,
    SwGeneral,
}

impl std::str::FromStr for AsymptoticKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "nonmon_nonstar" => Self::NonmonNonstar,
            "nonmon_star" => Self::NonmonStar,
            "nonmon_total" => Self::NonmonTotal,
            "mon_nonstar" => Self::MonNonstar,
            "mon_star" => Self::MonStar,
            "mon_total" => Self::MonTotal,
            "separable" => Self::Separable,
            "separable_total" => Self::SeparableTotal,
            "sw_general" => Self::SwGeneral,
            other => return invalid(format!("unknown asymptotic kind '{other}'")),
        })
    }
}

/// A limit constant. Irrational constants are kept symbolic and only
/// rendered as floats on demand.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Constant {
    Rational {
        #[serde(serialize_with = "rational::serialize")]
        value: BigRational,
    },
    /// `factor · (3 − 2√2)^exponent`.
    SilverPower {
        #[serde(serialize_with = "rational::serialize")]
        factor: BigRational,
        exponent: u32,
    },
    /// `(1/r)^exponent` with `r` the count ratio at length `from_n`.
    Estimated {
        #[serde(serialize_with = "rational::serialize")]
        ratio: BigRational,
        exponent: u32,
        from_n: usize,
    },
}

impl Constant {
    pub fn to_f64(&self) -> f64 {
        match self {
            Constant::Rational { value } => to_f64(value),
            Constant::SilverPower { factor, exponent } => {
                to_f64(factor) * (3.0 - 2.0 * std::f64::consts::SQRT_2).powi(*exponent as i32)
            }
            Constant::Estimated { ratio, exponent, .. } => to_f64(ratio).powi(-(*exponent as i32)),
        }
    }

    /// Fifteen significant digits.
    pub fn render(&self) -> String {
        format!("{:.14e}", self.to_f64())
    }
}

impl std::fmt::Display for Constant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Constant::Rational { value } => write!(f, "{}", rational::to_string(value)),
            Constant::SilverPower { factor, exponent } => {
                write!(f, "{} * (3-2*sqrt(2))^{exponent}", rational::to_string(factor))
            }
            Constant::Estimated { ratio, exponent, from_n } => {
                write!(f, "(1/({}))^{exponent} [count ratio at n={from_n}]", rational::to_string(ratio))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticPoint {
    pub n: usize,
    /// The normalized exact value (`E/n` or `E`, see the report).
    #[serde(serialize_with = "rational::serialize")]
    pub exact: BigRational,
    pub float: f64,
    pub relative_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub kind: AsymptoticKind,
    pub k: usize,
    pub class: AvoidanceClass,
    pub constant: Constant,
    pub constant_float: String,
    /// `"E/n"` or `"E"`.
    pub normalization: &'static str,
    pub points: Vec<AsymptoticPoint>,
}

fn pow4(e: usize) -> BigInt {
    BigInt::from(4).pow(e as u32)
}

/// The limit constant for `kind` with exact finite-n evaluations at each `n`
/// of `ns` (values with `n < k` are skipped). `class` is only read for
/// [`AsymptoticKind::SwGeneral`], which needs a class of simple patterns.
pub fn asymptotic_constants(
    kind: AsymptoticKind,
    k: usize,
    ns: &[usize],
    class: Option<&AvoidanceClass>,
    cap: u64,
) -> Result<AsymptoticReport> {
    use AsymptoticKind::*;
    if k < 2 {
        return invalid(format!("k={k} must be at least 2"));
    }
    let c231: Permutation = Permutation::from_vec_unchecked(vec![2, 3, 1]);
    let c321: Permutation = Permutation::decreasing(3);
    let separable: AvoidanceClass = "2413+3142".parse()?;
    let cls = match kind {
        NonmonNonstar | NonmonStar | NonmonTotal => AvoidanceClass::single(c231.clone())?,
        MonNonstar | MonStar | MonTotal => AvoidanceClass::single(c321.clone())?,
        Separable | SeparableTotal => separable,
        SwGeneral => match class {
            Some(c) => {
                check_simple_class(c)?;
                c.clone()
            }
            None => return invalid("sw_general needs a class"),
        },
    };
    let q4 = BigRational::new(BigInt::one(), pow4(k - 1));
    let ck = BigInt::from(catalan_table(k)[k].clone());
    let constant = match kind {
        NonmonNonstar => Constant::Rational { value: &q4 / from_int(2) },
        NonmonStar | MonNonstar | MonStar | MonTotal => Constant::Rational { value: q4.clone() },
        NonmonTotal => Constant::Rational { value: &q4 * BigRational::new(ck + 1, BigInt::from(2)) },
        Separable => Constant::SilverPower { factor: BigRational::one(), exponent: (k - 1) as u32 },
        SeparableTotal => Constant::SilverPower {
            factor: BigRational::from_integer(big(&count_class(k, &cls, cap)?)),
            exponent: (k - 1) as u32,
        },
        SwGeneral => {
            let from_n = ns.iter().copied().max().unwrap_or(k).max(1);
            Constant::Estimated { ratio: sw_ratio(from_n, &cls, cap)?, exponent: (k - 1) as u32, from_n }
        }
    };
    let per_n = !matches!(kind, MonNonstar);
    let cf = constant.to_f64();
    let mut points = Vec::new();
    for &n in ns.iter().filter(|&&n| n >= k) {
        let e = match kind {
            NonmonNonstar | MonNonstar => {
                let eta = if kind == NonmonNonstar { &c231 } else { &c321 };
                let star = tau_star(eta, k)?;
                // 1…k for 231; 21 3…k for 321.
                let mut other: Vec<u32> = (1..=k as u32).collect();
                if star.is_identity() {
                    other.swap(0, 1);
                }
                let other = Permutation::from_vec_unchecked(other);
                expectation_s3(n, k, &other, eta)?.value
            }
            NonmonStar | MonStar => {
                let eta = if kind == NonmonStar { &c231 } else { &c321 };
                expectation_s3(n, k, &tau_star(eta, k)?, eta)?.value
            }
            NonmonTotal => expectation_s3_total(n, k, &c231)?,
            MonTotal => expectation_s3_total(n, k, &c321)?,
            Separable | SwGeneral => simple_ratio(n, k, &cls, cap)?,
            SeparableTotal => expectation_simple_multi_total(n, k, &cls, cap)?,
        };
        let exact = if per_n { e / from_int(n) } else { e };
        let float = to_f64(&exact);
        points.push(AsymptoticPoint { n, relative_gap: ((float - cf) / cf).abs(), float, exact });
    }
    Ok(AsymptoticReport {
        kind,
        k,
        class: cls,
        constant_float: constant.render(),
        constant,
        normalization: if per_n { "E/n" } else { "E" },
        points,
    })
}

/// The two leading terms of `E N_n^{(k)}` over `S_n^{av(321)}` when `k`
/// grows with `n`: the linear term `n / 4^{k-1}` and the Catalan term
/// `4 / (√π k^{3/2})`, reported separately next to the exact value.
#[derive(Clone, Debug, Serialize)]
pub struct GrowingKTerms {
    pub n: usize,
    pub k: usize,
    #[serde(serialize_with = "rational::serialize")]
    pub exact: BigRational,
    pub exact_float: f64,
    pub linear_term: f64,
    pub catalan_term: f64,
}

pub fn growing_k_terms(n: usize, k: usize) -> Result<GrowingKTerms> {
    let exact = expectation_s3_total(n, k, &Permutation::decreasing(3))?;
    let linear_term = to_f64(&ratio(BigInt::from(n), pow4(k - 1)));
    let catalan_term = 4.0 / (std::f64::consts::PI.sqrt() * (k as f64).powf(1.5));
    Ok(GrowingKTerms { n, k, exact_float: to_f64(&exact), exact, linear_term, catalan_term })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_ENUM_CAP as CAP;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn tau_star_examples() {
        assert_eq!(tau_star(&p("231"), 4).unwrap(), p("4321"));
        assert_eq!(tau_star(&p("321"), 4).unwrap(), p("1234"));
        assert_eq!(tau_star(&p("123"), 2).unwrap(), p("21"));
        assert!(tau_star(&p("2413"), 3).is_err());
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(uniform_baseline(4, 2).unwrap().1, ratio(3, 2));
        for k in 2..8 {
            assert_eq!(uniform_baseline(k, k).unwrap().1, from_int(1));
        }
        assert_eq!(uniform_baseline(10, 3).unwrap().1, ratio(8, 15));
        assert!(uniform_baseline(3, 4).is_err());
    }

    #[test]
    fn s3_examples() {
        let e = expectation_s3(4, 2, &p("12"), &p("231")).unwrap();
        assert_eq!((e.value, e.branch), (ratio(5, 7), Branch::NonStar));
        let e = expectation_s3(4, 2, &p("21"), &p("231")).unwrap();
        assert_eq!((e.value, e.branch), (ratio(15, 14), Branch::Star));
        let e = expectation_s3(4, 2, &p("12"), &p("321")).unwrap();
        assert_eq!((e.value, e.branch), (ratio(15, 14), Branch::Star));
        assert_eq!(expectation_s3_total(4, 2, &p("231")).unwrap(), ratio(25, 14));
        assert_eq!(expectation_s3_total(4, 2, &p("321")).unwrap(), ratio(10, 7));
        let e = expectation_s3(5, 3, &p("231"), &p("231")).unwrap();
        assert!(e.excluded() && e.value.is_zero());
    }

    #[test]
    fn simple_examples() {
        let sep: AvoidanceClass = "2413+3142".parse().unwrap();
        let e = expectation_simple_multi(6, 3, &p("132"), &sep, CAP).unwrap();
        assert_eq!((e.value, e.branch), (ratio(44, 197), Branch::Multi));
        assert_eq!(expectation_simple_multi_total(6, 3, &sep, CAP).unwrap(), ratio(264, 197));
        assert_eq!(expectation_simple_multi_total(6, 2, &sep, CAP).unwrap(), ratio(900, 394));
        let bad: AvoidanceClass = "2413+231".parse().unwrap();
        let err = expectation_simple_multi(6, 3, &p("132"), &bad, CAP).unwrap_err();
        assert!(err.to_string().contains("231"));
        let bad: AvoidanceClass = "2143".parse().unwrap();
        assert!(expectation_simple_multi(6, 3, &p("132"), &bad, CAP).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        let r = asymptotic_constants(AsymptoticKind::NonmonNonstar, 2, &[2000], None, CAP).unwrap();
        assert_eq!(r.constant, Constant::Rational { value: ratio(1, 8) });
        assert!(r.points[0].relative_gap < 0.02);
        let r = asymptotic_constants(AsymptoticKind::MonNonstar, 3, &[2000], None, CAP).unwrap();
        assert_eq!(r.normalization, "E");
        assert!(r.points[0].relative_gap < 0.02);
        let r = asymptotic_constants(AsymptoticKind::Separable, 2, &[6, 10], None, CAP).unwrap();
        assert_eq!(r.constant_float, "1.71572875253810e-1");
        assert!(r.points[1].relative_gap < r.points[0].relative_gap);
        assert!("bogus".parse::<AsymptoticKind>().is_err());
    }

    #[test]
    fn growing_k_terms_add_up_roughly() {
        let t = growing_k_terms(2000, 6).unwrap();
        let approx = t.linear_term + t.catalan_term;
        assert!((t.exact_float - approx).abs() / t.exact_float < 0.05);
    }
}
