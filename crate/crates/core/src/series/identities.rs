use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::gf::{binomial_sqrt, catalan_gf, g_closed, g_from_recursion, inverse_kernel, HalfExponent};
use super::TruncatedSeries;
use crate::cluster::{left_event_cluster_total, max_position, raw_moments};
use crate::enumerate::catalan_table;
use crate::error::{invalid, Result};
use crate::perm::{is_stack_sortable, AvoidanceClass, Permutation};
use crate::rational::{self, from_int};

/// Both sides of a series identity and where they first disagree.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesIdentity {
    pub name: String,
    pub k: Option<usize>,
    pub i_k: Option<usize>,
    pub truncation: usize,
    pub lhs: TruncatedSeries,
    pub rhs: TruncatedSeries,
    pub first_mismatch: Option<usize>,
}

impl SeriesIdentity {
    fn new(name: &str, k: Option<usize>, i_k: Option<usize>, lhs: TruncatedSeries, rhs: TruncatedSeries) -> Self {
        let first_mismatch = lhs.first_mismatch(&rhs);
        Self {
            name: name.to_string(),
            k,
            i_k,
            truncation: lhs.order().min(rhs.order()),
            lhs,
            rhs,
            first_mismatch,
        }
    }

    pub fn holds(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

fn one(t: usize) -> TruncatedSeries {
    TruncatedSeries::one(t)
}

fn half() -> BigRational {
    rational::ratio(1, 2)
}

/// Identities that do not depend on the cluster length.
fn base_identities(t: usize) -> Vec<SeriesIdentity> {
    let c = catalan_gf(t);
    let inv = inverse_kernel(t);
    let root = binomial_sqrt(HalfExponent::PlusHalf, t);
    let m_half = binomial_sqrt(HalfExponent::MinusHalf, t);
    let m_three = binomial_sqrt(HalfExponent::MinusThreeHalves, t);
    let m_one = binomial_sqrt(HalfExponent::MinusOne, t);
    let one_minus_4t = &one(t) - &TruncatedSeries::monomial(from_int(4), 1, t);
    let table = catalan_table(t);
    let explicit = TruncatedSeries::from_fn(t, |n| {
        if n == 0 {
            from_int(0)
        } else {
            BigRational::from_integer(BigInt::from(table[n].clone()) * (n + 1)) * half()
        }
    });
    vec![
        SeriesIdentity::new(
            "catalan gf coefficients are C_n",
            None,
            None,
            c.clone(),
            TruncatedSeries::from_fn(t, |n| BigRational::from_integer(table[n].clone().into())),
        ),
        SeriesIdentity::new("C = 1 + t C^2", None, None, c.clone(), &one(t) + &(&c * &c).shift(1)),
        SeriesIdentity::new("(1-4t)^(1/2) squared = 1-4t", None, None, &root * &root, one_minus_4t.clone()),
        SeriesIdentity::new("(1-4t)^(-1/2) (1-4t)^(1/2) = 1", None, None, &m_half * &root, one(t)),
        SeriesIdentity::new(
            "(1-4t)^(-3/2) = (1-4t)^(-1/2) (1-4t)^(-1)",
            None,
            None,
            m_three,
            &m_half * &m_one,
        ),
        SeriesIdentity::new(
            "(1-4t)^(-1) = 1/(1-4t)",
            None,
            None,
            m_one,
            one_minus_4t.reciprocal().expect("constant term 1"),
        ),
        SeriesIdentity::new(
            "tC/(1-2tC) = sum (n+1)/2 C_n t^n",
            None,
            None,
            &c.shift(1) * &inv,
            explicit.clone(),
        ),
        SeriesIdentity::new(
            "sum (n+1)/2 C_n t^n = ((1-4t)^(-1/2) - 1)/2",
            None,
            None,
            explicit,
            (&m_half - &one(t)).scalar_mul(&half()),
        ),
        SeriesIdentity::new("1/(1-2tC) = (1-4t)^(-1/2)", None, None, inv, m_half),
    ]
}

/// Identities for cluster length `k`, plus, for each `i_k` given, the one
/// that also involves the position `i_k` of the maximum in a pattern other
/// than `k…1`.
pub fn verify_identities_for(k: usize, i_ks: &[usize], t: usize) -> Result<Vec<SeriesIdentity>> {
    if k < 2 {
        return invalid(format!("need k >= 2, got k={k}"));
    }
    if let Some(i_k) = i_ks.iter().find(|&&i| i < 1 || i > k) {
        return invalid(format!("need 1 <= i_k <= k, got k={k}, i_k={i_k}"));
    }
    if t < 2 * k {
        return invalid(format!("truncation {t} must be at least 2k = {}", 2 * k));
    }
    let inv = inverse_kernel(t);
    let m_half = binomial_sqrt(HalfExponent::MinusHalf, t);
    let m_three = binomial_sqrt(HalfExponent::MinusThreeHalves, t);
    let m_one = binomial_sqrt(HalfExponent::MinusOne, t);
    let table = catalan_table(t + 1);
    let cat = |n: usize| BigRational::from_integer(table[n].clone().into());
    let g = g_closed(k, false, t);
    let g_star = g_closed(k, true, t);
    let mut out = Vec::new();

    out.push(SeriesIdentity::new(
        "t^(k-1)/(1-2tC) = sum (n+1) C_n t^(n+k-1)",
        Some(k),
        None,
        inv.shift(k - 1),
        m_half.shift(k - 1),
    ));
    out.push(SeriesIdentity::new(
        "t^k C/(1-2tC) = t^(k-1) ((1-4t)^(-1/2) - 1)/2",
        Some(k),
        None,
        g.clone(),
        (&m_half - &one(t)).scalar_mul(&half()).shift(k - 1),
    ));
    out.push(SeriesIdentity::new(
        "non-star G = sum (n+1)/2 C_n t^(n+k-1)",
        Some(k),
        None,
        g.clone(),
        TruncatedSeries::from_fn(t, |m| {
            if m < k {
                from_int(0)
            } else {
                let n = m + 1 - k;
                cat(n) * from_int(n + 1) * half()
            }
        }),
    ));
    out.push(SeriesIdentity::new(
        "star G = sum ((n+2)/2 C_(n+1) - (n+1) C_n) t^(n+k-1)",
        Some(k),
        None,
        g_star.clone(),
        TruncatedSeries::from_fn(t, |m| {
            if m + 1 < k {
                from_int(0)
            } else {
                let n = m + 1 - k;
                cat(n + 1) * from_int(n + 2) * half() - cat(n) * from_int(n + 1)
            }
        }),
    ));
    out.push(SeriesIdentity::new("non-star G: recursion = closed form", Some(k), None, g_from_recursion(k, false, t), g.clone()));
    out.push(SeriesIdentity::new("star G: recursion = closed form", Some(k), None, g_from_recursion(k, true, t), g_star));

    let lhs = &(&g * &g).shift(1).scalar_mul(&from_int(2)) * &inv;
    let t2k1 = TruncatedSeries::monomial(from_int(1), 2 * k - 1, t);
    let t2k = TruncatedSeries::monomial(from_int(2), 2 * k, t);
    let rhs = &(&(&t2k1 - &t2k) * &m_three) - &(&t2k1 * &m_one);
    out.push(SeriesIdentity::new(
        "2t G^2/(1-2tC) = (t^(2k-1) - 2t^(2k))(1-4t)^(-3/2) - t^(2k-1)(1-4t)^(-1)",
        Some(k),
        None,
        lhs,
        rhs,
    ));

    let g_inv = &g * &inv;
    let closed = (&m_one - &m_half).scalar_mul(&half());
    for &i_k in i_ks {
        out.push(SeriesIdentity::new(
            "t^(k-i_k+1) G/(1-2tC) = t^(2k-i_k) ((1-4t)^(-1) - (1-4t)^(-1/2))/2",
            Some(k),
            Some(i_k),
            g_inv.shift(k - i_k + 1),
            closed.shift(2 * k - i_k),
        ));
    }
    Ok(out)
}

/// Every identity at truncation `t`: the length-free ones, then for each
/// `2 <= k` with `2k <= t` (up to `k = 6`) and each position `i_k` that a
/// 231-avoiding pattern other than `k…1` can have.
pub fn verify_identities(t: usize) -> Vec<SeriesIdentity> {
    let mut out = base_identities(t);
    for k in (2..=6).filter(|&k| 2 * k <= t) {
        let lowest = if k == 2 { 2 } else { 1 };
        let i_ks: Vec<usize> = (lowest..=k).collect();
        out.extend(verify_identities_for(k, &i_ks, t).expect("k and i_k in range"));
    }
    out
}

fn pattern_info(tau: &Permutation) -> Result<(usize, usize)> {
    let k = tau.len();
    if k < 2 || !is_stack_sortable(tau) || tau.is_decreasing() {
        return invalid(format!("tau={tau} must be a 231-avoiding pattern of length >= 2 other than k…1"));
    }
    Ok((k, max_position(tau)))
}

/// Brute-force cross term `W_m = Σ N_m^{(k;τ)}` over 231-avoiders of length
/// `m` whose last `i_k - 1` entries follow `τ`, next to the coefficients of
/// `G`; `holds` records `W_m <= [t^m] G` for every `m`.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub k: usize,
    pub i_k: usize,
    pub w: TruncatedSeries,
    pub g: TruncatedSeries,
    pub holds: bool,
}

fn w_series(tau: &Permutation, max_m: usize, cap: u64) -> Result<TruncatedSeries> {
    let coeffs = (0..=max_m)
        .map(|m| left_event_cluster_total(m, tau, cap).map(|v| BigRational::from_integer(v.into())))
        .collect::<Result<Vec<_>>>()?;
    TruncatedSeries::new(coeffs)
}

pub fn domination_check(tau: &Permutation, max_m: usize, cap: u64) -> Result<DominationReport> {
    let (k, i_k) = pattern_info(tau)?;
    let w = w_series(tau, max_m, cap)?;
    let g = g_closed(k, false, max_m);
    let holds = w.coeffs().iter().zip(g.coeffs()).all(|(a, b)| a <= b);
    Ok(DominationReport { k, i_k, w, g, holds })
}

/// One row of the second-moment comparison, all values multiplied by `C_n`.
#[derive(Clone, Debug, Serialize)]
pub struct SecondMomentRow {
    pub n: usize,
    /// `Σ (N_n^{(k;τ)})²` over the class, by enumeration.
    #[serde(serialize_with = "rational::serialize")]
    pub brute: BigRational,
    /// Coefficient of `[2tG² + 2t^{k-i_k+1}W + t^k C]/(1-2tC)` with brute-force `W`.
    #[serde(serialize_with = "rational::serialize")]
    pub exact: BigRational,
    /// Same with `W` replaced by 0.
    #[serde(serialize_with = "rational::serialize")]
    pub lower: BigRational,
    /// Same with `W` replaced by `G`.
    #[serde(serialize_with = "rational::serialize")]
    pub upper: BigRational,
    /// Leading part `(n-2k+2)(n-2k+3)C_{n-2k+2}/2 - (n-2k+1)(n-2k+2)C_{n-2k+1}`.
    #[serde(serialize_with = "rational::serialize")]
    pub dominant: BigRational,
}

/// The lower and upper second-moment series (cross term dropped, or replaced
/// by its dominating series `G`).
pub fn second_moment_bounds(k: usize, i_k: usize, t: usize) -> (TruncatedSeries, TruncatedSeries) {
    let c = catalan_gf(t);
    let inv = inverse_kernel(t);
    let g = g_closed(k, false, t);
    let base = &(&g * &g).shift(1).scalar_mul(&from_int(2)) + &c.shift(k);
    let cross = g.shift(k - i_k + 1).scalar_mul(&from_int(2));
    (&base * &inv, &(&base + &cross) * &inv)
}

fn dominant_term(n: usize, k: usize) -> BigRational {
    if n + 2 < 2 * k {
        return from_int(0);
    }
    let table = catalan_table(n + 1);
    let cat = |m: usize| BigRational::from_integer(table[m].clone().into());
    let a = n + 2 - 2 * k;
    let first = cat(a) * from_int(a * (a + 1)) * half();
    if a == 0 {
        return first;
    }
    first - cat(a - 1) * from_int((a - 1) * a)
}

/// Second moments of `N_n^{(k;τ)}` over `S_n^{av(231)}` for `n <= max_n`:
/// brute force, the exact series with the brute-force cross term, and the
/// two bounds.
pub fn second_moment_check(tau: &Permutation, max_n: usize, cap: u64) -> Result<Vec<SecondMomentRow>> {
    let (k, i_k) = pattern_info(tau)?;
    let class = AvoidanceClass::single(Permutation::new(vec![2, 3, 1])?)?;
    let c = catalan_gf(max_n);
    let inv = inverse_kernel(max_n);
    let g = g_closed(k, false, max_n);
    let w = w_series(tau, max_n, cap)?;
    let base = &(&g * &g).shift(1).scalar_mul(&from_int(2)) + &c.shift(k);
    let exact = &(&base + &w.shift(k - i_k + 1).scalar_mul(&from_int(2))) * &inv;
    let (lower, upper) = second_moment_bounds(k, i_k, max_n);
    (0..=max_n)
        .map(|n| {
            let brute = if n == 0 {
                from_int(0)
            } else {
                let (_, sq, _) = raw_moments(n, tau, &class, cap)?;
                BigRational::from_integer(BigInt::from(sq))
            };
            Ok(SecondMomentRow {
                n,
                brute,
                exact: exact.coeff(n).clone(),
                lower: lower.coeff(n).clone(),
                upper: upper.coeff(n).clone(),
                dominant: dominant_term(n, k),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_ENUM_CAP as CAP;

    #[test]
    fn all_identities_hold_at_40() {
        let ids = verify_identities(40);
        assert!(ids.len() > 20);
        for id in &ids {
            assert!(id.holds(), "{} (k={:?}, i_k={:?}) first mismatch at {:?}", id.name, id.k, id.i_k, id.first_mismatch);
        }
        let explicit = ids.iter().find(|i| i.name.starts_with("tC/(1-2tC)")).unwrap();
        assert_eq!(explicit.rhs.coeff(4), &from_int(35));
    }

    #[test]
    fn a_wrong_identity_is_caught() {
        let g = g_closed(3, false, 20);
        let id = SeriesIdentity::new("bogus", Some(3), None, g.clone(), g.shift(1));
        assert_eq!(id.first_mismatch, Some(3));
    }

    #[test]
    fn second_moment_matches_brute_force() {
        let tau: Permutation = "12".parse().unwrap();
        let rows = second_moment_check(&tau, 9, CAP).unwrap();
        for r in &rows {
            assert_eq!(r.brute, r.exact, "n={}", r.n);
            assert!(r.lower <= r.brute && r.brute <= r.upper, "n={}", r.n);
        }
        let d = domination_check(&tau, 9, CAP).unwrap();
        assert!(d.holds);
    }
}
