//! Cluster occurrences and brute-force exact moments over avoidance classes.
//!
//! Everything here is computed by visiting class members one at a time and
//! accumulating integer totals, which makes these functions the reference
//! oracle for the closed forms in [`crate::formulas`].

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::enumerate::{fold_class, ClassIter};
use crate::error::{invalid, Result};
use crate::perm::{AvoidanceClass, Permutation};
use crate::rational::{self, ratio};

/// A window of `length` positions starting at `start_pos` holding the
/// values `start_value ..= start_value + length - 1` in order `pattern`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterOccurrence {
    pub start_value: usize,
    pub start_pos: usize,
    pub length: usize,
    pub pattern: Permutation,
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return invalid(format!("cluster length k={k} must satisfy 2 <= k <= n={n}"));
    }
    Ok(())
}

/// Sliding-window scan; `tau` restricts to windows with that pattern.
/// Words shorter than `k` have no clusters.
pub(crate) fn count_windows(w: &[u32], k: usize, tau: Option<&[u32]>) -> usize {
    if w.len() < k || k == 0 {
        return 0;
    }
    let mut count = 0;
    for start in 0..=w.len() - k {
        let win = &w[start..start + k];
        let (lo, hi) = win
            .iter()
            .fold((u32::MAX, 0), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if (hi - lo) as usize != k - 1 {
            continue;
        }
        match tau {
            None => count += 1,
            Some(t) => {
                if win.iter().zip(t).all(|(&v, &t)| v - lo + 1 == t) {
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn occurrences(sigma: &Permutation, k: usize) -> Result<Vec<ClusterOccurrence>> {
    let w = sigma.as_slice();
    check_k(w.len(), k)?;
    let mut out = Vec::new();
    for start in 0..=w.len() - k {
        let win = &w[start..start + k];
        let lo = *win.iter().min().expect("k >= 2");
        let hi = *win.iter().max().expect("k >= 2");
        if (hi - lo) as usize == k - 1 {
            let pattern = win.iter().map(|&v| v - lo + 1).collect();
            out.push(ClusterOccurrence {
                start_value: lo as usize,
                start_pos: start + 1,
                length: k,
                pattern: Permutation::from_vec_unchecked(pattern),
            });
        }
    }
    Ok(out)
}

/// `N_n^{(k)}(σ)`.
pub fn count_n(sigma: &Permutation, k: usize) -> Result<usize> {
    check_k(sigma.len(), k)?;
    Ok(count_windows(sigma.as_slice(), k, None))
}

/// `N_n^{(k;τ)}(σ)`.
pub fn count_n_tau(sigma: &Permutation, k: usize, tau: &Permutation) -> Result<usize> {
    check_k(sigma.len(), k)?;
    if tau.len() != k {
        return invalid(format!("pattern {tau} does not have length k={k}"));
    }
    Ok(count_windows(sigma.as_slice(), k, Some(tau.as_slice())))
}

/// Exact first and second moments of a cluster count under the uniform
/// measure on a class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub k: usize,
    pub tau: Option<Permutation>,
    pub class: AvoidanceClass,
    #[serde(serialize_with = "rational::serialize")]
    pub mean: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub second_moment: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub variance: BigRational,
    #[serde(serialize_with = "rational::serialize_bigint")]
    pub class_size: BigUint,
}

/// Brute-force moments of `N_n^{(k)}` (or `N_n^{(k;τ)}` when `tau` is given)
/// over `S_n^{av(c)}`.
pub fn exact_moments(
    n: usize,
    k: usize,
    tau: Option<&Permutation>,
    class: &AvoidanceClass,
    cap: u64,
) -> Result<MomentReport> {
    check_k(n, k)?;
    if let Some(t) = tau {
        if t.len() != k {
            return invalid(format!("pattern {t} does not have length k={k}"));
        }
    }
    let tau_w = tau.map(|t| t.as_slice());
    let ((sum, sum_sq), size) = fold_class(
        n,
        class,
        cap,
        || (0u128, 0u128),
        |acc, w| {
            let c = count_windows(w, k, tau_w) as u128;
            acc.0 += c;
            acc.1 += c * c;
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    let mean = ratio(sum, size);
    let second_moment = ratio(sum_sq, size);
    let variance = &second_moment - &mean * &mean;
    debug_assert!(variance >= BigRational::zero());
    Ok(MomentReport {
        n,
        k,
        tau: tau.cloned(),
        class: class.clone(),
        mean,
        second_moment,
        variance,
        class_size: BigUint::from(size),
    })
}

/// Per-pattern totals of cluster counts gathered in one pass over a class.
#[derive(Clone, Debug, Default)]
pub struct PatternTally {
    pub class_size: u64,
    /// pattern → (Σ N^{(k;τ)}, Σ (N^{(k;τ)})²)
    pub per_pattern: BTreeMap<Permutation, (u64, u64)>,
    /// (Σ N^{(k)}, Σ (N^{(k)})²)
    pub total: (u64, u64),
}

impl PatternTally {
    /// Exact mean of `N^{(k;τ)}`; zero for patterns never seen.
    pub fn mean(&self, tau: &Permutation) -> BigRational {
        let s = self.per_pattern.get(tau).map_or(0, |p| p.0);
        ratio(s, self.class_size)
    }

    pub fn total_mean(&self) -> BigRational {
        ratio(self.total.0, self.class_size)
    }
}

/// One enumeration pass tallying every cluster pattern of length `k`.
pub fn tally_patterns(n: usize, k: usize, class: &AvoidanceClass, cap: u64) -> Result<PatternTally> {
    check_k(n, k)?;
    let (mut tally, size) = fold_class(
        n,
        class,
        cap,
        PatternTally::default,
        |acc, w| {
            let mut per: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
            let mut total = 0u64;
            for start in 0..=w.len() - k {
                let win = &w[start..start + k];
                let lo = *win.iter().min().expect("k >= 2");
                let hi = *win.iter().max().expect("k >= 2");
                if (hi - lo) as usize == k - 1 {
                    *per.entry(win.iter().map(|&v| v - lo + 1).collect()).or_default() += 1;
                    total += 1;
                }
            }
            for (p, c) in per {
                let e = acc
                    .per_pattern
                    .entry(Permutation::from_vec_unchecked(p))
                    .or_default();
                e.0 += c;
                e.1 += c * c;
            }
            acc.total.0 += total;
            acc.total.1 += total * total;
        },
        |mut a, b| {
            for (p, (s, q)) in b.per_pattern {
                let e = a.per_pattern.entry(p).or_default();
                e.0 += s;
                e.1 += q;
            }
            a.total.0 += b.total.0;
            a.total.1 += b.total.1;
            a
        },
    )?;
    tally.class_size = size;
    Ok(tally)
}

/// Does `w` realise the event that values `l..l+k-1` occupy consecutive
/// positions (in order `tau`, when given)?
fn has_event(w: &[u32], pos_of: &mut [usize], l: usize, k: usize, tau: Option<&[u32]>) -> bool {
    for (i, &v) in w.iter().enumerate() {
        pos_of[v as usize] = i;
    }
    let positions = &pos_of[l..l + k];
    let first = *positions.iter().min().expect("k >= 1");
    let last = *positions.iter().max().expect("k >= 1");
    if last - first != k - 1 {
        return false;
    }
    match tau {
        None => true,
        Some(t) => t
            .iter()
            .enumerate()
            .all(|(i, &ti)| w[first + i] as usize == l - 1 + ti as usize),
    }
}

/// Number of class members in the event, together with the class size.
pub fn event_count(
    n: usize,
    k: usize,
    l: usize,
    tau: Option<&Permutation>,
    class: &AvoidanceClass,
    cap: u64,
) -> Result<(u64, u64)> {
    check_k(n, k)?;
    if l < 1 || l > n - k + 1 {
        return invalid(format!("start value l={l} must satisfy 1 <= l <= {}", n - k + 1));
    }
    if let Some(t) = tau {
        if t.len() != k {
            return invalid(format!("pattern {t} does not have length k={k}"));
        }
    }
    let tau_w = tau.map(|t| t.as_slice());
    let (hits, size) = fold_class(
        n,
        class,
        cap,
        || (0u64, vec![0usize; n + 1]),
        |acc, w| {
            if has_event(w, &mut acc.1, l, k, tau_w) {
                acc.0 += 1;
            }
        },
        |a, b| (a.0 + b.0, a.1),
    )?;
    Ok((hits.0, size))
}

/// Exact probability, under the uniform measure on `S_n^{av(c)}`, that the
/// values `l..l+k-1` sit in consecutive positions (with pattern `tau`).
pub fn event_probability(
    n: usize,
    k: usize,
    l: usize,
    tau: Option<&Permutation>,
    class: &AvoidanceClass,
    cap: u64,
) -> Result<BigRational> {
    let (hits, size) = event_count(n, k, l, tau, class, cap)?;
    Ok(ratio(hits, size))
}

/// Members of `S_m^{av(231)}` as plain words; `m = 0` gives the empty word.
fn class_231_words(m: usize) -> Vec<Vec<u32>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let c = AvoidanceClass::single(Permutation::from_vec_unchecked(vec![2, 3, 1]))
        .expect("231 is a valid pattern");
    let mut it = ClassIter::new(m, &c);
    let mut out = Vec::new();
    while let Some(w) = it.advance() {
        out.push(w.to_vec());
    }
    out
}

/// Position (1-based) of the largest entry of `tau`.
pub fn max_position(tau: &Permutation) -> usize {
    tau.inverse().at(tau.len()) as usize
}

/// The left event on `S_m^{av(231)}`: the last `i_k - 1` entries are
/// `τ_1 .. τ_{i_k-1}` shifted up by `m - i_k + 1`.
pub(crate) fn in_left_event(w: &[u32], tau: &[u32], i_k: usize) -> bool {
    let m = w.len();
    if m + 1 < i_k {
        return false;
    }
    let shift = (m + 1 - i_k) as u32;
    (1..i_k).all(|l| w[m + l - i_k] == tau[l - 1] + shift)
}

/// The right event on `S_m`: the first `k - 1` entries are `m, m-1, …`.
fn in_right_event(w: &[u32], k: usize) -> bool {
    let m = w.len();
    m + 1 >= k && (1..k).all(|l| w[l - 1] as usize == m + 1 - l)
}

fn histogram(values: impl IntoIterator<Item = usize>) -> (Vec<u64>, u64) {
    let mut h: Vec<u64> = Vec::new();
    let mut total = 0;
    for v in values {
        if h.len() <= v {
            h.resize(v + 1, 0);
        }
        h[v] += 1;
        total += 1;
    }
    (h, total)
}

fn pmf((h, total): (Vec<u64>, u64)) -> Vec<BigRational> {
    h.into_iter().map(|c| ratio(c, total)).collect()
}

/// Both sides of the conditional decomposition of `N_n^{(k;τ)}` given
/// `σ_j = n` over `S_n^{av(231)}`: the exact conditional pmf, and the pmf of
/// the independent sum built from the smaller classes on each side of the
/// maximum plus the correction indicator.
pub fn conditional_pmfs(
    n: usize,
    k: usize,
    tau: &Permutation,
    j: usize,
    cap: u64,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    check_k(n, k)?;
    if tau.len() != k {
        return invalid(format!("pattern {tau} does not have length k={k}"));
    }
    if !crate::perm::is_stack_sortable(tau) {
        return invalid(format!("pattern {tau} contains 231"));
    }
    if j < 1 || j > n {
        return invalid(format!("position j={j} must satisfy 1 <= j <= n={n}"));
    }
    let class = AvoidanceClass::single(Permutation::from_vec_unchecked(vec![2, 3, 1]))?;
    let t = tau.as_slice();

    let (lhs, _) = fold_class(
        n,
        &class,
        cap,
        Vec::new,
        |acc: &mut Vec<usize>, w| {
            if w[j - 1] as usize == n {
                acc.push(count_windows(w, k, Some(t)));
            }
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )?;

    let left = class_231_words(j - 1);
    let right = class_231_words(n - j);
    if (left.len() as u64).saturating_mul(right.len() as u64) > cap {
        return Err(crate::Error::ResourceLimit {
            what: format!("pairs for n={n}, j={j}"),
            cap,
        });
    }
    let i_k = max_position(tau);
    let star = tau.is_decreasing();
    let sigma_star: Vec<u32> = crate::perm::reduce_distinct(&t[i_k..]);
    let mut rhs = Vec::with_capacity(left.len() * right.len());
    for lw in &left {
        let nl = count_windows(lw, k, Some(t));
        let left_event = in_left_event(lw, t, i_k);
        for rw in &right {
            let nr = count_windows(rw, k, Some(t));
            let extra = if star {
                j + k <= n + 1 && in_right_event(rw, k)
            } else {
                j + k == n + i_k && left_event && *rw == sigma_star
            };
            rhs.push(nl + nr + usize::from(extra));
        }
    }
    Ok((pmf(histogram(lhs)), pmf(histogram(rhs))))
}

/// Full-distribution check of the decomposition of `N_n^{(k;τ)}` conditioned
/// on the maximum sitting at position `j`, over the 231-avoiding class.
pub fn conditional_decomposition_check(
    n: usize,
    k: usize,
    tau: &Permutation,
    j: usize,
    cap: u64,
) -> Result<bool> {
    let (lhs, rhs) = conditional_pmfs(n, k, tau, j, cap)?;
    let trim = |mut v: Vec<BigRational>| {
        while v.last().is_some_and(|x| x.is_zero()) {
            v.pop();
        }
        v
    };
    Ok(trim(lhs) == trim(rhs))
}

/// `Σ N_m^{(k;τ)}(σ)` over the members of `S_m^{av(231)}` in the left event,
/// i.e. `C_m · E_m[N_m^{(k;τ)} 1_{left event}]`.
pub fn left_event_cluster_total(m: usize, tau: &Permutation, cap: u64) -> Result<BigUint> {
    let t = tau.as_slice();
    let k = t.len();
    let i_k = max_position(tau);
    if m == 0 {
        return Ok(BigUint::zero());
    }
    let class = AvoidanceClass::single(Permutation::from_vec_unchecked(vec![2, 3, 1]))?;
    let (s, _) = fold_class(
        m,
        &class,
        cap,
        || 0u64,
        |acc, w| {
            if in_left_event(w, t, i_k) {
                *acc += count_windows(w, k, Some(t)) as u64;
            }
        },
        |a, b| a + b,
    )?;
    Ok(BigUint::from(s))
}

/// Exact sums `(Σ N, Σ N²)` of `N_m^{(k;τ)}` over `S_m^{av(c)}`, with the
/// class size; tolerates `m < k` (all zeros).
pub fn raw_moments(
    m: usize,
    tau: &Permutation,
    class: &AvoidanceClass,
    cap: u64,
) -> Result<(u128, u128, u64)> {
    let t = tau.as_slice();
    let k = t.len();
    let ((s, q), size) = fold_class(
        m,
        class,
        cap,
        || (0u128, 0u128),
        |acc, w| {
            let c = count_windows(w, k, Some(t)) as u128;
            acc.0 += c;
            acc.1 += c * c;
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok((s, q, size))
}
