//! Catalan numbers and generation/counting of avoidance classes.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock, RwLock};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{AvoidanceClass, PatternMatcher, Permutation};

/// `C_n = binom(2n, n) / (n + 1)`, from the binomial coefficient directly.
pub fn catalan(n: usize) -> BigUint {
    let mut binom = BigUint::one();
    // binom(2n, n) = prod_{i=1}^{n} (n + i) / i, exact at every step.
    for i in 1..=n {
        binom *= n + i;
        binom /= i;
    }
    binom / (n + 1)
}

fn catalan_cache() -> &'static RwLock<Vec<BigUint>> {
    static CACHE: OnceLock<RwLock<Vec<BigUint>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![BigUint::one()]))
}

/// `C_0 ..= C_n`, filled once by `C_{m+1} = 2(2m+1) C_m / (m+2)` and shared.
pub fn catalan_table(n: usize) -> Vec<BigUint> {
    {
        let table = catalan_cache().read().expect("catalan cache poisoned");
        if table.len() > n {
            return table[..=n].to_vec();
        }
    }
    let mut table = catalan_cache().write().expect("catalan cache poisoned");
    while table.len() <= n {
        let m = table.len() - 1;
        let next = &table[m] * (2 * (2 * m + 1)) / (m + 2);
        table.push(next);
    }
    table[..=n].to_vec()
}

/// Lexicographic stream of `S_n^{av(c)}`.
///
/// Prefixes are extended one value at a time; a prefix that already contains
/// a forbidden pattern ending at its last entry is abandoned, so every
/// emitted word avoids the whole class.
pub struct ClassIter {
    n: usize,
    matchers: Vec<PatternMatcher>,
    prefix: Vec<u32>,
    next_candidate: Vec<u32>,
    used: Vec<bool>,
    first: Option<u32>,
    pending_pop: bool,
    done: bool,
}

impl ClassIter {
    pub fn new(n: usize, class: &AvoidanceClass) -> Self {
        Self::build(n, class, None)
    }

    /// Only the members whose first entry is `first`.
    pub fn with_first(n: usize, class: &AvoidanceClass, first: u32) -> Self {
        Self::build(n, class, Some(first))
    }

    fn build(n: usize, class: &AvoidanceClass, first: Option<u32>) -> Self {
        Self {
            n,
            matchers: class.matchers(),
            prefix: Vec::with_capacity(n),
            next_candidate: Vec::with_capacity(n),
            used: vec![false; n + 1],
            first,
            pending_pop: false,
            done: n == 0,
        }
    }

    fn prefix_ok(&self) -> bool {
        self.matchers.iter().all(|m| !m.occurs_ending_at_last(&self.prefix))
    }

    fn pop(&mut self) {
        if let Some(v) = self.prefix.pop() {
            self.used[v as usize] = false;
        }
    }

    /// Next member as a borrowed word, without allocating.
    pub fn advance(&mut self) -> Option<&[u32]> {
        if self.done {
            return None;
        }
        if self.pending_pop {
            self.pending_pop = false;
            self.pop();
        }
        let n = self.n as u32;
        loop {
            let d = self.prefix.len();
            if d == self.n {
                self.pending_pop = true;
                return Some(&self.prefix);
            }
            if self.next_candidate.len() <= d {
                let start = if d == 0 { self.first.unwrap_or(1) } else { 1 };
                self.next_candidate.push(start);
            }
            let last_allowed = if d == 0 { self.first.unwrap_or(n) } else { n };
            let mut placed = false;
            while self.next_candidate[d] <= last_allowed {
                let v = self.next_candidate[d];
                self.next_candidate[d] += 1;
                if self.used[v as usize] {
                    continue;
                }
                self.prefix.push(v);
                if self.prefix_ok() {
                    self.used[v as usize] = true;
                    placed = true;
                    break;
                }
                self.prefix.pop();
            }
            if !placed {
                self.next_candidate.truncate(d);
                if d == 0 {
                    self.done = true;
                    return None;
                }
                self.pop();
            }
        }
    }
}

impl Iterator for ClassIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        self.advance().map(|w| Permutation::from_vec_unchecked(w.to_vec()))
    }
}

/// Stream of `S_n^{av(c)}` in lexicographic order.
pub fn enumerate_class(n: usize, class: &AvoidanceClass) -> ClassIter {
    ClassIter::new(n, class)
}

/// Visits every member of `S_n^{av(c)}`, stopping with a resource-limit
/// error as soon as more than `cap` members have been seen.
pub fn visit_class(
    n: usize,
    class: &AvoidanceClass,
    cap: u64,
    mut f: impl FnMut(&[u32]),
) -> Result<u64> {
    let mut it = ClassIter::new(n, class);
    let mut seen = 0u64;
    while let Some(w) = it.advance() {
        seen += 1;
        if seen > cap {
            return Err(limit(n, class, cap));
        }
        f(w);
    }
    Ok(seen)
}

/// Parallel fold over the class, split by first entry. `fold` accumulates
/// one member into a per-part state and `merge` combines part states in
/// first-entry order, so the result does not depend on scheduling.
pub fn fold_class<S, F, M>(
    n: usize,
    class: &AvoidanceClass,
    cap: u64,
    init: impl Fn() -> S + Sync,
    fold: F,
    merge: M,
) -> Result<(S, u64)>
where
    S: Send,
    F: Fn(&mut S, &[u32]) + Sync,
    M: Fn(S, S) -> S,
{
    if n == 0 {
        let mut s = init();
        fold(&mut s, &[]);
        return Ok((s, 1));
    }
    let parts: Vec<Result<(S, u64)>> = (1..=n as u32)
        .into_par_iter()
        .map(|first| {
            let mut it = ClassIter::with_first(n, class, first);
            let mut state = init();
            let mut seen = 0u64;
            while let Some(w) = it.advance() {
                seen += 1;
                if seen > cap {
                    return Err(limit(n, class, cap));
                }
                fold(&mut state, w);
            }
            Ok((state, seen))
        })
        .collect();
    let mut acc = init();
    let mut total = 0u64;
    for part in parts {
        let (s, c) = part?;
        total += c;
        if total > cap {
            return Err(limit(n, class, cap));
        }
        acc = merge(acc, s);
    }
    Ok((acc, total))
}

fn limit(n: usize, class: &AvoidanceClass, cap: u64) -> Error {
    Error::ResourceLimit { what: format!("|S_{n}^av({class})|"), cap }
}

/// Number of members by exhaustive generation.
pub fn count_by_enumeration(n: usize, class: &AvoidanceClass, cap: u64) -> Result<BigUint> {
    let (_, total) = fold_class(n, class, cap, || (), |_, _| {}, |_, _| ())?;
    Ok(BigUint::from(total))
}

fn count_cache() -> &'static Mutex<HashMap<(String, usize), BigUint>> {
    static CACHE: OnceLock<Mutex<HashMap<(String, usize), BigUint>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `|S_n^{av(c)}|`, memoized by the class's canonical key. Single patterns
/// of length three use the Catalan numbers, length-two patterns give 1, the
/// unrestricted class gives `n!`; anything else is enumerated (refused above
/// `cap`). `n = 0` counts the empty permutation.
pub fn count_class(n: usize, class: &AvoidanceClass, cap: u64) -> Result<BigUint> {
    if n == 0 {
        return Ok(BigUint::one());
    }
    if class.single_s3().is_some() {
        return Ok(catalan_table(n).pop().expect("non-empty table"));
    }
    if class.is_unrestricted() {
        return Ok((1..=n).fold(BigUint::one(), |acc, i| acc * i));
    }
    if class.patterns().iter().any(|p| p.len() == 2) {
        return Ok(BigUint::one());
    }
    let key = (class.key(), n);
    if let Some(v) = count_cache().lock().expect("count cache poisoned").get(&key) {
        return Ok(v.clone());
    }
    let v = count_by_enumeration(n, class, cap)?;
    count_cache().lock().expect("count cache poisoned").insert(key, v.clone());
    Ok(v)
}

/// `|S_{n+1}^{av(c)}| / |S_n^{av(c)}|`, a finite-n estimate of the growth
/// rate of the class.
pub fn sw_ratio(n: usize, class: &AvoidanceClass, cap: u64) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::InvalidInput("sw_ratio needs n >= 1".into()));
    }
    let num = count_class(n + 1, class, cap)?;
    let den = count_class(n, class, cap)?;
    Ok(BigRational::new(num.into(), den.into()))
}

/// Class sizes for a range of lengths.
#[derive(Clone, Debug, Serialize)]
pub struct CountTable {
    pub class: AvoidanceClass,
    #[serde(serialize_with = "serialize_counts")]
    pub counts: BTreeMap<usize, BigUint>,
}

fn serialize_counts<S: serde::Serializer>(
    counts: &BTreeMap<usize, BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(counts.len()))?;
    for (n, c) in counts {
        map.serialize_entry(&n.to_string(), &c.to_string())?;
    }
    map.end()
}

impl CountTable {
    pub fn compute(
        class: &AvoidanceClass,
        ns: impl IntoIterator<Item = usize>,
        cap: u64,
    ) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for n in ns {
            counts.insert(n, count_class(n, class, cap)?);
        }
        Ok(Self { class: class.clone(), counts })
    }

    /// `n,count` rows with a header line, LF-terminated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count\n");
        for (n, c) in &self.counts {
            out.push_str(&format!("{n},{c}\n"));
        }
        out
    }
}

/// Float view of a count ratio, for reports.
pub fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    crate::rational::to_f64(&BigRational::new(num.clone().into(), den.clone().into()))
}
