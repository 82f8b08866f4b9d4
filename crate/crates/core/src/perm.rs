//! Permutations, reduction, symmetries, pattern containment and blocks.
//!
//! Words are written in one-line notation with 1-based values. Positions in
//! the public API (`Interval::start_pos`, the `a` of [`contract`] and
//! [`extend`]) are 1-based as well.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// A permutation of `{1, …, n}` in one-line notation, `n >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    word: Vec<u32>,
}

/// A word of pairwise distinct positive integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    entries: Vec<u32>,
}

/// Window of consecutive positions `start_pos ..= start_pos + length - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Interval {
    pub start_pos: usize,
    pub length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Reverse,
    Complement,
    ReverseComplement,
}

impl Permutation {
    pub fn new(word: Vec<u32>) -> Result<Self> {
        if word.is_empty() {
            return invalid("a permutation must have length at least 1");
        }
        let n = word.len();
        let mut seen = vec![false; n + 1];
        for &v in &word {
            let v = v as usize;
            if v == 0 || v > n || seen[v] {
                return invalid(format!(
                    "{word:?} is not a permutation of 1..{n}"
                ));
            }
            seen[v] = true;
        }
        Ok(Self { word })
    }

    /// Caller guarantees the bijection invariant.
    pub(crate) fn from_vec_unchecked(word: Vec<u32>) -> Self {
        debug_assert!(Self::new(word.clone()).is_ok());
        Self { word }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        Self { word: (1..=n as u32).collect() }
    }

    pub fn decreasing(n: usize) -> Self {
        assert!(n >= 1);
        Self { word: (1..=n as u32).rev().collect() }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The one-line word; index `i` holds `σ_{i+1}`.
    pub fn as_slice(&self) -> &[u32] {
        &self.word
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.word
    }

    /// `σ_i` for a 1-based position `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.word[i - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().enumerate().all(|(i, &v)| v as usize == i + 1)
    }

    pub fn is_decreasing(&self) -> bool {
        let n = self.len();
        self.word.iter().enumerate().all(|(i, &v)| v as usize == n - i)
    }

    pub fn reverse(&self) -> Self {
        Self { word: self.word.iter().rev().copied().collect() }
    }

    pub fn complement(&self) -> Self {
        let n1 = self.len() as u32 + 1;
        Self { word: self.word.iter().map(|&v| n1 - v).collect() }
    }

    pub fn reverse_complement(&self) -> Self {
        self.reverse().complement()
    }

    pub fn symmetry(&self, which: Symmetry) -> Self {
        match which {
            Symmetry::Reverse => self.reverse(),
            Symmetry::Complement => self.complement(),
            Symmetry::ReverseComplement => self.reverse_complement(),
        }
    }

    /// Position (1-based) of each value: `inverse()[v-1]` is where `v` sits.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.word.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Self { word: inv }
    }

    /// All of `S_n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        let mut next = Some(Self::identity(n).word);
        std::iter::from_fn(move || {
            let cur = next.take()?;
            let mut succ = cur.clone();
            if next_lex(&mut succ) {
                next = Some(succ);
            }
            Some(Permutation { word: cur })
        })
    }
}

/// Advances `w` to its lexicographic successor; false when `w` was the last.
pub(crate) fn next_lex(w: &mut [u32]) -> bool {
    let n = w.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && w[i - 1] >= w[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while w[j] <= w[i - 1] {
        j -= 1;
    }
    w.swap(i - 1, j);
    w[i..].reverse();
    true
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in &self.word {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.word.iter().map(|v| v.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let word: Vec<u32> = if s.contains(',') {
            s.split(',')
                .map(|p| p.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse permutation {s:?}")))?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).filter(|&d| d > 0))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::InvalidInput(format!("cannot parse permutation {s:?}")))?
        };
        Permutation::new(word)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Word {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("a word must be non-empty");
        }
        let mut sorted = entries.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid(format!("word {entries:?} has duplicate entries"));
        }
        if sorted[0] == 0 {
            return invalid("word entries must be positive");
        }
        Ok(Self { entries })
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.entries
    }
}

/// The permutation order-isomorphic to `w`.
pub fn reduce(w: &Word) -> Permutation {
    Permutation::from_vec_unchecked(reduce_distinct(w.as_slice()))
}

/// Reduction of a slice the caller knows to be duplicate-free; the empty
/// slice reduces to the empty word.
pub(crate) fn reduce_distinct(w: &[u32]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_unstable_by_key(|&i| w[i]);
    let mut out = vec![0u32; w.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank as u32 + 1;
    }
    out
}

pub fn symmetry(sigma: &Permutation, which: Symmetry) -> Permutation {
    sigma.symmetry(which)
}

/// A compiled pattern for repeated containment queries.
///
/// Matching proceeds left to right over the pattern; the entry placed for
/// pattern position `t` must lie strictly between the entries already placed
/// for its nearest smaller and nearest larger predecessors in value.
#[derive(Clone, Debug)]
pub struct PatternMatcher {
    lower: Vec<Option<usize>>,
    upper: Vec<Option<usize>>,
}

impl PatternMatcher {
    pub fn new(pattern: &[u32]) -> Self {
        let m = pattern.len();
        let mut lower = Vec::with_capacity(m);
        let mut upper = Vec::with_capacity(m);
        for t in 0..m {
            let mut lo: Option<usize> = None;
            let mut hi: Option<usize> = None;
            for s in 0..t {
                if pattern[s] < pattern[t] {
                    if lo.is_none_or(|l| pattern[s] > pattern[l]) {
                        lo = Some(s);
                    }
                } else if hi.is_none_or(|h| pattern[s] < pattern[h]) {
                    hi = Some(s);
                }
            }
            lower.push(lo);
            upper.push(hi);
        }
        Self { lower, upper }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    fn fits(&self, t: usize, v: u32, chosen: &[u32]) -> bool {
        self.lower[t].is_none_or(|s| chosen[s] < v) && self.upper[t].is_none_or(|s| chosen[s] > v)
    }

    /// Does some subsequence of `word` reduce to the pattern?
    pub fn occurs_in(&self, word: &[u32]) -> bool {
        let m = self.len();
        if word.len() < m {
            return false;
        }
        let mut chosen = vec![0u32; m];
        self.place(word, 0, 0, word.len(), m, &mut chosen, &|_| true)
    }

    /// Like [`occurs_in`](Self::occurs_in) but the last pattern entry must be
    /// matched by the last entry of `word`.
    pub fn occurs_ending_at_last(&self, word: &[u32]) -> bool {
        let m = self.len();
        if m == 0 || word.len() < m {
            return false;
        }
        let last = word.len() - 1;
        let v = word[last];
        let mut chosen = vec![0u32; m];
        self.place(word, 0, 0, last, m - 1, &mut chosen, &|chosen| {
            self.fits(m - 1, v, chosen)
        })
    }

    /// Places pattern entries `t..need` inside `word[from..end]`, then asks
    /// `finish` about the completed prefix of the match.
    #[allow(clippy::too_many_arguments)]
    fn place(
        &self,
        word: &[u32],
        t: usize,
        from: usize,
        end: usize,
        need: usize,
        chosen: &mut [u32],
        finish: &dyn Fn(&[u32]) -> bool,
    ) -> bool {
        if t == need {
            return finish(chosen);
        }
        let remaining = need - t;
        if end < from + remaining {
            return false;
        }
        for p in from..=end - remaining {
            let v = word[p];
            if self.fits(t, v, chosen) {
                chosen[t] = v;
                if self.place(word, t + 1, p + 1, end, need, chosen, finish) {
                    return true;
                }
            }
        }
        false
    }
}

/// Does `sigma` contain `eta` as a pattern? Patterns longer than `sigma`
/// are never contained.
pub fn contains(sigma: &Permutation, eta: &Permutation) -> bool {
    PatternMatcher::new(eta.as_slice()).occurs_in(sigma.as_slice())
}

/// A finite set of forbidden patterns. An empty set stands for the whole
/// symmetric group and can only be built with [`AvoidanceClass::unrestricted`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AvoidanceClass {
    patterns: Vec<Permutation>,
}

impl AvoidanceClass {
    pub fn new(patterns: impl IntoIterator<Item = Permutation>) -> Result<Self> {
        let mut patterns: Vec<Permutation> = patterns.into_iter().collect();
        if patterns.is_empty() {
            return invalid("an avoidance class needs at least one pattern");
        }
        if let Some(p) = patterns.iter().find(|p| p.len() < 2) {
            return invalid(format!("pattern {p} has length < 2"));
        }
        patterns.sort();
        patterns.dedup();
        Ok(Self { patterns })
    }

    pub fn single(pattern: Permutation) -> Result<Self> {
        Self::new([pattern])
    }

    pub fn unrestricted() -> Self {
        Self { patterns: Vec::new() }
    }

    pub fn patterns(&self) -> &[Permutation] {
        &self.patterns
    }

    pub fn is_unrestricted(&self) -> bool {
        self.patterns.is_empty()
    }

    /// The single pattern when the class is `{η}` with `η ∈ S_3`.
    pub fn single_s3(&self) -> Option<&Permutation> {
        match self.patterns.as_slice() {
            [p] if p.len() == 3 => Some(p),
            _ => None,
        }
    }

    pub fn map(&self, f: impl Fn(&Permutation) -> Permutation) -> Self {
        let mut patterns: Vec<Permutation> = self.patterns.iter().map(f).collect();
        patterns.sort();
        patterns.dedup();
        Self { patterns }
    }

    pub fn matchers(&self) -> Vec<PatternMatcher> {
        self.patterns.iter().map(|p| PatternMatcher::new(p.as_slice())).collect()
    }

    /// Canonical text key: sorted patterns joined by `+`, or `none`.
    pub fn key(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for AvoidanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.patterns.is_empty() {
            return f.write_str("none");
        }
        let parts: Vec<String> = self.patterns.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join("+"))
    }
}

impl fmt::Debug for AvoidanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AvoidanceClass({self})")
    }
}

impl FromStr for AvoidanceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(Self::unrestricted());
        }
        let pats = s
            .split('+')
            .map(|p| p.parse::<Permutation>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(pats)
    }
}

impl Serialize for AvoidanceClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn avoids_all(sigma: &Permutation, class: &AvoidanceClass) -> bool {
    class.patterns.iter().all(|eta| !contains(sigma, eta))
}

/// Every window `(a, k)` with `2 <= k <= n-1` whose values are `k`
/// consecutive integers, sorted by `(a, k)`.
pub fn find_blocks(sigma: &Permutation) -> Vec<Interval> {
    let w = sigma.as_slice();
    let n = w.len();
    let mut out = Vec::new();
    for a in 0..n {
        let (mut lo, mut hi) = (w[a], w[a]);
        for (end, &v) in w.iter().enumerate().skip(a + 1) {
            lo = lo.min(v);
            hi = hi.max(v);
            let k = end - a + 1;
            if k > n - 1 {
                break;
            }
            if (hi - lo) as usize == k - 1 {
                out.push(Interval { start_pos: a + 1, length: k });
            }
        }
    }
    out
}

/// True iff `sigma` has no block; vacuously true for `n <= 2`.
pub fn is_simple(sigma: &Permutation) -> bool {
    find_blocks(sigma).is_empty()
}

/// Collapse the cluster occupying positions `a..a+k-1` (values
/// `l..l+k-1`) to the single value `l` and reduce.
pub fn contract(sigma: &Permutation, l: usize, a: usize, k: usize) -> Result<Permutation> {
    let n = sigma.len();
    if k < 1 || a < 1 || a + k - 1 > n || l < 1 || l + k - 1 > n {
        return invalid(format!("window (l={l}, a={a}, k={k}) out of range for n={n}"));
    }
    let w = sigma.as_slice();
    let window = &w[a - 1..a - 1 + k];
    let (lo, hi) = (l as u32, (l + k - 1) as u32);
    if window.iter().any(|&v| v < lo || v > hi) {
        return invalid(format!(
            "positions {a}..{} of {sigma} do not hold the values {l}..{}",
            a + k - 1,
            l + k - 1
        ));
    }
    let mut bar = Vec::with_capacity(n - k + 1);
    bar.extend_from_slice(&w[..a - 1]);
    bar.push(lo);
    bar.extend_from_slice(&w[a - 1 + k..]);
    Ok(Permutation::from_vec_unchecked(reduce_distinct(&bar)))
}

/// Inflate position `a` of `nu` (which must hold `l`) into a cluster with
/// pattern `tau`: smaller values are kept, the cluster gets `l-1+τ_j`,
/// larger values move up by `k-1`.
pub fn extend(nu: &Permutation, tau: &Permutation, l: usize, a: usize) -> Result<Permutation> {
    let m = nu.len();
    let k = tau.len();
    if a < 1 || a > m {
        return invalid(format!("position a={a} out of range for length {m}"));
    }
    if nu.at(a) as usize != l {
        return invalid(format!("nu_{a} = {} differs from l = {l}", nu.at(a)));
    }
    let lift = |v: u32| if (v as usize) < l { v } else { v + k as u32 - 1 };
    let mut out = Vec::with_capacity(m + k - 1);
    out.extend(nu.as_slice()[..a - 1].iter().map(|&v| lift(v)));
    out.extend(tau.as_slice().iter().map(|&t| l as u32 - 1 + t));
    out.extend(nu.as_slice()[a..].iter().map(|&v| lift(v)));
    let sigma = Permutation::from_vec_unchecked(out);
    debug_assert!({
        let win = &sigma.as_slice()[a - 1..a - 1 + k];
        win.iter().zip(tau.as_slice()).all(|(&v, &t)| v + 1 == l as u32 + t)
    });
    Ok(sigma)
}

/// Stack-sortability (one pass through a single stack). A permutation is
/// stack-sortable iff it avoids 231.
pub fn is_stack_sortable(sigma: &Permutation) -> bool {
    let mut stack: Vec<u32> = Vec::new();
    let mut next_out = 1u32;
    for &v in sigma.as_slice() {
        while let Some(&top) = stack.last() {
            if top < v {
                if top != next_out {
                    return false;
                }
                stack.pop();
                next_out += 1;
            } else {
                break;
            }
        }
        stack.push(v);
    }
    while let Some(top) = stack.pop() {
        if top != next_out {
            return false;
        }
        next_out += 1;
    }
    true
}

/// Length of a longest decreasing subsequence (patience sorting).
pub fn longest_decreasing(sigma: &Permutation) -> usize {
    let mut tails: Vec<u32> = Vec::new();
    for &v in sigma.as_slice() {
        // Decreasing in v <=> increasing in -v.
        let key = u32::MAX - v;
        match tails.binary_search(&key) {
            Ok(_) => {}
            Err(i) if i == tails.len() => tails.push(key),
            Err(i) => tails[i] = key,
        }
    }
    tails.len()
}
