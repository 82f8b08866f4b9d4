//! Exact uniform samplers for avoidance classes and a Monte-Carlo harness.
//!
//! * `{231}`: recursive split at the position of the maximum.
//! * `{321}`: uniform Dyck path (cycle lemma) mapped to a 321-avoider.
//! * anything else: a uniform index into the enumerated class.
//!
//! All randomness comes from ChaCha8 streams keyed by `(seed, stream)`, so a
//! fixed seed and worker count reproduce the same output.

use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::count_windows;
use crate::enumerate::{catalan_table, count_class, ClassIter};
use crate::error::{invalid, Error, Result};
use crate::perm::{AvoidanceClass, Permutation};

/// Worker count used when a config does not set one.
pub const DEFAULT_WORKERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Recursive231,
    Dyck321,
    Enumerated,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recursive231" => Ok(Method::Recursive231),
            "dyck321" => Ok(Method::Dyck321),
            "enumerated" => Ok(Method::Enumerated),
            other => invalid(format!("unknown sampling method '{other}'")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Recursive231 => "recursive231",
            Method::Dyck321 => "dyck321",
            Method::Enumerated => "enumerated",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n: usize,
    pub class: AvoidanceClass,
    pub method: Method,
    /// Number of independent streams a Monte-Carlo run is split into.
    pub workers: usize,
    /// Largest class the enumerated method may materialize.
    pub cap: u64,
}

impl SamplerConfig {
    pub fn new(seed: u64, n: usize, class: AvoidanceClass, method: Method) -> Self {
        Self { seed, n, class, method, workers: DEFAULT_WORKERS, cap: crate::DEFAULT_ENUM_CAP }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    /// The dedicated method for `{231}` and `{321}`, enumeration otherwise.
    pub fn default_method(class: &AvoidanceClass) -> Method {
        match class.single_s3().map(|p| p.as_slice()) {
            Some([2, 3, 1]) => Method::Recursive231,
            Some([3, 2, 1]) => Method::Dyck321,
            _ => Method::Enumerated,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("sampling needs n >= 1");
        }
        if self.workers == 0 {
            return invalid("worker count must be positive");
        }
        let key = self.class.key();
        match self.method {
            Method::Recursive231 if key != "231" => {
                invalid(format!("method recursive231 needs class 231, got {key}"))
            }
            Method::Dyck321 if key != "321" => invalid(format!("method dyck321 needs class 321, got {key}")),
            _ => Ok(()),
        }
    }
}

/// Independent generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A real `U ∈ [0,1)` whose binary digits are drawn 64 at a time, only as
/// far as a comparison needs them.
struct LazyUniform {
    words: Vec<u64>,
}

impl LazyUniform {
    fn new(first: u64) -> Self {
        Self { words: vec![first] }
    }

    /// Exact test `U < num/den`.
    fn less_than<R: Rng + ?Sized>(&mut self, rng: &mut R, num: &BigUint, den: &BigUint) -> bool {
        let mut i = 0;
        loop {
            if i == self.words.len() {
                self.words.push(rng.random());
            }
            i += 1;
            let bits = 64 * i;
            let mut u = BigUint::zero();
            for &w in &self.words[..i] {
                u = (u << 64) + w;
            }
            let scaled = num << bits;
            if (&u + 1u32) * den <= scaled {
                return true;
            }
            if &u * den >= scaled {
                return false;
            }
        }
    }
}

/// Float comparisons closer than this to a boundary are redone exactly.
const MARGIN: f64 = 1e-9;

/// Position `j` of the maximum, drawn with probability
/// `C_{j-1} C_{m-j} / C_m`.
fn max_position<R: Rng + ?Sized>(m: usize, rng: &mut R) -> usize {
    if m <= 1 {
        return 1;
    }
    let x: u64 = rng.random();
    let u = x as f64 / 18446744073709551616.0;
    // p_1 = C_{m-1}/C_m; p_{i+1}/p_i = r(i) / r(m-i) with r(j) = C_j/C_{j-1}.
    let r = |j: usize| 2.0 * (2 * j - 1) as f64 / (j + 1) as f64;
    let mut p = (m + 1) as f64 / (2.0 * (2 * m - 1) as f64);
    let mut cum = 0.0;
    for i in 1..=m {
        cum += p;
        if (u - cum).abs() < MARGIN || (u - (1.0 - cum)).abs() < MARGIN {
            break;
        }
        if u < cum {
            return i;
        }
        if u >= 1.0 - cum {
            return m + 1 - i;
        }
        if i < m {
            p *= r(i) / r(m - i);
        }
    }
    max_position_exact(m, LazyUniform::new(x), rng)
}

fn max_position_exact<R: Rng + ?Sized>(m: usize, mut u: LazyUniform, rng: &mut R) -> usize {
    let c = catalan_table(m);
    let mut cum = BigUint::zero();
    for j in 1..m {
        cum += &c[j - 1] * &c[m - j];
        if u.less_than(rng, &cum, &c[m]) {
            return j;
        }
    }
    m
}

/// Uniform element of `S_n^{av(231)}`, written into `out`.
pub fn sample_231_into<R: Rng + ?Sized>(n: usize, rng: &mut R, out: &mut Vec<u32>) {
    out.clear();
    out.resize(n, 0);
    // (first position, length, value offset) of blocks still to fill.
    let mut stack = vec![(0usize, n, 0u32)];
    while let Some((start, m, base)) = stack.pop() {
        if m == 0 {
            continue;
        }
        let j = max_position(m, rng);
        out[start + j - 1] = base + m as u32;
        stack.push((start + j, m - j, base + j as u32 - 1));
        stack.push((start, j - 1, base));
    }
}

pub fn sample_231<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut w = Vec::with_capacity(n);
    sample_231_into(n, rng, &mut w);
    Permutation::from_vec_unchecked(w)
}

/// Uniform Dyck path of semilength `n` as a step vector (`true` = up):
/// shuffle `n` ups and `n+1` downs, start just after the first lowest
/// prefix, drop the final down step.
pub fn uniform_dyck<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<bool> {
    let mut steps: Vec<bool> = (0..2 * n + 1).map(|i| i < n).collect();
    steps.shuffle(rng);
    let mut h = 0i64;
    let mut low = 0i64;
    let mut cut = 0;
    for (i, &up) in steps.iter().enumerate() {
        h += if up { 1 } else { -1 };
        if h < low {
            low = h;
            cut = i + 1;
        }
    }
    let len = steps.len();
    steps.rotate_left(cut % len);
    steps.pop();
    steps
}

/// 321-avoider of a Dyck path `U^{a_1} D^{b_1} … U^{a_r} D^{b_r}`: the
/// left-to-right maxima are `a_1 + … + a_i` at positions
/// `1 + b_1 + … + b_{i-1}`; the other values fill the other positions in
/// increasing order.
pub fn dyck_to_321(steps: &[bool]) -> Vec<u32> {
    let n = steps.len() / 2;
    let mut out = vec![0u32; n];
    let mut used = vec![false; n + 1];
    let (mut ups, mut downs) = (0usize, 0usize);
    let mut i = 0;
    while i < steps.len() {
        let pos = downs;
        while i < steps.len() && steps[i] {
            ups += 1;
            i += 1;
        }
        while i < steps.len() && !steps[i] {
            downs += 1;
            i += 1;
        }
        out[pos] = ups as u32;
        used[ups] = true;
    }
    let mut free = (1..=n as u32).filter(|&v| !used[v as usize]);
    for slot in out.iter_mut().filter(|v| **v == 0) {
        *slot = free.next().expect("as many free values as free positions");
    }
    out
}

pub fn sample_321_into<R: Rng + ?Sized>(n: usize, rng: &mut R, out: &mut Vec<u32>) {
    *out = dyck_to_321(&uniform_dyck(n, rng));
}

/// Uniform element of `S_n^{av(321)}`.
pub fn sample_321<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    Permutation::from_vec_unchecked(dyck_to_321(&uniform_dyck(n, rng)))
}

/// The whole class in lexicographic order, flattened.
struct Table {
    n: usize,
    words: Vec<u32>,
}

impl Table {
    fn build(n: usize, class: &AvoidanceClass, cap: u64) -> Result<Self> {
        let size = count_class(n, class, cap)?;
        if size > BigUint::from(cap) {
            return Err(Error::ResourceLimit { what: format!("class {class} at n={n}"), cap });
        }
        let mut words = Vec::new();
        let mut it = ClassIter::new(n, class);
        while let Some(w) = it.advance() {
            words.extend_from_slice(w);
        }
        Ok(Self { n, words })
    }

    fn len(&self) -> usize {
        self.words.len() / self.n
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<u32>) {
        let i = rng.random_range(0..self.len());
        out.clear();
        out.extend_from_slice(&self.words[i * self.n..(i + 1) * self.n]);
    }
}

/// Uniform element of `S_n^{av(c)}` by indexing the enumeration.
pub fn sample_enumerated<R: Rng + ?Sized>(
    n: usize,
    class: &AvoidanceClass,
    cap: u64,
    rng: &mut R,
) -> Result<Permutation> {
    if n == 0 {
        return invalid("sampling needs n >= 1");
    }
    let table = Table::build(n, class, cap)?;
    let mut w = Vec::new();
    table.sample_into(rng, &mut w);
    Ok(Permutation::from_vec_unchecked(w))
}

enum Kind {
    Recursive231,
    Dyck321,
    Enumerated(Table),
}

/// A validated sampler with any per-class tables built once.
pub struct Sampler {
    n: usize,
    kind: Kind,
}

impl Sampler {
    pub fn new(cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let kind = match cfg.method {
            Method::Recursive231 => Kind::Recursive231,
            Method::Dyck321 => Kind::Dyck321,
            Method::Enumerated => Kind::Enumerated(Table::build(cfg.n, &cfg.class, cfg.cap)?),
        };
        Ok(Self { n: cfg.n, kind })
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<u32>) {
        match &self.kind {
            Kind::Recursive231 => sample_231_into(self.n, rng, out),
            Kind::Dyck321 => sample_321_into(self.n, rng, out),
            Kind::Enumerated(t) => t.sample_into(rng, out),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let mut w = Vec::with_capacity(self.n);
        self.sample_into(rng, &mut w);
        Permutation::from_vec_unchecked(w)
    }
}

/// `count` samples from stream 0 of the configured seed.
pub fn sample_many(cfg: &SamplerConfig, count: usize) -> Result<Vec<Permutation>> {
    let sampler = Sampler::new(cfg)?;
    let mut rng = rng_for(cfg.seed, 0);
    Ok((0..count).map(|_| sampler.sample(&mut rng)).collect())
}

/// Empirical summary of a cluster count over sampled permutations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub samples: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sqrt(variance / samples)`.
    pub stderr: f64,
    pub seed: u64,
    pub workers: usize,
    /// Exact `Σ N` and `Σ N²` behind the floats.
    pub sum: u128,
    pub sum_sq: u128,
}

/// Monte-Carlo estimate of `N_n^{(k;τ)}` (or `N_n^{(k)}` without `tau`).
///
/// Sample `i` of worker `w` comes from stream `w`; workers receive
/// `samples / workers` samples each, the first `samples % workers` one
/// more. Exact sums are merged, so the result depends only on the seed,
/// the sample count and the worker count.
pub fn monte_carlo(
    cfg: &SamplerConfig,
    k: usize,
    tau: Option<&Permutation>,
    samples: u64,
) -> Result<MCEstimate> {
    if k < 2 || k > cfg.n {
        return invalid(format!("need 2 <= k <= n, got n={}, k={k}", cfg.n));
    }
    if let Some(t) = tau {
        if t.len() != k {
            return invalid(format!("tau={t} does not have length k={k}"));
        }
    }
    if samples < 2 {
        return invalid("need at least 2 samples");
    }
    let sampler = Sampler::new(cfg)?;
    let tau_w = tau.map(|t| t.as_slice());
    let workers = cfg.workers as u64;
    let parts: Vec<(u128, u128)> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let quota = samples / workers + u64::from(w < samples % workers);
            let mut rng = rng_for(cfg.seed, w);
            let mut buf = Vec::with_capacity(cfg.n);
            let (mut s, mut q) = (0u128, 0u128);
            for _ in 0..quota {
                sampler.sample_into(&mut rng, &mut buf);
                let c = count_windows(&buf, k, tau_w) as u128;
                s += c;
                q += c * c;
            }
            (s, q)
        })
        .collect();
    let (sum, sum_sq) = parts.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = samples as f64;
    let mean = sum as f64 / m;
    // (m Σq - (Σs)²) / (m (m-1)), with the numerator formed exactly.
    let num = (samples as u128) * sum_sq - sum * sum;
    let variance = num as f64 / (m * (m - 1.0));
    Ok(MCEstimate {
        samples,
        mean,
        stderr: (variance / m).sqrt(),
        variance,
        seed: cfg.seed,
        workers: cfg.workers,
        sum,
        sum_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::avoids_all;

    fn class(s: &str) -> AvoidanceClass {
        s.parse().unwrap()
    }

    #[test]
    fn trivial_sizes() {
        let mut rng = rng_for(1, 0);
        assert_eq!(sample_231(1, &mut rng).as_slice(), &[1]);
        assert_eq!(sample_321(1, &mut rng).as_slice(), &[1]);
        assert_eq!(sample_enumerated(1, &class("2413+3142"), 10, &mut rng).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn samples_avoid_their_class() {
        let mut rng = rng_for(7, 3);
        let c231 = class("231");
        let c321 = class("321");
        for n in [2, 5, 9, 30] {
            for _ in 0..200 {
                assert!(avoids_all(&sample_231(n, &mut rng), &c231));
                assert!(avoids_all(&sample_321(n, &mut rng), &c321));
            }
        }
    }

    #[test]
    fn exact_fallback_agrees_with_cumulative_weights() {
        // U = 1/2 exactly: the first j whose cumulative weight exceeds 1/2.
        let mut rng = rng_for(0, 0);
        let u = LazyUniform::new(1u64 << 63);
        let j = max_position_exact(5, u, &mut rng);
        // Weights 14, 5, 4, 5, 14 out of 42.
        assert_eq!(j, 3);
        let mut u = LazyUniform::new(1u64 << 63);
        assert!(!u.less_than(&mut rng, &BigUint::from(1u32), &BigUint::from(2u32)));
        assert!(u.less_than(&mut rng, &BigUint::from(2u32), &BigUint::from(3u32)));
    }

    #[test]
    fn config_validation() {
        let cfg = SamplerConfig::new(1, 5, class("321"), Method::Recursive231);
        assert!(cfg.validate().is_err());
        let cfg = SamplerConfig::new(1, 0, class("231"), Method::Recursive231);
        assert!(cfg.validate().is_err());
        let cfg = SamplerConfig::new(1, 9, class("2413+3142"), Method::Enumerated).with_cap(100);
        assert!(matches!(Sampler::new(&cfg), Err(Error::ResourceLimit { cap: 100, .. })));
        assert_eq!("dyck321".parse::<Method>().unwrap(), Method::Dyck321);
        assert_eq!(SamplerConfig::default_method(&class("231")), Method::Recursive231);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let cfg = SamplerConfig::new(42, 12, class("231"), Method::Recursive231).with_workers(3);
        let a = monte_carlo(&cfg, 2, None, 1001).unwrap();
        let b = monte_carlo(&cfg, 2, None, 1001).unwrap();
        assert_eq!(a, b);
        assert!((a.stderr - (a.variance / 1001.0).sqrt()).abs() < 1e-15);
        let c = monte_carlo(&cfg.clone().with_workers(4), 2, None, 1001).unwrap();
        assert_eq!(c.samples, 1001);
    }
}
