use std::collections::{HashMap, HashSet};

use permclust::cluster::count_n;
use permclust::enumerate::{catalan, enumerate_class};
use permclust::formulas::{expectation_s3, uniform_baseline};
use permclust::perm::avoids_all;
use permclust::rational::to_f64;
use permclust::sampler::{dyck_to_321, monte_carlo, rng_for, sample_many, Method, SamplerConfig};
use permclust::{AvoidanceClass, Permutation};
use rand::seq::SliceRandom;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn class(s: &str) -> AvoidanceClass {
    s.parse().unwrap()
}

/// All Dyck words of semilength `n`, `true` for an up step.
fn dyck_words(n: usize) -> Vec<Vec<bool>> {
    fn go(n: usize, up: usize, down: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if up == n && down == n {
            out.push(cur.clone());
            return;
        }
        if up < n {
            cur.push(true);
            go(n, up + 1, down, cur, out);
            cur.pop();
        }
        if down < up {
            cur.push(false);
            go(n, up, down + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, 0, 0, &mut Vec::new(), &mut out);
    out
}

#[test]
fn dyck_map_is_a_bijection_onto_321_avoiders() {
    let c = class("321");
    for n in 1..=8 {
        let images: HashSet<Vec<u32>> = dyck_words(n).iter().map(|d| dyck_to_321(d)).collect();
        let expected: HashSet<Vec<u32>> = enumerate_class(n, &c).map(|p| p.as_slice().to_vec()).collect();
        assert_eq!(images.len() as u64, u64::try_from(catalan(n)).unwrap());
        assert_eq!(images, expected, "n={n}");
    }
}

#[test]
fn every_sample_avoids_its_class() {
    let cases = [
        ("231", Method::Recursive231, 12),
        ("321", Method::Dyck321, 12),
        ("2413+3142", Method::Enumerated, 7),
        ("231", Method::Enumerated, 8),
    ];
    for (c, method, n) in cases {
        let c = class(c);
        let cfg = SamplerConfig::new(11, n, c.clone(), method);
        for s in sample_many(&cfg, 10_000).unwrap() {
            assert_eq!(s.len(), n);
            assert!(avoids_all(&s, &c), "{s} from {method}");
        }
    }
}

/// Two-sample chi-square statistic over the cells of `cells`.
fn two_sample_chi2(a: &[Permutation], b: &[Permutation], cells: &[Permutation]) -> f64 {
    fn tally(xs: &[Permutation]) -> HashMap<&Permutation, f64> {
        let mut m = HashMap::new();
        for x in xs {
            *m.entry(x).or_default() += 1.0;
        }
        m
    }
    let (ta, tb) = (tally(a), tally(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    cells
        .iter()
        .map(|c| {
            let x = ta.get(c).copied().unwrap_or(0.0);
            let y = tb.get(c).copied().unwrap_or(0.0);
            if x + y == 0.0 {
                0.0
            } else {
                (ka * x - kb * y).powi(2) / (x + y)
            }
        })
        .sum()
}

#[test]
fn dedicated_samplers_match_enumerated_sampler() {
    let n = 6;
    for (c, method) in [("231", Method::Recursive231), ("321", Method::Dyck321)] {
        let c = class(c);
        let cells: Vec<Permutation> = enumerate_class(n, &c).collect();
        let count = cells.len() * 200;
        let a = sample_many(&SamplerConfig::new(5, n, c.clone(), method), count).unwrap();
        let b = sample_many(&SamplerConfig::new(6, n, c.clone(), Method::Enumerated), count).unwrap();
        let stat = two_sample_chi2(&a, &b, &cells);
        let crit = ChiSquared::new((cells.len() - 1) as f64).unwrap().inverse_cdf(0.999);
        assert!(stat < crit, "{method}: chi2={stat} crit={crit}");
    }
}

#[test]
fn monte_carlo_small_case_matches_closed_form() {
    let eta = Permutation::new(vec![2, 3, 1]).unwrap();
    let tau: Permutation = "213".parse().unwrap();
    let cfg = SamplerConfig::new(2024, 9, class("231"), Method::Recursive231);
    let est = monte_carlo(&cfg, 3, Some(&tau), 200_000).unwrap();
    let exact = to_f64(&expectation_s3(9, 3, &tau, &eta).unwrap().value);
    assert!((est.mean - exact).abs() < 4.0 * est.stderr, "{} vs {exact} (se {})", est.mean, est.stderr);
}

#[test]
fn monte_carlo_large_n_matches_closed_form() {
    let eta = Permutation::new(vec![2, 3, 1]).unwrap();
    let tau: Permutation = "12".parse().unwrap();
    let cfg = SamplerConfig::new(7, 2000, class("231"), Method::Recursive231);
    let est = monte_carlo(&cfg, 2, Some(&tau), 100_000).unwrap();
    let exact = to_f64(&expectation_s3(2000, 2, &tau, &eta).unwrap().value);
    assert!((est.mean - exact).abs() < 3.0 * est.stderr, "{} vs {exact} (se {})", est.mean, est.stderr);
}

#[test]
fn monte_carlo_single_window_rate() {
    for k in 3..=5 {
        let cfg = SamplerConfig::new(3, k, class("321"), Method::Dyck321);
        let tau = Permutation::identity(k);
        let est = monte_carlo(&cfg, k, Some(&tau), 100_000).unwrap();
        let exact = 1.0 / u64::try_from(catalan(k)).unwrap() as f64;
        assert!((est.mean - exact).abs() < 4.0 * est.stderr, "k={k}: {} vs {exact}", est.mean);
    }
}

#[test]
fn shuffled_permutations_match_uniform_baseline() {
    let (_, expected) = uniform_baseline(10, 3).unwrap();
    assert_eq!(expected.to_string(), "8/15");
    let mut rng = rng_for(99, 0);
    let mut w: Vec<u32> = (1..=10).collect();
    let m = 100_000;
    let (mut s, mut q) = (0.0f64, 0.0f64);
    for _ in 0..m {
        w.shuffle(&mut rng);
        let c = count_n(&Permutation::new(w.clone()).unwrap(), 3).unwrap() as f64;
        s += c;
        q += c * c;
    }
    let mean = s / m as f64;
    let se = ((q / m as f64 - mean * mean) / m as f64).sqrt();
    assert!((mean - 8.0 / 15.0).abs() < 4.0 * se, "{mean} (se {se})");
}
