use num_rational::BigRational;
use permclust::cluster::{exact_moments, tally_patterns};
use permclust::enumerate::{catalan, count_class, enumerate_class};
use permclust::formulas::{
    expectation, expectation_s3, expectation_s3_total, expectation_simple_multi, tau_star, Branch,
};
use permclust::rational::ratio;
use permclust::{AvoidanceClass, Permutation, DEFAULT_ENUM_CAP as CAP};

fn s3() -> Vec<Permutation> {
    Permutation::all(3).collect()
}

#[test]
fn closed_form_matches_enumeration() {
    for eta in s3() {
        let c = AvoidanceClass::single(eta.clone()).unwrap();
        for k in 2..=4 {
            for n in k..=9 {
                let tally = tally_patterns(n, k, &c, CAP).unwrap();
                for tau in Permutation::all(k) {
                    let e = expectation_s3(n, k, &tau, &eta).unwrap();
                    assert_eq!(e.value, tally.mean(&tau), "eta={eta} n={n} k={k} tau={tau}");
                    assert_eq!(e.branch == Branch::Excluded, permclust::perm::contains(&tau, &eta));
                }
            }
        }
    }
}

#[test]
fn star_pattern_dominates() {
    for eta in s3() {
        let c = AvoidanceClass::single(eta.clone()).unwrap();
        for k in 2..=6 {
            let star = tau_star(&eta, k).unwrap();
            let others: Vec<Permutation> = enumerate_class(k, &c).filter(|t| *t != star).collect();
            for n in k + 1..=30 {
                let s = expectation_s3(n, k, &star, &eta).unwrap();
                assert_eq!(s.branch, Branch::Star);
                for tau in &others {
                    assert!(s.value > expectation_s3(n, k, tau, &eta).unwrap().value, "eta={eta} k={k} n={n} tau={tau}");
                }
            }
        }
    }
}

#[test]
fn totals_are_sums_over_patterns() {
    for eta in s3() {
        let c = AvoidanceClass::single(eta.clone()).unwrap();
        for k in 2..=5 {
            let taus: Vec<Permutation> = enumerate_class(k, &c).collect();
            for n in k..=12 {
                let sum: BigRational = taus.iter().map(|t| expectation_s3(n, k, t, &eta).unwrap().value).sum();
                assert_eq!(sum, expectation_s3_total(n, k, &eta).unwrap());
            }
            assert_eq!(expectation_s3_total(k, k, &eta).unwrap(), ratio(1, 1));
        }
    }
}

#[test]
fn single_window_mean_is_one_over_catalan() {
    for eta in s3() {
        let c = AvoidanceClass::single(eta.clone()).unwrap();
        for k in 2..=6 {
            let ck = catalan(k);
            for tau in enumerate_class(k, &c) {
                let e = expectation_s3(k, k, &tau, &eta).unwrap().value;
                assert_eq!(e, BigRational::new(1.into(), ck.clone().into()));
            }
        }
    }
}

#[test]
fn reversal_closure() {
    for eta in s3() {
        for k in 2..=4 {
            for tau in Permutation::all(k) {
                for n in k..=9 {
                    let a = expectation_s3(n, k, &tau, &eta).unwrap();
                    let b = expectation_s3(n, k, &tau.reverse(), &eta.reverse()).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }
}

#[test]
fn simple_class_formula_is_pattern_independent_and_exact() {
    for c in ["2413+3142", "3142", "2413", "24153"] {
        let c: AvoidanceClass = c.parse().unwrap();
        for n in 2..=8 {
            for k in 2..=n.min(4) {
                let taus: Vec<Permutation> = enumerate_class(k, &c).collect();
                let first = expectation_simple_multi(n, k, &taus[0], &c, CAP).unwrap().value;
                for tau in &taus {
                    assert_eq!(expectation_simple_multi(n, k, tau, &c, CAP).unwrap().value, first);
                }
                if n == k {
                    let size = count_class(k, &c, CAP).unwrap();
                    assert_eq!(first, BigRational::new(1.into(), size.into()));
                }
            }
        }
    }
    let c: AvoidanceClass = "3142".parse().unwrap();
    let m = exact_moments(7, 3, Some(&"123".parse().unwrap()), &c, CAP).unwrap();
    let e = expectation(7, 3, &"123".parse().unwrap(), &c, CAP).unwrap();
    let expected = BigRational::new(
        (count_class(5, &c, CAP).unwrap() * 5u32).into(),
        count_class(7, &c, CAP).unwrap().into(),
    );
    assert_eq!(e.value, expected);
    assert_eq!(m.mean, expected);
}
