use num_rational::BigRational;
use permclust::enumerate::{catalan, enumerate_class};
use permclust::formulas::expectation_s3;
use permclust::rational::from_int;
use permclust::series::{
    binomial_sqrt, catalan_gf, domination_check, g_closed, g_from_recursion, second_moment_bounds,
    second_moment_check, verify_identities, HalfExponent, TruncatedSeries,
};
use permclust::{AvoidanceClass, Permutation, DEFAULT_ENUM_CAP as CAP};

const T: usize = 30;

fn one_minus_4t(order: usize) -> TruncatedSeries {
    &TruncatedSeries::one(order) - &TruncatedSeries::monomial(from_int(4), 1, order)
}

#[test]
fn half_integer_powers_are_consistent() {
    let plus = binomial_sqrt(HalfExponent::PlusHalf, T);
    let minus = binomial_sqrt(HalfExponent::MinusHalf, T);
    let three = binomial_sqrt(HalfExponent::MinusThreeHalves, T);
    let inv = binomial_sqrt(HalfExponent::MinusOne, T);
    let base = one_minus_4t(T);
    assert_eq!(&plus * &plus, base);
    assert_eq!(&plus * &minus, TruncatedSeries::one(T));
    assert_eq!(&three * &base, minus);
    assert_eq!(&minus * &minus, inv);
    assert_eq!(base.reciprocal().unwrap(), inv);
    // d/dt (1-4t)^{1/2} = -2 (1-4t)^{-1/2}
    assert_eq!(plus.derivative().unwrap(), minus.truncate(T - 1).scalar_mul(&from_int(-2)));
}

#[test]
fn catalan_series_solves_its_quadratic() {
    let c = catalan_gf(T);
    let lhs = &(&(&c * &c).shift(1) - &c) + &TruncatedSeries::one(T);
    assert_eq!(lhs, TruncatedSeries::zero(T));
    for n in 0..=T {
        assert_eq!(*c.coeff(n), BigRational::from_integer(catalan(n).into()));
    }
}

#[test]
fn recursion_closed_form_and_formula_agree() {
    for k in 2..=6 {
        for star in [false, true] {
            let closed = g_closed(k, star, T);
            assert_eq!(g_from_recursion(k, star, T), closed, "k={k} star={star}");
            let eta: Permutation = "231".parse().unwrap();
            let tau = if star { Permutation::identity(k).reverse() } else { Permutation::identity(k) };
            for n in k..=T {
                let e = expectation_s3(n, k, &tau, &eta).unwrap().value;
                let from_series = closed.coeff(n) / BigRational::from_integer(catalan(n).into());
                assert_eq!(e, from_series, "k={k} star={star} n={n}");
            }
        }
    }
}

#[test]
fn identity_sweep_holds() {
    let ids = verify_identities(40);
    assert!(!ids.is_empty());
    for id in &ids {
        assert!(id.holds(), "{} k={:?} i_k={:?} mismatch at {:?}", id.name, id.k, id.i_k, id.first_mismatch);
    }
}

#[test]
fn cross_term_is_dominated() {
    for tau in ["12", "213", "132", "123", "1243", "2134", "1324"] {
        let tau: Permutation = tau.parse().unwrap();
        let r = domination_check(&tau, 11, CAP).unwrap();
        assert!(r.holds, "tau={tau}");
    }
}

#[test]
fn second_moment_lies_between_bounds() {
    for tau in ["12", "213", "123", "2134"] {
        let tau: Permutation = tau.parse().unwrap();
        let rows = second_moment_check(&tau, 11, CAP).unwrap();
        for r in &rows {
            assert_eq!(r.brute, r.exact, "tau={tau} n={}", r.n);
            assert!(r.lower <= r.brute && r.brute <= r.upper, "tau={tau} n={}", r.n);
        }
    }
}

#[test]
fn bound_ratio_shrinks_towards_one() {
    // The cross term is lower order, so upper/lower peaks and then decays.
    let (lower, upper) = second_moment_bounds(3, 1, 160);
    let ratios: Vec<f64> = (40..=160)
        .step_by(30)
        .map(|n| permclust::rational::to_f64(&(upper.coeff(n) / lower.coeff(n))))
        .collect();
    for w in ratios.windows(2) {
        assert!(w[1] < w[0], "{ratios:?}");
    }
    assert!(ratios[0] > 1.0);
}

#[test]
fn brute_second_moment_tracks_dominant_term() {
    let tau: Permutation = "12".parse().unwrap();
    let rows = second_moment_check(&tau, 11, CAP).unwrap();
    let rel: Vec<f64> = rows[6..]
        .iter()
        .map(|r| permclust::rational::to_f64(&(&r.brute / &r.dominant)))
        .collect();
    // The ratio tends to one; it drifts monotonically downward here.
    for w in rel.windows(2) {
        assert!(w[1] < w[0], "{rel:?}");
    }
    assert!(rel.iter().all(|&x| x > 1.0));
}

#[test]
fn second_moment_dominates_squared_mean() {
    let c: AvoidanceClass = "231".parse().unwrap();
    let tau: Permutation = "12".parse().unwrap();
    assert!(enumerate_class(2, &c).any(|t| t == tau));
    let rows = second_moment_check(&tau, 10, CAP).unwrap();
    for r in rows.iter().skip(2) {
        let cn = BigRational::from_integer(catalan(r.n).into());
        let mean = expectation_s3(r.n, 2, &tau, &"231".parse().unwrap()).unwrap().value;
        assert!(&r.brute / &cn >= &mean * &mean);
    }
}
