use std::collections::HashSet;

use permclust::perm::{
    avoids_all, contains, contract, extend, is_stack_sortable, longest_decreasing, reduce, Symmetry,
};
use permclust::{AvoidanceClass, Permutation, Word};
use proptest::prelude::*;

fn distinct_word() -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::hash_set(1u32..200, 1..12).prop_flat_map(|set| {
        let v: Vec<u32> = set.into_iter().collect();
        Just(v).prop_shuffle()
    })
}

proptest! {
    #[test]
    fn reduce_is_idempotent_and_order_preserving(w in distinct_word()) {
        let r = reduce(&Word::new(w.clone()).unwrap());
        let again = reduce(&Word::new(r.as_slice().to_vec()).unwrap());
        prop_assert_eq!(&again, &r);
        for i in 0..w.len() {
            for j in 0..w.len() {
                prop_assert_eq!(w[i] < w[j], r.as_slice()[i] < r.as_slice()[j]);
            }
        }
    }
}

#[test]
fn reduce_fixes_reduced_words() {
    for n in 1..=8 {
        for s in Permutation::all(n) {
            assert_eq!(reduce(&Word::new(s.as_slice().to_vec()).unwrap()), s);
        }
    }
}

#[test]
fn symmetries_are_involutions() {
    for n in 1..=6 {
        for s in Permutation::all(n) {
            assert_eq!(s.reverse().reverse(), s);
            assert_eq!(s.complement().complement(), s);
            assert_eq!(s.reverse_complement(), s.reverse().complement());
            assert_eq!(s.reverse_complement(), s.complement().reverse());
            assert_eq!(s.symmetry(Symmetry::ReverseComplement), s.reverse_complement());
        }
    }
}

#[test]
fn containment_is_symmetry_equivariant() {
    let s3: Vec<Permutation> = Permutation::all(3).collect();
    for n in 1..=6 {
        for s in Permutation::all(n) {
            for eta in &s3 {
                let c = contains(&s, eta);
                assert_eq!(c, contains(&s.reverse(), &eta.reverse()));
                assert_eq!(c, contains(&s.complement(), &eta.complement()));
            }
        }
    }
}

#[test]
fn containment_cross_oracles() {
    let p231: Permutation = "231".parse().unwrap();
    let p321: Permutation = "321".parse().unwrap();
    for n in 1..=8 {
        for s in Permutation::all(n) {
            assert_eq!(!contains(&s, &p231), is_stack_sortable(&s), "{s}");
            assert_eq!(!contains(&s, &p321), longest_decreasing(&s) <= 2, "{s}");
        }
    }
}

/// Subsequence oracle independent of the backtracking matcher.
fn contains_by_subsets(s: &Permutation, eta: &Permutation) -> bool {
    let n = s.len();
    let m = eta.len();
    (0u32..1 << n).filter(|mask| mask.count_ones() as usize == m).any(|mask| {
        let sub: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| s.as_slice()[i]).collect();
        reduce(&Word::new(sub).unwrap()) == *eta
    })
}

#[test]
fn containment_matches_subset_oracle() {
    let patterns: Vec<Permutation> = ["2413", "3142", "1324", "231"].iter().map(|p| p.parse().unwrap()).collect();
    for n in 1..=7 {
        for s in Permutation::all(n) {
            for eta in &patterns {
                assert_eq!(contains(&s, eta), contains_by_subsets(&s, eta), "{s} vs {eta}");
            }
        }
    }
    let s: Permutation = "213546897".parse().unwrap();
    let c: AvoidanceClass = "231".parse().unwrap();
    assert!(!avoids_all(&s, &c));
    assert!(contains_by_subsets(&s, &"231".parse().unwrap()));
}

#[test]
fn contract_extend_examples() {
    let s: Permutation = "213546897".parse().unwrap();
    let nu = contract(&s, 4, 4, 3).unwrap();
    assert_eq!(nu.to_string(), "2134675");
    assert_eq!(extend(&nu, &"213".parse().unwrap(), 4, 4).unwrap(), s);
    assert!(extend(&nu, &"213".parse().unwrap(), 3, 4).is_err());
    assert!(contract(&s, 5, 4, 3).is_err());
}

#[test]
fn extend_is_injective_for_fixed_parameters() {
    for n in 2..=8 {
        for k in 2..=n {
            let m = n - k + 1;
            let tau = Permutation::identity(k).reverse();
            for a in 1..=m {
                for l in 1..=m {
                    let images: HashSet<Permutation> = Permutation::all(m)
                        .filter(|nu| nu.at(a) as usize == l)
                        .map(|nu| extend(&nu, &tau, l, a).unwrap())
                        .collect();
                    let sources = Permutation::all(m).filter(|nu| nu.at(a) as usize == l).count();
                    assert_eq!(images.len(), sources);
                }
            }
        }
    }
}

#[test]
fn non_simple_class_is_not_closed_under_extension() {
    let c: AvoidanceClass = "231".parse().unwrap();
    let nu: Permutation = "21".parse().unwrap();
    let sigma = extend(&nu, &"12".parse().unwrap(), 2, 1).unwrap();
    assert_eq!(sigma.to_string(), "231");
    assert!(avoids_all(&nu, &c) && !avoids_all(&sigma, &c));
}
