use pinwheel_core::fold::{ffold, fold, FoldParameter};
use pinwheel_core::partition::{folded_instance, Partition};
use pinwheel_core::{covers, Instance, Rational};
use proptest::prelude::*;

fn theta(t: u64) -> FoldParameter {
    FoldParameter::new(t).unwrap()
}

fn instance(max: u64) -> impl Strategy<Value = Instance> {
    prop::collection::vec(1u64..=max, 1..14).prop_map(|v| Instance::from_integers(&v))
}

fn even_theta() -> impl Strategy<Value = u64> {
    (6u64..=15).prop_map(|k| 2 * k)
}

fn inv(theta: u64) -> Rational {
    Rational::new(1.into(), theta.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn fold_caps_values_and_density(a in instance(120), t in even_theta()) {
        let f = fold(&a, theta(t)).unwrap();
        prop_assert!(f.values().iter().all(|v| *v <= num_rational::Ratio::from_integer(t)));
        prop_assert!(f.density() <= a.density() + inv(t));
        prop_assert_eq!(f.trace().replay(&a).unwrap(), f.values().to_vec());
    }

    #[test]
    fn ffold_bounds_dprime(a in instance(120), t in even_theta()) {
        let b = ffold(&a, theta(t)).unwrap();
        prop_assert!(b.iter().all(|p| p.as_integer().is_some_and(|v| v < t)));
        prop_assert!(b.dprime(t).unwrap() <= a.density() + inv(t));
    }

    #[test]
    fn ffold_is_identity_below_theta(v in prop::collection::vec(1u64..=11, 1..10)) {
        let a = Instance::from_integers(&v);
        prop_assert_eq!(ffold(&a, theta(12)).unwrap(), a);
    }

    #[test]
    fn partition_fold_keeps_positions_covered(v in prop::collection::vec(4u64..=30, 2..12)) {
        let a = Instance::from_integers(&v);
        let (folded, _) = folded_instance(&a, &Partition::empty(), &Default::default()).unwrap();
        prop_assert_eq!(&folded, &a);
        prop_assert!(covers(&folded, &a));
    }
}

/// Folding at `theta + 2` first can end below the direct fold:
/// `[28, 28]` folds to `[14]` at 26 but to `[27, 27]` at 28 and then `[13]`.
#[test]
fn refolding_can_differ() {
    let a: Instance = "28,28".parse().unwrap();
    assert_eq!(ffold(&a, theta(26)).unwrap(), "14".parse().unwrap());
    assert_eq!(ffold(&ffold(&a, theta(28)).unwrap(), theta(26)).unwrap(), "13".parse().unwrap());
}

/// Refolding need not cover the direct fold either: `[11, 21, 21]` does
/// not cover `[11, 11]`.
#[test]
fn refolding_can_be_incomparable() {
    let a: Instance = "23,23,45,45,45,89,89".parse().unwrap();
    let up = ffold(&a, theta(24)).unwrap();
    assert_eq!(up, "22,22,23,23".parse().unwrap());
    let refolded = ffold(&up, theta(22)).unwrap();
    let direct = ffold(&a, theta(22)).unwrap();
    assert_eq!(refolded, "11,21,21".parse().unwrap());
    assert_eq!(direct, "11,11".parse().unwrap());
    assert!(!covers(&refolded, &direct) && !covers(&direct, &refolded));
}

/// The `D'` excess over `1/theta` can grow by one fold step:
/// `D'_16([14, 14]) - 1/16 = 17/240` but `D'_14([13, 13]) - 1/14 = 1/14`.
#[test]
fn dprime_slack_can_grow_by_one_fold_step() {
    let x: Instance = "14,14".parse().unwrap();
    let down = ffold(&x, theta(14)).unwrap();
    assert_eq!(down, "13,13".parse().unwrap());
    let before = x.dprime(16).unwrap() - inv(16);
    let after = down.dprime(14).unwrap() - inv(14);
    assert!(after > before);
}

/// Covering is not preserved by integer folding: `[12, 13]` covers
/// `[13, 13]`, but at theta 12 the folds are `[11, 11]` and `[6]`.
#[test]
fn ffold_does_not_preserve_covering() {
    let hard: Instance = "12,13".parse().unwrap();
    let easy: Instance = "13,13".parse().unwrap();
    assert!(covers(&hard, &easy));
    let (fh, fe) = (ffold(&hard, theta(12)).unwrap(), ffold(&easy, theta(12)).unwrap());
    assert_eq!(fh, "11,11".parse().unwrap());
    assert_eq!(fe, "6".parse().unwrap());
    assert!(!covers(&fh, &fe));
}
