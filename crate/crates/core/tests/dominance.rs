mod common;

use linrec::dominance::*;
use linrec::interval::CertifiedReal;
use linrec::recurrence::LinearRecurrence;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn certificates_examples() {
    let fib = LinearRecurrence::zeckendorf_fibonacci;
    let c = check_dominance(&SideSpec::from_i64(fib(), &[1, -1, -1, 1]).unwrap()).unwrap();
    assert_eq!(c.witness.as_ref().unwrap().exponents, vec![2, 1, 0]);
    assert!(c.report().contains("witness exponents: (2, 1, 0)"));
    let c = check_dominance(&SideSpec::digits(fib(), 4, 2)).unwrap();
    assert!(c.is_dominant());
    assert!((c.constants.unwrap().c3.to_f64() - 1.0).abs() < 1e-12);
    let c = check_dominance(&SideSpec::from_i64(LinearRecurrence::powers_of(2), &[1, -2]).unwrap()).unwrap();
    assert!(!c.is_dominant());
}

#[test]
fn zeckendorf_and_binary_sides_are_sound() {
    for (i, rec) in [LinearRecurrence::zeckendorf_fibonacci(), LinearRecurrence::powers_of(2)].into_iter().enumerate() {
        common::check_side(&rec, &[1, 1, 1, 1], &mut ChaCha8Rng::seed_from_u64(i as u64), 150).unwrap();
    }
}

#[test]
fn geometric_sum_matches_closed_form() {
    let r = CertifiedReal::from_i64(1, 128).div_i64(3);
    let s = geometric_sum(&r, 5);
    assert!((s.to_f64() - (1.0 - (1.0f64 / 3.0).powi(5)) / (1.0 - 1.0 / 3.0)).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dominance_certificates_are_sound(
        which in 0usize..6,
        coeffs in prop::collection::vec(prop_oneof![-3i64..0, 1i64..4], 1..4),
        seed in any::<u64>(),
    ) {
        let rec = common::recurrences().swap_remove(which);
        let checked = common::check_side(&rec, &coeffs, &mut ChaCha8Rng::seed_from_u64(seed), 150);
        prop_assert!(checked.is_ok(), "{}", checked.unwrap_err());
    }
}
