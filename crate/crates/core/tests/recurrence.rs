mod common;

use linrec::interval::CertifiedReal;
use linrec::recurrence::{check_admissible, spectral_analyze, LinearRecurrence};
use proptest::prelude::*;
use rug::{Integer, Rational};

fn rec(c: &[i64], init: &[i64]) -> LinearRecurrence {
    LinearRecurrence::from_i64(c, init).unwrap()
}

#[test]
fn term_examples() {
    assert_eq!(LinearRecurrence::zeckendorf_fibonacci().term(6), 21);
    assert_eq!(LinearRecurrence::powers_of(2).term(10), 1024);
    assert_eq!(rec(&[2, 1], &[0, 1]).term(5), 29);
    let big = LinearRecurrence::zeckendorf_fibonacci().term(1000);
    assert_eq!(big.significant_bits(), 695);
}

#[test]
fn fibonacci_spectrum() {
    let sp = spectral_analyze(&LinearRecurrence::zeckendorf_fibonacci(), 128).unwrap();
    let p = 200;
    let phi = (&CertifiedReal::from_i64(5, p).sqrt() + &CertifiedReal::one(p)).div_i64(2);
    let psi = (&CertifiedReal::from_i64(5, p).sqrt() - &CertifiedReal::one(p)).div_i64(2);
    let u = phi.sqr().div(&CertifiedReal::from_i64(5, p).sqrt());
    assert!((sp.alpha.to_f64() - phi.to_f64()).abs() < 1e-30);
    assert!(sp.alpha.contains(&phi.mid()) || sp.alpha.width() < 1e-35);
    assert!(sp.second_modulus_bound.hi() >= psi.lo());
    assert!((&sp.second_modulus_bound - &psi).abs().to_f64() < 1e-30);
    assert!((sp.u.to_f64() - u.to_f64()).abs() < 1e-30);
    assert_eq!(sp.roots.len(), 2);
}

#[test]
fn powers_of_two_have_no_secondary_spectrum() {
    let sp = spectral_analyze(&LinearRecurrence::powers_of(2), 128).unwrap();
    assert_eq!(sp.dominant_root.as_rational(), Some(Rational::from(2)));
    assert!(sp.second_modulus_bound.hi().is_zero());
    assert_eq!(sp.roots.len(), 1);
    assert_eq!(sp.u.to_f64(), 1.0);
}

#[test]
fn tribonacci_dominant_root() {
    let sp = spectral_analyze(&rec(&[1, 1, 1], &[0, 0, 1]), 128).unwrap();
    assert!((sp.alpha.to_f64() - 1.839286755214161).abs() < 1e-14);
    assert!(sp.second_modulus_bound.to_f64() < 1.0);
}

#[test]
fn admissibility_verdicts() {
    assert!(check_admissible(&LinearRecurrence::zeckendorf_fibonacci()).admissible());
    let minus_one = check_admissible(&rec(&[0, 1], &[1, 2]));
    assert!(!minus_one.non_degenerate.ok);
    let double = check_admissible(&rec(&[4, -4], &[1, 3]));
    assert!(!double.simple.ok);
    assert!(spectral_analyze(&rec(&[4, -4], &[1, 3]), 64).is_err());
}

#[test]
fn spectral_analysis_is_deterministic() {
    let r = rec(&[1, 1, 1], &[1, 2, 4]);
    let a = spectral_analyze(&r, 128).unwrap();
    let b = spectral_analyze(&r, 128).unwrap();
    assert_eq!(a.alpha.lo(), b.alpha.lo());
    assert_eq!(a.alpha.hi(), b.alpha.hi());
    assert_eq!(a.approx_constant.hi(), b.approx_constant.hi());
}

#[test]
fn lemma_3_1_instantiated() {
    for r in [
        LinearRecurrence::zeckendorf_fibonacci(),
        LinearRecurrence::powers_of(2),
        LinearRecurrence::powers_of(10),
        rec(&[2, 1], &[0, 1]),
        rec(&[1, 1, 1], &[0, 0, 1]),
        rec(&[1, 1, 1], &[1, 2, 4]),
        rec(&[3, -1], &[1, 3]),
        rec(&[2, 1, 1], &[1, 3, 8]),
    ] {
        let sp = spectral_analyze(&r, 128).unwrap();
        common::check_binet(&r, &sp, 200).unwrap();
    }
}

#[derive(Clone, Debug)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

fn rational() -> impl Strategy<Value = (i64, i64)> {
    (-1000i64..1000, 1i64..1000)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn enclosures_contain_exact_rational_results(
        start in rational(),
        steps in prop::collection::vec((prop_oneof![Just(Op::Add), Just(Op::Sub), Just(Op::Mul), Just(Op::Div)], rational()), 1..8),
        prec in 24u32..200,
    ) {
        let mut exact = Rational::from(start);
        let mut enc = CertifiedReal::from_rational(&exact, prec);
        for (op, (n, d)) in steps {
            let q = Rational::from((n, d));
            let qe = CertifiedReal::from_rational(&q, prec);
            match op {
                Op::Add => { exact += &q; enc = &enc + &qe; }
                Op::Sub => { exact -= &q; enc = &enc - &qe; }
                Op::Mul => { exact *= &q; enc = &enc * &qe; }
                Op::Div => {
                    if n == 0 { continue; }
                    exact /= &q;
                    enc = enc.div(&qe);
                }
            }
        }
        prop_assert!(enc.contains_rational(&exact));
    }

    #[test]
    fn recurrence_terms_satisfy_the_relation(c1 in 1i64..5, c2 in prop_oneof![-3i64..0, 1i64..4], a in -5i64..6, b in -5i64..6, n in 0u64..60) {
        let r = rec(&[c1, c2], &[a, b]);
        let lhs = r.term(n + 2);
        let rhs = Integer::from(c1) * r.term(n + 1) + Integer::from(c2) * r.term(n);
        prop_assert_eq!(lhs, rhs);
    }
}
