use linrec::heights::*;
use linrec::interval::CertifiedReal;
use linrec::recurrence::{spectral_analyze, LinearRecurrence};
use proptest::prelude::*;
use rug::Rational;

fn close(a: &CertifiedReal, b: &CertifiedReal, tol: f64) -> bool {
    (a - b).abs().to_f64() <= tol * (1.0 + b.to_f64().abs())
}

/// log C(k,d) computed term by term in floating point.
fn bw_log_oracle(k: u32, d: u32) -> f64 {
    let log_fact: f64 = (2..=k + 1).map(|i| (i as f64).ln()).sum();
    18f64.ln()
        + log_fact
        + (k + 1) as f64 * (k as f64).ln()
        + (k + 2) as f64 * (32.0 * d as f64).ln()
        + (2.0 * k as f64 * d as f64).ln().ln()
}

#[test]
fn bw_constant_matches_oracle() {
    for k in 1..=8 {
        for d in 1..=6 {
            let c = bw_constant(k, d, 128);
            let got = c.ln().to_f64();
            assert!((got - bw_log_oracle(k, d)).abs() < 1e-12 * got.abs().max(1.0), "k={k} d={d}");
        }
    }
}

fn fields() -> Vec<std::sync::Arc<linrec::algebraic::NumberField>> {
    [
        LinearRecurrence::zeckendorf_fibonacci(),
        LinearRecurrence::from_i64(&[2, 1], &[0, 1]).unwrap(),
        LinearRecurrence::from_i64(&[1, 1, 1], &[0, 0, 1]).unwrap(),
    ]
    .into_iter()
    .map(|r| spectral_analyze(&r, 128).unwrap().field)
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pdw_bound_dominates(u in 0.0f64..1e6, v in 1e-3f64..1e4, h in 1.0f64..4.0) {
        let p = 128;
        let b = pdw_solve(&CertifiedReal::from_f64(u, p), &CertifiedReal::from_f64(v, p), &CertifiedReal::from_f64(h, p)).unwrap();
        let b = b.to_f64();
        prop_assert!(b.is_finite() && b > u);
        for x in [b, 2.0 * b, 10.0 * b, b * b] {
            prop_assert!(x > u + v * x.ln().powf(h), "x = {x} is a solution of x <= u + v(log x)^h");
        }
    }

    #[test]
    fn height_of_inverse_and_powers(which in 0usize..3, c in prop::collection::vec(-6i64..7, 3), n in -4i64..5) {
        let f = &fields()[which];
        let mut eta = f.zero();
        let mut t = f.one();
        for ci in c.iter().take(f.degree()) {
            eta = f.add(&eta, &f.scale(&t, &Rational::from(*ci)));
            t = f.mul(&t, &f.gen());
        }
        prop_assume!(!eta.is_zero());
        let h = field_height(f, &eta, 192);
        let inv = f.inv(&eta).unwrap();
        prop_assert!(close(&field_height(f, &inv, 192), &h, 1e-25));
        let pw = f.pow(&eta, n).unwrap();
        let expect = h.mul_i64(n.abs());
        prop_assert!(close(&field_height(f, &pw, 192), &expect, 1e-25));
    }

    #[test]
    fn calculus_bounds_true_heights(which in 0usize..3, a in -5i64..6, b in 1i64..6, n in 1i64..4) {
        // h((a + bθ)^n · θ^{-1}) ≤ n·h(a + bθ) + h(θ)
        let f = &fields()[which];
        let x = f.add(&f.from_i64(a), &f.scale(&f.gen(), &Rational::from(b)));
        let y = f.div(&f.pow(&x, n).unwrap(), &f.gen()).unwrap();
        let hx = field_height(f, &x, 128);
        let hg = field_height(f, &f.gen(), 128);
        let e = HeightExpr::Product(vec![
            HeightExpr::Power(Box::new(HeightExpr::Known(hx)), n),
            HeightExpr::Inverse(Box::new(HeightExpr::Known(hg))),
        ]);
        let bound = height_calculus(&e, 128);
        prop_assert!(field_height(f, &y, 128).lo() <= bound.hi());
    }
}
