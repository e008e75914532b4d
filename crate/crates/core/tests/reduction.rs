use linrec::interval::CertifiedReal;
use linrec::reduction::*;
use proptest::prelude::*;
use rug::float::Round;
use rug::{Float, Integer};

fn zb_tau(bits: u32) -> CertifiedReal {
    let phi = (&CertifiedReal::from_i64(5, bits).sqrt() + &CertifiedReal::one(bits)).div_i64(2);
    phi.ln().div(&CertifiedReal::ln2(bits))
}

/// Plain floating-point expansion at very high precision, trusted for the
/// first `count` quotients because the working precision dwarfs the growth of q_j.
fn oracle_quotients(count: usize) -> Vec<Integer> {
    let p = 8192;
    let phi = (Float::with_val(p, 5).sqrt() + 1u32) / 2u32;
    let mut x = phi.ln() / Float::with_val(p, 2).ln();
    let mut out = Vec::new();
    for _ in 0..count {
        let a = x.clone().floor();
        out.push(a.to_integer().unwrap());
        x -= &a;
        x.recip_round(Round::Nearest);
    }
    out
}

#[test]
fn zb_tau_expansion_matches_oracle() {
    let cf = cf_expand(&zb_tau, &CfNeed::Count(160), DEFAULT_CEILING).unwrap();
    let oracle = oracle_quotients(160);
    assert_eq!(cf.quotients, oracle);
    assert_eq!(cf.quotients[0], 0);
    for j in 1..cf.len() {
        let det = Integer::from(&cf.p[j] * &cf.q[j - 1]) - Integer::from(&cf.p[j - 1] * &cf.q[j]);
        let sign = if j % 2 == 1 { 1 } else { -1 };
        assert_eq!(det, sign);
        assert!(cf.q[j] > cf.q[j - 1] || j == 1);
    }
    let m = Integer::from(31) * Integer::from(Integer::u_pow_u(10, 63));
    assert_eq!(cf.first_above(&m), Some(128));
    assert!(cf.q[127] <= m);
    assert!(cf.q[134] > m);
    assert_eq!(cf.quotients[1..=134].iter().max().unwrap(), &134);
    assert_eq!(cf.quotients[18], 134);
}

#[test]
fn convergents_approximate_tau() {
    let cf = cf_expand(&zb_tau, &CfNeed::Count(80), DEFAULT_CEILING).unwrap();
    let bits = 1024;
    let t = zb_tau(bits);
    for j in 1..cf.len() {
        let q = CertifiedReal::from_integer(&cf.q[j], bits);
        let err = (&(&t * &q) - &CertifiedReal::from_integer(&cf.p[j], bits)).abs();
        assert!(err.lt(&q.recip()), "j = {j}");
    }
}

#[test]
fn trace_lines_are_tab_separated() {
    let tau = |b: u32| CertifiedReal::from_i64(2, b).sqrt();
    let mu = |b: u32| CertifiedReal::from_i64(1, b).div_i64(3);
    let prob = ReductionProblem {
        tau: &tau,
        mu: &mu,
        a: CertifiedReal::from_i64(2, 128),
        b: CertifiedReal::from_i64(2, 128),
        m: Integer::from(10_000),
        ceiling: DEFAULT_CEILING,
    };
    let out = bd_reduce(&prob).unwrap();
    let line = out.trace_line("cell-1");
    let fields: Vec<&str> = line.split('\t').collect();
    assert_eq!(fields.len(), 5);
    assert_eq!(fields[1], "BakerDavenport");
    assert_eq!(fields[4], out.new_k_bound.to_string());
    assert!(out.q_used > 60_000);
}

fn log3_over_log2(bits: u32) -> CertifiedReal {
    CertifiedReal::from_i64(3, bits).ln().div(&CertifiedReal::ln2(bits))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn legendre_bound_is_sound(a in -6i64..7, b in -6i64..7, c in prop_oneof![-5i64..0, 1i64..6]) {
        // μ = −(aτ + b)/c, so aτ + b + cμ = 0.
        let mu = move |bits: u32| (&log3_over_log2(bits).mul_i64(a) + &CertifiedReal::from_i64(b, bits)).div_i64(-c);
        let found = detect_dependence(&log3_over_log2, &mu, 10, None).unwrap();
        prop_assert_eq!(found.a * c, found.c * a);
        prop_assert_eq!(found.b * c, found.c * b);
        let n_cap = 3000i64;
        let cf = cf_expand(&log3_over_log2, &CfNeed::QAbove(Integer::from(n_cap * 6 * c.abs() + a.abs()), 3), DEFAULT_CEILING).unwrap();
        let big_a = CertifiedReal::from_i64(2, 128);
        let big_b = CertifiedReal::from_i64(2, 128);
        let out = legendre_reduce(&cf, &found, &big_a, &big_b, &Integer::from(n_cap)).unwrap();
        let bound = out.new_k_bound.to_i64().unwrap();
        let t = 3f64.log2();
        let u = -(a as f64 * t + b as f64) / c as f64;
        for n in 0..=n_cap {
            if (c * n - a) == 0 {
                continue;
            }
            let x = n as f64 * t + u;
            let dist = (x - x.round()).abs();
            let k_max = ((2.0 / dist).log2() - 1e-9).ceil() as i64 - 1;
            prop_assert!(k_max <= bound, "n = {}: {} > {}", n, k_max, bound);
        }
    }
}
