#![allow(dead_code)]

use linrec::dominance::*;
use linrec::interval::CertifiedReal;
use linrec::recurrence::{spectral_analyze, LinearRecurrence, SpectralData};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};

const PREC: u32 = 256;

pub fn recurrences() -> Vec<LinearRecurrence> {
    vec![
        LinearRecurrence::zeckendorf_fibonacci(),
        LinearRecurrence::powers_of(2),
        LinearRecurrence::powers_of(3),
        LinearRecurrence::from_i64(&[2, 1], &[0, 1]).unwrap(),
        LinearRecurrence::from_i64(&[1, 1, 1], &[0, 0, 1]).unwrap(),
        LinearRecurrence::from_i64(&[3, -1], &[1, 3]).unwrap(),
    ]
}

fn random_exponents(rng: &mut ChaCha8Rng, k: usize, min_gap: u64, from: u64) -> Vec<u64> {
    let mut e = vec![rng.gen_range(0..8u64)];
    for _ in 1..k {
        let last = *e.last().unwrap();
        e.push(last + min_gap + rng.gen_range(0..12u64));
    }
    let shift = from.saturating_sub(*e.last().unwrap());
    e.iter_mut().for_each(|x| *x += shift);
    e.reverse();
    e
}

/// Checks a dominance certificate against `samples` random exponent tuples
/// (or its witness exactly). Returns the number of tuples checked.
pub fn check_side(rec: &LinearRecurrence, coeffs: &[i64], rng: &mut ChaCha8Rng, samples: usize) -> Result<usize, String> {
    let side = SideSpec::from_i64(rec.clone(), coeffs).map_err(|e| e.to_string())?;
    let sp = spectral_analyze(rec, 128).map_err(|e| e.to_string())?;
    let cert = check_dominance_with(&side, &sp).map_err(|e| e.to_string())?;
    let f = &sp.field;
    if !cert.is_dominant() {
        let w = cert.witness.clone().ok_or("no witness")?;
        let mut sum = f.zero();
        for (a, e) in coeffs.iter().zip(&w.exponents) {
            let p = f.pow(&f.gen(), *e as i64).unwrap();
            sum = f.add(&sum, &f.scale(&p, &Rational::from(*a)));
        }
        return if sum.is_zero() && w.exponents.len() == w.level {
            Ok(1)
        } else {
            Err(format!("witness {w:?} for {coeffs:?} does not vanish"))
        };
    }
    let c = cert.constants.as_ref().unwrap();
    if !(c.c2.is_positive() && c.c3.is_positive()) {
        return Err(format!("non-positive constants for {coeffs:?}"));
    }
    for w in cert.level_constants.windows(2) {
        if w[1].lo() > w[0].hi() {
            return Err(format!("level constants increase for {coeffs:?}"));
        }
    }
    let (lower, upper) = infimum_supremum_proxies(&side, &sp, &cert).map_err(|e| e.to_string())?;
    let alpha = sp.alpha.with_prec(PREC);
    for _ in 0..samples {
        let e = random_exponents(rng, coeffs.len(), side.min_gap.max(1), c.c3_valid_from);
        let s: Integer = coeffs.iter().zip(&e).map(|(a, n)| Integer::from(*a) * rec.term(*n)).sum();
        let s = CertifiedReal::from_integer(&s, PREC).abs();
        let u1 = CertifiedReal::from_integer(&rec.term(e[0]), PREC).abs();
        if s.hi() < (&c.c3 * &u1).lo() || s.hi() < (&lower * &u1).lo() {
            return Err(format!("C3 violated at {e:?} for {coeffs:?} over {rec}"));
        }
        if s.lo() > (&upper * &u1).hi() {
            return Err(format!("upper proxy violated at {e:?} for {coeffs:?} over {rec}"));
        }
        let mut lin = CertifiedReal::zero(PREC);
        for (a, n) in coeffs.iter().zip(&e) {
            lin = &lin + &(&CertifiedReal::from_i64(*a, PREC) * &alpha.pow_u(*n));
        }
        if lin.abs().hi() < (&c.c2 * &alpha.abs().pow_u(e[0])).lo() {
            return Err(format!("C2 violated at {e:?} for {coeffs:?} over {rec}"));
        }
    }
    Ok(samples)
}

/// |U_n − uα^n| ≤ C₁|α_2|^n for 0 ≤ n ≤ `up_to`.
pub fn check_binet(r: &LinearRecurrence, sp: &SpectralData, up_to: usize) -> Result<(), String> {
    let p = 1024;
    let alpha = sp.dominant_root.real_value(p);
    let u = sp.field.real_value(&sp.u_exact, p);
    let c1 = sp.approx_constant.with_prec(p);
    let second = sp.second_modulus_bound.with_prec(p);
    for (n, t) in r.terms(up_to + 1).iter().enumerate() {
        let main = &u * &alpha.pow_u(n as u64);
        let err = (&CertifiedReal::from_integer(t, p) - &main).abs();
        let rhs = &c1 * &second.pow_u(n as u64);
        if err.hi() > rhs.hi() {
            return Err(format!("{r} fails at n = {n}"));
        }
    }
    Ok(())
}
