//! Continued fractions, Baker–Davenport reduction, linear relations among
//! (τ, 1, μ), and the Legendre-criterion fallback.

use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::interval::CertifiedReal;

/// Further convergents tried after the first q > 6M before giving up.
pub const RETRY_BUDGET: usize = 25;
pub const DEFAULT_CEILING: u32 = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("precision ceiling of {0} bits reached")]
    PrecisionCeiling(u32),
    #[error("epsilon stayed non-positive for {tried} convergents; tau, 1, mu may be linearly dependent")]
    DependenceSuspected { tried: usize },
    #[error("continued fraction of a rational number ended before the request was met")]
    Terminated,
}

/// A real number that can be enclosed at any requested precision.
pub trait RealSource: Send + Sync {
    fn eval(&self, bits: u32) -> CertifiedReal;

    fn exact(&self) -> Option<Rational> {
        None
    }
}

impl<F: Fn(u32) -> CertifiedReal + Send + Sync> RealSource for F {
    fn eval(&self, bits: u32) -> CertifiedReal {
        self(bits)
    }
}

/// An exactly known rational as a source.
pub struct RationalSource(pub Rational);

impl RealSource for RationalSource {
    fn eval(&self, bits: u32) -> CertifiedReal {
        CertifiedReal::from_rational(&self.0, bits)
    }

    fn exact(&self) -> Option<Rational> {
        Some(self.0.clone())
    }
}

#[derive(Clone, Debug)]
pub struct ContinuedFraction {
    pub quotients: Vec<Integer>,
    /// p_j/q_j for j = 0, …, quotients.len() − 1.
    pub p: Vec<Integer>,
    pub q: Vec<Integer>,
    /// The source is rational and the expansion is complete.
    pub terminated: bool,
    /// Precision at which the quotients were certified.
    pub bits: u32,
}

impl ContinuedFraction {
    fn from_quotients(quotients: Vec<Integer>, terminated: bool, bits: u32) -> Self {
        let (mut p, mut q) = (Vec::with_capacity(quotients.len()), Vec::with_capacity(quotients.len()));
        let (mut p1, mut q1) = (Integer::from(1), Integer::new());
        let (mut p2, mut q2) = (Integer::new(), Integer::from(1));
        for a in &quotients {
            let pn = Integer::from(a * &p1) + &p2;
            let qn = Integer::from(a * &q1) + &q2;
            p2 = std::mem::replace(&mut p1, pn.clone());
            q2 = std::mem::replace(&mut q1, qn.clone());
            p.push(pn);
            q.push(qn);
        }
        ContinuedFraction { quotients, p, q, terminated, bits }
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    /// Smallest j with q_j > x.
    pub fn first_above(&self, x: &Integer) -> Option<usize> {
        self.q.iter().position(|q| q > x)
    }

    /// Largest j with q_j ≤ x.
    pub fn last_at_most(&self, x: &Integer) -> Option<usize> {
        self.q.iter().rposition(|q| q <= x)
    }
}

/// How far an expansion must reach.
#[derive(Clone, Debug)]
pub enum CfNeed {
    Count(usize),
    /// Until some q_j exceeds the threshold, plus this many further quotients.
    QAbove(Integer, usize),
}

/// Common prefix of the expansions of every point of [lo, hi].
fn interval_prefix(lo: Rational, hi: Rational, limit: usize) -> (Vec<Integer>, bool) {
    let (mut lo, mut hi) = (lo, hi);
    let mut out = Vec::new();
    while out.len() < limit {
        let a = lo.clone().floor().numer().clone();
        let b = hi.clone().floor().numer().clone();
        if a != b {
            break;
        }
        let rl = lo - &a;
        let rh = hi - &a;
        out.push(a);
        let (zl, zh) = (rl == 0, rh == 0);
        if zl && zh {
            return (out, true);
        }
        if zl || zh {
            break;
        }
        lo = rh.recip();
        hi = rl.recip();
    }
    (out, false)
}

pub fn cf_expand(x: &dyn RealSource, need: &CfNeed, ceiling: u32) -> Result<ContinuedFraction, ReductionError> {
    let mut bits = match need {
        CfNeed::Count(n) => 64 + 4 * *n as u32,
        CfNeed::QAbove(t, extra) => 64 + 2 * t.significant_bits() + 4 * *extra as u32,
    };
    let limit = match need {
        CfNeed::Count(n) => *n,
        CfNeed::QAbove(..) => usize::MAX,
    };
    let exact = x.exact();
    loop {
        let enc = x.eval(bits);
        if exact.is_some() || enc.is_finite() {
            let (qs, terminated) = match &exact {
                Some(r) => interval_prefix(r.clone(), r.clone(), limit),
                None => interval_prefix(enc.lo().to_rational().expect("finite"), enc.hi().to_rational().expect("finite"), limit),
            };
            let cf = ContinuedFraction::from_quotients(qs, terminated, bits);
            let done = match need {
                CfNeed::Count(n) => cf.len() >= *n,
                CfNeed::QAbove(t, extra) => cf.first_above(t).is_some_and(|j| cf.len() > j + extra),
            };
            if done {
                return Ok(cf);
            }
            if terminated {
                return if matches!(need, CfNeed::Count(_)) { Ok(cf) } else { Err(ReductionError::Terminated) };
            }
        }
        if bits >= ceiling {
            return Err(ReductionError::PrecisionCeiling(ceiling));
        }
        bits = (bits * 2).min(ceiling);
    }
}

/// |nτ − m + μ| < A·B^{−k} with n ≤ M.
pub struct ReductionProblem<'a> {
    pub tau: &'a dyn RealSource,
    pub mu: &'a dyn RealSource,
    /// Certified upper bound for A.
    pub a: CertifiedReal,
    /// Certified lower bound for B > 1.
    pub b: CertifiedReal,
    pub m: Integer,
    pub ceiling: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Method {
    BakerDavenport,
    Legendre,
    Failed,
}

#[derive(Clone, Debug)]
pub struct ReductionOutcome {
    pub method: Method,
    /// No solution has k above this.
    pub new_k_bound: Integer,
    pub q_used: Integer,
    pub epsilon: Option<CertifiedReal>,
    pub s: Option<Integer>,
    /// Denominators tried, in order.
    pub trace: Vec<Integer>,
}

impl ReductionOutcome {
    /// Tab-separated record: id, method, q, ε or S, bound.
    pub fn trace_line(&self, id: &str) -> String {
        let detail = match (&self.epsilon, &self.s) {
            (Some(e), _) => format!("eps={}", e.lower_decimal(12)),
            (None, Some(s)) => format!("S={s}"),
            _ => "-".into(),
        };
        format!("{id}\t{:?}\t{}\t{detail}\t{}", self.method, self.q_used, self.new_k_bound)
    }
}

/// ε = ‖μq‖ − M‖τq‖ with its sign certified, refining precision as needed.
fn epsilon(prob: &ReductionProblem, q: &Integer) -> Result<Option<CertifiedReal>, ReductionError> {
    let mut bits = 2 * q.significant_bits() + prob.m.significant_bits() + 96;
    loop {
        let qq = CertifiedReal::from_integer(q, bits);
        let tq = (&prob.tau.eval(bits) * &qq).dist_to_nearest_integer();
        let mq = (&prob.mu.eval(bits) * &qq).dist_to_nearest_integer();
        let eps = &mq - &(&tq * &CertifiedReal::from_integer(&prob.m, bits));
        if eps.is_positive() {
            return Ok(Some(eps));
        }
        if *eps.hi() < 0 || eps.hi().is_zero() {
            return Ok(None);
        }
        if bits >= prob.ceiling {
            // Undecided at the ceiling: treat like a failed convergent.
            return Ok(None);
        }
        bits = (bits * 2).min(prob.ceiling);
    }
}

/// Expansion of τ reaching past 6M with room for the retry budget.
pub fn cf_for(prob: &ReductionProblem) -> Result<ContinuedFraction, ReductionError> {
    cf_expand(prob.tau, &CfNeed::QAbove(Integer::from(&prob.m * 6u32), RETRY_BUDGET + 1), prob.ceiling)
}

pub fn bd_reduce(prob: &ReductionProblem) -> Result<ReductionOutcome, ReductionError> {
    let cf = cf_for(prob)?;
    bd_reduce_with(prob, &cf)
}

/// Baker–Davenport with a precomputed expansion of τ.
pub fn bd_reduce_with(prob: &ReductionProblem, cf: &ContinuedFraction) -> Result<ReductionOutcome, ReductionError> {
    let six_m = Integer::from(&prob.m * 6u32);
    let j0 = cf.first_above(&six_m).ok_or(ReductionError::Terminated)?;
    let mut trace = Vec::new();
    for j in j0..(j0 + RETRY_BUDGET + 1).min(cf.len()) {
        let q = &cf.q[j];
        trace.push(q.clone());
        if let Some(eps) = epsilon(prob, q)? {
            let p = eps.prec();
            let x = (&prob.a.with_prec(p) * &CertifiedReal::from_integer(q, p)).div(&eps).ln().div(&prob.b.with_prec(p).ln());
            let bound = x.floor_hi().ok_or(ReductionError::PrecisionCeiling(p))?.max(Integer::new());
            return Ok(ReductionOutcome {
                method: Method::BakerDavenport,
                new_k_bound: bound,
                q_used: q.clone(),
                epsilon: Some(eps),
                s: None,
                trace,
            });
        }
    }
    Err(ReductionError::DependenceSuspected { tried: trace.len() })
}

/// Integer relation a·τ + b + c·μ = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

/// Searches relations with max{|a|, |c|} ≤ `height`, smallest height first.
/// A candidate must vanish to within 2^{−(2·bits(height)+128)} at certified
/// precision, and pass `exact` when given.
pub fn detect_dependence(
    tau: &dyn RealSource,
    mu: &dyn RealSource,
    height: i64,
    exact: Option<&dyn Fn(&Relation) -> bool>,
) -> Option<Relation> {
    let t = tau.eval(128).to_f64();
    let u = mu.eval(128).to_f64();
    let hb = 64 - (height.max(1) as u64).leading_zeros();
    let bits = 2 * hb + 192;
    let (tc, uc) = (tau.eval(bits), mu.eval(bits));
    let tol = CertifiedReal::point(Float::with_val(bits, Float::u_exp(1, -(2 * hb as i32 + 128))));
    let check = |a: i64, c: i64| -> Option<Relation> {
        let v = a as f64 * t + c as f64 * u;
        let b = -v.round();
        if (v + b).abs() > 1e-9 * (1.0 + v.abs()) {
            return None;
        }
        let b = b as i64;
        let val = &(&tc.mul_i64(a) + &uc.mul_i64(c)) + &CertifiedReal::from_i64(b, bits);
        if !(val.contains_zero() && val.abs().le(&tol)) {
            return None;
        }
        let (a, b, c) = if a < 0 || (a == 0 && c < 0) { (-a, -b, -c) } else { (a, b, c) };
        let r = Relation { a, b, c };
        exact.map_or(true, |f| f(&r)).then_some(r)
    };
    for h in 1..=height {
        let edge = (1..h).flat_map(|c| [(-h, c), (h, c)]);
        let top = (-h..=h).map(|a| (a, h));
        if let Some(r) = edge.chain(top).find_map(|(a, c)| check(a, c)) {
            return Some(r);
        }
    }
    None
}

/// Legendre fallback for |nτ − m + μ| < A·B^{−k}, n ≤ N, when aτ + b + cμ = 0.
/// Writing n′ = cn − a, m′ = cm + b gives |n′τ − m′| < |c|·A·B^{−k} with
/// |n′| ≤ N′ = |c|N + |a|.
pub fn legendre_reduce(
    cf: &ContinuedFraction,
    rel: &Relation,
    a: &CertifiedReal,
    b: &CertifiedReal,
    n: &Integer,
) -> Result<ReductionOutcome, ReductionError> {
    let p = a.prec().max(b.prec()).max(128);
    let c_abs = rel.c.unsigned_abs();
    let a_prime = a.with_prec(p).mul_i64(c_abs as i64);
    let n_prime = Integer::from(n * c_abs) + rel.a.unsigned_abs();
    let j = cf.last_at_most(&n_prime).ok_or(ReductionError::Terminated)?;
    if cf.len() <= j + 1 && !cf.terminated {
        return Err(ReductionError::Terminated);
    }
    let s = cf.quotients[1..=(j + 1).min(cf.len() - 1)].iter().max().cloned().unwrap_or_default();
    let qj = CertifiedReal::from_integer(&cf.q[j], p);
    let two_an = (&a_prime * &CertifiedReal::from_integer(&n_prime, p)).mul_i64(2);
    let legendre = &(&a_prime * &CertifiedReal::from_integer(&Integer::from(&s + 2u32), p)) * &qj;
    let t = two_an.ln().max(&legendre.ln()).max(&a_prime.ln());
    let x = t.div(&b.with_prec(p).ln());
    let bound = x.ceil_hi().ok_or(ReductionError::PrecisionCeiling(p))?.max(Integer::new());
    Ok(ReductionOutcome {
        method: Method::Legendre,
        new_k_bound: bound,
        q_used: cf.q[j].clone(),
        epsilon: None,
        s: Some(s),
        trace: vec![cf.q[j].clone()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden(bits: u32) -> CertifiedReal {
        (&CertifiedReal::from_i64(5, bits).sqrt() + &CertifiedReal::one(bits)).div_i64(2)
    }

    #[test]
    fn golden_ratio_all_ones() {
        let cf = cf_expand(&golden, &CfNeed::Count(60), DEFAULT_CEILING).unwrap();
        assert!(cf.quotients.iter().all(|a| *a == 1));
        for j in 1..cf.len() {
            let det = Integer::from(&cf.p[j] * &cf.q[j - 1]) - Integer::from(&cf.p[j - 1] * &cf.q[j]);
            assert_eq!(det.abs(), 1);
        }
    }

    #[test]
    fn rational_terminates() {
        let src = RationalSource(Rational::from((355, 113)));
        let cf = cf_expand(&src, &CfNeed::Count(10), DEFAULT_CEILING).unwrap();
        assert!(cf.terminated);
        assert_eq!(cf.quotients, vec![Integer::from(3), Integer::from(7), Integer::from(16)]);
    }

    #[test]
    fn relations_found_and_absent() {
        let tau = |b: u32| {
            let l2 = CertifiedReal::ln2(b);
            golden(b).ln().div(&l2)
        };
        let mu6 = |b: u32| &CertifiedReal::one(b) - &tau(b);
        assert_eq!(detect_dependence(&tau, &tau, 20, None), Some(Relation { a: 1, b: 0, c: -1 }));
        assert_eq!(detect_dependence(&tau, &mu6, 20, None), Some(Relation { a: 1, b: -1, c: 1 }));
        let s2 = |b: u32| CertifiedReal::from_i64(2, b).sqrt();
        let s3 = |b: u32| CertifiedReal::from_i64(3, b).sqrt();
        assert_eq!(detect_dependence(&s2, &s3, 1000, None), None);
    }

    #[test]
    fn legendre_on_golden() {
        let cf = cf_expand(&golden, &CfNeed::QAbove(Integer::from(10_000), 2), DEFAULT_CEILING).unwrap();
        let one = CertifiedReal::one(128);
        let out = legendre_reduce(&cf, &Relation { a: 0, b: 0, c: 1 }, &one, &golden(128), &Integer::from(10_000)).unwrap();
        assert_eq!(out.s, Some(Integer::from(1)));
        let j = cf.last_at_most(&Integer::from(10_000)).unwrap();
        let expect = (2.0f64 * 10_000.0).ln().max((3.0 * cf.q[j].to_f64()).ln()) / golden(64).to_f64().ln();
        assert_eq!(out.new_k_bound, expect.ceil() as i64);
    }

    #[test]
    fn bd_sound_against_brute_force() {
        let nonsquares = [2i64, 3, 5, 6, 7, 10, 11, 13, 14, 15];
        for (idx, (d, j)) in nonsquares.iter().flat_map(|d| (1..=5).map(move |j| (*d, j))).enumerate() {
            let m_cap = 1000 + 1800 * idx as i64 % 9000;
            let tau = move |b: u32| CertifiedReal::from_i64(d, b).sqrt().div_i64(1 + j);
            let mu = move |b: u32| CertifiedReal::from_rational(&Rational::from((j, 11)), b);
            let prob = ReductionProblem {
                tau: &tau,
                mu: &mu,
                a: CertifiedReal::from_i64(3, 128),
                b: CertifiedReal::from_i64(2, 128),
                m: Integer::from(m_cap),
                ceiling: DEFAULT_CEILING,
            };
            let out = bd_reduce(&prob).unwrap();
            let bound = out.new_k_bound.to_i64().unwrap();
            let (t, u) = ((d as f64).sqrt() / (1 + j) as f64, j as f64 / 11.0);
            for n in 0..=m_cap {
                let x = n as f64 * t + u;
                let dist = (x - x.round()).abs();
                let k_max = ((3.0 / dist).log2() - 1e-9).ceil() as i64 - 1;
                assert!(k_max <= bound, "d={d} j={j} n={n}: {k_max} > {bound}");
            }
        }
    }

    #[test]
    fn dependent_instance_is_flagged() {
        let tau = |b: u32| CertifiedReal::from_i64(2, b).sqrt();
        let mu = |b: u32| CertifiedReal::from_i64(8, b).sqrt();
        let prob = ReductionProblem {
            tau: &tau,
            mu: &mu,
            a: CertifiedReal::one(128),
            b: CertifiedReal::from_i64(2, 128),
            m: Integer::from(100),
            ceiling: DEFAULT_CEILING,
        };
        assert_eq!(bd_reduce(&prob).unwrap_err(), ReductionError::DependenceSuspected { tried: RETRY_BUDGET + 1 });
        assert_eq!(detect_dependence(&tau, &mu, 10, None), Some(Relation { a: 2, b: 0, c: -1 }));
    }
}
