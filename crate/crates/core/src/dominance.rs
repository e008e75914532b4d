//! Dominance of coefficient tuples: either an exact vanishing relation
//! a_1α^{n_1} + … + a_Kα^{n_K} = 0, or explicit constants C₂, C₃ with
//! |Σ a_iα^{n_i}| > C₂|α|^{n_1} and |Σ a_iU_{n_i}| > C₃|U_{n_1}|.

use std::fmt::Write as _;

use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::algebraic::{FieldElem, NumberField};
use crate::interval::CertifiedReal;
use crate::recurrence::{spectral_analyze, LinearRecurrence, SpectralData, SpectralError};

/// Total number of N-set members explored before giving up.
pub const NSET_CAP: usize = 1_000_000;
const CERT_CEILING: u32 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DominanceError {
    #[error("coefficient tuple must be non-empty with nonzero entries")]
    BadTuple,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("the tuple does not admit dominance")]
    NotDominantInput,
}

/// One side of an equation a_1U_{n_1} + … + a_kU_{n_k}.
#[derive(Clone, Debug)]
pub struct SideSpec {
    pub rec: LinearRecurrence,
    pub coefficients: Vec<Integer>,
    /// Exponent tuples are restricted to regular digit expansions in base U.
    pub regular: bool,
    /// Smallest admissible difference n_i − n_{i+1}.
    pub min_gap: u64,
}

impl SideSpec {
    pub fn new(rec: LinearRecurrence, coefficients: Vec<Integer>) -> Result<Self, DominanceError> {
        if coefficients.is_empty() || coefficients.iter().any(|a| *a == 0) {
            return Err(DominanceError::BadTuple);
        }
        Ok(SideSpec { rec, coefficients, regular: false, min_gap: 1 })
    }

    pub fn from_i64(rec: LinearRecurrence, coefficients: &[i64]) -> Result<Self, DominanceError> {
        Self::new(rec, coefficients.iter().map(|&a| Integer::from(a)).collect())
    }

    /// k unit digits of a regular expansion in base `rec`.
    pub fn digits(rec: LinearRecurrence, k: usize, min_gap: u64) -> Self {
        SideSpec { rec, coefficients: vec![Integer::from(1); k], regular: true, min_gap: min_gap.max(1) }
    }

    pub fn k(&self) -> usize {
        self.coefficients.len()
    }

    /// A = max |a_i|.
    pub fn a_max(&self) -> Integer {
        self.coefficients.iter().map(|a| a.clone().abs()).max().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DominanceVerdict {
    Dominant,
    NotDominant,
}

/// Exponents n_1 > … > n_K ≥ 0 with a_1α^{n_1} + … + a_Kα^{n_K} = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub level: usize,
    pub exponents: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct DominanceConstants {
    pub c2: CertifiedReal,
    pub c3: CertifiedReal,
    /// The C₃ inequality is certified for n_1 ≥ this index.
    pub c3_valid_from: u64,
    pub c3_formula: String,
}

#[derive(Clone, Debug)]
pub struct DominanceCertificate {
    pub verdict: DominanceVerdict,
    pub witness: Option<Witness>,
    pub constants: Option<DominanceConstants>,
    /// N_2, …, N_k as lists of gap tuples (m_2, …, m_K).
    pub exceptional_sets: Vec<Vec<Vec<u64>>>,
    /// C₂^(2), …, C₂^(k).
    pub level_constants: Vec<CertifiedReal>,
    pub method: String,
}

impl DominanceCertificate {
    pub fn is_dominant(&self) -> bool {
        self.verdict == DominanceVerdict::Dominant
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        match self.verdict {
            DominanceVerdict::NotDominant => {
                let w = self.witness.as_ref().unwrap();
                let _ = writeln!(s, "verdict: NotDominant");
                let _ = writeln!(s, "witness level: {}", w.level);
                let ex: Vec<String> = w.exponents.iter().map(|e| e.to_string()).collect();
                let _ = writeln!(s, "witness exponents: ({})", ex.join(", "));
            }
            DominanceVerdict::Dominant => {
                let c = self.constants.as_ref().unwrap();
                let _ = writeln!(s, "verdict: Dominant");
                let _ = writeln!(s, "method: {}", self.method);
                let _ = writeln!(s, "C2 = {}", c.c2.lower_decimal(20));
                let _ = writeln!(s, "C3 = {}  (n_1 >= {})", c.c3.lower_decimal(20), c.c3_valid_from);
                let _ = writeln!(s, "C3 formula: {}", c.c3_formula);
            }
        }
        for (i, c) in self.level_constants.iter().enumerate() {
            let _ = writeln!(s, "C2^({}) = {}", i + 2, c.lower_decimal(20));
        }
        for (i, set) in self.exceptional_sets.iter().enumerate() {
            let items: Vec<String> = set
                .iter()
                .map(|t| format!("({})", t.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")))
                .collect();
            let _ = writeln!(s, "N_{} ({} tuples): {}", i + 2, set.len(), items.join(" "));
        }
        s
    }
}

/// Solves α^{−m} = −prefix/a_K exactly for an integer m ≥ `min_m`, where α
/// is the generator of `field` (real, |α| > 1).
pub fn relation_solve(field: &NumberField, prefix: &FieldElem, a_k: &Integer, min_m: u64) -> Option<u64> {
    let rho = field.scale(prefix, &Rational::from((Integer::from(-1), a_k.clone())));
    if rho.is_zero() {
        return None;
    }
    let bits = 128;
    let r = field.real_value(&rho, bits).abs();
    let a = field.real_value(&field.gen(), bits).abs();
    let est = r.ln().div(&a.ln());
    // α^{−m} = ρ means m = −log|ρ|/log|α|.
    let lo = (-est.hi().clone()).floor().to_integer()?;
    let hi = (-est.lo().clone()).ceil().to_integer()?;
    if hi < 1 || hi.clone() - lo.clone() > 64 {
        return None;
    }
    let start = lo.max(Integer::from(min_m.max(1)));
    let mut m = start;
    while m <= hi {
        let mu = m.to_u64()?;
        let am = field.pow(&field.gen(), mu as i64)?;
        if field.mul(&am, &rho) == field.one() {
            return Some(mu);
        }
        m += 1;
    }
    None
}

pub fn check_dominance(side: &SideSpec) -> Result<DominanceCertificate, DominanceError> {
    let sp = spectral_analyze(&side.rec, 128)?;
    check_dominance_with(side, &sp)
}

/// Positive coefficients, α > 0 and U_n ≥ 0 for all n give C₂ = C₃ = a_1.
fn positivity_shortcut(side: &SideSpec, sp: &SpectralData) -> bool {
    if side.coefficients.iter().any(|a| *a <= 0) || !sp.alpha.is_positive() || !sp.u.is_positive() {
        return false;
    }
    nonnegative_from(side, sp).is_some()
}

/// Index n_0 and proof that U_n ≥ 0 for all n: exact check below n_0, and
/// uα^n − C₁|α_2|^n > 0 from n_0 on.
fn nonnegative_from(side: &SideSpec, sp: &SpectralData) -> Option<u64> {
    let d = side.rec.order();
    let n0 = if d == 1 {
        0
    } else {
        let theta = sp.secondary_ratio();
        if !theta.lt(&CertifiedReal::one(sp.precision)) {
            return None;
        }
        let mut n = 0u64;
        let mut t = CertifiedReal::one(sp.precision);
        while !(&sp.approx_constant * &t).lt(&sp.u) {
            t = &t * &theta;
            n += 1;
            if n > 100_000 {
                return None;
            }
        }
        n
    };
    let terms = side.rec.terms(n0 as usize);
    terms.iter().all(|t| *t >= 0).then_some(n0)
}

struct Level {
    tuple: Vec<u64>,
    value: FieldElem,
    abs: CertifiedReal,
}

/// |x| for a nonzero field element, refined until the enclosure excludes 0.
fn certified_abs(field: &NumberField, x: &FieldElem, start: u32) -> Result<CertifiedReal, DominanceError> {
    let mut bits = start;
    loop {
        let v = field.real_value(x, bits).abs();
        if v.is_positive() {
            return Ok(v);
        }
        if bits >= CERT_CEILING {
            return Err(DominanceError::PrecisionExhausted("nonzero partial sum not separated from 0".into()));
        }
        bits *= 2;
    }
}

fn point_lower(x: &CertifiedReal) -> CertifiedReal {
    x.lower()
}

pub fn check_dominance_with(side: &SideSpec, sp: &SpectralData) -> Result<DominanceCertificate, DominanceError> {
    if side.coefficients.is_empty() || side.coefficients.iter().any(|a| *a == 0) {
        return Err(DominanceError::BadTuple);
    }
    let k = side.k();
    let prec = sp.precision.max(128);
    let a1 = &side.coefficients[0];

    if positivity_shortcut(side, sp) {
        let c = CertifiedReal::from_integer(a1, prec);
        return Ok(DominanceCertificate {
            verdict: DominanceVerdict::Dominant,
            witness: None,
            constants: Some(DominanceConstants {
                c2: c.clone(),
                c3: c.clone(),
                c3_valid_from: 0,
                c3_formula: "positive coefficients and non-negative terms: C3 = a_1".into(),
            }),
            exceptional_sets: vec![],
            level_constants: (2..=k).map(|_| c.clone()).collect(),
            method: "positivity".into(),
        });
    }

    let field = &sp.field;
    let abs_alpha = sp.abs_alpha().with_prec(prec);
    let one = CertifiedReal::one(prec);
    let a_max = CertifiedReal::from_integer(&side.a_max(), prec);
    // A|α|/(|α|−1) · |α|^{−m} bounds every tail starting at exponent gap m.
    let tail_const = (&a_max * &abs_alpha).div(&(&abs_alpha - &one));
    let inv_alpha = abs_alpha.recip();
    let alpha_inv_elem = field.inv(&field.gen()).expect("α ≠ 0");
    let mut inv_pows: Vec<FieldElem> = vec![field.one()];
    let mut inv_pows_real: Vec<CertifiedReal> = vec![one.clone()];
    let ensure = |m: usize, ip: &mut Vec<FieldElem>, ipr: &mut Vec<CertifiedReal>| {
        while ip.len() <= m {
            let next = field.mul(ip.last().unwrap(), &alpha_inv_elem);
            ip.push(next);
            let r = ipr.last().unwrap() * &inv_alpha;
            ipr.push(r);
        }
    };

    let mut sets: Vec<Vec<Vec<u64>>> = Vec::new();
    let mut level_constants: Vec<CertifiedReal> = Vec::new();
    let mut frontier = vec![Level {
        tuple: vec![],
        value: field.from_int(a1),
        abs: CertifiedReal::from_integer(&a1.clone().abs(), prec),
    }];
    let mut c_prev = CertifiedReal::point(Float::with_val(prec, 1));
    let mut explored = 0usize;

    for level in 2..=k {
        let ak = &side.coefficients[level - 1];
        for node in &frontier {
            let last = node.tuple.last().copied().unwrap_or(0);
            if let Some(m) = relation_solve(field, &node.value, ak, last + 1) {
                let mut exps = vec![m];
                exps.extend(node.tuple.iter().map(|mi| m - mi));
                exps.push(0);
                return Ok(DominanceCertificate {
                    verdict: DominanceVerdict::NotDominant,
                    witness: Some(Witness { level, exponents: exps }),
                    constants: None,
                    exceptional_sets: sets,
                    level_constants,
                    method: "induction".into(),
                });
            }
        }
        let threshold = point_lower(&c_prev.div_i64(2));
        let ak_elem = field.from_int(ak);
        let mut next = Vec::new();
        let mut c_level = threshold.clone();
        for node in &frontier {
            let last = node.tuple.last().copied().unwrap_or(0);
            let mut m = last + 1;
            loop {
                ensure(m as usize, &mut inv_pows, &mut inv_pows_real);
                // |S_{K−1}| − A|α|^{1−m}/(|α|−1); the tuple joins N_K unless this is certified ≥ threshold.
                let lhs = &node.abs - &(&tail_const * &inv_pows_real[m as usize]);
                if lhs.ge(&threshold) {
                    break;
                }
                let value = field.add(&node.value, &field.mul(&ak_elem, &inv_pows[m as usize]));
                let abs = certified_abs(field, &value, prec)?;
                if abs.lt(&c_level) {
                    c_level = point_lower(&abs);
                }
                let mut tuple = node.tuple.clone();
                tuple.push(m);
                next.push(Level { tuple, value, abs });
                explored += 1;
                if explored > NSET_CAP {
                    return Err(DominanceError::PrecisionExhausted(format!(
                        "N-sets exceed {NSET_CAP} tuples at level {level}"
                    )));
                }
                m += 1;
            }
        }
        sets.push(next.iter().map(|n| n.tuple.clone()).collect());
        level_constants.push(c_level.clone());
        c_prev = c_level;
        frontier = next;
    }

    let c2 = if k == 1 {
        CertifiedReal::from_integer(&a1.clone().abs(), prec)
    } else {
        c_prev
    };
    let (c3, from, formula) = derive_c3(side, sp, &c2)?;
    Ok(DominanceCertificate {
        verdict: DominanceVerdict::Dominant,
        witness: None,
        constants: Some(DominanceConstants { c2, c3, c3_valid_from: from, c3_formula: formula }),
        exceptional_sets: sets,
        level_constants,
        method: "induction".into(),
    })
}

/// C₃ from C₂ by subtracting the secondary-root error of the approximation
/// |U_n − uα^n| < C₁|α_2|^n.
fn derive_c3(side: &SideSpec, sp: &SpectralData, c2: &CertifiedReal) -> Result<(CertifiedReal, u64, String), DominanceError> {
    let prec = c2.prec();
    let u = sp.u.abs().with_prec(prec);
    if side.rec.order() == 1 {
        // U_n = uα^n exactly.
        return Ok((c2.clone(), 0, "single root: C3 = C2".into()));
    }
    let k = side.k() as i64;
    let a = CertifiedReal::from_integer(&side.a_max(), prec);
    let c1 = sp.approx_constant.with_prec(prec);
    let abs_alpha = sp.abs_alpha().with_prec(prec);
    let one = CertifiedReal::one(prec);
    let theta = sp.second_modulus_bound.with_prec(prec).max(&one).div(&abs_alpha).upper();
    let half = (&u * c2).div_i64(2);
    let coeff = (&a * &c1).mul_i64(k);
    let mut n0 = 0u64;
    let mut t = one.clone();
    while !(&coeff * &t).le(&half) {
        t = &t * &theta;
        n0 += 1;
        if n0 > 1_000_000 {
            return Err(DominanceError::PrecisionExhausted("C3 threshold index not found".into()));
        }
    }
    let c3_tail = (&(&u * c2) - &(&coeff * &t)).div(&(&u + &c1)).lower();
    let formula = format!("(|u|C2 - kAC1*theta^{n0})/(|u|+C1), theta = max(1,|alpha_2|)/|alpha|");
    if n0 == 0 {
        return Ok((c3_tail, 0, formula));
    }
    // Exhaustive check of all k-tuples with n_1 < n_0 extends validity down to 0.
    let kk = side.k();
    if binomial(n0, kk as u64) > 200_000 {
        return Ok((c3_tail, n0, formula));
    }
    let terms = side.rec.terms(n0 as usize);
    let mut best: Option<Rational> = None;
    let mut ok = true;
    let mut tuple: Vec<u64> = Vec::with_capacity(kk);
    for_each_decreasing(n0, kk, &mut tuple, &mut |t| {
        if !ok {
            return;
        }
        let s: Integer = t.iter().zip(&side.coefficients).map(|(&n, a)| Integer::from(a * &terms[n as usize])).sum();
        let top = terms[t[0] as usize].clone().abs();
        if top == 0 {
            if s == 0 {
                ok = false;
            }
            return;
        }
        let r = Rational::from((s.abs(), top));
        if r == 0 {
            ok = false;
            return;
        }
        if best.as_ref().map_or(true, |b| r < *b) {
            best = Some(r);
        }
    });
    if !ok {
        return Ok((c3_tail, n0, formula));
    }
    let mut c3 = c3_tail;
    if let Some(b) = best {
        let shrink = Rational::from((Integer::from((1u64 << 30) - 1), Integer::from(1u64 << 30)));
        let br = CertifiedReal::from_rational(&(b * shrink), prec).lower();
        if br.lt(&c3) {
            c3 = br;
        }
    }
    Ok((c3, 0, format!("min of {formula} and exhaustive ratios for n_1 < {n0}")))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    r as u64
}

/// Calls `f` on every tuple n_1 > … > n_k ≥ 0 with n_1 < bound.
fn for_each_decreasing(bound: u64, k: usize, cur: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    let hi = cur.last().copied().unwrap_or(bound);
    for n in (0..hi).rev() {
        if (n as usize) + 1 < k - cur.len() {
            break;
        }
        cur.push(n);
        for_each_decreasing(bound, k, cur, f);
        cur.pop();
    }
}

/// Lower proxy C₃ for the infimum of |Σ a_iU_{n_i}|/|U_{n_1}| and the upper proxy
/// A(|u|+C₁)(1 + |α|^{−1} + … + |α|^{1−k})/|u| for the supremum.
pub fn infimum_supremum_proxies(
    side: &SideSpec,
    sp: &SpectralData,
    cert: &DominanceCertificate,
) -> Result<(CertifiedReal, CertifiedReal), DominanceError> {
    let c = cert.constants.as_ref().ok_or(DominanceError::NotDominantInput)?;
    let prec = c.c3.prec();
    let u = sp.u.abs().with_prec(prec);
    let c1 = if side.rec.order() == 1 { CertifiedReal::zero(prec) } else { sp.approx_constant.with_prec(prec) };
    let a = CertifiedReal::from_integer(&side.a_max(), prec);
    let geo = geometric_sum(&sp.abs_alpha().with_prec(prec).recip(), side.k());
    let upper = (&(&a * &(&u + &c1)) * &geo).div(&u).upper();
    Ok((c.c3.clone(), upper))
}

/// 1 + r + … + r^{k−1}.
pub fn geometric_sum(r: &CertifiedReal, k: usize) -> CertifiedReal {
    let mut s = CertifiedReal::zero(r.prec());
    let mut t = CertifiedReal::one(r.prec());
    for _ in 0..k {
        s = &s + &t;
        t = &t * r;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> LinearRecurrence {
        LinearRecurrence::zeckendorf_fibonacci()
    }

    #[test]
    fn fibonacci_alternating_tuple_is_not_dominant() {
        let side = SideSpec::from_i64(fib(), &[1, -1, -1, 1]).unwrap();
        let c = check_dominance(&side).unwrap();
        assert_eq!(c.verdict, DominanceVerdict::NotDominant);
        assert_eq!(c.witness.unwrap(), Witness { level: 3, exponents: vec![2, 1, 0] });
    }

    #[test]
    fn fibonacci_digits_use_positivity() {
        let side = SideSpec::digits(fib(), 4, 2);
        let c = check_dominance(&side).unwrap();
        let k = c.constants.unwrap();
        assert!(k.c2.contains(&Float::with_val(64, 1)) && k.c3.contains(&Float::with_val(64, 1)));
    }

    #[test]
    fn binary_forced_relation() {
        let side = SideSpec::from_i64(LinearRecurrence::powers_of(2), &[1, -2]).unwrap();
        let c = check_dominance(&side).unwrap();
        assert_eq!(c.witness.unwrap().exponents, vec![1, 0]);
    }

    #[test]
    fn relation_solve_examples() {
        let sp = spectral_analyze(&fib(), 128).unwrap();
        let f = &sp.field;
        let prefix = f.sub(&f.one(), &f.inv(&f.gen()).unwrap());
        assert_eq!(relation_solve(f, &prefix, &Integer::from(-1), 1), Some(2));
        let sp2 = spectral_analyze(&LinearRecurrence::powers_of(2), 128).unwrap();
        let g = &sp2.field;
        assert_eq!(relation_solve(g, &g.one(), &Integer::from(-2), 1), Some(1));
        assert_eq!(relation_solve(g, &g.one(), &Integer::from(1), 1), None);
    }

    #[test]
    fn mixed_sign_tuple_gets_positive_constants() {
        let side = SideSpec::from_i64(fib(), &[3, -1, 2]).unwrap();
        let c = check_dominance(&side).unwrap();
        assert!(c.is_dominant());
        let k = c.constants.unwrap();
        assert!(k.c2.is_positive() && k.c3.is_positive());
        for w in c.level_constants.windows(2) {
            assert!(w[1].le(&w[0]));
        }
    }
}
