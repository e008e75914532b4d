//! Integer linear recurrences and their certified spectral data.

use std::fmt;
use std::sync::Arc;

use rug::{Float, Integer};
use thiserror::Error;

use crate::algebraic::{AlgebraicNumber, FieldElem, NumberField};
use crate::interval::{CertifiedComplex, CertifiedReal};
use crate::poly::{int_matpow, IntPoly};
use crate::roots::{isolate_roots, RootDisk};

pub const DEFAULT_PRECISION_CEILING: u32 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecurrenceError {
    #[error("recurrence needs order ≥ 1 with as many initial terms as coefficients")]
    Shape,
    #[error("last coefficient c_d must be nonzero")]
    ZeroLastCoefficient,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("characteristic polynomial {0} has a repeated root")]
    NotSimple(String),
    #[error("degenerate: {0}")]
    DegenerateSequence(String),
    #[error("no dominant root could be certified: {0}")]
    NoDominantRoot(String),
    #[error("dominant root has modulus 1; the sequence does not grow")]
    NotGrowing,
    #[error("the Binet coefficient of the dominant root vanishes")]
    VanishingDominantCoefficient,
}

/// U_{n+d} = c_1 U_{n+d−1} + … + c_d U_n over ℤ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRecurrence {
    coefficients: Vec<Integer>,
    initial_terms: Vec<Integer>,
    label: Option<String>,
}

impl LinearRecurrence {
    pub fn new(coefficients: Vec<Integer>, initial_terms: Vec<Integer>) -> Result<Self, RecurrenceError> {
        if coefficients.is_empty() || coefficients.len() != initial_terms.len() {
            return Err(RecurrenceError::Shape);
        }
        if *coefficients.last().unwrap() == 0 {
            return Err(RecurrenceError::ZeroLastCoefficient);
        }
        Ok(LinearRecurrence { coefficients, initial_terms, label: None })
    }

    pub fn from_i64(coefficients: &[i64], initial_terms: &[i64]) -> Result<Self, RecurrenceError> {
        Self::new(
            coefficients.iter().map(|&c| Integer::from(c)).collect(),
            initial_terms.iter().map(|&c| Integer::from(c)).collect(),
        )
    }

    /// Fibonacci numbers indexed so that F_0 = 1, F_1 = 2.
    pub fn zeckendorf_fibonacci() -> Self {
        Self::from_i64(&[1, 1], &[1, 2]).unwrap().with_label("fibonacci")
    }

    /// b^n.
    pub fn powers_of(b: i64) -> Self {
        Self::from_i64(&[b], &[1]).unwrap().with_label(&format!("powers of {b}"))
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Integer] {
        &self.coefficients
    }

    pub fn initial_terms(&self) -> &[Integer] {
        &self.initial_terms
    }

    pub fn characteristic_polynomial(&self) -> IntPoly {
        IntPoly::characteristic(&self.coefficients)
    }

    /// U_0, …, U_{count−1}.
    pub fn terms(&self, count: usize) -> Vec<Integer> {
        let mut out: Vec<Integer> = self.initial_terms.iter().take(count).cloned().collect();
        while out.len() < count {
            let n = out.len();
            let mut next = Integer::new();
            for (j, c) in self.coefficients.iter().enumerate() {
                next += Integer::from(c * &out[n - 1 - j]);
            }
            out.push(next);
        }
        out
    }

    pub fn term(&self, n: u64) -> Integer {
        let d = self.order();
        if (n as usize) < d {
            return self.initial_terms[n as usize].clone();
        }
        let mut window: Vec<Integer> = self.initial_terms.clone();
        for _ in d as u64..=n {
            let mut next = Integer::new();
            for (j, c) in self.coefficients.iter().enumerate() {
                next += Integer::from(c * &window[d - 1 - j]);
            }
            window.remove(0);
            window.push(next);
        }
        window.pop().unwrap()
    }

    fn companion(&self) -> Vec<Vec<Integer>> {
        let d = self.order();
        let mut m = vec![vec![Integer::new(); d]; d];
        for j in 0..d {
            m[0][j] = self.coefficients[j].clone();
        }
        for i in 1..d {
            m[i][i - 1] = Integer::from(1);
        }
        m
    }

    /// Numerator polynomial P*(X) = Σ_{n<d} p_n X^{d−1−n} with
    /// p_n = U_n − Σ_{j=1}^{n} c_j U_{n−j}; then u_i = P*(α_i)/F'(α_i).
    fn binet_numerator(&self) -> IntPoly {
        let d = self.order();
        let mut coeffs = vec![Integer::new(); d];
        for n in 0..d {
            let mut p = self.initial_terms[n].clone();
            for j in 1..=n {
                p -= Integer::from(&self.coefficients[j - 1] * &self.initial_terms[n - j]);
            }
            coeffs[d - 1 - n] = p;
        }
        IntPoly::new(coeffs)
    }
}

impl fmt::Display for LinearRecurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coefficients.iter().map(|x| x.to_string()).collect();
        let u: Vec<String> = self.initial_terms.iter().map(|x| x.to_string()).collect();
        write!(f, "c = ({}), U_0.. = ({})", c.join(", "), u.join(", "))
    }
}

pub fn term(rec: &LinearRecurrence, n: u64) -> Integer {
    rec.term(n)
}

/// Certified spectral data of an admissible recurrence.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Root enclosures sorted by decreasing modulus; index 0 is α.
    pub roots: Vec<CertifiedComplex>,
    pub root_disks: Vec<RootDisk>,
    /// ℚ(α) with embedding 0 equal to α.
    pub field: Arc<NumberField>,
    pub dominant_root: AlgebraicNumber,
    pub alpha: CertifiedReal,
    pub binet_coefficients: Vec<CertifiedComplex>,
    /// u = u_1 exactly, as an element of ℚ(α).
    pub u_exact: FieldElem,
    pub u: CertifiedReal,
    /// Certified upper bound for |α_2| (0 when d = 1).
    pub second_modulus_bound: CertifiedReal,
    /// C₁ with |U_n − uα^n| < C₁|α_2|^n.
    pub approx_constant: CertifiedReal,
    pub precision: u32,
}

impl SpectralData {
    pub fn abs_alpha(&self) -> CertifiedReal {
        self.alpha.abs()
    }

    /// Upper bound for |α_2|/|α|.
    pub fn secondary_ratio(&self) -> CertifiedReal {
        self.second_modulus_bound.div(&self.abs_alpha()).upper()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub ok: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub simple: Verdict,
    pub non_degenerate: Verdict,
    pub dominant_root: Verdict,
    pub defined_over_integers: Verdict,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.simple.ok && self.non_degenerate.ok && self.dominant_root.ok && self.defined_over_integers.ok
    }
}

fn euler_phi(mut m: u64) -> u64 {
    let mut result = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Orders m ≥ 2 with φ(m) ≤ bound that divide no other such order.
fn maximal_torsion_orders(bound: u64) -> Vec<u64> {
    let all: Vec<u64> = (2..=8 * bound.max(2) + 8).filter(|&m| euler_phi(m) <= bound).collect();
    all.iter()
        .copied()
        .filter(|&m| !all.iter().any(|&k| k != m && k % m == 0))
        .collect()
}

/// Looks for a pair of roots whose ratio is a root of unity. Returns the pair
/// (indices into `disks`) and an order m with (α_i/α_j)^m = 1, verified exactly
/// through the characteristic polynomial of C^m.
fn find_torsion_ratio(rec: &LinearRecurrence, disks: &[RootDisk]) -> Option<(usize, usize, u64)> {
    let d = disks.len();
    let moduli: Vec<CertifiedReal> = disks.iter().map(|r| r.modulus()).collect();
    let suspicious: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
        .filter(|&(i, j)| !(moduli[i].gt(&moduli[j]) || moduli[i].lt(&moduli[j])))
        .collect();
    if suspicious.is_empty() {
        return None;
    }
    let bound = (d * d) as u64;
    let companion = rec.companion();
    for m in maximal_torsion_orders(bound) {
        let cm = int_matpow(&companion, m);
        let rat: Vec<Vec<rug::Rational>> =
            cm.iter().map(|r| r.iter().map(rug::Rational::from).collect()).collect();
        let cp = crate::poly::charpoly(&rat).primitive_int();
        if cp.is_squarefree() {
            continue;
        }
        // Locate the pair numerically and report the smallest order.
        let enc: Vec<CertifiedComplex> = disks.iter().map(|r| r.enclosure()).collect();
        for &(i, j) in &suspicious {
            let ratio = enc[i].div(&enc[j]);
            for k in 1..=m {
                if m % k != 0 {
                    continue;
                }
                let pw = ratio.pow_u(k);
                let one = CertifiedComplex::from_i64(1, pw.prec());
                if (&pw - &one).contains_zero() {
                    return Some((i, j, k));
                }
            }
        }
        return Some((suspicious[0].0, suspicious[0].1, m));
    }
    None
}

fn dominant_gap(disks: &[RootDisk]) -> Result<bool, String> {
    let top = &disks[0];
    if top.certainly_nonreal() {
        return Err("the largest root is non-real, so its conjugate has equal modulus".into());
    }
    if !top.real {
        return Ok(false);
    }
    let m0 = top.modulus();
    Ok(disks[1..].iter().all(|r| m0.gt(&r.modulus())))
}

/// Minimal polynomial of the root `disks[0]`: the smallest product of
/// root factors containing it that has integer coefficients and divides F.
fn dominant_minpoly(f: &IntPoly, disks: &[RootDisk]) -> Option<(IntPoly, Vec<usize>)> {
    let d = disks.len();
    let enc: Vec<CertifiedComplex> = disks.iter().map(|r| r.enclosure()).collect();
    let prec = enc[0].prec();
    let others = d - 1;
    let mut masks: Vec<u64> = (0..(1u64 << others)).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        let idx: Vec<usize> = std::iter::once(0).chain((0..others).filter(|k| mask >> k & 1 == 1).map(|k| k + 1)).collect();
        let mut coeffs = vec![CertifiedComplex::from_i64(1, prec)];
        for &i in &idx {
            let mut next = vec![CertifiedComplex::from_i64(0, prec); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = &next[k + 1] + c;
                let t = c * &enc[i];
                next[k] = &next[k] - &t;
            }
            coeffs = next;
        }
        let mut ints = Vec::with_capacity(coeffs.len());
        let mut ok = true;
        for c in &coeffs {
            if !c.im.contains_zero() {
                ok = false;
                break;
            }
            let half = CertifiedReal::from_f64(0.5, prec);
            match (&c.re + &half).unique_floor() {
                Some(n) if c.re.contains(&Float::with_val(prec, &n)) => ints.push(n),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let g = IntPoly::new(ints);
        if f.exact_div(&g).is_some() {
            return Some((g, idx));
        }
    }
    None
}

pub fn spectral_analyze(rec: &LinearRecurrence, target_precision: u32) -> Result<SpectralData, SpectralError> {
    spectral_analyze_with_ceiling(rec, target_precision, DEFAULT_PRECISION_CEILING)
}

pub fn spectral_analyze_with_ceiling(
    rec: &LinearRecurrence,
    target_precision: u32,
    ceiling: u32,
) -> Result<SpectralData, SpectralError> {
    let f = rec.characteristic_polynomial();
    if !f.is_squarefree() {
        return Err(SpectralError::NotSimple(f.to_string()));
    }
    let d = rec.order();
    let mut bits = target_precision.max(32);
    let disks = loop {
        let disks = isolate_roots(&f, bits, ceiling.max(bits + 64))
            .ok_or_else(|| SpectralError::NoDominantRoot("root isolation did not converge".into()))?;
        if let Some((i, j, m)) = find_torsion_ratio(rec, &disks) {
            return Err(SpectralError::DegenerateSequence(format!(
                "ratio of roots #{} and #{} is a root of unity of order dividing {m}",
                i + 1,
                j + 1
            )));
        }
        if d == 1 {
            break disks;
        }
        match dominant_gap(&disks) {
            Err(why) => return Err(SpectralError::NoDominantRoot(why)),
            Ok(true) => break disks,
            Ok(false) if bits >= ceiling => {
                return Err(SpectralError::NoDominantRoot(format!(
                    "modulus gap not certified at {ceiling} bits"
                )))
            }
            Ok(false) => bits = (bits * 2).min(ceiling),
        }
    };
    let prec = disks[0].prec();
    let roots: Vec<CertifiedComplex> = disks.iter().map(|r| r.enclosure()).collect();
    let alpha = roots[0].re.clone();
    if !alpha.abs().gt(&CertifiedReal::one(prec)) {
        return Err(SpectralError::NotGrowing);
    }
    let (minpoly, conj_idx) = dominant_minpoly(&f, &disks)
        .ok_or_else(|| SpectralError::NoDominantRoot("minimal polynomial of α not found".into()))?;
    let field = Arc::new(NumberField::new(
        minpoly.clone(),
        conj_idx.iter().map(|&i| disks[i].clone()).collect(),
    ));
    let dominant_root = AlgebraicNumber::from_minpoly_near(minpoly, &roots[0])
        .ok_or_else(|| SpectralError::NoDominantRoot("α could not be isolated".into()))?;

    let pstar = rec.binet_numerator();
    let fprime = f.derivative();
    let u_exact = field
        .div(&field.from_poly(&pstar), &field.from_poly(&fprime))
        .expect("F'(α) ≠ 0 for a simple root");
    if u_exact.is_zero() {
        return Err(SpectralError::VanishingDominantCoefficient);
    }
    let binet: Vec<CertifiedComplex> = roots
        .iter()
        .map(|z| pstar.eval_complex(z).div(&fprime.eval_complex(z)))
        .collect();
    let u = field.real_value(&u_exact, prec);

    let (second, c1) = if d == 1 {
        // No secondary spectrum: the error term is identically 0 and any
        // positive constant works.
        (CertifiedReal::zero(prec), CertifiedReal::point(Float::with_val(prec, Float::u_exp(1, -64))))
    } else {
        let second = disks[1..]
            .iter()
            .map(|r| r.modulus())
            .reduce(|a, b| a.max(&b))
            .unwrap()
            .upper();
        let mut sum = CertifiedReal::zero(prec);
        for b in &binet[1..] {
            sum = &sum + &b.abs();
        }
        // Pad the upper end so the strict inequality survives equality cases
        // such as d = 2, where |U_n − uα^n| = |u_2||α_2|^n exactly.
        let pad = CertifiedReal::one(prec).div_i64(1 << 30);
        let c1 = (&sum.upper() * &(&CertifiedReal::one(prec) + &pad)).upper();
        (second, c1)
    };

    Ok(SpectralData {
        roots,
        root_disks: disks,
        field,
        dominant_root,
        alpha,
        binet_coefficients: binet,
        u_exact,
        u,
        second_modulus_bound: second,
        approx_constant: c1,
        precision: prec,
    })
}

pub fn check_admissible(rec: &LinearRecurrence) -> AdmissibilityReport {
    let defined_over_integers = Verdict {
        ok: true,
        reason: "coefficients and initial terms are integers".into(),
    };
    let f = rec.characteristic_polynomial();
    let simple = if f.is_squarefree() {
        Verdict { ok: true, reason: format!("{f} is squarefree") }
    } else {
        Verdict { ok: false, reason: format!("{f} has a repeated root") }
    };
    if !simple.ok {
        let na = Verdict { ok: false, reason: "requires a simple recurrence".into() };
        return AdmissibilityReport {
            simple,
            non_degenerate: na.clone(),
            dominant_root: na,
            defined_over_integers,
        };
    }
    let (non_degenerate, dominant_root) = match spectral_analyze(rec, 64) {
        Ok(s) => (
            Verdict { ok: true, reason: "no ratio of roots is a root of unity".into() },
            Verdict { ok: true, reason: format!("α ∈ {}, |α_2| ≤ {}", s.alpha, s.second_modulus_bound.upper_decimal(12)) },
        ),
        Err(SpectralError::DegenerateSequence(why)) => (
            Verdict { ok: false, reason: why },
            Verdict { ok: false, reason: "not examined for a degenerate sequence".into() },
        ),
        Err(e) => (
            Verdict { ok: true, reason: "no ratio of roots is a root of unity".into() },
            Verdict { ok: false, reason: e.to_string() },
        ),
    };
    AdmissibilityReport { simple, non_degenerate, dominant_root, defined_over_integers }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_terms() {
        let f = LinearRecurrence::zeckendorf_fibonacci();
        assert_eq!(f.term(6), 21);
        let t = f.terms(8);
        assert_eq!(t, [1, 2, 3, 5, 8, 13, 21, 34].map(Integer::from));
    }

    #[test]
    fn torsion_orders_for_small_degree() {
        assert_eq!(maximal_torsion_orders(4), vec![8, 10, 12]);
        assert_eq!(euler_phi(12), 4);
    }

    #[test]
    fn binet_numerator_for_fibonacci() {
        let f = LinearRecurrence::zeckendorf_fibonacci();
        assert_eq!(f.binet_numerator(), IntPoly::from_i64(&[1, 1]));
    }
}
