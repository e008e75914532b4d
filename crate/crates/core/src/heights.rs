//! Absolute logarithmic Weil heights, the modified height h′, height
//! inequalities, the Baker–Wüstholz lower bound for linear forms in logarithms,
//! lower bounds for h(α^n/β^m), and the Pethő–de Weger inequality solver.

use rug::{Integer, Rational};
use thiserror::Error;

use crate::algebraic::{AlgebraicNumber, NumberField};
use crate::interval::CertifiedReal;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeightError {
    #[error("argument outside the domain: {0}")]
    InvalidDomain(String),
    #[error("no constant C' is available for this pair; supply one in the configuration")]
    MissingCPrime,
    #[error("the enclosure of the linear form contains 0")]
    LambdaMaybeZero,
}

#[derive(Clone, Debug)]
pub struct HeightValue {
    pub h: CertifiedReal,
    pub h_prime: CertifiedReal,
    pub degree_used: usize,
}

impl HeightValue {
    /// h′ = max{d·h, |log η|, 1}/d.
    pub fn new(h: CertifiedReal, log_abs: &CertifiedReal, d: usize) -> Self {
        let p = h.prec();
        let dh = h.mul_i64(d as i64);
        let h_prime = dh.max(&log_abs.abs()).max(&CertifiedReal::one(p)).div_i64(d as i64);
        HeightValue { h, h_prime, degree_used: d }
    }
}

/// log⁺x = log max{1, x}.
pub fn log_plus(x: &CertifiedReal) -> CertifiedReal {
    x.max(&CertifiedReal::one(x.prec())).ln()
}

/// h from the leading coefficient and the conjugate moduli of the minimal polynomial.
pub fn weil_height_value(x: &AlgebraicNumber, bits: u32) -> CertifiedReal {
    let p = bits + 32;
    if let Some(q) = x.as_rational() {
        let m = q.numer().clone().abs().max(q.denom().clone());
        return CertifiedReal::from_integer(&m, p).ln();
    }
    let lead = CertifiedReal::from_integer(&x.minpoly().lead().abs(), p);
    let mut s = lead.ln();
    for c in x.conjugates(bits) {
        s = &s + &log_plus(&c.abs().with_prec(p));
    }
    s.div_i64(x.degree() as i64)
}

/// Height of `x` with h′ taken relative to an ambient field of degree `d`.
pub fn weil_height(x: &AlgebraicNumber, d: usize, bits: u32) -> HeightValue {
    let h = weil_height_value(x, bits);
    let log_abs = x.value(bits).abs().with_prec(h.prec()).ln();
    HeightValue::new(h, &log_abs, d)
}

/// Height inequalities applied to an expression tree; the result is an upper bound.
#[derive(Clone, Debug)]
pub enum HeightExpr {
    Known(CertifiedReal),
    Product(Vec<HeightExpr>),
    Inverse(Box<HeightExpr>),
    Power(Box<HeightExpr>, i64),
    /// Sum or difference of t terms: the bound gains log t.
    Sum(Vec<HeightExpr>),
}

pub fn height_calculus(e: &HeightExpr, prec: u32) -> CertifiedReal {
    match e {
        HeightExpr::Known(h) => h.with_prec(prec).upper(),
        HeightExpr::Product(fs) => fs
            .iter()
            .fold(CertifiedReal::zero(prec), |acc, f| &acc + &height_calculus(f, prec))
            .upper(),
        HeightExpr::Inverse(x) => height_calculus(x, prec),
        HeightExpr::Power(x, n) => height_calculus(x, prec).mul_i64(n.abs()).upper(),
        HeightExpr::Sum(ts) => {
            let s = ts.iter().fold(CertifiedReal::zero(prec), |acc, t| &acc + &height_calculus(t, prec));
            if ts.len() > 1 {
                (&s + &CertifiedReal::from_i64(ts.len() as i64, prec).ln()).upper()
            } else {
                s.upper()
            }
        }
    }
}

/// C(k,d) = 18(k+1)!·k^{k+1}·(32d)^{k+2}·log(2kd).
pub fn bw_constant(k: u32, d: u32, prec: u32) -> CertifiedReal {
    assert!(k >= 1 && d >= 1);
    let mut fact = Integer::from(1);
    for i in 2..=k + 1 {
        fact *= i;
    }
    let int = Integer::from(18) * fact * Integer::from(Integer::u_pow_u(k, k + 1)) * Integer::from(Integer::u_pow_u(32 * d, k + 2));
    &CertifiedReal::from_integer(&int, prec) * &CertifiedReal::from_i64(2 * k as i64 * d as i64, prec).ln()
}

/// Λ = ℓ_1 log|η_1| + … + ℓ_k log|η_k| with its heights and Φ = e^Λ − 1.
#[derive(Clone, Debug)]
pub struct LinearFormInstance {
    pub etas: Vec<AlgebraicNumber>,
    pub heights: Vec<HeightValue>,
    pub int_coeffs: Vec<Integer>,
    pub field_degree: usize,
    /// L = max{|ℓ_i|, e}.
    pub l_cap: CertifiedReal,
    pub lambda_gcd: Integer,
    pub lambda: CertifiedReal,
    pub phi: CertifiedReal,
}

impl LinearFormInstance {
    pub fn new(etas: Vec<AlgebraicNumber>, int_coeffs: Vec<Integer>, field_degree: usize, bits: u32) -> Self {
        assert_eq!(etas.len(), int_coeffs.len());
        let coeff_bits = int_coeffs.iter().map(|c| c.significant_bits()).max().unwrap_or(0);
        let p = bits + coeff_bits + 32;
        let heights: Vec<HeightValue> = etas.iter().map(|e| weil_height(e, field_degree, bits)).collect();
        let mut lambda = CertifiedReal::zero(p);
        for (e, l) in etas.iter().zip(&int_coeffs) {
            let lg = e.value(p).abs().with_prec(p).ln();
            lambda = &lambda + &(&lg * &CertifiedReal::from_integer(l, p));
        }
        let phi = &lambda.exp() - &CertifiedReal::one(p);
        let max_l = int_coeffs.iter().map(|c| c.clone().abs()).max().unwrap_or_default();
        let l_cap = CertifiedReal::from_integer(&max_l, p).max(&CertifiedReal::e(p));
        let lambda_gcd = int_coeffs.iter().fold(Integer::new(), |g, c| g.gcd(c));
        LinearFormInstance { etas, heights, int_coeffs, field_degree, l_cap, lambda_gcd, lambda, phi }
    }

    /// h′(𝓛) = max{d·log(max|ℓ_j|/λ), 1}/d.
    pub fn form_height_prime(&self) -> CertifiedReal {
        let p = self.lambda.prec();
        let d = self.field_degree as i64;
        let max_l = self.int_coeffs.iter().map(|c| c.clone().abs()).max().unwrap_or_default();
        let r = CertifiedReal::from_rational(&Rational::from((max_l, self.lambda_gcd.clone())), p);
        r.ln().mul_i64(d).max(&CertifiedReal::one(p)).div_i64(d)
    }

    /// Certified check of |Λ|/2 ≤ |Φ| ≤ 2|Λ|; vacuous when |Λ| > 1/2 is possible.
    pub fn phi_transfer_holds(&self) -> bool {
        let p = self.lambda.prec();
        let a = self.lambda.abs();
        if !a.le(&CertifiedReal::from_f64(0.5, p)) {
            return true;
        }
        let f = self.phi.abs();
        a.div_i64(2).le(&f) && f.le(&a.mul_i64(2))
    }
}

/// Lower bound −C(k,D)·h′(η_1)⋯h′(η_k)·log L for log|Λ|.
pub fn bw_lower_bound(form: &LinearFormInstance) -> Result<CertifiedReal, HeightError> {
    if form.lambda.contains_zero() {
        return Err(HeightError::LambdaMaybeZero);
    }
    let p = form.lambda.prec();
    let mut prod = bw_constant(form.etas.len() as u32, form.field_degree as u32, p);
    for h in &form.heights {
        prod = &prod * &h.h_prime;
    }
    prod = &prod * &form.l_cap.ln();
    Ok((-prod).lower())
}

/// The matching lower bound for log|Φ| when |Λ| ≤ 1/2.
pub fn bw_lower_bound_phi(form: &LinearFormInstance) -> Result<CertifiedReal, HeightError> {
    let b = bw_lower_bound(form)?;
    Ok((&b - &CertifiedReal::ln2(b.prec())).lower())
}

fn is_unit(x: &AlgebraicNumber) -> bool {
    let c = x.minpoly().coeffs();
    c.last().map_or(false, |l| *l == 1 || *l == -1) && (c[0] == 1 || c[0] == -1)
}

fn as_integer(x: &AlgebraicNumber) -> Option<Integer> {
    x.as_rational().filter(|q| *q.denom() == 1).map(|q| q.numer().clone())
}

/// Lower bound for h(α^n/β^m). When one of the pair is an algebraic unit and
/// the other a rational integer the value is exact:
/// h = (1/δ)·Σ_j max{0, m·log|β| − n·log|α_j|}. Otherwise C′·max{|n|,|m|}.
pub fn mult_indep_height_bound(
    alpha: &AlgebraicNumber,
    beta: &AlgebraicNumber,
    c_prime: Option<&CertifiedReal>,
    n: i64,
    m: i64,
    bits: u32,
) -> Result<CertifiedReal, HeightError> {
    let p = bits + 32;
    if n == 0 && m == 0 {
        return Ok(CertifiedReal::zero(p));
    }
    let exact = |unit: &AlgebraicNumber, int: &Integer, e_unit: i64, e_int: i64| {
        // h(x) = h(1/x): write the quotient as int^{e_int}·unit^{−e_unit}.
        let lb = CertifiedReal::from_integer(&int.clone().abs(), p).ln().mul_i64(e_int);
        let mut s = CertifiedReal::zero(p);
        for c in unit.conjugates(bits) {
            let lj = c.abs().with_prec(p).ln().mul_i64(e_unit);
            s = &s + &(&lb - &lj).max(&CertifiedReal::zero(p));
        }
        s.div_i64(unit.degree() as i64)
    };
    if is_unit(alpha) && alpha.degree() > 1 {
        if let Some(b) = as_integer(beta) {
            return Ok(exact(alpha, &b, n, m).lower());
        }
    }
    if is_unit(beta) && beta.degree() > 1 {
        if let Some(a) = as_integer(alpha) {
            return Ok(exact(beta, &a, m, n).lower());
        }
    }
    let c = c_prime.ok_or(HeightError::MissingCPrime)?;
    Ok(c.mul_i64(n.abs().max(m.abs())).lower())
}

/// h(α^{n_1}/β^{m_1}) ≥ slope·n_1 − offset on solutions of the equation.
#[derive(Clone, Debug)]
pub struct AffineHeightBound {
    pub slope: CertifiedReal,
    pub offset: CertifiedReal,
    pub source: String,
}

/// Affine lower bound in n_1 for solutions where |β|^{m_1} ≥ |α|^{n_1}/C₆ and
/// |α|^{n_1} ≥ C₅|β|^{m_1}. For a unit α of degree δ against a rational
/// integer β, the conjugates with |α_j| < 1 contribute
/// n_1·(log|α| + log(1/|α_j|)) − log⁺C₆ each.
pub fn mult_indep_affine(
    alpha: &AlgebraicNumber,
    beta: &AlgebraicNumber,
    c5: &CertifiedReal,
    c6: &CertifiedReal,
    c_prime: Option<&CertifiedReal>,
    bits: u32,
) -> Result<AffineHeightBound, HeightError> {
    let p = bits + 32;
    let zero = CertifiedReal::zero(p);
    let small_conjugates = |x: &AlgebraicNumber| -> (i64, CertifiedReal) {
        let mut count = 0;
        let mut sigma = zero.clone();
        for c in x.conjugates(bits) {
            let m = c.abs().with_prec(p);
            if m.lt(&CertifiedReal::one(p)) {
                count += 1;
                sigma = &sigma - &m.ln();
            }
        }
        (count, sigma)
    };
    let la = alpha.value(bits).abs().with_prec(p).ln();
    let lb = beta.value(bits).abs().with_prec(p).ln();
    if is_unit(alpha) && alpha.degree() > 1 && as_integer(beta).is_some() {
        let (s, sigma) = small_conjugates(alpha);
        let delta = alpha.degree() as i64;
        let slope = (&la.mul_i64(s) + &sigma).div_i64(delta).lower();
        let offset = log_plus(c6).mul_i64(s).div_i64(delta).upper();
        return Ok(AffineHeightBound { slope, offset, source: "unit against rational integer, exact conjugate sum".into() });
    }
    if is_unit(beta) && beta.degree() > 1 && as_integer(alpha).is_some() {
        // h ≥ m_1·(s·log|β| + σ)/δ − s·log⁺(1/C₅)/δ and m_1·log|β| ≥ n_1·log|α| − log⁺C₆.
        let (s, sigma) = small_conjugates(beta);
        let delta = beta.degree() as i64;
        let per_m = (&lb.mul_i64(s) + &sigma).div_i64(delta);
        let slope = (&per_m * &la.div(&lb)).lower();
        let off_m = log_plus(&c5.recip()).mul_i64(s).div_i64(delta);
        let offset = (&off_m + &(&per_m * &log_plus(c6).div(&lb))).upper();
        return Ok(AffineHeightBound { slope, offset, source: "rational integer against unit, exact conjugate sum".into() });
    }
    let c = c_prime.ok_or(HeightError::MissingCPrime)?;
    Ok(AffineHeightBound { slope: c.lower(), offset: zero, source: "configured C'".into() })
}

/// Upper bound for the largest solution of x = u + v(log x)^h:
/// max{2^h(u^{1/h} + v^{1/h}·log(h^h v))^h, 2^h(u^{1/h} + 2e²)^h}.
pub fn pdw_solve(u: &CertifiedReal, v: &CertifiedReal, h: &CertifiedReal) -> Result<CertifiedReal, HeightError> {
    let p = u.prec().max(v.prec()).max(h.prec());
    let one = CertifiedReal::one(p);
    if *u.lo() < 0 {
        return Err(HeightError::InvalidDomain("u must be >= 0".into()));
    }
    if !v.is_positive() {
        return Err(HeightError::InvalidDomain("v must be > 0".into()));
    }
    if !h.ge(&one) {
        return Err(HeightError::InvalidDomain("h must be >= 1".into()));
    }
    let inv_h = one.div(h);
    let two_h = pow_nonneg(&CertifiedReal::from_i64(2, p), h);
    let uh = pow_nonneg(u, &inv_h);
    let log_term = &(h * &h.ln()) + &v.ln();
    let b1 = &two_h * &pow_nonneg(&(&uh + &(&pow_nonneg(v, &inv_h) * &log_term)), h);
    let e2 = CertifiedReal::e(p).sqr().mul_i64(2);
    let b2 = &two_h * &pow_nonneg(&(&uh + &e2), h);
    Ok(b1.max(&b2).upper())
}

/// x^e for x ≥ 0 (negative parts of the enclosure are clipped to 0).
fn pow_nonneg(x: &CertifiedReal, e: &CertifiedReal) -> CertifiedReal {
    let p = x.prec();
    if *x.hi() <= 0 {
        return CertifiedReal::zero(p);
    }
    if *x.lo() > 0 {
        return x.powf(e);
    }
    let top = CertifiedReal::point(x.hi().clone()).powf(e);
    CertifiedReal::from_endpoints(rug::Float::with_val(p, 0), top.hi().clone())
}

/// h(x) for an element of a number field, via its minimal polynomial.
pub fn field_height(field: &NumberField, x: &crate::algebraic::FieldElem, bits: u32) -> CertifiedReal {
    weil_height_value(&field.to_algebraic(x), bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::CertifiedComplex;
    use crate::poly::IntPoly;
    use rug::Float;

    fn golden() -> AlgebraicNumber {
        AlgebraicNumber::from_minpoly_near(
            IntPoly::from_i64(&[-1, -1, 1]),
            &CertifiedComplex::from_real(CertifiedReal::from_endpoints(Float::with_val(64, 1.5), Float::with_val(64, 1.7))),
        )
        .unwrap()
    }

    #[test]
    fn heights_of_two_and_golden() {
        // Inside ℚ(α) with D = 2.
        let two = weil_height(&AlgebraicNumber::from_integer(2), 2, 128);
        assert!((two.h.to_f64() - 2f64.ln()).abs() < 1e-15);
        assert!((two.h_prime.to_f64() - 2f64.ln()).abs() < 1e-15);
        let g = weil_height(&golden(), 2, 128);
        let la = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((g.h.to_f64() - la / 2.0).abs() < 1e-15);
        assert!((g.h_prime.to_f64() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn calculus_rules() {
        let la = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        let h = CertifiedReal::from_f64(la / 2.0, 64);
        let e = HeightExpr::Power(Box::new(HeightExpr::Known(h.clone())), 7);
        assert!((height_calculus(&e, 64).to_f64() - 3.5 * la).abs() < 1e-12);
        let s = HeightExpr::Sum(vec![
            HeightExpr::Known(CertifiedReal::zero(64)),
            HeightExpr::Power(Box::new(HeightExpr::Known(h)), -2),
        ]);
        assert!((height_calculus(&s, 64).to_f64() - (la + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn bw_constant_values() {
        let c = bw_constant(3, 2, 128);
        assert!((c.to_f64() / 9.3365e13 - 1.0).abs() < 1e-4);
        let c11 = bw_constant(1, 1, 128).to_f64();
        assert!((c11 - 36.0 * 32f64.powi(3) * 2f64.ln()).abs() < 1e-6);
        assert!(bw_constant(3, 2, 64).gt(&bw_constant(2, 2, 64)));
    }

    #[test]
    fn pdw_examples() {
        let p = 128;
        let r = pdw_solve(&CertifiedReal::zero(p), &CertifiedReal::from_i64(10, p), &CertifiedReal::one(p)).unwrap();
        assert!((r.to_f64() - 20.0 * 10f64.ln()).abs() < 1e-9);
        let r = pdw_solve(&CertifiedReal::zero(p), &CertifiedReal::one(p), &CertifiedReal::one(p)).unwrap();
        assert!((r.to_f64() - 4.0 * 1f64.exp().powi(2)).abs() < 1e-9);
        assert!(pdw_solve(&CertifiedReal::zero(p), &CertifiedReal::zero(p), &CertifiedReal::one(p)).is_err());
    }

    #[test]
    fn golden_against_two() {
        let g = golden();
        let two = AlgebraicNumber::from_integer(2);
        let la = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        let l2 = 2f64.ln();
        // 2^{m} > α^{n}: 2h = 2m·log 2.
        let h = mult_indep_height_bound(&g, &two, None, 10, 8, 128).unwrap();
        assert!((2.0 * h.to_f64() - 16.0 * l2).abs() < 1e-9);
        // 2^{m} ≤ α^{n}: 2h = m·log 2 + n·log α.
        let h = mult_indep_height_bound(&g, &two, None, 20, 8, 128).unwrap();
        assert!((2.0 * h.to_f64() - (8.0 * l2 + 20.0 * la)).abs() < 1e-9);
        assert!(mult_indep_height_bound(&g, &two, None, 0, 0, 64).unwrap().to_f64() == 0.0);
        let three_halves = AlgebraicNumber::from_rational(&Rational::from((3, 2)));
        assert_eq!(
            mult_indep_height_bound(&three_halves, &two, None, 1, 1, 64).unwrap_err(),
            HeightError::MissingCPrime
        );
    }
}
