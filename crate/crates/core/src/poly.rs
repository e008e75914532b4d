//! Dense univariate polynomials with integer or rational coefficients.
//!
//! Coefficients are stored lowest degree first and trailing zeros are trimmed,
//! so the zero polynomial is the empty vector.

use std::fmt;

use rug::{Integer, Rational};

use crate::interval::{CertifiedComplex, CertifiedReal};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<Integer>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<Rational>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    /// The monic polynomial `X^d − c_1 X^{d−1} − … − c_d`.
    pub fn characteristic(c: &[Integer]) -> Self {
        let d = c.len();
        let mut coeffs = vec![Integer::new(); d + 1];
        coeffs[d] = Integer::from(1);
        for (j, cj) in c.iter().enumerate() {
            coeffs[d - 1 - j] = Integer::from(-cj);
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Integer {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn to_rat(&self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(Rational::from).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Integer::from(c * i as u64))
                .collect(),
        )
    }

    pub fn content(&self) -> Integer {
        self.coeffs.iter().fold(Integer::new(), |g, c| g.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.lead() < 0 {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| Integer::from(c / &g)).collect())
    }

    pub fn eval_integer(&self, x: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_real(&self, x: &CertifiedReal) -> CertifiedReal {
        let p = x.prec();
        let mut acc = CertifiedReal::zero(p);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + &CertifiedReal::from_integer(c, p);
        }
        acc
    }

    pub fn eval_complex(&self, z: &CertifiedComplex) -> CertifiedComplex {
        let p = z.prec();
        let mut acc = CertifiedComplex::from_i64(0, p);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + &CertifiedComplex::from_real(CertifiedReal::from_integer(c, p));
        }
        acc
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        if self.is_zero() || o.is_zero() {
            return IntPoly::new(vec![]);
        }
        let mut out = vec![Integer::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += Integer::from(a * b);
            }
        }
        IntPoly::new(out)
    }

    /// Exact quotient `self / d` when `d` divides `self` over ℤ.
    pub fn exact_div(&self, d: &IntPoly) -> Option<IntPoly> {
        let (q, r) = self.to_rat().div_rem(&d.to_rat());
        if !r.is_zero() {
            return None;
        }
        q.to_int()
    }

    pub fn is_squarefree(&self) -> bool {
        self.degree() == 0 || gcd(&self.to_rat(), &self.derivative().to_rat()).degree() == 0
    }

    /// Product of the distinct irreducible factors, as a primitive integer polynomial.
    pub fn radical(&self) -> IntPoly {
        let g = gcd(&self.to_rat(), &self.derivative().to_rat());
        let (q, _) = self.to_rat().div_rem(&g);
        q.primitive_int()
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let a = Integer::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match (i, a == 1) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "X")?,
                (1, false) => write!(f, "{a}X")?,
                (_, true) => write!(f, "X^{i}")?,
                (_, false) => write!(f, "{a}X^{i}")?,
            }
        }
        Ok(())
    }
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn monic(&self) -> RatPoly {
        let l = self.lead();
        RatPoly::new(self.coeffs.iter().map(|c| Rational::from(c / &l)).collect())
    }

    pub fn sub(&self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RatPoly::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_default();
                    let b = o.coeffs.get(i).cloned().unwrap_or_default();
                    a - b
                })
                .collect(),
        )
    }

    pub fn mul(&self, o: &RatPoly) -> RatPoly {
        if self.is_zero() || o.is_zero() {
            return RatPoly::new(vec![]);
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        RatPoly::new(out)
    }

    pub fn div_rem(&self, d: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (RatPoly::new(vec![]), self.clone());
        }
        let lead = d.lead();
        let mut q = vec![Rational::new(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let coef = Rational::from(&r[k + dd] / &lead);
            if coef != 0 {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= Rational::from(&coef * dc);
                }
            }
            q[k] = coef;
        }
        (RatPoly::new(q), RatPoly::new(r))
    }

    pub fn rem(&self, d: &RatPoly) -> RatPoly {
        self.div_rem(d).1
    }

    /// Clears denominators and content, leading coefficient positive.
    pub fn primitive_int(&self) -> IntPoly {
        let mut den = Integer::from(1);
        for c in &self.coeffs {
            den = den.lcm(c.denom());
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .map(|c| Integer::from(c.numer() * Integer::from(&den / c.denom())))
                .collect(),
        )
        .primitive()
    }

    pub fn to_int(&self) -> Option<IntPoly> {
        if self.coeffs.iter().all(|c| *c.denom() == 1) {
            Some(IntPoly::new(self.coeffs.iter().map(|c| c.numer().clone()).collect()))
        } else {
            None
        }
    }
}

/// Monic gcd over ℚ.
pub fn gcd(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let r = x.rem(&y);
        // Keep coefficient growth in check.
        x = y;
        y = if r.is_zero() { r } else { r.primitive_int().to_rat() };
    }
    if x.is_zero() {
        x
    } else {
        x.monic()
    }
}

/// Extended gcd: returns (g, s, t) with s·a + t·b = g, g monic.
pub fn ext_gcd(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly, RatPoly) {
    let one = RatPoly::new(vec![Rational::from(1)]);
    let zero = RatPoly::new(vec![]);
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (one.clone(), zero.clone());
    let (mut t0, mut t1) = (zero, one);
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let s2 = s0.sub(&q.mul(&s1));
        let t2 = t0.sub(&q.mul(&t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    let l = r0.lead();
    let scale = |p: &RatPoly| RatPoly::new(p.coeffs.iter().map(|c| Rational::from(c / &l)).collect());
    (scale(&r0), scale(&s0), scale(&t0))
}

/// Characteristic polynomial det(X·I − M) of a square rational matrix
/// (Faddeev–LeVerrier).
pub fn charpoly(m: &[Vec<Rational>]) -> RatPoly {
    let n = m.len();
    let mut coeffs = vec![Rational::new(); n + 1];
    coeffs[n] = Rational::from(1);
    let mut mk: Vec<Vec<Rational>> = vec![vec![Rational::new(); n]; n];
    for k in 1..=n {
        // M_k = M·M_{k−1} + c_{n−k+1} I ; c_{n−k} = −tr(M·M_k)/k
        let mut next = matmul(m, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        mk = next;
        let am = matmul(m, &mk);
        let mut tr = Rational::new();
        for (i, row) in am.iter().enumerate() {
            tr += &row[i];
        }
        coeffs[n - k] = -tr / Rational::from(k as u64);
    }
    RatPoly::new(coeffs)
}

pub fn matmul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![Rational::new(); m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += Rational::from(&a[i][k] * &bk[j]);
            }
        }
    }
    out
}

pub fn int_matmul(a: &[Vec<Integer>], b: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![Integer::new(); m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += Integer::from(&a[i][k] * &bk[j]);
            }
        }
    }
    out
}

pub fn int_matpow(a: &[Vec<Integer>], mut e: u64) -> Vec<Vec<Integer>> {
    let n = a.len();
    let mut result: Vec<Vec<Integer>> =
        (0..n).map(|i| (0..n).map(|j| Integer::from((i == j) as u8)).collect()).collect();
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = int_matmul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = int_matmul(&base, &base);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squarefree_detection() {
        assert!(IntPoly::from_i64(&[-1, -1, 1]).is_squarefree());
        assert!(!IntPoly::from_i64(&[4, -4, 1]).is_squarefree());
    }

    #[test]
    fn charpoly_of_companion_matches() {
        // companion of X^2 - X - 1
        let m = vec![
            vec![Rational::from(1), Rational::from(1)],
            vec![Rational::from(1), Rational::from(0)],
        ];
        let cp = charpoly(&m).to_int().unwrap();
        assert_eq!(cp, IntPoly::from_i64(&[-1, -1, 1]));
    }

    #[test]
    fn radical_strips_repeated_factors() {
        // (X-2)^2 (X+1)
        let p = IntPoly::from_i64(&[-2, 1]).mul(&IntPoly::from_i64(&[-2, 1])).mul(&IntPoly::from_i64(&[1, 1]));
        assert_eq!(p.radical(), IntPoly::from_i64(&[-2, -1, 1]));
    }

    #[test]
    fn extended_gcd_gives_inverse() {
        let f = IntPoly::from_i64(&[-1, -1, 1]).to_rat();
        let x = IntPoly::from_i64(&[3, 2]).to_rat();
        let (g, s, _t) = ext_gcd(&x, &f);
        assert_eq!(g.degree(), 0);
        let prod = s.mul(&x).rem(&f);
        assert_eq!(prod, RatPoly::new(vec![Rational::from(1)]));
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(IntPoly::from_i64(&[-1, -1, 1]).to_string(), "X^2 - X - 1");
    }
}
