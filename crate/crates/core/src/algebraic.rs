//! Algebraic numbers and exact arithmetic in simple number fields ℚ(θ).

use std::sync::RwLock;

use rug::{Float, Integer, Rational};

use crate::interval::{CertifiedComplex, CertifiedReal};
use crate::poly::{charpoly, ext_gcd, IntPoly, RatPoly};
use crate::roots::{isolate_roots, RootDisk};

pub const DEFAULT_CEILING: u32 = 8192;

/// An algebraic number given by its primitive irreducible minimal polynomial
/// and a disk that isolates it among the roots of that polynomial.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    minpoly: IntPoly,
    disk: RootDisk,
}

impl AlgebraicNumber {
    pub fn from_rational(q: &Rational) -> Self {
        let minpoly = IntPoly::new(vec![Integer::from(-q.numer()), q.denom().clone()]);
        let p = 64;
        let v = CertifiedReal::from_rational(q, p);
        AlgebraicNumber {
            minpoly,
            disk: RootDisk {
                center_re: v.mid(),
                center_im: Float::with_val(p, 0),
                radius: v.rad(),
                real: true,
            },
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(&Rational::from(n))
    }

    /// Picks the root of `minpoly` whose isolating disk meets `approx`.
    /// `minpoly` must be irreducible; the caller guarantees that one of its
    /// roots lies in `approx`.
    pub fn from_minpoly_near(minpoly: IntPoly, approx: &CertifiedComplex) -> Option<Self> {
        let minpoly = minpoly.primitive();
        if minpoly.degree() == 1 {
            let q = Rational::from((Integer::from(-&minpoly.coeffs()[0]), minpoly.coeffs()[1].clone()));
            return Some(Self::from_rational(&q));
        }
        let mut target = 64;
        while target <= DEFAULT_CEILING {
            let disks = isolate_roots(&minpoly, target, DEFAULT_CEILING)?;
            let hits: Vec<&RootDisk> = disks.iter().filter(|d| boxes_meet(&d.enclosure(), approx)).collect();
            if hits.len() == 1 {
                return Some(AlgebraicNumber { minpoly, disk: hits[0].clone() });
            }
            if hits.is_empty() {
                return None;
            }
            target *= 2;
        }
        None
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree()
    }

    pub fn disk(&self) -> &RootDisk {
        &self.disk
    }

    pub fn is_rational(&self) -> bool {
        self.degree() == 1
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.degree() != 1 {
            return None;
        }
        let c = self.minpoly.coeffs();
        Some(Rational::from((Integer::from(-&c[0]), c[1].clone())))
    }

    /// Enclosure of the value with radius below 2^(−bits)·max(1,|value|).
    pub fn value(&self, bits: u32) -> CertifiedComplex {
        if let Some(q) = self.as_rational() {
            return CertifiedComplex::from_real(CertifiedReal::from_rational(&q, bits + 16));
        }
        if self.disk.prec() >= bits + 32 {
            return self.disk.enclosure();
        }
        let disks = isolate_roots(&self.minpoly, bits, DEFAULT_CEILING.max(bits * 2))
            .expect("minimal polynomial is squarefree");
        let old = self.disk.enclosure();
        disks
            .iter()
            .find(|d| boxes_meet(&d.enclosure(), &old))
            .map(|d| d.enclosure())
            .expect("refined disk lies inside the old one")
    }

    pub fn real_value(&self, bits: u32) -> CertifiedReal {
        self.value(bits).re
    }

    /// Enclosures of all conjugates (the roots of the minimal polynomial).
    pub fn conjugates(&self, bits: u32) -> Vec<CertifiedComplex> {
        if let Some(q) = self.as_rational() {
            return vec![CertifiedComplex::from_real(CertifiedReal::from_rational(&q, bits + 16))];
        }
        isolate_roots(&self.minpoly, bits, DEFAULT_CEILING.max(bits * 2))
            .expect("minimal polynomial is squarefree")
            .iter()
            .map(|d| d.enclosure())
            .collect()
    }
}

fn boxes_meet(a: &CertifiedComplex, b: &CertifiedComplex) -> bool {
    let meet = |x: &CertifiedReal, y: &CertifiedReal| !(x.hi() < y.lo() || y.hi() < x.lo());
    meet(&a.re, &b.re) && meet(&a.im, &b.im)
}

/// Element of ℚ(θ) as rational coordinates in the power basis 1, θ, …, θ^{δ−1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    coords: Vec<Rational>,
}

impl FieldElem {
    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.coords.iter().skip(1).all(|c| *c == 0) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }
}

/// The field ℚ(θ) for an algebraic integer θ with monic minimal polynomial.
/// Embedding 0 sends θ to the distinguished root.
#[derive(Debug)]
pub struct NumberField {
    minpoly: IntPoly,
    rat_minpoly: RatPoly,
    embeddings: RwLock<Vec<RootDisk>>,
}

impl Clone for NumberField {
    fn clone(&self) -> Self {
        NumberField {
            minpoly: self.minpoly.clone(),
            rat_minpoly: self.rat_minpoly.clone(),
            embeddings: RwLock::new(self.embeddings.read().unwrap().clone()),
        }
    }
}

impl NumberField {
    /// `roots` must be the isolated roots of `minpoly`, the distinguished one first.
    pub fn new(minpoly: IntPoly, roots: Vec<RootDisk>) -> Self {
        assert!(minpoly.is_monic(), "field generator must be an algebraic integer");
        assert_eq!(roots.len(), minpoly.degree());
        let rat_minpoly = minpoly.to_rat();
        NumberField { minpoly, rat_minpoly, embeddings: RwLock::new(roots) }
    }

    /// ℚ, presented as ℚ(c) for an integer c.
    pub fn rational_integer(c: i64) -> Self {
        let minpoly = IntPoly::from_i64(&[-c, 1]);
        let p = 64;
        let disk = RootDisk {
            center_re: Float::with_val(p, c),
            center_im: Float::with_val(p, 0),
            radius: Float::with_val(p, 0),
            real: true,
        };
        Self::new(minpoly, vec![disk])
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree()
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    fn reduce(&self, p: RatPoly) -> FieldElem {
        let r = p.rem(&self.rat_minpoly);
        let mut coords = r.coeffs().to_vec();
        coords.resize(self.degree(), Rational::new());
        FieldElem { coords }
    }

    fn as_poly(&self, x: &FieldElem) -> RatPoly {
        RatPoly::new(x.coords.clone())
    }

    pub fn from_rational(&self, q: &Rational) -> FieldElem {
        let mut coords = vec![Rational::new(); self.degree()];
        coords[0] = q.clone();
        FieldElem { coords }
    }

    pub fn from_int(&self, n: &Integer) -> FieldElem {
        self.from_rational(&Rational::from(n))
    }

    pub fn from_i64(&self, n: i64) -> FieldElem {
        self.from_rational(&Rational::from(n))
    }

    pub fn zero(&self) -> FieldElem {
        self.from_i64(0)
    }

    pub fn one(&self) -> FieldElem {
        self.from_i64(1)
    }

    /// The generator θ.
    pub fn gen(&self) -> FieldElem {
        self.from_poly(&IntPoly::from_i64(&[0, 1]))
    }

    pub fn from_poly(&self, p: &IntPoly) -> FieldElem {
        self.reduce(p.to_rat())
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem { coords: a.coords.iter().zip(&b.coords).map(|(x, y)| Rational::from(x + y)).collect() }
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem { coords: a.coords.iter().zip(&b.coords).map(|(x, y)| Rational::from(x - y)).collect() }
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem { coords: a.coords.iter().map(|x| Rational::from(-x)).collect() }
    }

    pub fn scale(&self, a: &FieldElem, k: &Rational) -> FieldElem {
        FieldElem { coords: a.coords.iter().map(|x| Rational::from(x * k)).collect() }
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.reduce(self.as_poly(a).mul(&self.as_poly(b)))
    }

    pub fn inv(&self, a: &FieldElem) -> Option<FieldElem> {
        if a.is_zero() {
            return None;
        }
        let (g, s, _) = ext_gcd(&self.as_poly(a), &self.rat_minpoly);
        debug_assert_eq!(g.degree(), 0);
        Some(self.reduce(s))
    }

    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> Option<FieldElem> {
        Some(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElem, e: i64) -> Option<FieldElem> {
        let base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut n = e.unsigned_abs();
        let mut result = self.one();
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                result = self.mul(&result, &b);
            }
            n >>= 1;
            if n > 0 {
                b = self.mul(&b, &b);
            }
        }
        Some(result)
    }

    /// Root disks of all embeddings at the requested accuracy.
    pub fn embeddings(&self, bits: u32) -> Vec<RootDisk> {
        {
            let cur = self.embeddings.read().unwrap();
            if cur[0].prec() >= bits + 32 || self.degree() == 1 {
                return cur.clone();
            }
        }
        let fresh = isolate_roots(&self.minpoly, bits, DEFAULT_CEILING.max(bits * 2))
            .expect("minimal polynomial is squarefree");
        let mut w = self.embeddings.write().unwrap();
        let mut ordered = Vec::with_capacity(fresh.len());
        for old in w.iter() {
            let e = old.enclosure();
            let d = fresh
                .iter()
                .find(|d| boxes_meet(&d.enclosure(), &e))
                .expect("refined root lies in the old disk");
            ordered.push(d.clone());
        }
        *w = ordered.clone();
        ordered
    }

    fn eval_at(&self, x: &FieldElem, theta: &CertifiedComplex) -> CertifiedComplex {
        let p = theta.prec();
        let mut acc = CertifiedComplex::from_i64(0, p);
        for c in x.coords.iter().rev() {
            acc = &(&acc * theta) + &CertifiedComplex::from_real(CertifiedReal::from_rational(c, p));
        }
        acc
    }

    /// Value of `x` under every embedding; index 0 is the distinguished one.
    pub fn conjugates_of(&self, x: &FieldElem, bits: u32) -> Vec<CertifiedComplex> {
        let p = bits + 32;
        self.embeddings(bits + 16)
            .iter()
            .map(|d| {
                let e = d.enclosure();
                let theta = CertifiedComplex::new(e.re.with_prec(p), e.im.with_prec(p));
                self.eval_at(x, &theta)
            })
            .collect()
    }

    /// Value of `x` under the distinguished (real) embedding.
    pub fn real_value(&self, x: &FieldElem, bits: u32) -> CertifiedReal {
        if let Some(q) = x.as_rational() {
            return CertifiedReal::from_rational(&q, bits + 32);
        }
        let p = bits + 32;
        let d = self.embeddings(bits + 16)[0].clone();
        let e = d.enclosure();
        let theta = CertifiedComplex::new(e.re.with_prec(p), e.im.with_prec(p));
        self.eval_at(x, &theta).re
    }

    /// Minimal polynomial of `x` over ℤ (primitive, positive leading coefficient).
    pub fn minpoly_of(&self, x: &FieldElem) -> IntPoly {
        let d = self.degree();
        let mut cols = Vec::with_capacity(d);
        let mut basis = self.one();
        let theta = self.gen();
        for _ in 0..d {
            cols.push(self.mul(x, &basis).coords);
            basis = self.mul(&basis, &theta);
        }
        let m: Vec<Vec<Rational>> = (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect();
        charpoly(&m).primitive_int().radical()
    }

    pub fn to_algebraic(&self, x: &FieldElem) -> AlgebraicNumber {
        let mp = self.minpoly_of(x);
        if let Some(q) = x.as_rational() {
            return AlgebraicNumber::from_rational(&q);
        }
        let mut bits = 64;
        loop {
            let v = self.conjugates_of(x, bits).remove(0);
            if let Some(a) = AlgebraicNumber::from_minpoly_near(mp.clone(), &v) {
                return a;
            }
            bits *= 2;
            assert!(bits <= DEFAULT_CEILING, "could not isolate field element");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> NumberField {
        let mp = IntPoly::from_i64(&[-1, -1, 1]);
        let roots = isolate_roots(&mp, 64, 4096).unwrap();
        NumberField::new(mp, roots)
    }

    #[test]
    fn golden_ratio_identities() {
        let k = golden();
        let a = k.gen();
        let a2 = k.mul(&a, &a);
        assert_eq!(a2, k.add(&a, &k.one()));
        let inv = k.inv(&a).unwrap();
        assert_eq!(inv, k.sub(&a, &k.one()));
        let s5 = k.sub(&k.scale(&a, &Rational::from(2)), &k.one());
        assert_eq!(k.mul(&s5, &s5), k.from_i64(5));
    }

    #[test]
    fn minimal_polynomial_of_sqrt5() {
        let k = golden();
        let s5 = k.sub(&k.scale(&k.gen(), &Rational::from(2)), &k.one());
        assert_eq!(k.minpoly_of(&s5), IntPoly::from_i64(&[-5, 0, 1]));
        assert_eq!(k.minpoly_of(&k.from_i64(3)), IntPoly::from_i64(&[-3, 1]));
        let v = k.real_value(&s5, 100);
        assert!((v.to_f64() - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn algebraic_number_refines() {
        let k = golden();
        let a = k.to_algebraic(&k.gen());
        let coarse = a.value(60).re;
        let fine = a.value(300).re;
        assert!(coarse.encloses(&fine));
        assert!(fine.width() < Float::with_val(300, Float::u_exp(1, -250)));
    }
}
