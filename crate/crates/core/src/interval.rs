//! Closed real intervals and rectangular complex boxes with outward rounding.
//!
//! Every operation rounds the lower endpoint toward −∞ and the upper endpoint
//! toward +∞, so the exact result of the operation on any points of the
//! operands lies inside the returned interval.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::AssignRound;
use rug::{Float, Integer, Rational};

fn down<T>(prec: u32, val: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Down).0
}

fn up<T>(prec: u32, val: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Up).0
}

fn fmin(a: Float, b: Float) -> Float {
    if b < a {
        b
    } else {
        a
    }
}

fn fmax(a: Float, b: Float) -> Float {
    if b > a {
        b
    } else {
        a
    }
}

/// A closed interval `[lo, hi]` of reals at a fixed working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedReal {
    lo: Float,
    hi: Float,
}

impl CertifiedReal {
    pub fn from_endpoints(lo: Float, hi: Float) -> Self {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Self::whole(lo.prec().max(hi.prec()));
        }
        CertifiedReal { lo, hi }
    }

    pub fn whole(prec: u32) -> Self {
        CertifiedReal {
            lo: Float::with_val(prec, rug::float::Special::NegInfinity),
            hi: Float::with_val(prec, rug::float::Special::Infinity),
        }
    }

    pub fn point(x: Float) -> Self {
        CertifiedReal { lo: x.clone(), hi: x }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        CertifiedReal { lo: down(prec, v), hi: up(prec, v) }
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        CertifiedReal { lo: down(prec, v), hi: up(prec, v) }
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Self {
        CertifiedReal { lo: down(prec, v), hi: up(prec, v) }
    }

    pub fn from_rational(v: &Rational, prec: u32) -> Self {
        CertifiedReal { lo: down(prec, v), hi: up(prec, v) }
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_i64(0, prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn pi(prec: u32) -> Self {
        CertifiedReal { lo: down(prec, Constant::Pi), hi: up(prec, Constant::Pi) }
    }

    pub fn ln2(prec: u32) -> Self {
        CertifiedReal { lo: down(prec, Constant::Log2), hi: up(prec, Constant::Log2) }
    }

    /// Euler's number e.
    pub fn e(prec: u32) -> Self {
        Self::one(prec).exp()
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn mid(&self) -> Float {
        let p = self.prec() + 2;
        Float::with_val(p, &self.lo + &self.hi) / 2u32
    }

    /// Upper bound for the half-width.
    pub fn rad(&self) -> Float {
        let w = up(self.prec(), &self.hi - &self.lo);
        w / 2u32
    }

    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains_zero(&self) -> bool {
        !(self.lo > 0 || self.hi < 0)
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lo <= *x && self.hi >= *x
    }

    pub fn encloses(&self, other: &CertifiedReal) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0
    }

    /// `self < other` holds for every pair of points.
    pub fn lt(&self, other: &CertifiedReal) -> bool {
        self.hi < other.lo
    }

    pub fn le(&self, other: &CertifiedReal) -> bool {
        self.hi <= other.lo
    }

    pub fn gt(&self, other: &CertifiedReal) -> bool {
        other.lt(self)
    }

    pub fn ge(&self, other: &CertifiedReal) -> bool {
        other.le(self)
    }

    /// Decides the sign of the enclosed value if the enclosure permits.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo > 0 {
            Some(Ordering::Greater)
        } else if self.hi < 0 {
            Some(Ordering::Less)
        } else if self.lo == 0 && self.hi == 0 {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        CertifiedReal { lo: down(prec, &self.lo), hi: up(prec, &self.hi) }
    }

    /// Collapses to the upper endpoint; the result is a certified upper bound.
    pub fn upper(&self) -> Self {
        Self::point(self.hi.clone())
    }

    pub fn lower(&self) -> Self {
        Self::point(self.lo.clone())
    }

    pub fn hull(&self, other: &CertifiedReal) -> Self {
        CertifiedReal {
            lo: fmin(self.lo.clone(), other.lo.clone()),
            hi: fmax(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn max(&self, other: &CertifiedReal) -> Self {
        CertifiedReal {
            lo: fmax(self.lo.clone(), other.lo.clone()),
            hi: fmax(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn min(&self, other: &CertifiedReal) -> Self {
        CertifiedReal {
            lo: fmin(self.lo.clone(), other.lo.clone()),
            hi: fmin(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn abs(&self) -> Self {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            -self.clone()
        } else {
            let a = Float::with_val(self.prec(), -&self.lo);
            CertifiedReal { lo: Float::with_val(self.prec(), 0), hi: fmax(a, self.hi.clone()) }
        }
    }

    pub fn sqr(&self) -> Self {
        let p = self.prec();
        let a = self.abs();
        CertifiedReal { lo: down(p, a.lo.square_ref()), hi: up(p, a.hi.square_ref()) }
    }

    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.hi < 0 {
            return Self::whole(p);
        }
        let lo = if self.lo <= 0 { Float::with_val(p, 0) } else { down(p, self.lo.sqrt_ref()) };
        CertifiedReal { lo, hi: up(p, self.hi.sqrt_ref()) }
    }

    pub fn ln(&self) -> Self {
        let p = self.prec();
        if self.hi <= 0 {
            return Self::whole(p);
        }
        let lo = if self.lo <= 0 {
            Float::with_val(p, rug::float::Special::NegInfinity)
        } else {
            down(p, self.lo.ln_ref())
        };
        CertifiedReal { lo, hi: up(p, self.hi.ln_ref()) }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        CertifiedReal { lo: down(p, self.lo.exp_ref()), hi: up(p, self.hi.exp_ref()) }
    }

    pub fn recip(&self) -> Self {
        let p = self.prec();
        if self.contains_zero() {
            return Self::whole(p);
        }
        CertifiedReal { lo: down(p, 1 / &self.hi), hi: up(p, 1 / &self.lo) }
    }

    pub fn div(&self, other: &CertifiedReal) -> Self {
        if other.contains_zero() {
            return Self::whole(self.prec().max(other.prec()));
        }
        let p = self.prec().max(other.prec());
        let cands_lo = [
            down(p, &self.lo / &other.lo),
            down(p, &self.lo / &other.hi),
            down(p, &self.hi / &other.lo),
            down(p, &self.hi / &other.hi),
        ];
        let cands_hi = [
            up(p, &self.lo / &other.lo),
            up(p, &self.lo / &other.hi),
            up(p, &self.hi / &other.lo),
            up(p, &self.hi / &other.hi),
        ];
        Self::from_candidates(cands_lo, cands_hi, p)
    }

    fn from_candidates(lo: [Float; 4], hi: [Float; 4], p: u32) -> Self {
        if lo.iter().chain(hi.iter()).any(|x| x.is_nan()) {
            return Self::whole(p);
        }
        let l = lo.into_iter().reduce(fmin).unwrap();
        let h = hi.into_iter().reduce(fmax).unwrap();
        CertifiedReal { lo: l, hi: h }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self * &CertifiedReal::from_i64(k, self.prec())
    }

    pub fn div_i64(&self, k: i64) -> Self {
        self.div(&CertifiedReal::from_i64(k, self.prec()))
    }

    pub fn pow_u(&self, n: u64) -> Self {
        let mut result = Self::one(self.prec());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        result
    }

    pub fn pow_i(&self, n: i64) -> Self {
        if n >= 0 {
            self.pow_u(n as u64)
        } else {
            self.pow_u(n.unsigned_abs()).recip()
        }
    }

    /// Real power `self^e` for positive `self`, computed as `exp(e·ln self)`.
    pub fn powf(&self, e: &CertifiedReal) -> Self {
        (&self.ln() * e).exp()
    }

    /// Returns the floor when it is the same integer for every enclosed point.
    pub fn unique_floor(&self) -> Option<Integer> {
        if !self.is_finite() {
            return None;
        }
        let a = self.lo.to_integer_round(Round::Down)?.0;
        let b = self.hi.to_integer_round(Round::Down)?.0;
        (a == b).then_some(a)
    }

    pub fn floor_hi(&self) -> Option<Integer> {
        self.hi.to_integer_round(Round::Down).map(|x| x.0)
    }

    pub fn ceil_hi(&self) -> Option<Integer> {
        self.hi.to_integer_round(Round::Up).map(|x| x.0)
    }

    /// Enclosure of the distance to the nearest integer, ‖x‖.
    pub fn dist_to_nearest_integer(&self) -> Self {
        let p = self.prec();
        if !self.is_finite() {
            return Self::whole(p);
        }
        let n = self.mid().to_integer_round(Round::Nearest).map(|x| x.0).unwrap_or_default();
        let shifted = self - &CertifiedReal::from_integer(&n, p);
        // Inside (−1/2, 1/2) the distance is |x − n|; otherwise fall back to [0, 1/2].
        let half = Float::with_val(p, 0.5);
        if shifted.lo > -half.clone() && shifted.hi < half {
            shifted.abs()
        } else {
            CertifiedReal { lo: Float::with_val(p, 0), hi: Float::with_val(p, 0.5) }
        }
    }

    /// Decimal rendering of the midpoint with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if !self.is_finite() {
            return "unbounded".to_string();
        }
        self.mid().to_string_radix(10, Some(digits))
    }

    pub fn upper_decimal(&self, digits: usize) -> String {
        Float::with_val(self.prec(), &self.hi)
            .to_string_radix_round(10, Some(digits), Round::Up)
    }

    pub fn lower_decimal(&self, digits: usize) -> String {
        Float::with_val(self.prec(), &self.lo)
            .to_string_radix_round(10, Some(digits), Round::Down)
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower_decimal(20), self.upper_decimal(20))
    }
}

impl<'a> Add<&'a CertifiedReal> for &'a CertifiedReal {
    type Output = CertifiedReal;
    fn add(self, o: &CertifiedReal) -> CertifiedReal {
        let p = self.prec().max(o.prec());
        CertifiedReal::from_endpoints(down(p, &self.lo + &o.lo), up(p, &self.hi + &o.hi))
    }
}

impl<'a> Sub<&'a CertifiedReal> for &'a CertifiedReal {
    type Output = CertifiedReal;
    fn sub(self, o: &CertifiedReal) -> CertifiedReal {
        let p = self.prec().max(o.prec());
        CertifiedReal::from_endpoints(down(p, &self.lo - &o.hi), up(p, &self.hi - &o.lo))
    }
}

impl<'a> Mul<&'a CertifiedReal> for &'a CertifiedReal {
    type Output = CertifiedReal;
    fn mul(self, o: &CertifiedReal) -> CertifiedReal {
        let p = self.prec().max(o.prec());
        let lo = [
            down(p, &self.lo * &o.lo),
            down(p, &self.lo * &o.hi),
            down(p, &self.hi * &o.lo),
            down(p, &self.hi * &o.hi),
        ];
        let hi = [
            up(p, &self.lo * &o.lo),
            up(p, &self.lo * &o.hi),
            up(p, &self.hi * &o.lo),
            up(p, &self.hi * &o.hi),
        ];
        CertifiedReal::from_candidates(lo, hi, p)
    }
}

impl Neg for CertifiedReal {
    type Output = CertifiedReal;
    fn neg(self) -> CertifiedReal {
        CertifiedReal { lo: -self.hi, hi: -self.lo }
    }
}

impl Add for CertifiedReal {
    type Output = CertifiedReal;
    fn add(self, o: CertifiedReal) -> CertifiedReal {
        &self + &o
    }
}

impl Sub for CertifiedReal {
    type Output = CertifiedReal;
    fn sub(self, o: CertifiedReal) -> CertifiedReal {
        &self - &o
    }
}

impl Mul for CertifiedReal {
    type Output = CertifiedReal;
    fn mul(self, o: CertifiedReal) -> CertifiedReal {
        &self * &o
    }
}

/// A rectangular complex box `re × i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedComplex {
    pub re: CertifiedReal,
    pub im: CertifiedReal,
}

impl CertifiedComplex {
    pub fn new(re: CertifiedReal, im: CertifiedReal) -> Self {
        CertifiedComplex { re, im }
    }

    pub fn from_real(re: CertifiedReal) -> Self {
        let p = re.prec();
        CertifiedComplex { re, im: CertifiedReal::zero(p) }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_real(CertifiedReal::from_i64(v, prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn conj(&self) -> Self {
        CertifiedComplex { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> CertifiedReal {
        &self.re.sqr() + &self.im.sqr()
    }

    pub fn abs(&self) -> CertifiedReal {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: &CertifiedReal) -> Self {
        CertifiedComplex { re: &self.re * k, im: &self.im * k }
    }

    pub fn div(&self, o: &CertifiedComplex) -> Self {
        let den = o.norm_sqr();
        let num = self * &o.conj();
        CertifiedComplex { re: num.re.div(&den), im: num.im.div(&den) }
    }

    pub fn pow_u(&self, n: u64) -> Self {
        let mut result = Self::from_i64(1, self.prec());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl fmt::Display for CertifiedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + i·{}", self.re, self.im)
    }
}

impl<'a> Add<&'a CertifiedComplex> for &'a CertifiedComplex {
    type Output = CertifiedComplex;
    fn add(self, o: &CertifiedComplex) -> CertifiedComplex {
        CertifiedComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a CertifiedComplex> for &'a CertifiedComplex {
    type Output = CertifiedComplex;
    fn sub(self, o: &CertifiedComplex) -> CertifiedComplex {
        CertifiedComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a CertifiedComplex> for &'a CertifiedComplex {
    type Output = CertifiedComplex;
    fn mul(self, o: &CertifiedComplex) -> CertifiedComplex {
        let re = &(&self.re * &o.re) - &(&self.im * &o.im);
        let im = &(&self.re * &o.im) + &(&self.im * &o.re);
        CertifiedComplex { re, im }
    }
}

/// Runs `f` at doubling precisions starting from `start` until it succeeds or
/// the precision would exceed `ceiling`.
pub fn refine<T>(start: u32, ceiling: u32, mut f: impl FnMut(u32) -> Option<T>) -> Option<T> {
    let mut prec = start.max(32);
    loop {
        if let Some(v) = f(prec) {
            return Some(v);
        }
        if prec >= ceiling {
            return None;
        }
        prec = (prec * 2).min(ceiling);
    }
}
