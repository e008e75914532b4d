//! Certified isolation of the complex roots of a squarefree integer polynomial.
//!
//! Approximations come from Aberth–Ehrlich iterations. They are then certified
//! with Smith's inclusion theorem: for distinct approximations z_i of the roots
//! of a degree-n polynomial with leading coefficient c, every root lies in the
//! union of the disks |z − z_i| ≤ n·|p(z_i)| / |c·Π_{j≠i}(z_i − z_j)|, and a
//! connected group of m disks holds exactly m roots. Pairwise disjoint disks
//! therefore isolate one root each.

use rug::Float;

use crate::interval::{CertifiedComplex, CertifiedReal};
use crate::poly::IntPoly;

/// One isolated root: the disk of `radius` around `center` holds exactly one root.
#[derive(Clone, Debug)]
pub struct RootDisk {
    pub center_re: Float,
    pub center_im: Float,
    pub radius: Float,
    /// The root is certified real (center on the axis and disk isolating).
    pub real: bool,
}

impl RootDisk {
    pub fn prec(&self) -> u32 {
        self.center_re.prec()
    }

    /// Enclosing box of the disk.
    pub fn enclosure(&self) -> CertifiedComplex {
        let p = self.prec();
        let band = CertifiedReal::from_endpoints(
            Float::with_val(p, -&self.radius),
            Float::with_val(p, &self.radius),
        );
        let re = &CertifiedReal::point(self.center_re.clone()) + &band;
        let im = if self.real {
            CertifiedReal::zero(p)
        } else {
            &CertifiedReal::point(self.center_im.clone()) + &band
        };
        CertifiedComplex::new(re, im)
    }

    /// Enclosure of |root|: |center| ± radius.
    pub fn modulus(&self) -> CertifiedReal {
        let p = self.prec();
        let c = CertifiedComplex::new(
            CertifiedReal::point(self.center_re.clone()),
            CertifiedReal::point(self.center_im.clone()),
        )
        .abs();
        let r = CertifiedReal::point(self.radius.clone());
        let lo = (&c - &r).lo().clone();
        let lo = if lo < 0 { Float::with_val(p, 0) } else { lo };
        CertifiedReal::from_endpoints(lo, (&c + &r).hi().clone())
    }

    /// True when the disk does not meet the real axis.
    pub fn certainly_nonreal(&self) -> bool {
        let im = CertifiedReal::point(self.center_im.clone()).abs();
        im.gt(&CertifiedReal::point(self.radius.clone()))
    }
}

#[derive(Clone, Debug)]
struct Cx {
    re: Float,
    im: Float,
}

impl Cx {
    fn new(p: u32, re: f64, im: f64) -> Cx {
        Cx { re: Float::with_val(p, re), im: Float::with_val(p, im) }
    }
    fn add(&self, o: &Cx) -> Cx {
        let p = self.re.prec();
        Cx { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
    fn sub(&self, o: &Cx) -> Cx {
        let p = self.re.prec();
        Cx { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
    fn mul(&self, o: &Cx) -> Cx {
        let p = self.re.prec();
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        Cx { re, im }
    }
    fn div(&self, o: &Cx) -> Cx {
        let p = self.re.prec();
        let den = Float::with_val(p, o.re.square_ref()) + Float::with_val(p, o.im.square_ref());
        let re = (Float::with_val(p, &self.re * &o.re) + Float::with_val(p, &self.im * &o.im)) / &den;
        let im = (Float::with_val(p, &self.im * &o.re) - Float::with_val(p, &self.re * &o.im)) / &den;
        Cx { re, im }
    }
    fn norm(&self) -> Float {
        let p = self.re.prec();
        (Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())).sqrt()
    }
    fn with_prec(&self, p: u32) -> Cx {
        Cx { re: Float::with_val(p, &self.re), im: Float::with_val(p, &self.im) }
    }
}

fn eval_with_derivative(p: &IntPoly, z: &Cx) -> (Cx, Cx) {
    let prec = z.re.prec();
    let mut v = Cx::new(prec, 0.0, 0.0);
    let mut dv = Cx::new(prec, 0.0, 0.0);
    for c in p.coeffs().iter().rev() {
        dv = dv.mul(z).add(&v);
        v = v.mul(z);
        v.re += c;
    }
    (v, dv)
}

/// Aberth–Ehrlich approximations of all roots at working precision `prec`.
fn aberth(p: &IntPoly, prec: u32, start: Option<&[Cx]>) -> Vec<Cx> {
    let n = p.degree();
    let lead = Float::with_val(prec, p.lead()).abs();
    // Cauchy bound for the initial circle.
    let mut bound = Float::with_val(prec, 0);
    for c in &p.coeffs()[..n] {
        let r = Float::with_val(prec, c).abs() / &lead;
        if r > bound {
            bound = r;
        }
    }
    let radius = (bound.to_f64() + 1.0).min(1e300) * 0.5 + 0.5;
    let mut z: Vec<Cx> = match start {
        Some(s) if s.len() == n => s.iter().map(|c| c.with_prec(prec)).collect(),
        _ => (0..n)
            .map(|k| {
                let th = std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4;
                Cx::new(prec, radius * th.cos(), radius * th.sin())
            })
            .collect(),
    };
    let tol = Float::with_val(prec, Float::u_exp(1, 8 - prec as i32));
    let max_iter = 200 + 4 * prec as usize;
    for _ in 0..max_iter {
        let mut moved = false;
        for i in 0..n {
            let (v, dv) = eval_with_derivative(p, &z[i]);
            if v.re == 0 && v.im == 0 {
                continue;
            }
            let ratio = v.div(&dv);
            let mut s = Cx::new(prec, 0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i].sub(&z[j]);
                    s = s.add(&Cx::new(prec, 1.0, 0.0).div(&d));
                }
            }
            let denom = Cx::new(prec, 1.0, 0.0).sub(&ratio.mul(&s));
            let w = ratio.div(&denom);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            let scale = z[i].norm().max(&Float::with_val(prec, 1));
            if w.norm() > Float::with_val(prec, &tol * &scale) {
                moved = true;
            }
            z[i] = z[i].sub(&w);
        }
        if !moved {
            break;
        }
    }
    z
}

fn certify(p: &IntPoly, approx: &[Cx]) -> Option<Vec<RootDisk>> {
    let n = approx.len();
    let prec = approx[0].re.prec();
    let pts: Vec<CertifiedComplex> = approx
        .iter()
        .map(|c| CertifiedComplex::new(CertifiedReal::point(c.re.clone()), CertifiedReal::point(c.im.clone())))
        .collect();
    let lead = CertifiedComplex::from_real(CertifiedReal::from_integer(&p.lead(), prec));
    let mut disks = Vec::with_capacity(n);
    for i in 0..n {
        let mut den = lead.clone();
        for j in 0..n {
            if j != i {
                den = &den * &(&pts[i] - &pts[j]);
            }
        }
        let w = p.eval_complex(&pts[i]).div(&den);
        let r = w.abs().mul_i64(n as i64);
        if !r.is_finite() {
            return None;
        }
        let real = approx[i].im == 0;
        disks.push(RootDisk {
            center_re: approx[i].re.clone(),
            center_im: approx[i].im.clone(),
            radius: r.hi().clone(),
            real,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (&pts[i] - &pts[j]).abs();
            let rsum = &CertifiedReal::point(disks[i].radius.clone()) + &CertifiedReal::point(disks[j].radius.clone());
            if !d.gt(&rsum) {
                return None;
            }
        }
    }
    Some(disks)
}

/// Isolates all roots of the squarefree polynomial `p` (degree ≥ 1), trying
/// precisions from `prec` up to `ceiling`. Each returned disk has radius below
/// 2^(−target_bits)·max(1, |center|). Roots are sorted by decreasing modulus
/// of their centers, ties broken by real part then imaginary part.
pub fn isolate_roots(p: &IntPoly, target_bits: u32, ceiling: u32) -> Option<Vec<RootDisk>> {
    assert!(p.degree() >= 1);
    let mut prec = (target_bits + 32).max(64);
    let mut start: Option<Vec<Cx>> = None;
    loop {
        let mut z = aberth(p, prec, start.as_deref());
        // Snap nearly-real approximations onto the axis; roots of a real
        // polynomial isolated by disks symmetric about the axis are real.
        let snap = Float::with_val(prec, Float::u_exp(1, -(prec as i32) / 2));
        for c in z.iter_mut() {
            let scale = c.norm().max(&Float::with_val(prec, 1));
            if Float::with_val(prec, c.im.abs_ref()) < Float::with_val(prec, &snap * &scale) {
                c.im = Float::with_val(prec, 0);
            }
        }
        if let Some(mut disks) = certify(p, &z) {
            let thin = disks.iter().all(|d| {
                let scale = Float::with_val(prec, d.center_re.abs_ref())
                    .max(&Float::with_val(prec, d.center_im.abs_ref()))
                    .max(&Float::with_val(prec, 1));
                d.radius < Float::with_val(prec, Float::u_exp(1, -(target_bits as i32))) * scale
            });
            if thin {
                disks.sort_by(|a, b| {
                    let ma = Cx { re: a.center_re.clone(), im: a.center_im.clone() }.norm();
                    let mb = Cx { re: b.center_re.clone(), im: b.center_im.clone() }.norm();
                    mb.partial_cmp(&ma)
                        .unwrap()
                        .then(b.center_re.partial_cmp(&a.center_re).unwrap())
                        .then(b.center_im.partial_cmp(&a.center_im).unwrap())
                });
                return Some(disks);
            }
        }
        if prec >= ceiling {
            return None;
        }
        start = Some(z);
        prec = (prec * 2).min(ceiling.max(64));
    }
}
