//! The explicit constant chain behind the bounds for
//! a_1U_{n_1} + … + a_kU_{n_k} = b_1V_{m_1} + … + b_ℓV_{m_ℓ}.
//!
//! Gaps are measured in scaled units: for a pair (K, L) the quantity bounded is
//! min{(n_1 − n_K)·log α′, (m_1 − m_L)·log β′}, where α′ = min{|α|, |α|/|α_2|}.
//! Every level inequality then reads min ≤ (C·log n_1)^{K+L−3}.

use std::fmt::Write as _;

use rug::ops::Pow;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::algebraic::{AlgebraicNumber, FieldElem};
use crate::dominance::{check_dominance_with, geometric_sum, DominanceCertificate, DominanceError, SideSpec, Witness};
use crate::heights::{
    bw_constant, log_plus, mult_indep_affine, pdw_solve, weil_height_value, AffineHeightBound, HeightError,
    HeightValue,
};
use crate::interval::CertifiedReal;
use crate::recurrence::{spectral_analyze, LinearRecurrence, SpectralData, SpectralError};

pub const DEFAULT_CHAIN_PRECISION: u32 = 256;
/// Smallest admissible C; the level induction needs C·log n_1 well above 1.
pub const C_FLOOR: i64 = 92;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dominance(#[from] DominanceError),
    #[error("{side} side does not admit dominance; witness {witness:?}")]
    NotDominant { side: &'static str, witness: Witness },
    #[error(transparent)]
    Height(#[from] HeightError),
    #[error("dominant roots may be multiplicatively dependent: {0}")]
    Dependent(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Clone, Debug)]
pub struct ChainPolicy {
    /// Solutions with n_1 or m_1 below this are left to direct enumeration.
    pub n_min: u64,
    pub precision: u32,
    /// Overrides D = deg α · deg β.
    pub field_degree: Option<usize>,
    /// Lower-bound constant C′ for h(α^n/β^m) when no exact formula applies.
    pub c_prime: Option<CertifiedReal>,
    /// Accepts multiplicative independence of α, β when it cannot be checked.
    pub assume_independent: bool,
}

impl Default for ChainPolicy {
    fn default() -> Self {
        ChainPolicy { n_min: 3, precision: DEFAULT_CHAIN_PRECISION, field_degree: None, c_prime: None, assume_independent: false }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub left: SideSpec,
    pub right: SideSpec,
    pub left_spectral: SpectralData,
    pub right_spectral: SpectralData,
    pub left_cert: DominanceCertificate,
    pub right_cert: DominanceCertificate,
    pub field_degree: usize,
    pub policy: ChainPolicy,
}

impl ProblemInstance {
    pub fn new(left: SideSpec, right: SideSpec, policy: ChainPolicy) -> Result<Self, ChainError> {
        let prec = policy.precision;
        let ls = spectral_analyze(&left.rec, prec)?;
        let rs = spectral_analyze(&right.rec, prec)?;
        let lc = check_dominance_with(&left, &ls)?;
        if let Some(w) = lc.witness.clone() {
            return Err(ChainError::NotDominant { side: "left", witness: w });
        }
        let rc = check_dominance_with(&right, &rs)?;
        if let Some(w) = rc.witness.clone() {
            return Err(ChainError::NotDominant { side: "right", witness: w });
        }
        check_independence(&ls.dominant_root, &rs.dominant_root, policy.assume_independent)?;
        let field_degree = policy
            .field_degree
            .unwrap_or(ls.dominant_root.degree() * rs.dominant_root.degree());
        Ok(ProblemInstance {
            left,
            right,
            left_spectral: ls,
            right_spectral: rs,
            left_cert: lc,
            right_cert: rc,
            field_degree,
            policy,
        })
    }

    /// H_Z(n) + H_b(n) = k + ℓ with Zeckendorf digits on the left and binary
    /// digits on the right.
    pub fn zeckendorf_binary(k: usize, l: usize) -> Result<Self, ChainError> {
        let policy = ChainPolicy { field_degree: Some(2), ..ChainPolicy::default() };
        Self::new(
            SideSpec::digits(LinearRecurrence::zeckendorf_fibonacci(), k, 2),
            SideSpec::digits(LinearRecurrence::powers_of(2), l, 1),
            policy,
        )
    }

    pub fn k(&self) -> usize {
        self.left.k()
    }

    pub fn l(&self) -> usize {
        self.right.k()
    }
}

fn perfect_power_base(x: &Integer) -> Integer {
    let x = x.clone().abs();
    let bits = x.significant_bits();
    for e in (2..=bits.max(2)).rev() {
        let r = x.clone().root(e);
        if r > 1 && r.clone().pow(e) == x {
            return perfect_power_base(&r);
        }
    }
    x
}

fn is_unit(x: &AlgebraicNumber) -> bool {
    let c = x.minpoly().coeffs();
    (c[0] == 1 || c[0] == -1) && (*c.last().unwrap() == 1 || *c.last().unwrap() == -1)
}

fn check_independence(a: &AlgebraicNumber, b: &AlgebraicNumber, assume: bool) -> Result<(), ChainError> {
    match (a.as_rational(), b.as_rational()) {
        (Some(p), Some(q)) => {
            if *p.denom() != 1 || *q.denom() != 1 {
                return if assume { Ok(()) } else { Err(ChainError::Dependent("non-integral rational roots".into())) };
            }
            if perfect_power_base(p.numer()) == perfect_power_base(q.numer()) {
                return Err(ChainError::Dependent(format!("{} and {} are powers of a common integer", p, q)));
            }
            Ok(())
        }
        // A unit against a non-unit: α^a = β^b forces b = 0 by taking norms.
        _ if is_unit(a) != is_unit(b) => Ok(()),
        _ if assume => Ok(()),
        _ => Err(ChainError::Dependent("independence not decidable for this pair; set assume_independent".into())),
    }
}

/// Whether a constant is a certified lower or upper bound of the exact quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Clone, Debug)]
pub struct ChainEntry {
    pub name: String,
    pub value: CertifiedReal,
    pub bound: Bound,
    pub provenance: String,
}

/// Constants of one side of the equation.
#[derive(Clone, Debug)]
pub struct SideConstants {
    pub abs_root: CertifiedReal,
    pub log_root: CertifiedReal,
    /// α′ = min{|α|, |α|/|α_2|}.
    pub root_prime: CertifiedReal,
    pub log_root_prime: CertifiedReal,
    pub second: CertifiedReal,
    pub u: CertifiedReal,
    /// C₁, taken as 0 for order 1 where U_n = uα^n.
    pub c1: CertifiedReal,
    pub a: CertifiedReal,
    pub c2: CertifiedReal,
    pub c3: CertifiedReal,
    /// L with |a_1U_{n_1} + …| ≥ L·|α|^{n_1} for n_1 ≥ n_min.
    pub lower: CertifiedReal,
    /// S with |a_1U_{n_1} + …| ≤ S·|α|^{n_1}.
    pub upper: CertifiedReal,
    pub height_root: CertifiedReal,
    pub k: usize,
    pub regular: bool,
}

#[derive(Clone, Debug)]
pub struct BoundChain {
    pub entries: Vec<ChainEntry>,
    pub left: SideConstants,
    pub right: SideConstants,
    pub n_min: u64,
    pub field_degree: usize,
    /// C20 for every (K, L) with 2 ≤ K ≤ k+1, 2 ≤ L ≤ ℓ+1.
    pub large_term: Vec<((usize, usize), CertifiedReal)>,
    pub height_bound: AffineHeightBound,
    pub c: CertifiedReal,
    pub step: StepData,
    pub k: usize,
    pub l: usize,
}

impl BoundChain {
    pub fn get(&self, name: &str) -> Option<&CertifiedReal> {
        self.entries.iter().find(|e| e.name == name).map(|e| &e.value)
    }

    pub fn large_term(&self, k: usize, l: usize) -> &CertifiedReal {
        &self.large_term.iter().find(|(p, _)| *p == (k, l)).expect("pair in range").1
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let v = match e.bound {
                Bound::Lower => e.value.lower_decimal(20),
                Bound::Upper => e.value.upper_decimal(20),
            };
            let dir = if e.bound == Bound::Lower { ">=" } else { "<=" };
            let _ = writeln!(s, "{:<10} {dir} {v}    {}", e.name, e.provenance);
        }
        s
    }
}

fn side_constants(
    side: &SideSpec,
    sp: &SpectralData,
    cert: &DominanceCertificate,
    n_min: u64,
    prec: u32,
) -> Result<SideConstants, ChainError> {
    let consts = cert.constants.as_ref().ok_or(DominanceError::NotDominantInput)?;
    let zero = CertifiedReal::zero(prec);
    let abs_root = sp.abs_alpha().with_prec(prec);
    let order1 = side.rec.order() == 1;
    let second = if order1 { zero.clone() } else { sp.second_modulus_bound.with_prec(prec).upper() };
    let root_prime = if order1 || second.hi().is_zero() {
        abs_root.clone()
    } else {
        abs_root.min(&abs_root.div(&second)).lower()
    };
    let u = sp.u.abs().with_prec(prec);
    let c1 = if order1 { zero.clone() } else { sp.approx_constant.with_prec(prec).upper() };
    let a = CertifiedReal::from_integer(&side.a_max(), prec);
    let c3 = consts.c3.with_prec(prec).lower();

    // min over n ≥ n_min of |U_n|/|α|^n: exact on a window, then |u| − C₁θ^n.
    let terms = side.rec.terms((n_min + 64) as usize);
    let mut m = abs_root.pow_u(n_min);
    let mut least: Option<CertifiedReal> = None;
    for n in n_min..n_min + 64 {
        let r = CertifiedReal::from_integer(&terms[n as usize].clone().abs(), prec).div(&m);
        least = Some(match least {
            None => r,
            Some(l) => l.min(&r),
        });
        m = &m * &abs_root;
    }
    let theta = if order1 { zero.clone() } else { second.div(&abs_root).upper() };
    let tail = &u - &(&c1 * &theta.pow_u(n_min + 64));
    let least = least.unwrap().min(&tail).lower();
    if !least.is_positive() {
        return Err(ChainError::Precondition("|U_n|/|α|^n is not bounded away from 0 above n_min".into()));
    }
    let lower = (&c3 * &least).lower();
    let upper = if side.regular {
        // A regular expansion with top index n_1 stays below U_{n_1+1}.
        (&(&u * &abs_root) + &(&c1 * &second)).upper()
    } else {
        (&(&a * &(&u + &c1)) * &geometric_sum(&abs_root.recip(), side.k())).upper()
    };
    Ok(SideConstants {
        log_root: abs_root.ln(),
        log_root_prime: root_prime.ln().lower(),
        height_root: weil_height_value(&sp.dominant_root, prec).upper(),
        abs_root,
        root_prime,
        second,
        u,
        c1,
        a,
        c2: consts.c2.with_prec(prec).lower(),
        c3,
        lower,
        upper,
        k: side.k(),
        regular: side.regular,
    })
}

/// T with |Σ_i a_iU_{n_i} − u·Σ_{i<K} a_iα^{n_i}| ≤ T·|α|^{n_1}·(α′)^{n_K − n_1},
/// reading n_K as 0 when K > k.
pub fn side_error_coefficient(s: &SideConstants, big_k: usize) -> CertifiedReal {
    let p = s.abs_root.prec();
    let one = CertifiedReal::one(p);
    let count = CertifiedReal::from_i64(big_k as i64 - 1, p);
    let g_sec = if s.second.lt(&one) {
        one.div(&(&one - &s.second)).min(&count)
    } else if s.second.gt(&one) {
        s.second.div(&(&s.second - &one)).min(&count)
    } else {
        count
    };
    let sec = &(&s.a * &s.c1) * &g_sec;
    let tail = if big_k > s.k {
        CertifiedReal::zero(p)
    } else if s.regular {
        (&(&s.u * &s.abs_root) + &(&s.c1 * &s.second)).upper()
    } else {
        &(&s.a * &(&s.u + &s.c1)) * &geometric_sum(&s.abs_root.recip(), s.k - big_k + 1)
    };
    (&sec + &tail).upper()
}

/// Height of a_1u/(b_1v): exact when one of the two fields is ℚ, else h(a_1u) + h(b_1v).
fn eta_height(inst: &ProblemInstance, bits: u32) -> (CertifiedReal, CertifiedReal) {
    let (ls, rs) = (&inst.left_spectral, &inst.right_spectral);
    let a1 = Rational::from(inst.left.coefficients[0].clone());
    let b1 = Rational::from(inst.right.coefficients[0].clone());
    let p = bits + 32;
    let log_abs = {
        let num = &CertifiedReal::from_rational(&a1, p).abs() * &ls.u.abs().with_prec(p);
        let den = &CertifiedReal::from_rational(&b1, p).abs() * &rs.u.abs().with_prec(p);
        num.div(&den).ln()
    };
    let in_field = |f: &crate::algebraic::NumberField, x: &FieldElem| weil_height_value(&f.to_algebraic(x), bits);
    let h = if let Some(v) = rs.u_exact.as_rational() {
        let f = &ls.field;
        let x = f.scale(&ls.u_exact, &(a1 / (b1 * v)));
        in_field(f, &x)
    } else if let Some(u) = ls.u_exact.as_rational() {
        let f = &rs.field;
        let x = f.scale(&rs.u_exact, &(b1 / (a1 * u)));
        in_field(f, &x)
    } else {
        let hu = in_field(&ls.field, &ls.field.scale(&ls.u_exact, &a1));
        let hv = in_field(&rs.field, &rs.field.scale(&rs.u_exact, &b1));
        &hu + &hv
    };
    (h.upper(), log_abs)
}

/// h(u/v), used for the cell values of the induction step.
fn uv_height(inst: &ProblemInstance, bits: u32) -> CertifiedReal {
    let (ls, rs) = (&inst.left_spectral, &inst.right_spectral);
    let in_field = |f: &crate::algebraic::NumberField, x: &FieldElem| weil_height_value(&f.to_algebraic(x), bits);
    if let Some(v) = rs.u_exact.as_rational() {
        in_field(&ls.field, &ls.field.scale(&ls.u_exact, &v.recip()))
    } else if let Some(u) = ls.u_exact.as_rational() {
        in_field(&rs.field, &rs.field.scale(&rs.u_exact, &u.recip()))
    } else {
        &in_field(&ls.field, &ls.u_exact) + &in_field(&rs.field, &rs.u_exact)
    }
    .upper()
}

fn modified_height(h: &CertifiedReal, log_abs: &CertifiedReal, d: usize) -> CertifiedReal {
    HeightValue::new(h.clone(), log_abs, d).h_prime.upper()
}

struct Builder {
    entries: Vec<ChainEntry>,
}

impl Builder {
    fn put(&mut self, name: &str, value: CertifiedReal, bound: Bound, provenance: &str) -> CertifiedReal {
        let v = match bound {
            Bound::Lower => value.lower(),
            Bound::Upper => value.upper(),
        };
        self.entries.push(ChainEntry { name: name.into(), value: v.clone(), bound, provenance: provenance.into() });
        v
    }
}

/// C₅ … C₈ and the ratio bound R ≥ m_1/n_1.
pub fn derive_growth_constants(inst: &ProblemInstance) -> Result<Vec<ChainEntry>, ChainError> {
    Ok(derive_chain(inst)?
        .entries
        .into_iter()
        .filter(|e| matches!(e.name.as_str(), "C5" | "C6" | "C7" | "C8" | "R"))
        .collect())
}

pub fn derive_chain(inst: &ProblemInstance) -> Result<BoundChain, ChainError> {
    let prec = inst.policy.precision;
    let d = inst.field_degree;
    let n_min = [
        inst.policy.n_min,
        3,
        inst.left_cert.constants.as_ref().map_or(0, |c| c.c3_valid_from),
        inst.right_cert.constants.as_ref().map_or(0, |c| c.c3_valid_from),
    ]
    .into_iter()
    .max()
    .unwrap();
    let lc = side_constants(&inst.left, &inst.left_spectral, &inst.left_cert, n_min, prec)?;
    let rc = side_constants(&inst.right, &inst.right_spectral, &inst.right_cert, n_min, prec)?;
    let one = CertifiedReal::one(prec);
    let log_nmin = CertifiedReal::from_i64(n_min as i64, prec).ln().lower();
    let nm = CertifiedReal::from_i64(n_min as i64, prec);
    let mut b = Builder { entries: Vec::new() };
    use Bound::{Lower, Upper};

    b.put("C1(U)", lc.c1.clone(), Upper, "|U_n - u alpha^n| < C1 |alpha_2|^n, sum of secondary Binet moduli");
    b.put("C1(V)", rc.c1.clone(), Upper, "|V_m - v beta^m| < C1 |beta_2|^m, sum of secondary Binet moduli");
    b.put("C2(U)", lc.c2.clone(), Lower, "dominance of (a_i) for the characteristic root alpha");
    b.put("C2(V)", rc.c2.clone(), Lower, "dominance of (b_j) for the characteristic root beta");
    b.put("C3(U)", lc.c3.clone(), Lower, "|sum a_i U_{n_i}| > C3 |U_{n_1}|");
    b.put("C3(V)", rc.c3.clone(), Lower, "|sum b_j V_{m_j}| > C3 |V_{m_1}|");
    b.put("L(U)", lc.lower.clone(), Lower, "left side >= L |alpha|^{n_1} for n_1 >= n_min");
    b.put("S(U)", lc.upper.clone(), Upper, "left side <= S |alpha|^{n_1}");
    b.put("L(V)", rc.lower.clone(), Lower, "right side >= L |beta|^{m_1} for m_1 >= n_min");
    b.put("S(V)", rc.upper.clone(), Upper, "right side <= S |beta|^{m_1}");

    let c5 = b.put("C5", rc.lower.div(&lc.upper), Lower, "|alpha|^{n_1} >= C5 |beta|^{m_1}, from the two-sided sandwich");
    let c6 = b.put("C6", rc.upper.div(&lc.lower), Upper, "|alpha|^{n_1} <= C6 |beta|^{m_1}, from the two-sided sandwich");
    let lp_inv_c5 = log_plus(&c5.recip());
    let lp_c6 = log_plus(&c6);
    b.put(
        "C7",
        (&rc.log_root - &lp_inv_c5.div(&nm)).div(&lc.log_root),
        Lower,
        "n_1 >= C7 m_1, logarithm of the lower growth relation with m_1 >= n_min",
    );
    b.put(
        "C8",
        (&rc.log_root + &lp_c6.div(&nm)).div(&lc.log_root),
        Upper,
        "n_1 <= C8 m_1, logarithm of the upper growth relation with m_1 >= n_min",
    );
    let r = b.put(
        "R",
        (&lc.log_root + &lp_inv_c5.div(&nm)).div(&rc.log_root),
        Upper,
        "m_1 <= R n_1, so the linear form has coefficients at most max{1,R} n_1",
    );
    let log_r = log_plus(&r);
    let r_factor = &one + &log_r.div(&log_nmin);

    // Large-term inequality |Φ| < C20·max{(α′)^{n_K−n_1}, (β′)^{m_L−m_1}}.
    let mut large = Vec::new();
    let vc2 = (&rc.u * &rc.c2).lower();
    let mut c20_max = CertifiedReal::zero(prec);
    for big_k in 2..=lc.k + 1 {
        for big_l in 2..=rc.k + 1 {
            let t_u = side_error_coefficient(&lc, big_k);
            let t_v = side_error_coefficient(&rc, big_l);
            let c20 = (&(&c6 * &t_u) + &t_v).div(&vc2).upper();
            c20_max = c20_max.max(&c20);
            large.push(((big_k, big_l), c20));
        }
    }
    let t_u2 = side_error_coefficient(&lc, 2);
    let t_v2 = side_error_coefficient(&rc, 2);
    b.put("C9", t_u2, Upper, "left error after the leading term, secondary roots plus tail geometric sum");
    b.put("C10", t_v2, Upper, "right error after the leading term, secondary roots plus tail geometric sum");
    let c11 = large[0].1.clone();
    b.put("C11", c11.clone(), Upper, "base case: |Phi| < C11 max{alpha'^{n_2-n_1}, beta'^{m_2-m_1}}, sum of both error terms");

    let min_phi = &one - &CertifiedReal::from_f64(-0.5, prec).exp();
    let c12 = b.put(
        "C12",
        log_plus(&c11.div(&min_phi)).div(&log_nmin),
        Upper,
        "base case with |Lambda| > 1/2 or a negative ratio, where |Phi| >= 1 - e^{-1/2}",
    );

    let alpha = &inst.left_spectral.dominant_root;
    let beta = &inst.right_spectral.dominant_root;
    let hb = mult_indep_affine(alpha, beta, &c5, &c6, inst.policy.c_prime.as_ref(), prec)?;
    if !hb.slope.is_positive() {
        return Err(ChainError::Precondition("height lower bound has no positive slope".into()));
    }
    b.put("C'", hb.slope.clone(), Lower, "h(alpha^{n_1}/beta^{m_1}) >= C' n_1 - o on solutions");
    b.put("o", hb.offset.clone(), Upper, "offset of the height lower bound");
    let (h_eta, log_eta) = eta_height(inst, prec);
    b.put("h(eta1)", h_eta.clone(), Upper, "height of a_1 u/(b_1 v)");
    let scale_alpha = lc.log_root_prime.div(&hb.slope);
    let c13 = b.put(
        "C13",
        (&scale_alpha * &(&h_eta + &hb.offset)).div(&log_nmin),
        Upper,
        "base case with Lambda = 0: the height of a_1u/(b_1v) caps n_1",
    );

    let hp_alpha = modified_height(&lc.height_root, &lc.log_root, d);
    let hp_beta = modified_height(&rc.height_root, &rc.log_root, d);
    let hp_eta = modified_height(&h_eta, &log_eta, d);
    b.put("h'(alpha)", hp_alpha.clone(), Upper, "modified height of the dominant root alpha");
    b.put("h'(beta)", hp_beta.clone(), Upper, "modified height of the dominant root beta");
    b.put("h'(eta1)", hp_eta.clone(), Upper, "modified height of a_1u/(b_1v)");
    let bw3 = b.put("C(3,D)", bw_constant(3, d as u32, prec), Upper, "Baker-Wuestholz constant for three logarithms");
    let c14 = b.put(
        "C14",
        &log_plus(&c11.mul_i64(2)).div(&log_nmin) + &(&(&(&bw3 * &hp_eta) * &(&hp_alpha * &hp_beta)) * &r_factor),
        Upper,
        "base case via Baker-Wuestholz with log L <= log n_1 + log+ R",
    );
    let c15 = b.put("C15", c12.max(&c13).max(&c14), Upper, "maximum of the three base case branches");

    b.put("C20", c20_max.clone(), Upper, "induction step: max over (K,L) of the large-term constant");
    let c21 = b.put(
        "C21",
        log_plus(&c20_max.div(&min_phi)).div(&log_nmin),
        Upper,
        "induction step with |Lambda| > 1/2 or a negative ratio",
    );

    let h_uv = uv_height(inst, prec);
    let h_ratio = lc.height_root.div(&lc.log_root_prime).max(&rc.height_root.div(&rc.log_root_prime));
    let consts = &h_uv
        + &(&(&log_plus(&lc.a) + &log_plus(&rc.a)) + &one).mul_i64(3);
    let d_inv = CertifiedReal::from_i64(1, prec).div_i64(d as i64);
    let step = StepData {
        h_ratio,
        cell_consts: consts,
        d_inv: d_inv.clone(),
        scale_alpha: scale_alpha.clone(),
        offset: hb.offset.clone(),
        log_nmin: log_nmin.clone(),
        bw_heights: &bw3 * &(&hp_alpha * &hp_beta),
        r_factor: r_factor.clone(),
        c20_max: c20_max.clone(),
        c15: c15.clone(),
        c21: c21.clone(),
    };
    let floor = CertifiedReal::from_i64(C_FLOOR, prec);
    let c0 = c15.max(&c21).max(&step.lambda0(&floor)).max(&floor).upper();
    let c24_0 = step.c24(&c0);
    let c = c0.max(&c24_0).upper();
    let c22 = b.put(
        "C22",
        step.c22(&c),
        Upper,
        "cell height: h(eta) <= C22 (C log n_1)^{m-4}, gap heights summed geometrically plus coefficient terms",
    );
    b.put("C22'", c22.max(&d_inv), Upper, "max{C22, 1/D} bounds the modified height of the cell value");
    b.put(
        "Lambda0",
        step.lambda0(&c),
        Upper,
        "induction step with Lambda = 0: the cell height caps n_1",
    );
    b.put(
        "C23",
        &(&bw3 * &(&hp_alpha * &hp_beta)) * &c22.max(&d_inv),
        Upper,
        "C(3,D) h'(alpha) h'(beta) C22'",
    );
    b.put("C24", step.c24(&c), Upper, "induction step via Baker-Wuestholz, decreasing in C");
    b.put("C", c.clone(), Upper, "max of C15, C21, the Lambda = 0 term, C24 and 92");

    Ok(BoundChain {
        entries: b.entries,
        left: lc,
        right: rc,
        n_min,
        field_degree: d,
        large_term: large,
        height_bound: hb,
        c,
        step,
        k: inst.k(),
        l: inst.l(),
    })
}

/// The C-dependent part of the induction step.
#[derive(Clone, Debug)]
pub struct StepData {
    /// max{h(α)/log α′, h(β)/log β′}.
    pub h_ratio: CertifiedReal,
    /// h(u/v) + 3(log⁺A + log⁺B + 1).
    pub cell_consts: CertifiedReal,
    pub d_inv: CertifiedReal,
    pub scale_alpha: CertifiedReal,
    pub offset: CertifiedReal,
    pub log_nmin: CertifiedReal,
    /// C(3,D)·h′(α)·h′(β).
    pub bw_heights: CertifiedReal,
    pub r_factor: CertifiedReal,
    pub c20_max: CertifiedReal,
    pub c15: CertifiedReal,
    pub c21: CertifiedReal,
}

impl StepData {
    /// Gaps of the earlier levels are at most (C log n_1)^j/log α′ for j = 1, …, m−4;
    /// their heights sum geometrically.
    pub fn c22(&self, c: &CertifiedReal) -> CertifiedReal {
        let one = CertifiedReal::one(c.prec());
        let x0 = c * &self.log_nmin;
        (&(&self.h_ratio * &x0.div(&(&x0 - &one))) + &self.cell_consts.div(&x0)).upper()
    }

    pub fn lambda0(&self, c: &CertifiedReal) -> CertifiedReal {
        (&self.scale_alpha * &(&self.c22(c) + &self.offset)).div(&self.log_nmin).upper()
    }

    pub fn c24(&self, c: &CertifiedReal) -> CertifiedReal {
        let c23 = &self.bw_heights * &self.c22(c).max(&self.d_inv);
        let x0 = c * &self.log_nmin;
        (&(&c23 * &self.r_factor) + &log_plus(&self.c20_max.mul_i64(2)).div(&(&x0 * &self.log_nmin))).upper()
    }

    /// Whether `c` satisfies every requirement of the base case and the induction step.
    pub fn accepts(&self, c: &CertifiedReal) -> bool {
        let floor = CertifiedReal::from_i64(C_FLOOR, c.prec());
        let need = self.c15.max(&self.c21).max(&self.lambda0(c)).max(&self.c24(c)).max(&floor);
        need.le(c)
    }
}

/// One inequality of the level induction: min ≤ (C log n_1)^{m−3} and max ≤ (C log n_1)^{m−4}.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelBound {
    pub m: usize,
    pub pair: (usize, usize),
    pub min_exponent: usize,
    pub max_exponent: usize,
}

impl LevelBound {
    pub fn min_bound(&self, c: f64, n1: f64) -> f64 {
        (c * n1.ln()).powi(self.min_exponent as i32)
    }

    pub fn max_bound(&self, c: f64, n1: f64) -> f64 {
        (c * n1.ln()).powi(self.max_exponent as i32)
    }
}

/// All level inequalities for pairs 2 ≤ K ≤ k+1, 2 ≤ L ≤ ℓ+1.
pub fn level_bounds(k: usize, l: usize) -> Vec<LevelBound> {
    let mut out = Vec::new();
    for m in 4..=k + l + 2 {
        for big_k in 2..=k + 1 {
            let big_l = m - big_k;
            if (2..=l + 1).contains(&big_l) {
                out.push(LevelBound { m, pair: (big_k, big_l), min_exponent: m - 3, max_exponent: m - 4 });
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct Finiteness {
    /// n_1 ≤ v0·(C log n_1)^h + u0.
    pub u0: CertifiedReal,
    pub v0: CertifiedReal,
    pub exponent: usize,
    pub n1_bound: CertifiedReal,
    /// Bound for max{n_1, m_1}.
    pub n: CertifiedReal,
}

pub fn finiteness_bound(chain: &BoundChain) -> Result<Finiteness, ChainError> {
    let (lc, rc) = (&chain.left, &chain.right);
    let p = chain.c.prec();
    let one = CertifiedReal::one(p);
    let h = chain.k + chain.l - 1;
    let c6 = chain.get("C6").unwrap();
    let r = chain.get("R").unwrap();
    let v0 = one
        .div(&lc.log_root_prime)
        .max(&rc.log_root.div(&(&rc.log_root_prime * &lc.log_root)))
        .upper();
    let u0 = log_plus(c6).div(&lc.log_root).upper();
    let hv = CertifiedReal::from_i64(h as i64, p);
    let n1 = pdw_solve(&u0, &(&v0 * &chain.c.pow_u(h as u64)), &hv)?;
    let n = (&n1 * &r.max(&one)).upper();
    Ok(Finiteness { u0, v0, exponent: h, n1_bound: n1, n })
}

#[derive(Clone, Debug)]
pub struct StewartBound {
    pub m: usize,
    pub c_tilde: CertifiedReal,
    /// Upper bound for log n: (C̃·M·log M)^{M−1}.
    pub log_n_bound: CertifiedReal,
}

/// log n ≤ (C̃·M·log M)^{M−1} for numeration pairs with weights summing to M = k + ℓ.
pub fn stewart_bound(chain: &BoundChain, m: usize) -> Result<StewartBound, ChainError> {
    if !(chain.left.regular && chain.right.regular) {
        return Err(ChainError::Precondition("Stewart-type bound needs two numeration sides".into()));
    }
    if m < 2 {
        return Err(ChainError::Precondition("M must be at least 2".into()));
    }
    let fin = finiteness_bound(chain)?;
    let p = chain.c.prec();
    let one = CertifiedReal::one(p);
    let log_nmin = CertifiedReal::from_i64(chain.n_min as i64, p).ln();
    let c_adj = &chain.c + &fin.u0.div(&(&fin.v0 * &log_nmin));
    let lc = &c_adj.ln() + &log_plus(&fin.v0);
    let ln = |x: i64| CertifiedReal::from_i64(x, p).ln();
    let f2 = lc.div(&ln(2).mul_i64(2));
    let f3 = (&ln(2) + &lc).mul_i64(2).div(&ln(3).mul_i64(3));
    let f4 = (&ln(3) + &lc).mul_i64(3).div(&ln(4).mul_i64(4));
    let f5 = &one + &lc.div(&ln(5));
    let f = f2.max(&f3).max(&f4).max(&f5);
    let kappa = &chain.left.log_root + &log_plus(&chain.left.upper).div_i64(chain.n_min as i64);
    let scale = (&kappa * &fin.v0).max(&one);
    let second_branch = CertifiedReal::e(p).sqr().mul_i64(4).div(&ln(2).mul_i64(2));
    let c_tilde = (&scale * &(&c_adj.mul_i64(2) * &f).max(&second_branch)).upper();
    let mm = CertifiedReal::from_i64(m as i64, p);
    let log_n_bound = (&(&c_tilde * &mm) * &mm.ln()).pow_u(m as u64 - 1).upper();
    Ok(StewartBound { m, c_tilde, log_n_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeckendorf_binary_chain() {
        let inst = ProblemInstance::zeckendorf_binary(2, 1).unwrap();
        let chain = derive_chain(&inst).unwrap();
        let c = chain.c.to_f64();
        assert!(c > 1e13 && c <= 4.17e13 * 1.05, "C = {c}");
        assert!(chain.get("C5").unwrap().lt(chain.get("C6").unwrap()));
        assert!(chain.get("C7").unwrap().lt(chain.get("C8").unwrap()));
        for e in &chain.entries {
            assert!(!e.value.is_negative(), "{} negative", e.name);
        }
        assert!(chain.step.accepts(&chain.c));
        assert!(chain.step.accepts(&CertifiedReal::from_f64(4.17e13, 256)));
        assert!(!chain.step.accepts(&CertifiedReal::from_f64(1e13, 256)));
    }

    #[test]
    fn growth_relation_matches_closed_forms() {
        let inst = ProblemInstance::zeckendorf_binary(4, 1).unwrap();
        let g = derive_growth_constants(&inst).unwrap();
        let c8 = g.iter().find(|e| e.name == "C8").unwrap().value.to_f64();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(c8 >= 2f64.ln() / phi.ln());
    }

    #[test]
    fn level_pairs() {
        let lv = level_bounds(2, 1);
        assert_eq!(lv.len(), 2);
        assert_eq!(lv[0].pair, (2, 2));
        assert_eq!(lv[1].pair, (3, 2));
        assert_eq!(lv[1].min_exponent, 2);
        assert_eq!(level_bounds(2, 2).len(), 4);
    }

    #[test]
    fn finiteness_and_stewart() {
        let chain = derive_chain(&ProblemInstance::zeckendorf_binary(4, 1).unwrap()).unwrap();
        let f = finiteness_bound(&chain).unwrap();
        let n = f.n.to_f64();
        assert!(n > 1e60 && n < 1e67, "N = {n:e}");
        let st = stewart_bound(&chain, 5).unwrap();
        let ct = st.c_tilde.to_f64();
        assert!(ct <= 8.23e15 * 1.05, "C~ = {ct:e}");
        let small = finiteness_bound(&derive_chain(&ProblemInstance::zeckendorf_binary(3, 1).unwrap()).unwrap()).unwrap();
        assert!(small.n.le(&f.n));
    }

    #[test]
    fn dependent_roots_rejected() {
        let r = ProblemInstance::new(
            SideSpec::from_i64(LinearRecurrence::powers_of(2), &[1]).unwrap(),
            SideSpec::from_i64(LinearRecurrence::powers_of(8), &[1]).unwrap(),
            ChainPolicy::default(),
        );
        assert!(matches!(r, Err(ChainError::Dependent(_))));
    }
}
