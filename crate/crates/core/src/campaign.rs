//! The inductive reduction driver: per-pair gap bounds, cell grids of
//! exponent gaps, Baker–Davenport per cell with a Legendre fallback, and
//! checkpointed, resumable execution.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::Instant;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebraic::{FieldElem, NumberField};
use crate::chain::{side_error_coefficient, BoundChain, ProblemInstance};
use crate::heights::log_plus;
use crate::interval::CertifiedReal;
use crate::par;
use crate::reduction::{
    bd_reduce_with, cf_expand, detect_dependence, legendre_reduce, CfNeed, ContinuedFraction, Method, ReductionError,
    ReductionProblem, Relation, RealSource, DEFAULT_CEILING, RETRY_BUDGET,
};

/// Bounds on max{n_1, m_1} at or below this go straight to enumeration.
pub const ENUMERATION_THRESHOLD: u64 = 1000;
pub const CHECKPOINT_VERSION: u32 = 1;
const POWER_TABLE: usize = 2048;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("checkpoint was written under a different policy (digest {found}, expected {expected})")]
    PolicyMismatch { found: String, expected: String },
    #[error("stopped after {0} cells as requested")]
    Interrupted(usize),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Precondition(String),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Slice {
    /// Level whose cells are sampled.
    pub level: usize,
    /// Keep cell i of each pair when i % modulus == 0.
    pub modulus: u64,
}

#[derive(Clone, Debug)]
pub struct CampaignPolicy {
    pub precision_ceiling: u32,
    pub dependence_height: i64,
    pub batch_size: usize,
    pub checkpoint: Option<PathBuf>,
    pub stop_after_cells: Option<usize>,
    pub slice: Option<Slice>,
    pub keep_trace: bool,
}

impl Default for CampaignPolicy {
    fn default() -> Self {
        CampaignPolicy {
            precision_ceiling: DEFAULT_CEILING,
            dependence_height: 200,
            batch_size: 4096,
            checkpoint: None,
            stop_after_cells: None,
            slice: None,
            keep_trace: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// K′ > k + 1: the left side is exhausted.
    One,
    /// L′ > ℓ + 1.
    Two,
    /// n_1 − n_{K′} achieved the minimum.
    ThreeA,
    /// m_1 − m_{L′} achieved the minimum.
    ThreeB,
}

/// Successor pairs of (K′, L′). In Case 3 both branches are returned, 3A first.
pub fn next_pairs(pair: (usize, usize), k: usize, l: usize) -> Vec<(Case, (usize, usize))> {
    let (kk, ll) = pair;
    if kk > k + 1 {
        vec![(Case::One, (kk + 1, ll))]
    } else if ll > l + 1 {
        vec![(Case::Two, (kk, ll + 1))]
    } else {
        vec![(Case::ThreeA, (kk + 1, ll)), (Case::ThreeB, (kk, ll + 1))]
    }
}

/// Inclusive bounds on the gaps n_1 − n_i (i = 2, …, K−1) and m_1 − m_j.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairState {
    pub pair: (usize, usize),
    pub n_caps: Vec<u64>,
    pub m_caps: Vec<u64>,
}

impl PairState {
    fn merge(&mut self, other: &PairState) {
        for (a, b) in self.n_caps.iter_mut().zip(&other.n_caps) {
            *a = (*a).max(*b);
        }
        for (a, b) in self.m_caps.iter_mut().zip(&other.m_caps) {
            *a = (*a).max(*b);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId {
    pub pair: (usize, usize),
    pub n_gaps: Vec<u64>,
    pub m_gaps: Vec<u64>,
}

impl CellId {
    pub fn label(&self) -> String {
        let j = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!("K{}L{}[{}|{}]", self.pair.0, self.pair.1, j(&self.n_gaps), j(&self.m_gaps))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub id: CellId,
    pub method: Method,
    /// min{n_1 − n_K, m_1 − m_L} ≤ bound; meaningless when `method` is Failed.
    pub bound: u64,
    pub q: String,
    pub detail: String,
}

/// Gap tuples 0 < r_1 < r_2 < … with r_{i+1} − r_i ≥ gap, r_1 ≥ gap and r_i ≤ caps[i],
/// in lexicographic order.
#[derive(Clone, Debug)]
pub struct GapTuples {
    caps: Vec<u64>,
    gap: u64,
    cur: Option<Vec<u64>>,
}

impl GapTuples {
    pub fn new(caps: &[u64], gap: u64) -> Self {
        let gap = gap.max(1);
        let mut it = GapTuples { caps: caps.to_vec(), gap, cur: None };
        let mut first = Vec::with_capacity(caps.len());
        it.cur = it.fill(&mut first, 0).then_some(first);
        it
    }

    /// Extends `t` minimally from position `from`; false if a cap is violated.
    fn fill(&self, t: &mut Vec<u64>, from: usize) -> bool {
        t.truncate(from);
        for i in from..self.caps.len() {
            let v = if i == 0 { self.gap } else { t[i - 1] + self.gap };
            if v > self.caps[i] {
                return false;
            }
            t.push(v);
        }
        true
    }
}

impl Iterator for GapTuples {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.cur.take()?;
        let mut t = out.clone();
        for j in (0..t.len()).rev() {
            if t[j] < self.caps[j] {
                t[j] += 1;
                if self.fill(&mut t, j + 1) {
                    self.cur = Some(t);
                    break;
                }
                t = out.clone();
            }
        }
        Some(out)
    }
}

/// All cells of a pair in deterministic order.
pub fn cells_of(state: &PairState, n_gap: u64, m_gap: u64) -> impl Iterator<Item = CellId> + '_ {
    let m_all: Vec<Vec<u64>> = GapTuples::new(&state.m_caps, m_gap).collect();
    GapTuples::new(&state.n_caps, n_gap).flat_map(move |n| {
        let pair = state.pair;
        m_all.clone().into_iter().map(move |m| CellId { pair, n_gaps: n.clone(), m_gaps: m })
    })
}

/// An enclosure computed on demand and reused at any lower precision.
struct Cached {
    slot: RwLock<Option<CertifiedReal>>,
    compute: Box<dyn Fn(u32) -> CertifiedReal + Send + Sync>,
}

impl Cached {
    fn new(f: impl Fn(u32) -> CertifiedReal + Send + Sync + 'static) -> Self {
        Cached { slot: RwLock::new(None), compute: Box::new(f) }
    }

    fn get(&self, bits: u32) -> CertifiedReal {
        if let Some(v) = self.slot.read().unwrap().as_ref() {
            if v.prec() >= bits {
                return v.with_prec(bits);
            }
        }
        let v = (self.compute)(bits.max(64) + 32);
        let out = v.with_prec(bits);
        *self.slot.write().unwrap() = Some(v);
        out
    }
}

struct Side {
    coeffs: Vec<Integer>,
    inv_root: Cached,
    abs_u: Cached,
    table: Vec<CertifiedReal>,
    table_prec: u32,
    field: Arc<NumberField>,
    u_exact: FieldElem,
    rational_root: Option<Rational>,
}

impl Side {
    fn new(inst_side: &crate::dominance::SideSpec, sp: &crate::recurrence::SpectralData, table_prec: u32) -> Self {
        let root = sp.dominant_root.clone();
        let r2 = root.clone();
        let field = sp.field.clone();
        let u = sp.u_exact.clone();
        let (f2, u2) = (field.clone(), u.clone());
        let inv_root = Cached::new(move |b| r2.real_value(b).abs().recip());
        let abs_u = Cached::new(move |b| f2.real_value(&u2, b).abs());
        let base = inv_root.get(table_prec);
        let mut table = Vec::with_capacity(POWER_TABLE);
        let mut acc = CertifiedReal::one(table_prec);
        for _ in 0..POWER_TABLE {
            table.push(acc.clone());
            acc = &acc * &base;
        }
        Side {
            coeffs: inst_side.coefficients.clone(),
            inv_root,
            abs_u,
            table,
            table_prec,
            field,
            u_exact: u,
            rational_root: root.as_rational(),
        }
    }

    fn inv_pow(&self, j: u64, bits: u32) -> CertifiedReal {
        if bits <= self.table_prec && (j as usize) < self.table.len() {
            return self.table[j as usize].with_prec(bits);
        }
        self.inv_root.get(bits + 16).pow_u(j)
    }

    /// |u·(c_1 + c_2 root^{−g_2} + …)| for the first `count` coefficients.
    fn value(&self, gaps: &[u64], bits: u32) -> CertifiedReal {
        let p = bits + 16;
        let mut s = CertifiedReal::from_integer(&self.coeffs[0], p);
        for (c, g) in self.coeffs[1..].iter().zip(gaps) {
            s = &s + &(&CertifiedReal::from_integer(c, p) * &self.inv_pow(*g, p));
        }
        &s.abs() * &self.abs_u.get(p)
    }

    /// u·(c_1 + Σ c_i θ^{−g_i}) in the side's field.
    fn exact(&self, gaps: &[u64]) -> Option<FieldElem> {
        let f = &self.field;
        let mut s = f.from_int(&self.coeffs[0]);
        for (c, g) in self.coeffs[1..].iter().zip(gaps) {
            let t = f.pow(&f.gen(), -(*g as i64))?;
            s = f.add(&s, &f.scale(&t, &Rational::from(c.clone())));
        }
        Some(f.mul(&s, &self.u_exact))
    }
}

#[derive(Clone, Debug)]
struct PairConsts {
    a: CertifiedReal,
    base: CertifiedReal,
    large_phi: u64,
    left_active: bool,
    right_active: bool,
}

/// Everything a worker needs to reduce one cell.
pub struct CellContext {
    left: Side,
    right: Side,
    log_beta: Cached,
    tau: Cached,
    pairs: BTreeMap<(usize, usize), PairConsts>,
    pub n1_bound: Integer,
    cf: RwLock<ContinuedFraction>,
    ceiling: u32,
    dependence_height: i64,
}

struct TauSource<'a>(&'a CellContext);

impl RealSource for TauSource<'_> {
    fn eval(&self, bits: u32) -> CertifiedReal {
        self.0.tau.get(bits)
    }
}

pub struct MuSource<'a> {
    ctx: &'a CellContext,
    id: CellId,
}

impl RealSource for MuSource<'_> {
    fn eval(&self, bits: u32) -> CertifiedReal {
        let c = self.ctx;
        let p = bits + 16;
        let k = self.id.pair.0 - 1;
        let l = self.id.pair.1 - 1;
        let num = c.left.value(&self.id.n_gaps[..k - 1], p);
        let den = c.right.value(&self.id.m_gaps[..l - 1], p);
        num.div(&den).ln().div(&c.log_beta.get(p)).with_prec(bits)
    }
}

impl CellContext {
    pub fn new(inst: &ProblemInstance, chain: &BoundChain, n1_bound: &Integer, policy: &CampaignPolicy) -> Result<Self, CampaignError> {
        let table_prec = 3 * (n1_bound.significant_bits() + 8) + 256;
        let left = Side::new(&inst.left, &inst.left_spectral, table_prec);
        let right = Side::new(&inst.right, &inst.right_spectral, table_prec);
        let (ra, rb) = (inst.left_spectral.dominant_root.clone(), inst.right_spectral.dominant_root.clone());
        let rb2 = rb.clone();
        let log_beta = Cached::new(move |b| rb2.real_value(b).abs().ln());
        let tau = Cached::new(move |b| ra.real_value(b).abs().ln().div(&rb.real_value(b).abs().ln()));
        if !log_beta.get(64).is_positive() {
            return Err(CampaignError::Precondition("|beta| must exceed 1".into()));
        }

        let p = chain.c.prec();
        let c6 = chain.get("C6").expect("chain has C6").clone();
        let vc2 = (&chain.right.u.abs() * &chain.right.c2).lower();
        let two = CertifiedReal::from_i64(2, p);
        let lb = log_beta.get(p).lower();
        let mut pairs = BTreeMap::new();
        for kk in 2..=inst.k() + 1 {
            for ll in 2..=inst.l() + 1 {
                let cu = (&c6 * &side_error_coefficient(&chain.left, kk)).div(&vc2).upper();
                let cv = side_error_coefficient(&chain.right, ll).div(&vc2).upper();
                let (la, ra) = (!cu.hi().is_zero(), !cv.hi().is_zero());
                let base = match (la, ra) {
                    (true, true) => chain.left.root_prime.min(&chain.right.root_prime),
                    (true, false) => chain.left.root_prime.clone(),
                    (false, true) => chain.right.root_prime.clone(),
                    (false, false) => return Err(CampaignError::Precondition(format!("no error term for pair ({kk},{ll})"))),
                }
                .lower();
                let c20 = (&cu + &cv).upper();
                let large = log_plus(&(&two * &c20)).div(&base.ln()).floor_hi().unwrap_or_default();
                pairs.insert(
                    (kk, ll),
                    PairConsts {
                        a: (&two * &c20).div(&lb).upper(),
                        base,
                        large_phi: large.to_u64().unwrap_or(u64::MAX),
                        left_active: la,
                        right_active: ra,
                    },
                );
            }
        }

        let ctx = CellContext {
            left,
            right,
            log_beta,
            tau,
            pairs,
            n1_bound: n1_bound.clone(),
            cf: RwLock::new(ContinuedFraction::empty()),
            ceiling: policy.precision_ceiling,
            dependence_height: policy.dependence_height,
        };
        let need = CfNeed::QAbove(ctx.legendre_reach(), RETRY_BUDGET + 2);
        let cf = cf_expand(&TauSource(&ctx), &need, ctx.ceiling)
            .map_err(|e| CampaignError::Precondition(format!("continued fraction of tau: {e}")))?;
        *ctx.cf.write().unwrap() = cf;
        Ok(ctx)
    }

    /// Largest N′ = |c|N + |a| a relation of the configured height can produce.
    fn legendre_reach(&self) -> Integer {
        let h = self.dependence_height.max(6) as u64;
        Integer::from(&self.n1_bound * h) + h
    }

    pub fn tau(&self) -> impl RealSource + '_ {
        TauSource(self)
    }

    pub fn mu(&self, id: &CellId) -> MuSource<'_> {
        MuSource { ctx: self, id: id.clone() }
    }

    pub fn continued_fraction(&self) -> ContinuedFraction {
        self.cf.read().unwrap().clone()
    }

    /// (A, B) of |n_1τ − m_1 + μ| < A·B^{−min} for a pair.
    pub fn pair_constants(&self, pair: (usize, usize)) -> Option<(CertifiedReal, CertifiedReal)> {
        self.pairs.get(&pair).map(|c| (c.a.clone(), c.base.clone()))
    }

    fn sides_active(&self, pair: (usize, usize)) -> (bool, bool) {
        self.pairs.get(&pair).map_or((false, false), |c| (c.left_active, c.right_active))
    }

    /// Exact test of |α|^a|β|^b|η|^c = 1 when one side lives in ℚ.
    fn exact_relation(&self, id: &CellId, r: &Relation) -> Option<bool> {
        let (k, l) = (id.pair.0 - 1, id.pair.1 - 1);
        let (big, small, a_big, a_small, gb, gs, sign_big) = if self.right.rational_root.is_some() && self.right.field.degree() == 1 {
            (&self.left, &self.right, r.a, r.b, &id.n_gaps[..k - 1], &id.m_gaps[..l - 1], 1i64)
        } else if self.left.rational_root.is_some() && self.left.field.degree() == 1 {
            (&self.right, &self.left, r.b, r.a, &id.m_gaps[..l - 1], &id.n_gaps[..k - 1], -1i64)
        } else {
            return None;
        };
        let f = &big.field;
        let eta_big = big.exact(gb)?;
        let eta_small = small.exact(gs)?.as_rational()?;
        let root_small = small.rational_root.clone()?;
        // η = η_big/η_small when the big side is on the left, η_small/η_big otherwise.
        let c = r.c * sign_big;
        let mut x = f.pow(&f.gen(), a_big)?;
        x = f.mul(&x, &f.pow(&eta_big, c)?);
        let mut q = pow_rational(&root_small, a_small)?;
        q *= pow_rational(&eta_small, -c)?;
        x = f.scale(&x, &q);
        let one = f.one();
        Some(x == one || x == f.neg(&one))
    }

    pub fn reduce_cell(&self, id: &CellId) -> CellOutcome {
        let pc = &self.pairs[&id.pair];
        let mu = self.mu(id);
        let tau = self.tau();
        let prob = ReductionProblem {
            tau: &tau,
            mu: &mu,
            a: pc.a.clone(),
            b: pc.base.clone(),
            m: self.n1_bound.clone(),
            ceiling: self.ceiling,
        };
        let cf = self.cf.read().unwrap().clone();
        let failed = |detail: String| CellOutcome { id: id.clone(), method: Method::Failed, bound: 0, q: "-".into(), detail };
        let to_u64 = |x: &Integer| x.to_u64().unwrap_or(u64::MAX);
        match bd_reduce_with(&prob, &cf) {
            Ok(out) => CellOutcome {
                id: id.clone(),
                method: Method::BakerDavenport,
                bound: to_u64(&out.new_k_bound).max(pc.large_phi),
                q: out.q_used.to_string(),
                detail: format!("eps>{}", out.epsilon.as_ref().map_or("-".into(), |e| e.lower_decimal(6))),
            },
            Err(ReductionError::DependenceSuspected { .. }) => {
                let exact = |r: &Relation| self.exact_relation(id, r).unwrap_or(true);
                let Some(rel) = detect_dependence(&tau, &mu, self.dependence_height, Some(&exact)) else {
                    return failed("epsilon never positive and no relation found".into());
                };
                let n_prime = Integer::from(&self.n1_bound * rel.c.unsigned_abs()) + rel.a.unsigned_abs();
                let cf = if cf.last_at_most(&n_prime).is_some_and(|j| j + 1 < cf.len()) {
                    cf
                } else {
                    match cf_expand(&tau, &CfNeed::QAbove(n_prime, 2), self.ceiling) {
                        Ok(c) => c,
                        Err(e) => return failed(e.to_string()),
                    }
                };
                match legendre_reduce(&cf, &rel, &pc.a, &pc.base, &self.n1_bound) {
                    // Λ = 0 forces n_1 = a/c, so |a| also bounds the gap.
                    Ok(out) => CellOutcome {
                        id: id.clone(),
                        method: Method::Legendre,
                        bound: to_u64(&out.new_k_bound).max(pc.large_phi).max(rel.a.unsigned_abs()),
                        q: out.q_used.to_string(),
                        detail: format!("S={} rel=({},{},{})", out.s.unwrap_or_default(), rel.a, rel.b, rel.c),
                    },
                    Err(e) => failed(e.to_string()),
                }
            }
            Err(e) => failed(e.to_string()),
        }
    }
}

fn pow_rational(x: &Rational, e: i64) -> Option<Rational> {
    if *x == 0 {
        return (e > 0).then(Rational::new);
    }
    let b = if e < 0 { x.clone().recip() } else { x.clone() };
    let mut out = Rational::from(1);
    for _ in 0..e.unsigned_abs() {
        out *= &b;
    }
    Some(out)
}

impl ContinuedFraction {
    fn empty() -> Self {
        ContinuedFraction { quotients: vec![], p: vec![], q: vec![], terminated: false, bits: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub pair: (usize, usize),
    pub n_caps: Vec<u64>,
    pub m_caps: Vec<u64>,
    pub cells: u64,
    pub bound: u64,
    pub baker_davenport: u64,
    pub legendre: u64,
    pub failed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub m: usize,
    pub pairs: Vec<PairReport>,
    pub bound: u64,
}

/// A path that exhausted one side: n_1 ≤ bound (left) or m_1 ≤ bound (right).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Terminal {
    pub pair: (usize, usize),
    pub case: Case,
    pub bound: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignResult {
    pub start_n1: String,
    pub final_n1: u64,
    pub final_m1: u64,
    pub levels: Vec<LevelReport>,
    pub terminals: Vec<Terminal>,
    pub exceptions: Vec<CellOutcome>,
    pub short_circuit: bool,
    pub sliced: bool,
    pub replayed: bool,
    pub cells_computed: u64,
    pub cells_reused: u64,
    pub seconds: f64,
    #[serde(skip)]
    pub trace: Vec<CellOutcome>,
}

impl CampaignResult {
    pub fn final_bound(&self) -> u64 {
        self.final_n1.max(self.final_m1)
    }

    /// The result holds only if the failed cells have no solutions, or covers a sample.
    pub fn conditional(&self) -> bool {
        !self.exceptions.is_empty() || self.sliced
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        s += &format!("start n1 bound: {}\n", self.start_n1);
        if self.short_circuit {
            s += "start bound below the enumeration threshold: no reduction\n";
        }
        for lv in &self.levels {
            s += &format!("level {}: B = {}\n", lv.m, lv.bound);
            for p in &lv.pairs {
                s += &format!(
                    "  (K,L)=({},{}) n_caps={:?} m_caps={:?} cells={} bound={} bd={} legendre={} failed={}\n",
                    p.pair.0, p.pair.1, p.n_caps, p.m_caps, p.cells, p.bound, p.baker_davenport, p.legendre, p.failed
                );
            }
        }
        for t in &self.terminals {
            let side = if t.case == Case::One { "n1" } else { "m1" };
            s += &format!("terminal ({},{}) {:?}: {side} <= {}\n", t.pair.0, t.pair.1, t.case, t.bound);
        }
        for e in &self.exceptions {
            s += &format!("unresolved cell {}: {}\n", e.id.label(), e.detail);
        }
        s += &format!("final: n1 <= {}, m1 <= {}\n", self.final_n1, self.final_m1);
        if self.sliced {
            s += "sampled run: bounds cover the sampled cells only\n";
        }
        s
    }

    /// Run statistics; these vary between fresh, resumed and replayed runs.
    pub fn stats(&self) -> String {
        format!("cells computed {}, reused {}, {:.1}s", self.cells_computed, self.cells_reused, self.seconds)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

/// Digest of everything that can change a cell outcome.
pub fn policy_digest(inst: &ProblemInstance, n1_bound: &Integer, policy: &CampaignPolicy) -> String {
    let side = |s: &crate::dominance::SideSpec| {
        format!("{}|{:?}|{}|{}", s.rec, s.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>(), s.regular, s.min_gap)
    };
    let text = format!(
        "v{CHECKPOINT_VERSION};L={};R={};N={};ceil={};H={};slice={:?};prec={};nmin={}",
        side(&inst.left),
        side(&inst.right),
        n1_bound,
        policy.precision_ceiling,
        policy.dependence_height,
        policy.slice,
        inst.policy.precision,
        inst.policy.n_min,
    );
    sha256_hex(text.as_bytes())
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    policy_digest: String,
}

#[derive(Serialize, Deserialize)]
struct Trailer {
    seq: u64,
    count: usize,
    digest: String,
}

#[derive(Serialize, Deserialize)]
struct FinalRecord {
    digest: String,
    result: CampaignResult,
}

/// Directory of atomically written segments: header.json, seg-NNNNNN.jsonl, final.json.
pub struct Checkpoint {
    dir: PathBuf,
    next_seq: u64,
    done: HashMap<CellId, CellOutcome>,
}

fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(data)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

impl Checkpoint {
    /// Opens or creates a checkpoint. Existing segments are verified and loaded.
    pub fn open(dir: &Path, digest: &str) -> Result<(Self, Option<CampaignResult>), CampaignError> {
        fs::create_dir_all(dir)?;
        let header = dir.join("header.json");
        if header.exists() {
            let h: Header = serde_json::from_slice(&fs::read(&header)?)
                .map_err(|e| CampaignError::CorruptCheckpoint(format!("header: {e}")))?;
            if h.version != CHECKPOINT_VERSION {
                return Err(CampaignError::CorruptCheckpoint(format!("unsupported version {}", h.version)));
            }
            if h.policy_digest != digest {
                return Err(CampaignError::PolicyMismatch { found: h.policy_digest, expected: digest.into() });
            }
        } else {
            let h = Header { version: CHECKPOINT_VERSION, policy_digest: digest.into() };
            write_atomic(&header, serde_json::to_string(&h).unwrap().as_bytes())?;
        }

        let mut segs: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("seg-") && n.ends_with(".jsonl")))
            .collect();
        segs.sort();
        let mut done = HashMap::new();
        for (i, path) in segs.iter().enumerate() {
            let text = fs::read_to_string(path)?;
            let lines: Vec<&str> = text.lines().collect();
            let bad = |m: &str| CampaignError::CorruptCheckpoint(format!("{}: {m}", path.display()));
            let (last, body) = lines.split_last().ok_or_else(|| bad("empty segment"))?;
            let t: Trailer = serde_json::from_str(last).map_err(|e| bad(&format!("trailer: {e}")))?;
            if t.seq != i as u64 + 1 {
                return Err(bad(&format!("sequence number {} where {} was expected", t.seq, i + 1)));
            }
            if t.count != body.len() || t.digest != sha256_hex(body.join("\n").as_bytes()) {
                return Err(bad("digest mismatch"));
            }
            for line in body {
                let c: CellOutcome = serde_json::from_str(line).map_err(|e| bad(&format!("record: {e}")))?;
                done.insert(c.id.clone(), c);
            }
        }

        let fin = dir.join("final.json");
        let result = if fin.exists() {
            let f: FinalRecord = serde_json::from_slice(&fs::read(&fin)?)
                .map_err(|e| CampaignError::CorruptCheckpoint(format!("final record: {e}")))?;
            let body = serde_json::to_string(&f.result).unwrap();
            if f.digest != sha256_hex(format!("{digest}{body}").as_bytes()) {
                return Err(CampaignError::CorruptCheckpoint("final record digest mismatch".into()));
            }
            Some(f.result)
        } else {
            None
        };
        Ok((Checkpoint { dir: dir.to_path_buf(), next_seq: segs.len() as u64 + 1, done }, result))
    }

    pub fn lookup(&self, id: &CellId) -> Option<&CellOutcome> {
        self.done.get(id)
    }

    pub fn completed_cells(&self) -> usize {
        self.done.len()
    }

    fn append(&mut self, outcomes: &[CellOutcome]) -> Result<(), CampaignError> {
        if outcomes.is_empty() {
            return Ok(());
        }
        let lines: Vec<String> = outcomes.iter().map(|c| serde_json::to_string(c).unwrap()).collect();
        let body = lines.join("\n");
        let t = Trailer { seq: self.next_seq, count: lines.len(), digest: sha256_hex(body.as_bytes()) };
        let data = format!("{body}\n{}\n", serde_json::to_string(&t).unwrap());
        write_atomic(&self.dir.join(format!("seg-{:06}.jsonl", self.next_seq)), data.as_bytes())?;
        self.next_seq += 1;
        for c in outcomes {
            self.done.insert(c.id.clone(), c.clone());
        }
        Ok(())
    }

    fn finish(&self, digest: &str, result: &CampaignResult) -> Result<(), CampaignError> {
        let body = serde_json::to_string(result).unwrap();
        let rec = FinalRecord { digest: sha256_hex(format!("{digest}{body}").as_bytes()), result: result.clone() };
        write_atomic(&self.dir.join("final.json"), serde_json::to_string(&rec).unwrap().as_bytes())?;
        Ok(())
    }
}

/// Upper bound for m_1 given n_1 ≤ x, from |α|^{n_1} ≥ C5|β|^{m_1}.
fn m1_from_n1(chain: &BoundChain, x: u64) -> u64 {
    let p = chain.c.prec();
    let c5 = chain.get("C5").expect("chain has C5");
    let v = (&(&CertifiedReal::from_integer(&Integer::from(x), p) * &chain.left.log_root) + &log_plus(&c5.recip()))
        .div(&chain.right.log_root);
    v.floor_hi().and_then(|f| f.to_u64()).unwrap_or(u64::MAX)
}

/// Upper bound for n_1 given m_1 ≤ y, from |α|^{n_1} ≤ C6|β|^{m_1}.
fn n1_from_m1(chain: &BoundChain, y: u64) -> u64 {
    let p = chain.c.prec();
    let c6 = chain.get("C6").expect("chain has C6");
    let v = (&(&CertifiedReal::from_integer(&Integer::from(y), p) * &chain.right.log_root) + &log_plus(c6))
        .div(&chain.left.log_root);
    v.floor_hi().and_then(|f| f.to_u64()).unwrap_or(u64::MAX)
}

pub fn run_campaign(
    inst: &ProblemInstance,
    chain: &BoundChain,
    n1_bound: &Integer,
    policy: &CampaignPolicy,
) -> Result<CampaignResult, CampaignError> {
    let start = Instant::now();
    let digest = policy_digest(inst, n1_bound, policy);
    let (mut ckpt, recorded) = match &policy.checkpoint {
        Some(dir) => {
            let (c, r) = Checkpoint::open(dir, &digest)?;
            (Some(c), r)
        }
        None => (None, None),
    };
    if let Some(mut r) = recorded {
        r.replayed = true;
        return Ok(r);
    }

    let (k, l) = (inst.k(), inst.l());
    let n_min = chain.n_min;
    let n1_cap = n1_bound.to_u64().unwrap_or(u64::MAX);
    let m1_cap = m1_from_n1(chain, n1_cap);
    let mut result = CampaignResult {
        start_n1: n1_bound.to_string(),
        final_n1: n1_cap.max(n_min),
        final_m1: m1_cap.max(n_min),
        levels: vec![],
        terminals: vec![],
        exceptions: vec![],
        short_circuit: false,
        sliced: policy.slice.is_some(),
        replayed: false,
        cells_computed: 0,
        cells_reused: 0,
        seconds: 0.0,
        trace: vec![],
    };
    if result.final_bound() <= ENUMERATION_THRESHOLD {
        result.short_circuit = true;
        result.sliced = false;
        result.seconds = start.elapsed().as_secs_f64();
        return Ok(result);
    }

    let ctx = CellContext::new(inst, chain, n1_bound, policy)?;
    let (g_u, g_v) = (inst.left.min_gap.max(1), inst.right.min_gap.max(1));
    let mut states: BTreeMap<(usize, usize), PairState> = BTreeMap::new();
    states.insert((2, 2), PairState { pair: (2, 2), n_caps: vec![], m_caps: vec![] });
    let mut level = 4;
    let mut computed_since_start = 0usize;

    while !states.is_empty() {
        let mut next: BTreeMap<(usize, usize), PairState> = BTreeMap::new();
        let mut report = LevelReport { m: level, pairs: vec![], bound: 0 };
        for (pair, st) in &states {
            if pair.0 > k + 1 || pair.1 > l + 1 {
                let (case, bound) = if pair.0 > k + 1 {
                    (Case::One, st.n_caps[k - 1])
                } else {
                    (Case::Two, st.m_caps[l - 1])
                };
                result.terminals.push(Terminal { pair: *pair, case, bound });
                continue;
            }
            let mut pr = PairReport {
                pair: *pair,
                n_caps: st.n_caps.clone(),
                m_caps: st.m_caps.clone(),
                cells: 0,
                bound: 0,
                baker_davenport: 0,
                legendre: 0,
                failed: 0,
            };
            let sample = policy.slice.as_ref().filter(|s| s.level == level).map(|s| s.modulus.max(1));
            let mut cells = cells_of(st, g_u, g_v)
                .enumerate()
                .filter(|(i, _)| sample.is_none_or(|m| *i as u64 % m == 0))
                .map(|(_, c)| c)
                .peekable();
            while cells.peek().is_some() {
                let batch: Vec<CellId> = cells.by_ref().take(policy.batch_size.max(1)).collect();
                let mut fresh = Vec::new();
                let outcomes: Vec<CellOutcome> = {
                    let known: Vec<Option<CellOutcome>> =
                        batch.iter().map(|c| ckpt.as_ref().and_then(|k| k.lookup(c).cloned())).collect();
                    let todo: Vec<&CellId> = batch.iter().zip(&known).filter(|(_, k)| k.is_none()).map(|(c, _)| c).collect();
                    let mut computed = par::map(&todo, |c| ctx.reduce_cell(c)).into_iter();
                    known
                        .into_iter()
                        .map(|k| match k {
                            Some(o) => {
                                result.cells_reused += 1;
                                o
                            }
                            None => {
                                let o = computed.next().expect("one outcome per pending cell");
                                fresh.push(o.clone());
                                o
                            }
                        })
                        .collect()
                };
                result.cells_computed += fresh.len() as u64;
                computed_since_start += fresh.len();
                if let Some(c) = ckpt.as_mut() {
                    c.append(&fresh)?;
                }
                for o in &outcomes {
                    pr.cells += 1;
                    match o.method {
                        Method::BakerDavenport => pr.baker_davenport += 1,
                        Method::Legendre => pr.legendre += 1,
                        Method::Failed => {
                            pr.failed += 1;
                            result.exceptions.push(o.clone());
                            continue;
                        }
                    }
                    pr.bound = pr.bound.max(o.bound);
                }
                if policy.keep_trace {
                    result.trace.extend(outcomes);
                }
                if policy.stop_after_cells.is_some_and(|s| computed_since_start >= s) {
                    return Err(CampaignError::Interrupted(computed_since_start));
                }
            }
            // Gap bounds never exceed the starting bound on n_1 (resp. m_1).
            let (la, ra) = ctx.sides_active(*pair);
            report.bound = report.bound.max(pr.bound);
            let b = pr.bound;
            for (case, to) in next_pairs(*pair, k, l) {
                let mut s = PairState { pair: to, n_caps: st.n_caps.clone(), m_caps: st.m_caps.clone() };
                match case {
                    Case::ThreeA if la => s.n_caps.push(b.min(n1_cap)),
                    Case::ThreeB if ra => s.m_caps.push(b.min(m1_cap)),
                    _ => continue,
                }
                next.entry(to).and_modify(|e| e.merge(&s)).or_insert(s);
            }
            report.pairs.push(pr);
        }
        if !report.pairs.is_empty() {
            result.levels.push(report);
        }
        states = next;
        level += 1;
    }

    let mut n1 = n_min;
    let mut m1 = n_min;
    for t in &result.terminals {
        match t.case {
            Case::One => {
                let x = t.bound.max(n_min);
                n1 = n1.max(x);
                m1 = m1.max(m1_from_n1(chain, x));
            }
            _ => {
                let y = t.bound.max(n_min);
                m1 = m1.max(y);
                n1 = n1.max(n1_from_m1(chain, y));
            }
        }
    }
    result.final_n1 = n1.min(result.final_n1);
    result.final_m1 = m1.min(result.final_m1);
    result.seconds = start.elapsed().as_secs_f64();
    if let Some(c) = &ckpt {
        c.finish(&digest, &result)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_tuples_respect_caps_and_gaps() {
        let all: Vec<Vec<u64>> = GapTuples::new(&[4, 7], 2).collect();
        let mut expect = vec![];
        for r in 2..=4 {
            for s in r + 2..=7 {
                expect.push(vec![r, s]);
            }
        }
        assert_eq!(all, expect);
        assert_eq!(GapTuples::new(&[], 2).collect::<Vec<_>>(), vec![Vec::<u64>::new()]);
        assert_eq!(GapTuples::new(&[1], 2).count(), 0);
        let brute = (1..=10u64).flat_map(|r| (r + 1..=3).flat_map(move |s| (s + 1..=20u64).map(move |t| (r, s, t)))).count();
        assert_eq!(GapTuples::new(&[10, 3, 20], 1).count(), brute);
    }

    #[test]
    fn transitions() {
        assert_eq!(next_pairs((2, 2), 3, 1), vec![(Case::ThreeA, (3, 2)), (Case::ThreeB, (2, 3))]);
        assert_eq!(next_pairs((5, 2), 3, 1), vec![(Case::One, (6, 2))]);
        assert_eq!(next_pairs((2, 4), 3, 2), vec![(Case::Two, (2, 5))]);
    }
}
