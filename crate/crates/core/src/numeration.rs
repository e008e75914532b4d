//! Numeration systems G_k, greedy expansions, Hamming weights and the final
//! solution sweeps.

use std::collections::{BTreeSet, HashMap};
use std::sync::RwLock;

use rug::Integer;
use thiserror::Error;

use crate::dominance::SideSpec;
use crate::par;
use crate::recurrence::LinearRecurrence;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumerationError {
    #[error("base coefficients must be non-negative")]
    NegativeCoefficient,
    #[error("base condition fails at index {0}: need G_0 = 1 and G_k = c_1G_(k-1)+...+c_kG_0+1")]
    BaseCondition(usize),
    #[error("sweep needs about {0:.3e} exponent tuples, above the limit {1}")]
    TooManyTuples(f64, u64),
}

/// A numeration system whose base sequence is a linear recurrence.
#[derive(Debug)]
pub struct NumerationSystem {
    rec: LinearRecurrence,
    terms: RwLock<Vec<Integer>>,
    radix: Option<u64>,
}

impl Clone for NumerationSystem {
    fn clone(&self) -> Self {
        NumerationSystem {
            rec: self.rec.clone(),
            terms: RwLock::new(self.terms.read().unwrap().clone()),
            radix: self.radix,
        }
    }
}

impl NumerationSystem {
    pub fn new(rec: LinearRecurrence) -> Result<Self, NumerationError> {
        if rec.coefficients().iter().any(|c| *c < 0) {
            return Err(NumerationError::NegativeCoefficient);
        }
        let g = rec.initial_terms();
        if g[0] != 1 {
            return Err(NumerationError::BaseCondition(0));
        }
        for k in 1..rec.order() {
            let mut expect = Integer::from(1);
            for j in 1..=k {
                expect += Integer::from(&rec.coefficients()[j - 1] * &g[k - j]);
            }
            if g[k] != expect {
                return Err(NumerationError::BaseCondition(k));
            }
        }
        let radix = (rec.order() == 1).then(|| rec.coefficients()[0].to_u64()).flatten();
        let terms = rec.terms(rec.order().max(2));
        Ok(NumerationSystem { rec, terms: RwLock::new(terms), radix })
    }

    /// Zeckendorf system: Fibonacci numbers with F_0 = 1, F_1 = 2.
    pub fn zeckendorf() -> Self {
        Self::new(LinearRecurrence::zeckendorf_fibonacci()).unwrap()
    }

    pub fn radix(b: i64) -> Self {
        Self::new(LinearRecurrence::powers_of(b)).unwrap()
    }

    pub fn binary() -> Self {
        Self::radix(2)
    }

    pub fn recurrence(&self) -> &LinearRecurrence {
        &self.rec
    }

    fn ensure(&self, k: usize) {
        if self.terms.read().unwrap().len() > k {
            return;
        }
        let mut w = self.terms.write().unwrap();
        while w.len() <= k {
            let n = w.len();
            let mut next = Integer::new();
            for (j, c) in self.rec.coefficients().iter().enumerate() {
                next += Integer::from(c * &w[n - 1 - j]);
            }
            w.push(next);
        }
    }

    pub fn term(&self, k: usize) -> Integer {
        self.ensure(k);
        self.terms.read().unwrap()[k].clone()
    }

    /// Largest k with G_k ≤ n (n ≥ 1).
    pub fn top_index(&self, n: &Integer) -> usize {
        loop {
            let len = {
                let t = self.terms.read().unwrap();
                if t.last().unwrap() > n {
                    return t.partition_point(|x| x <= n) - 1;
                }
                t.len()
            };
            self.ensure(2 * len);
        }
    }

    /// Largest admissible digit at index k: ε_k·G_k < G_{k+1}.
    pub fn max_digit(&self, k: usize) -> Integer {
        self.ensure(k + 1);
        let t = self.terms.read().unwrap();
        let (q, r) = t[k + 1].clone().div_rem_floor(t[k].clone());
        if r == 0 {
            q - 1
        } else {
            q
        }
    }

    pub fn greedy_expand(&self, n: &Integer) -> DigitExpansion {
        assert!(*n >= 1, "greedy expansion needs n ≥ 1");
        let top = self.top_index(n);
        let t = self.terms.read().unwrap();
        let mut rest = n.clone();
        let mut digits = vec![Integer::new(); top + 1];
        for k in (0..=top).rev() {
            if rest >= t[k] {
                let (q, r) = rest.div_rem_floor(t[k].clone());
                digits[k] = q;
                rest = r;
            }
        }
        DigitExpansion { digits }
    }

    pub fn hamming_weight(&self, n: &Integer) -> usize {
        self.weight_at_most(n, usize::MAX).unwrap()
    }

    /// H(n) when it does not exceed `cap`; stops early otherwise.
    pub fn weight_at_most(&self, n: &Integer, cap: usize) -> Option<usize> {
        if let Some(b) = self.radix {
            if b == 2 {
                let w = n.count_ones().unwrap_or(0) as usize;
                return (w <= cap).then_some(w);
            }
            let mut w = 0;
            let mut x = n.clone();
            while x > 0 {
                let (q, r) = x.div_rem_floor(Integer::from(b));
                if r != 0 {
                    w += 1;
                    if w > cap {
                        return None;
                    }
                }
                x = q;
            }
            return Some(w);
        }
        if *n <= 0 {
            return Some(0);
        }
        let mut hi = self.top_index(n) + 1;
        let t = self.terms.read().unwrap();
        let mut rest = n.clone();
        let mut w = 0;
        while rest > 0 {
            let k = t[..hi].partition_point(|x| *x <= rest) - 1;
            rest %= &t[k];
            w += 1;
            if w > cap {
                return None;
            }
            hi = k;
        }
        Some(w)
    }

    /// Digit-range and prefix-sum conditions for every K.
    pub fn is_regular(&self, digits: &[Integer]) -> bool {
        let len = digits.len();
        self.ensure(len + 1);
        let t = self.terms.read().unwrap();
        let mut prefix = Integer::new();
        for k in 0..len {
            if digits[k] < 0 || Integer::from(&digits[k] * &t[k]) >= t[k + 1] {
                return false;
            }
            prefix += Integer::from(&digits[k] * &t[k]);
            if prefix >= t[k + 1] {
                return false;
            }
        }
        true
    }

    pub fn value(&self, e: &DigitExpansion) -> Integer {
        self.ensure(e.digits.len());
        let t = self.terms.read().unwrap();
        e.digits.iter().zip(t.iter()).map(|(d, g)| Integer::from(d * g)).sum()
    }

    /// u64 lookup table of base terms not exceeding `limit`.
    fn small_terms(&self, limit: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let t = self.term(k);
            match t.to_u64() {
                Some(v) if v <= limit => out.push(v),
                _ => return out,
            }
            k += 1;
        }
    }
}

/// Digits ε_k, lowest index first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitExpansion {
    pub digits: Vec<Integer>,
}

impl DigitExpansion {
    pub fn weight(&self) -> usize {
        self.digits.iter().filter(|d| **d != 0).count()
    }

    /// Indices of nonzero digits, highest first.
    pub fn nonzero_indices(&self) -> Vec<usize> {
        (0..self.digits.len()).rev().filter(|&k| self.digits[k] != 0).collect()
    }
}

fn weight_u64(terms: &[u64], mut n: u64) -> usize {
    let mut w = 0;
    for &t in terms.iter().rev() {
        if n >= t {
            let q = n / t;
            n -= q * t;
            w += 1;
            if n == 0 {
                break;
            }
        }
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Every n ≤ bound.
    Brute(u64),
    /// Candidates with top index ≤ n1_max in G or ≤ m1_max in H.
    DigitSearch { n1_max: usize, m1_max: usize },
}

/// All n with H_G(n) + H_H(n) ≤ max_weight under the given strategy, sorted.
pub fn enumerate_low_weight(g: &NumerationSystem, h: &NumerationSystem, max_weight: usize, strategy: Strategy) -> Vec<Integer> {
    match strategy {
        Strategy::Brute(bound) => brute(g, h, max_weight, bound),
        Strategy::DigitSearch { n1_max, m1_max } => digit_search(g, h, max_weight, n1_max, m1_max),
    }
}

fn brute(g: &NumerationSystem, h: &NumerationSystem, max_weight: usize, bound: u64) -> Vec<Integer> {
    let tg = g.small_terms(bound);
    let th = h.small_terms(bound);
    let chunk = 1u64 << 16;
    let starts: Vec<u64> = (0..bound.div_ceil(chunk)).map(|i| 1 + i * chunk).collect();
    let parts: Vec<Vec<u64>> = par::map(&starts, |&s| {
        let end = (s + chunk - 1).min(bound);
        (s..=end)
            .filter(|&n| {
                let wg = weight_u64(&tg, n);
                wg < max_weight && wg + weight_u64(&th, n) <= max_weight
            })
            .collect()
    });
    parts.into_iter().flatten().map(Integer::from).collect()
}

/// Sums Σ ε_k S_k with at most `w` nonzero digits, top index ≤ `top`.
fn candidates(sys: &NumerationSystem, top: usize, w: usize) -> Vec<Integer> {
    sys.ensure(top + 1);
    let maxd: Vec<Integer> = (0..=top).map(|k| sys.max_digit(k)).collect();
    let t: Vec<Integer> = sys.terms.read().unwrap()[..=top].to_vec();
    let heads: Vec<usize> = (0..=top).collect();
    let parts: Vec<Vec<Integer>> = par::map(&heads, |&i| {
        let mut out = Vec::new();
        let mut d = Integer::from(1);
        while d <= maxd[i] {
            let v = Integer::from(&d * &t[i]);
            extend(&t, &maxd, i, w - 1, v, &mut out);
            d += 1;
        }
        out
    });
    parts.into_iter().flatten().collect()
}

fn extend(t: &[Integer], maxd: &[Integer], below: usize, left: usize, acc: Integer, out: &mut Vec<Integer>) {
    out.push(acc.clone());
    if left == 0 {
        return;
    }
    for j in 0..below {
        let mut d = Integer::from(1);
        while d <= maxd[j] {
            extend(t, maxd, j, left - 1, Integer::from(&acc + &d * &t[j]), out);
            d += 1;
        }
    }
}

fn count_candidates(top: usize, w: usize) -> f64 {
    (1..=w).map(|k| binom(top + 1, k)).sum()
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn digit_search(g: &NumerationSystem, h: &NumerationSystem, max_weight: usize, n1_max: usize, m1_max: usize) -> Vec<Integer> {
    if max_weight < 2 {
        return vec![];
    }
    let w = max_weight - 1;
    let limit = g.term(n1_max + 1).min(h.term(m1_max + 1));
    let (side, other, top) = if count_candidates(m1_max, w) <= count_candidates(n1_max, w) {
        (h, g, m1_max)
    } else {
        (g, h, n1_max)
    };
    let cands = candidates(side, top, w);
    let kept: Vec<Option<Integer>> = par::map(&cands, |n| {
        if *n >= limit || *n < 1 {
            return None;
        }
        let ws = side.weight_at_most(n, w)?;
        other.weight_at_most(n, max_weight - ws).map(|_| n.clone())
    });
    let set: BTreeSet<Integer> = kept.into_iter().flatten().collect();
    set.into_iter().collect()
}

/// Numbers whose combined weight equals `m` exactly, from a list bounded by weight ≤ m.
pub fn exact_weight(g: &NumerationSystem, h: &NumerationSystem, list: &[Integer], m: usize) -> Vec<Integer> {
    list.iter().filter(|n| g.hamming_weight(n) + h.hamming_weight(n) == m).cloned().collect()
}

/// Exponents e ≤ e_max such that radix^e has G-weight `w`.
pub fn powers_with_weight(g: &NumerationSystem, radix: u64, e_max: u32, w: usize) -> Vec<Integer> {
    (0..=e_max)
        .map(|e| Integer::from(Integer::u_pow_u(radix as u32, e)))
        .filter(|p| g.hamming_weight(p) == w)
        .collect()
}

/// A solution a_1U_{n_1} + … + a_kU_{n_k} = b_1V_{m_1} + … + b_ℓV_{m_ℓ}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TupleSolution {
    pub value: Integer,
    pub n: Vec<u64>,
    pub m: Vec<u64>,
}

fn tuple_count(top: u64, k: usize, gap: u64) -> f64 {
    let span = (top + 1).saturating_sub((k as u64 - 1) * (gap - 1));
    binom(span as usize, k)
}

/// Values of all tuples top ≥ n_1 > … > n_k ≥ 0 with gaps ≥ min_gap and fixed n_1.
fn side_values(side: &SideSpec, terms: &[Integer], n1: u64, out: &mut Vec<(Integer, Vec<u64>)>) {
    fn go(side: &SideSpec, terms: &[Integer], acc: Integer, tuple: &mut Vec<u64>, out: &mut Vec<(Integer, Vec<u64>)>) {
        let i = tuple.len();
        if i == side.k() {
            out.push((acc, tuple.clone()));
            return;
        }
        let last = *tuple.last().unwrap();
        let Some(hi) = last.checked_sub(side.min_gap) else { return };
        for n in (0..=hi).rev() {
            tuple.push(n);
            go(side, terms, Integer::from(&acc + &side.coefficients[i] * &terms[n as usize]), tuple, out);
            tuple.pop();
        }
    }
    let mut tuple = vec![n1];
    go(side, terms, Integer::from(&side.coefficients[0] * &terms[n1 as usize]), &mut tuple, out);
}

/// Exhaustive sweep over n_1 ≤ n1_max and m_1 ≤ m1_max. The smaller side is
/// tabulated, the other streamed; both must stay below `limit` tuples.
pub fn tuple_solutions(
    left: &SideSpec,
    right: &SideSpec,
    n1_max: u64,
    m1_max: u64,
    limit: u64,
) -> Result<Vec<TupleSolution>, NumerationError> {
    let cl = tuple_count(n1_max, left.k(), left.min_gap);
    let cr = tuple_count(m1_max, right.k(), right.min_gap);
    if cl.max(cr) > limit as f64 {
        return Err(NumerationError::TooManyTuples(cl.max(cr), limit));
    }
    let swap = cl > cr;
    let (small, big, small_top, big_top) = if swap { (left, right, n1_max, m1_max) } else { (right, left, m1_max, n1_max) };
    let small_terms = small.rec.terms(small_top as usize + 1);
    let big_terms = big.rec.terms(big_top as usize + 1);
    let mut table: HashMap<Integer, Vec<Vec<u64>>> = HashMap::new();
    for n1 in 0..=small_top {
        let mut vals = Vec::new();
        side_values(small, &small_terms, n1, &mut vals);
        for (v, t) in vals {
            table.entry(v).or_default().push(t);
        }
    }
    let tops: Vec<u64> = (0..=big_top).collect();
    let found: Vec<Vec<TupleSolution>> = par::map(&tops, |&n1| {
        let mut vals = Vec::new();
        side_values(big, &big_terms, n1, &mut vals);
        let mut out = Vec::new();
        for (v, t) in vals {
            for s in table.get(&v).into_iter().flatten() {
                let (n, m) = if swap { (s.clone(), t.clone()) } else { (t.clone(), s.clone()) };
                out.push(TupleSolution { value: v.clone(), n, m });
            }
        }
        out
    });
    let mut all: Vec<TupleSolution> = found.into_iter().flatten().collect();
    all.sort();
    Ok(all)
}

/// Zeckendorf/binary solution lists for combined weight exactly M = 2..5,
/// as published.
pub const REFERENCE_LISTS: [(usize, &[u64]); 4] = [
    (2, &[1, 2, 8]),
    (3, &[3, 4, 5, 16, 34, 144]),
    (4, &[6, 9, 10, 13, 18, 21, 24, 32, 36, 64, 68, 256, 288, 1024]),
    (
        5,
        &[
            11, 12, 14, 17, 20, 22, 26, 35, 37, 40, 42, 48, 65, 66, 76, 89, 96, 97, 128, 136, 145, 146, 152, 160, 257,
            272, 322, 384, 385, 521, 576, 610, 644, 1026, 1042, 1152, 1600, 2584, 2592,
        ],
    ),
];

/// Known misprints in `REFERENCE_LISTS`: (M listed under, value, M where it belongs).
/// 128 = F_9 + F_7 + F_3 has Zeckendorf weight 3 and binary weight 1. The
/// numbers 7 = F_3 + F_1 = 111₂ and 56 = F_8 + F_0 = 111000₂ have total weight 5
/// and are missing from the M = 5 list.
pub const REFERENCE_ERRATA: [(Option<usize>, u64, usize); 3] = [(Some(5), 128, 4), (None, 7, 5), (None, 56, 5)];

/// Weight-3 Zeckendorf expansions of powers of two, with indices in the
/// F_0 = 1, F_1 = 2 convention: (m, indices highest first).
pub const POWERS_OF_TWO_WEIGHT3: [(u32, [usize; 3]); 5] =
    [(5, [6, 4, 2]), (6, [8, 4, 0]), (7, [9, 7, 3]), (8, [11, 6, 1]), (10, [14, 7, 2])];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableDiff {
    pub weight: usize,
    pub missing: Vec<Integer>,
    pub unexpected: Vec<Integer>,
}

/// Compares computed exact-weight lists with the entries n ≤ bound of `tables`,
/// after applying `errata`. Returns one diff per table with any discrepancy.
pub fn verify_tables(
    tables: &[(usize, Vec<u64>)],
    errata: &[(Option<usize>, u64, usize)],
    bound: u64,
) -> Vec<TableDiff> {
    let g = NumerationSystem::zeckendorf();
    let h = NumerationSystem::binary();
    let max_m = tables.iter().map(|t| t.0).max().unwrap_or(0);
    let all = enumerate_low_weight(&g, &h, max_m, Strategy::Brute(bound));
    let mut diffs = Vec::new();
    for (m, table) in tables {
        let mut expected: BTreeSet<u64> = table.iter().copied().collect();
        for &(from, v, to) in errata {
            if from == Some(*m) {
                expected.remove(&v);
            }
            if to == *m {
                expected.insert(v);
            }
        }
        expected.retain(|&x| x <= bound);
        let computed: BTreeSet<u64> =
            exact_weight(&g, &h, &all, *m).iter().filter_map(|x| x.to_u64()).collect();
        let missing: Vec<Integer> = expected.difference(&computed).map(|&x| Integer::from(x)).collect();
        let unexpected: Vec<Integer> = computed.difference(&expected).map(|&x| Integer::from(x)).collect();
        if !missing.is_empty() || !unexpected.is_empty() {
            diffs.push(TableDiff { weight: *m, missing, unexpected });
        }
    }
    diffs
}
