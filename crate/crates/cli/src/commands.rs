use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use linrec::algebraic::DEFAULT_CEILING;
use linrec::campaign::{run_campaign, CampaignError, CampaignPolicy, CampaignResult, CellContext, CellId, Slice};
use linrec::chain::{
    derive_chain, finiteness_bound, stewart_bound, BoundChain, ChainError, ChainPolicy, ProblemInstance,
    DEFAULT_CHAIN_PRECISION,
};
use linrec::dominance::{check_dominance, SideSpec};
use linrec::numeration::{
    enumerate_low_weight, exact_weight, tuple_solutions, verify_tables, NumerationSystem, Strategy, TableDiff,
    REFERENCE_ERRATA, REFERENCE_LISTS,
};
use linrec::recurrence::{check_admissible, spectral_analyze, LinearRecurrence};
use rug::Integer;

use crate::config::{Mode, ProblemConfig, SideDef};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Precondition(String),
    Mismatch(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Precondition(_) => 3,
            Failure::Mismatch(_) | Failure::Io(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Precondition(m) | Failure::Mismatch(m) | Failure::Io(m) => m,
        }
    }

    fn tagged(self, stage: Stage) -> Failure {
        let tag = |m: String| format!("stage {}: {m}", stage.name());
        match self {
            Failure::Config(m) => Failure::Config(tag(m)),
            Failure::Precondition(m) => Failure::Precondition(tag(m)),
            Failure::Mismatch(m) => Failure::Mismatch(tag(m)),
            Failure::Io(m) => Failure::Io(tag(m)),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Whether every emitted bound holds unconditionally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Stage {
    Analyze,
    Dominance,
    Bound,
    Campaign,
    Enumerate,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Analyze => "analyze",
            Stage::Dominance => "dominance",
            Stage::Bound => "bound",
            Stage::Campaign => "campaign",
            Stage::Enumerate => "enumerate",
        }
    }

    fn file(self) -> &'static str {
        match self {
            Stage::Analyze => "01-analyze.txt",
            Stage::Dominance => "02-dominance.txt",
            Stage::Bound => "03-bound.txt",
            Stage::Campaign => "04-campaign.txt",
            Stage::Enumerate => "05-solutions.txt",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub precision: Option<u32>,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    pub out: Option<PathBuf>,
}

pub struct Session {
    cfg: ProblemConfig,
    opts: Options,
}

/// One equation handed to the bound chain: a single split (k, ℓ) in numeration
/// mode, or the coefficient tuples.
struct Problem {
    label: String,
    split: (usize, usize),
    left: SideSpec,
    right: SideSpec,
}

struct Bounded {
    problem: Problem,
    inst: ProblemInstance,
    chain: BoundChain,
    n1_bound: Integer,
}

fn chain_failure(e: ChainError) -> Failure {
    match e {
        ChainError::NotDominant { side, witness } => Failure::Precondition(format!(
            "{side} side is not dominant: witness exponents ({}) give a vanishing sum of powers of the dominant root",
            join(&witness.exponents, ", ")
        )),
        other => Failure::Precondition(other.to_string()),
    }
}

fn campaign_failure(e: CampaignError) -> Failure {
    match e {
        CampaignError::PolicyMismatch { .. } => Failure::Config(e.to_string()),
        CampaignError::Precondition(m) => Failure::Precondition(m),
        other => Failure::Io(other.to_string()),
    }
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn describe(rec: &LinearRecurrence) -> String {
    let d = rec.order();
    let rhs: Vec<String> =
        rec.coefficients().iter().enumerate().map(|(j, c)| format!("{c}*U(n+{})", d - 1 - j)).collect();
    format!("U(n+{d}) = {}; U(0..{d}) = {}", rhs.join(" + ").replace("U(n+0)", "U(n)"), join(rec.initial_terms(), ", "))
}

fn is_zeckendorf(rec: &LinearRecurrence) -> bool {
    let z = LinearRecurrence::zeckendorf_fibonacci();
    rec.coefficients() == z.coefficients() && rec.initial_terms() == z.initial_terms()
}

/// Checks the base condition and unit digits; returns the system and the
/// smallest gap between two nonzero digits of a regular expansion.
fn numeration_system(name: &str, side: &SideDef) -> Result<(NumerationSystem, u64), Failure> {
    let sys = NumerationSystem::new(side.rec.clone()).map_err(|e| Failure::Precondition(format!("{name}: {e}")))?;
    for k in 0..64 {
        let d = sys.max_digit(k);
        if d != 1 {
            return Err(Failure::Precondition(format!(
                "{name}: digit {k} may reach {d}; only systems with digits 0 and 1 are supported"
            )));
        }
    }
    let one = || Integer::from(1);
    let gap = (1..64u64)
        .find(|&g| {
            let mut digits = vec![Integer::new(); g as usize + 1];
            digits[0] = one();
            digits[g as usize] = one();
            sys.is_regular(&digits)
        })
        .ok_or_else(|| Failure::Precondition(format!("{name}: no two nonzero digits fit in a regular expansion")))?;
    Ok((sys, gap))
}

impl Session {
    pub fn new(cfg: ProblemConfig, opts: Options) -> Self {
        Session { cfg, opts }
    }

    fn bits(&self) -> u32 {
        self.opts.precision.or(self.cfg.bits).unwrap_or(DEFAULT_CHAIN_PRECISION)
    }

    fn out_dir(&self) -> Option<&Path> {
        self.opts.out.as_deref().or(self.cfg.out_dir.as_deref())
    }

    pub fn emit_stage(&self, stage: Stage, text: &str) -> Result<(), Failure> {
        print!("{text}");
        if let Some(dir) = self.out_dir() {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(stage.file()), text)?;
        }
        Ok(())
    }

    fn problems(&self) -> Result<Vec<Problem>, Failure> {
        let (l, r) = (&self.cfg.left, &self.cfg.right);
        match &self.cfg.mode {
            Mode::Numeration { splits, .. } => {
                let (_, gl) = numeration_system("left", l)?;
                let (_, gr) = numeration_system("right", r)?;
                Ok(splits
                    .iter()
                    .map(|&(k, ll)| Problem {
                        label: format!("k={k}, l={ll}"),
                        split: (k, ll),
                        left: SideSpec::digits(l.rec.clone(), k, gl),
                        right: SideSpec::digits(r.rec.clone(), ll, gr),
                    })
                    .collect())
            }
            Mode::Tuples => {
                let side = |d: &SideDef| SideSpec::from_i64(d.rec.clone(), &d.coefficients);
                let (left, right) = (
                    side(l).map_err(|e| Failure::Config(e.to_string()))?,
                    side(r).map_err(|e| Failure::Config(e.to_string()))?,
                );
                Ok(vec![Problem { label: "tuples".into(), split: (left.k(), right.k()), left, right }])
            }
        }
    }

    fn instance(&self, p: &Problem) -> Result<ProblemInstance, Failure> {
        let policy = ChainPolicy {
            n_min: self.cfg.n_min.unwrap_or(ChainPolicy::default().n_min),
            precision: self.bits(),
            assume_independent: self.cfg.assume_independent,
            ..ChainPolicy::default()
        };
        ProblemInstance::new(p.left.clone(), p.right.clone(), policy).map_err(chain_failure)
    }

    pub fn analyze(&self) -> Result<String, Failure> {
        let mut s = String::new();
        let mut bad = vec![];
        for (name, side) in [("left", &self.cfg.left), ("right", &self.cfg.right)] {
            let rec = &side.rec;
            writeln!(s, "[{name}]").unwrap();
            writeln!(s, "recurrence: {}", describe(rec)).unwrap();
            writeln!(s, "characteristic polynomial: {}", rec.characteristic_polynomial()).unwrap();
            let adm = check_admissible(rec);
            for (what, v) in [
                ("simple", &adm.simple),
                ("non-degenerate", &adm.non_degenerate),
                ("dominant root", &adm.dominant_root),
                ("integral", &adm.defined_over_integers),
            ] {
                writeln!(s, "{what}: {} ({})", if v.ok { "yes" } else { "NO" }, v.reason).unwrap();
            }
            if !adm.admissible() {
                bad.push(name);
                continue;
            }
            let sp = spectral_analyze(rec, self.bits()).map_err(|e| Failure::Precondition(format!("{name}: {e}")))?;
            writeln!(s, "dominant root alpha: {}", sp.alpha).unwrap();
            writeln!(s, "minimal polynomial of alpha: {}", sp.dominant_root.minpoly()).unwrap();
            writeln!(s, "|alpha_2| <= {}", sp.second_modulus_bound.upper_decimal(20)).unwrap();
            writeln!(s, "u: {}", sp.u).unwrap();
            writeln!(s, "C1: {}", sp.approx_constant.upper_decimal(20)).unwrap();
            if side.numeration {
                let (_, gap) = numeration_system(name, side)?;
                writeln!(s, "numeration system: digits 0/1, nonzero digits at least {gap} apart").unwrap();
            }
        }
        if !bad.is_empty() {
            return Err(Failure::Precondition(format!("{s}not admissible: {}", bad.join(", "))));
        }
        Ok(s)
    }

    pub fn dominance(&self) -> Result<String, Failure> {
        let mut s = String::new();
        let mut seen = BTreeSet::new();
        for p in self.problems()? {
            for (name, side) in [("left", &p.left), ("right", &p.right)] {
                if !seen.insert((name, side.k())) {
                    continue;
                }
                let cert = check_dominance(side).map_err(|e| Failure::Precondition(format!("{name}: {e}")))?;
                writeln!(s, "[{name}, {} terms, coefficients ({})]", side.k(), join(&side.coefficients, ", ")).unwrap();
                s += &cert.report();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                if let Some(w) = &cert.witness {
                    return Err(Failure::Precondition(format!(
                        "{s}{name} side is not dominant: witness exponents ({})",
                        join(&w.exponents, ", ")
                    )));
                }
            }
        }
        Ok(s)
    }

    fn bounded(&self) -> Result<(String, Vec<Bounded>), Failure> {
        let mut s = String::new();
        let mut out = vec![];
        for p in self.problems()? {
            let inst = self.instance(&p)?;
            let chain = derive_chain(&inst).map_err(chain_failure)?;
            let fin = finiteness_bound(&chain).map_err(chain_failure)?;
            let n1_bound = fin
                .n1_bound
                .hi()
                .to_integer()
                .ok_or_else(|| Failure::Precondition("finiteness bound is not finite".into()))?;
            writeln!(s, "[{}]", p.label).unwrap();
            s += &chain.report();
            if !s.ends_with('\n') {
                s.push('\n');
            }
            writeln!(s, "n1 <= {}", n1_bound).unwrap();
            writeln!(s, "max(n1, m1) <= {}", fin.n.upper_decimal(20)).unwrap();
            if matches!(self.cfg.mode, Mode::Numeration { .. }) {
                if let Ok(st) = stewart_bound(&chain, p.split.0 + p.split.1) {
                    writeln!(s, "Stewart-type bound: log n <= {}", st.log_n_bound.upper_decimal(8)).unwrap();
                }
            }
            out.push(Bounded { problem: p, inst, chain, n1_bound });
        }
        Ok((s, out))
    }

    pub fn bound(&self) -> Result<String, Failure> {
        Ok(self.bounded()?.0)
    }

    fn campaign_policy(&self) -> CampaignPolicy {
        let d = CampaignPolicy::default();
        CampaignPolicy {
            precision_ceiling: self.cfg.ceiling.unwrap_or(DEFAULT_CEILING),
            dependence_height: self.cfg.dependence_height.unwrap_or(d.dependence_height),
            batch_size: self.cfg.batch_size.unwrap_or(d.batch_size),
            checkpoint: None,
            stop_after_cells: None,
            slice: self.cfg.slice.map(|(level, modulus)| Slice { level, modulus }),
            keep_trace: false,
        }
    }

    fn checkpoint_dir(&self, p: &Problem, many: bool) -> Result<Option<PathBuf>, Failure> {
        let Some(base) = self.opts.checkpoint.as_ref().or(self.cfg.checkpoint.as_ref()) else { return Ok(None) };
        let dir = if many { base.join(format!("k{}-l{}", p.split.0, p.split.1)) } else { base.clone() };
        let occupied = fs::read_dir(&dir).map(|mut d| d.next().is_some()).unwrap_or(false);
        if occupied && !self.opts.resume {
            return Err(Failure::Config(format!(
                "checkpoint directory {} is not empty; pass --resume to continue it",
                dir.display()
            )));
        }
        Ok(Some(dir))
    }

    fn campaigns(&self, bounded: &[Bounded]) -> Result<(String, Vec<CampaignResult>), Failure> {
        let mut s = String::new();
        let mut results = vec![];
        for b in bounded {
            let mut policy = self.campaign_policy();
            policy.checkpoint = self.checkpoint_dir(&b.problem, bounded.len() > 1)?;
            let r = run_campaign(&b.inst, &b.chain, &b.n1_bound, &policy).map_err(campaign_failure)?;
            eprintln!("[{}] {}", b.problem.label, r.stats());
            writeln!(s, "[{}]", b.problem.label).unwrap();
            s += &r.report();
            results.push(r);
        }
        if results.iter().any(|r| r.conditional()) {
            s += "CONDITIONAL: some cells were not reduced or only a sample was run\n";
        }
        Ok((s, results))
    }

    pub fn campaign(&self) -> Result<(String, Status), Failure> {
        let (_, bounded) = self.bounded()?;
        let (s, results) = self.campaigns(&bounded)?;
        Ok((s, status(&results)))
    }

    pub fn reduce(&self, args: &ReduceArgs) -> Result<String, Failure> {
        let (_, mut bounded) = self.bounded()?;
        let idx = match args.split {
            None => 0,
            Some(sp) => bounded.iter().position(|b| b.problem.split == sp).ok_or_else(|| {
                Failure::Config(format!("split ({}, {}) is not part of this problem", sp.0, sp.1))
            })?,
        };
        let b = bounded.swap_remove(idx);
        let (k, l) = b.problem.split;
        let (kk, ll) = args.pair;
        if !(2..=k + 1).contains(&kk) || !(2..=l + 1).contains(&ll) {
            return Err(Failure::Config(format!("pair ({kk}, {ll}) needs 2 <= K <= {} and 2 <= L <= {}", k + 1, l + 1)));
        }
        for (name, gaps, want) in [("n-gaps", &args.n_gaps, kk - 2), ("m-gaps", &args.m_gaps, ll - 2)] {
            if gaps.len() != want || gaps.windows(2).any(|w| w[0] >= w[1]) || gaps.first() == Some(&0) {
                return Err(Failure::Config(format!("--{name} needs {want} increasing positive values")));
            }
        }
        let n1 = match &args.n1_bound {
            Some(v) => v.parse::<Integer>().map_err(|e| Failure::Config(format!("--n1-bound: {e}")))?,
            None => b.n1_bound.clone(),
        };
        let ctx = CellContext::new(&b.inst, &b.chain, &n1, &self.campaign_policy()).map_err(campaign_failure)?;
        let (a, base) = ctx.pair_constants((kk, ll)).expect("pair validated above");
        let id = CellId { pair: (kk, ll), n_gaps: args.n_gaps.clone(), m_gaps: args.m_gaps.clone() };
        let o = ctx.reduce_cell(&id);
        let mut s = String::new();
        writeln!(s, "[{}] cell {}", b.problem.label, id.label()).unwrap();
        writeln!(s, "n1 <= {n1}").unwrap();
        writeln!(s, "A <= {}", a.upper_decimal(20)).unwrap();
        writeln!(s, "B >= {}", base.lower_decimal(20)).unwrap();
        writeln!(s, "method: {:?}", o.method).unwrap();
        writeln!(s, "q: {}", o.q).unwrap();
        writeln!(s, "detail: {}", o.detail).unwrap();
        if o.method == linrec::reduction::Method::Failed {
            writeln!(s, "no bound for this cell").unwrap();
        } else {
            writeln!(s, "min(n1 - n_K, m1 - m_L) <= {}", o.bound).unwrap();
        }
        Ok(s)
    }

    fn numeration_solutions(&self, strategy: Strategy) -> Result<Vec<Integer>, Failure> {
        let Mode::Numeration { splits, total } = &self.cfg.mode else { unreachable!() };
        let (g, _) = numeration_system("left", &self.cfg.left)?;
        let (h, _) = numeration_system("right", &self.cfg.right)?;
        let max = splits.iter().map(|(k, l)| k + l).max().unwrap();
        let all = enumerate_low_weight(&g, &h, max, strategy);
        Ok(match total {
            Some(m) => exact_weight(&g, &h, &all, *m),
            None => {
                let (k, l) = splits[0];
                all.into_iter().filter(|n| g.hamming_weight(n) == k && h.hamming_weight(n) == l).collect()
            }
        })
    }

    fn render_numeration(&self, list: &[Integer], annotate: bool, scope: &str) -> Result<String, Failure> {
        let Mode::Numeration { splits, total } = &self.cfg.mode else { unreachable!() };
        let mut s = match total {
            Some(m) => format!("# n >= 1 with H_G(n) + H_H(n) = {m}; {scope}\n"),
            None => format!("# n >= 1 with H_G(n) = {} and H_H(n) = {}; {scope}\n", splits[0].0, splits[0].1),
        };
        writeln!(s, "# {} solutions", list.len()).unwrap();
        let (g, _) = numeration_system("left", &self.cfg.left)?;
        let (h, _) = numeration_system("right", &self.cfg.right)?;
        let zeck = is_zeckendorf(&self.cfg.left.rec);
        for n in list {
            if !annotate {
                writeln!(s, "{n}").unwrap();
                continue;
            }
            let gi = g.greedy_expand(n).nonzero_indices();
            let hi = h.greedy_expand(n).nonzero_indices();
            let classical = if zeck {
                format!(" (classical {})", gi.iter().map(|i| format!("F_{}", i + 2)).collect::<Vec<_>>().join(" + "))
            } else {
                String::new()
            };
            writeln!(s, "{n}\tG: {}{classical}\tH: {}", join(&gi, ","), join(&hi, ",")).unwrap();
        }
        Ok(s)
    }

    fn tuple_list(&self, n1_max: u64, m1_max: u64) -> Result<String, Failure> {
        let ps = self.problems()?;
        let sols = tuple_solutions(&ps[0].left, &ps[0].right, n1_max, m1_max, self.cfg.sweep_limit)
            .map_err(|e| Failure::Precondition(e.to_string()))?;
        let mut s = format!("# solutions with n1 <= {n1_max} and m1 <= {m1_max}\n# {} solutions\n", sols.len());
        for t in &sols {
            writeln!(s, "{}\tn=({})\tm=({})", t.value, join(&t.n, ","), join(&t.m, ",")).unwrap();
        }
        Ok(s)
    }

    pub fn enumerate(&self, args: &EnumerateArgs) -> Result<String, Failure> {
        let annotate = args.annotate || self.cfg.annotate;
        match (&self.cfg.mode, args.brute, args.n1_max, args.m1_max) {
            (Mode::Numeration { .. }, Some(b), _, _) => {
                let list = self.numeration_solutions(Strategy::Brute(b))?;
                self.render_numeration(&list, annotate, &format!("n <= {b}"))
            }
            (Mode::Numeration { .. }, None, Some(n1), Some(m1)) => {
                let list = self.numeration_solutions(Strategy::DigitSearch { n1_max: n1 as usize, m1_max: m1 as usize })?;
                self.render_numeration(&list, annotate, &format!("top digit index <= {n1} (G) or <= {m1} (H)"))
            }
            (Mode::Tuples, None, Some(n1), Some(m1)) => self.tuple_list(n1, m1),
            (Mode::Tuples, Some(_), _, _) => Err(Failure::Config("--brute applies to numeration problems only".into())),
            _ => Err(Failure::Config("enumerate needs --n1-max and --m1-max, or --brute".into())),
        }
    }

    /// Runs the stages in order up to `last`, writing one certificate per stage.
    pub fn pipeline(&self, last: Stage, annotate: bool) -> Result<Status, Failure> {
        let run = |stage: Stage, text: Result<String, Failure>| -> Result<(), Failure> {
            let text = text.map_err(|e| e.tagged(stage))?;
            self.emit_stage(stage, &text).map_err(|e| e.tagged(stage))
        };
        run(Stage::Analyze, self.analyze())?;
        if last == Stage::Analyze {
            return Ok(Status::Complete);
        }
        run(Stage::Dominance, self.dominance())?;
        if last == Stage::Dominance {
            return Ok(Status::Complete);
        }
        let (text, bounded) = self.bounded().map_err(|e| e.tagged(Stage::Bound))?;
        run(Stage::Bound, Ok(text))?;
        if last == Stage::Bound {
            return Ok(Status::Complete);
        }
        let (text, results) = self.campaigns(&bounded).map_err(|e| e.tagged(Stage::Campaign))?;
        run(Stage::Campaign, Ok(text))?;
        let st = status(&results);
        if last == Stage::Campaign {
            return Ok(st);
        }
        let n1 = results.iter().map(|r| r.final_n1).max().unwrap();
        let m1 = results.iter().map(|r| r.final_m1).max().unwrap();
        let text = match self.cfg.mode {
            Mode::Numeration { .. } => self
                .numeration_solutions(Strategy::DigitSearch { n1_max: n1 as usize, m1_max: m1 as usize })
                .and_then(|list| {
                    let scope = if st == Status::Complete { "complete list" } else { "conditional list" };
                    self.render_numeration(&list, annotate || self.cfg.annotate, scope)
                }),
            Mode::Tuples => self.tuple_list(n1, m1),
        };
        run(Stage::Enumerate, text)?;
        Ok(st)
    }
}

fn status(results: &[CampaignResult]) -> Status {
    if results.iter().any(|r| r.conditional()) {
        Status::Conditional
    } else {
        Status::Complete
    }
}

#[derive(Clone, Debug)]
pub struct ReduceArgs {
    pub split: Option<(usize, usize)>,
    pub pair: (usize, usize),
    pub n_gaps: Vec<u64>,
    pub m_gaps: Vec<u64>,
    pub n1_bound: Option<String>,
}

#[derive(Clone, Debug)]
pub struct EnumerateArgs {
    pub n1_max: Option<u64>,
    pub m1_max: Option<u64>,
    pub brute: Option<u64>,
    pub annotate: bool,
}

/// Reads `M: v, v, …` lines; `#` starts a comment.
pub fn read_tables(path: &Path) -> Result<Vec<(usize, Vec<u64>)>, Failure> {
    let text = fs::read_to_string(path)?;
    let mut out = vec![];
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Failure::Config(format!("{}:{}: {what}", path.display(), i + 1));
        let (m, rest) = line.split_once(':').ok_or_else(|| bad("expected `M: values`"))?;
        let m: usize = m.trim().parse().map_err(|_| bad("weight must be a positive integer"))?;
        let vals = rest
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().map_err(|_| bad(&format!("`{t}` is not a non-negative integer"))))
            .collect::<Result<Vec<_>, _>>()?;
        out.push((m, vals));
    }
    Ok(out)
}

fn render_diff(d: &TableDiff) -> String {
    format!(
        "M = {}: listed but not found [{}], found but not listed [{}]\n",
        d.weight,
        join(&d.missing, ", "),
        join(&d.unexpected, ", ")
    )
}

/// Returns the report and whether every table matched.
pub fn verify(tables: Option<&Path>, raw: bool, bound: u64) -> Result<(String, bool), Failure> {
    let tables = match tables {
        Some(p) => read_tables(p)?,
        None => REFERENCE_LISTS.iter().map(|(m, l)| (*m, l.to_vec())).collect(),
    };
    let errata: &[(Option<usize>, u64, usize)] = if raw { &[] } else { &REFERENCE_ERRATA };
    let diffs = verify_tables(&tables, errata, bound);
    let mut s = format!("# Zeckendorf/binary tables checked for n <= {bound}\n");
    if !raw {
        for (from, v, to) in errata {
            match from {
                Some(f) => writeln!(s, "# erratum: {v} moved from M = {f} to M = {to}").unwrap(),
                None => writeln!(s, "# erratum: {v} added to M = {to}").unwrap(),
            }
        }
    }
    for (m, l) in &tables {
        let shown = l.iter().filter(|&&v| v <= bound).count();
        let status = if diffs.iter().any(|d| d.weight == *m) { "MISMATCH" } else { "ok" };
        writeln!(s, "M = {m}: {shown} entries {status}").unwrap();
    }
    for d in &diffs {
        s += &render_diff(d);
    }
    Ok((s, diffs.is_empty()))
}
