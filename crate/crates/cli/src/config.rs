//! Problem configuration (TOML, schema version 1).

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use linrec::recurrence::LinearRecurrence;
use serde::Deserialize;
use toml::Spanned;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.path, self.message)
        } else {
            write!(f, "{}:{}:{}: {}", self.path, self.line, self.column, self.message)
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Spanned<u32>,
    left: Spanned<RawSide>,
    right: Spanned<RawSide>,
    #[serde(default)]
    problem: RawProblem,
    #[serde(default)]
    precision: RawPrecision,
    #[serde(default)]
    campaign: RawCampaign,
    #[serde(default)]
    enumerate: RawEnumerate,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSide {
    recurrence: Spanned<Vec<i64>>,
    initial: Spanned<Vec<i64>>,
    #[serde(default)]
    numeration: bool,
    coefficients: Option<Spanned<Vec<i64>>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    max_weight: Option<Spanned<usize>>,
    weights: Option<Spanned<Vec<usize>>>,
    n_min: Option<Spanned<u64>>,
    #[serde(default)]
    assume_independent: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawPrecision {
    bits: Option<Spanned<u32>>,
    ceiling: Option<Spanned<u32>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCampaign {
    jobs: Option<usize>,
    dependence_height: Option<Spanned<i64>>,
    batch_size: Option<Spanned<usize>>,
    checkpoint: Option<PathBuf>,
    slice: Option<Spanned<RawSlice>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlice {
    level: usize,
    modulus: u64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawEnumerate {
    sweep_limit: Option<u64>,
    #[serde(default)]
    annotate: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct SideDef {
    pub rec: LinearRecurrence,
    pub numeration: bool,
    pub coefficients: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    /// H_G(n) + H_H(n) over the listed (k, ℓ) splits; `total` is M when given.
    Numeration { splits: Vec<(usize, usize)>, total: Option<usize> },
    /// a_1U_{n_1} + … = b_1V_{m_1} + … with fixed coefficient tuples.
    Tuples,
}

#[derive(Clone, Debug)]
pub struct ProblemConfig {
    pub left: SideDef,
    pub right: SideDef,
    pub mode: Mode,
    pub n_min: Option<u64>,
    pub assume_independent: bool,
    pub bits: Option<u32>,
    pub ceiling: Option<u32>,
    pub jobs: Option<usize>,
    pub dependence_height: Option<i64>,
    pub batch_size: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    pub slice: Option<(usize, u64)>,
    pub sweep_limit: u64,
    pub annotate: bool,
    pub out_dir: Option<PathBuf>,
}

struct Ctx<'a> {
    path: &'a str,
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Option<Range<usize>>, message: impl Into<String>) -> ConfigError {
        let (line, column) = span.map_or((0, 0), |s| line_col(self.text, s.start));
        ConfigError { path: self.path.to_string(), line, column, message: message.into() }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    (line, column)
}

pub fn load(path: &Path) -> Result<ProblemConfig, ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { path: name.clone(), line: 0, column: 0, message: e.to_string() })?;
    parse(&name, &text)
}

pub fn parse(path: &str, text: &str) -> Result<ProblemConfig, ConfigError> {
    let cx = Ctx { path, text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| cx.err(e.span(), e.message().trim_end().to_string()))?;

    if *raw.schema_version.get_ref() != SCHEMA_VERSION {
        return Err(cx.err(
            Some(raw.schema_version.span()),
            format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", raw.schema_version.get_ref()),
        ));
    }
    let left = side(&cx, &raw.left)?;
    let right = side(&cx, &raw.right)?;

    let p = &raw.problem;
    let mode = match (left.numeration, right.numeration) {
        (true, true) => {
            let splits = match (&p.max_weight, &p.weights) {
                (Some(_), Some(w)) => return Err(cx.err(Some(w.span()), "give either max_weight or weights, not both")),
                (None, None) => {
                    return Err(cx.err(Some(raw.left.span()), "numeration problems need [problem] max_weight or weights"))
                }
                (Some(m), None) => {
                    let m_val = *m.get_ref();
                    if m_val < 2 {
                        return Err(cx.err(Some(m.span()), "max_weight must be at least 2"));
                    }
                    (1..m_val).map(|k| (k, m_val - k)).collect()
                }
                (None, Some(w)) => match w.get_ref().as_slice() {
                    [k, l] if *k >= 1 && *l >= 1 => vec![(*k, *l)],
                    _ => return Err(cx.err(Some(w.span()), "weights must be [k, l] with k, l >= 1")),
                },
            };
            Mode::Numeration { splits, total: p.max_weight.as_ref().map(|m| *m.get_ref()) }
        }
        (false, false) => {
            if let Some(s) = p.max_weight.as_ref().map(|m| m.span()).or(p.weights.as_ref().map(|w| w.span())) {
                return Err(cx.err(Some(s), "max_weight and weights apply to numeration problems only"));
            }
            Mode::Tuples
        }
        _ => {
            return Err(cx.err(
                Some(raw.right.span()),
                "both sides must be numeration systems, or both must give coefficients",
            ))
        }
    };

    let mut bits = None;
    if let Some(b) = &raw.precision.bits {
        if *b.get_ref() < 64 {
            return Err(cx.err(Some(b.span()), "precision bits must be at least 64"));
        }
        bits = Some(*b.get_ref());
    }
    let mut ceiling = None;
    if let Some(c) = &raw.precision.ceiling {
        if *c.get_ref() < 128 {
            return Err(cx.err(Some(c.span()), "precision ceiling must be at least 128"));
        }
        ceiling = Some(*c.get_ref());
    }
    let c = &raw.campaign;
    if let Some(h) = &c.dependence_height {
        if *h.get_ref() < 1 {
            return Err(cx.err(Some(h.span()), "dependence_height must be positive"));
        }
    }
    if let Some(b) = &c.batch_size {
        if *b.get_ref() == 0 {
            return Err(cx.err(Some(b.span()), "batch_size must be positive"));
        }
    }
    let slice = match &c.slice {
        Some(s) if s.get_ref().modulus == 0 || s.get_ref().level < 4 => {
            return Err(cx.err(Some(s.span()), "slice needs level >= 4 and modulus >= 1"))
        }
        Some(s) => Some((s.get_ref().level, s.get_ref().modulus)),
        None => None,
    };
    Ok(ProblemConfig {
        left,
        right,
        mode,
        n_min: p.n_min.as_ref().map(|n| *n.get_ref()),
        assume_independent: p.assume_independent,
        bits,
        ceiling,
        jobs: c.jobs,
        dependence_height: c.dependence_height.as_ref().map(|h| *h.get_ref()),
        batch_size: c.batch_size.as_ref().map(|b| *b.get_ref()),
        checkpoint: c.checkpoint.clone(),
        slice,
        sweep_limit: raw.enumerate.sweep_limit.unwrap_or(50_000_000),
        annotate: raw.enumerate.annotate,
        out_dir: raw.output.dir,
    })
}

fn side(cx: &Ctx, raw: &Spanned<RawSide>) -> Result<SideDef, ConfigError> {
    let s = raw.get_ref();
    let c = s.recurrence.get_ref();
    if c.is_empty() {
        return Err(cx.err(Some(s.recurrence.span()), "recurrence needs at least one coefficient"));
    }
    if s.initial.get_ref().len() != c.len() {
        return Err(cx.err(
            Some(s.initial.span()),
            format!("initial needs {} values to match the recurrence order, found {}", c.len(), s.initial.get_ref().len()),
        ));
    }
    let rec = LinearRecurrence::from_i64(c, s.initial.get_ref())
        .map_err(|e| cx.err(Some(s.recurrence.span()), e.to_string()))?;
    let coefficients = match (&s.coefficients, s.numeration) {
        (Some(t), true) => return Err(cx.err(Some(t.span()), "coefficients cannot be combined with numeration = true")),
        (None, true) => vec![],
        (None, false) => return Err(cx.err(Some(raw.span()), "side needs coefficients = [...] or numeration = true")),
        (Some(t), false) => {
            if t.get_ref().is_empty() || t.get_ref().contains(&0) {
                return Err(cx.err(Some(t.span()), "coefficients must be a non-empty list of non-zero integers"));
            }
            t.get_ref().clone()
        }
    };
    Ok(SideDef { rec, numeration: s.numeration, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZB: &str = "schema_version = 1\n\n[left]\nrecurrence = [1, 1]\ninitial = [1, 2]\nnumeration = true\n\n[right]\nrecurrence = [2]\ninitial = [1]\nnumeration = true\n\n[problem]\nmax_weight = 4\n";

    #[test]
    fn zeckendorf_binary_parses() {
        let c = parse("zb.toml", ZB).unwrap();
        assert_eq!(c.mode, Mode::Numeration { splits: vec![(1, 3), (2, 2), (3, 1)], total: Some(4) });
        assert_eq!(c.left.rec.term(6), 21);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse("zb.toml", &ZB.replace("schema_version = 1", "schema_version = 7")).unwrap_err();
        assert_eq!((e.line, e.column), (1, 18));
        let e = parse("zb.toml", &ZB.replace("initial = [1]", "initial = [1, 1]")).unwrap_err();
        assert_eq!(e.line, 10);
        let e = parse("zb.toml", &ZB.replace("max_weight = 4", "max_wieght = 4")).unwrap_err();
        assert_eq!(e.line, 14);
        assert!(e.message.contains("max_wieght"), "{}", e.message);
        let e = parse("zb.toml", &ZB.replace("numeration = true\n\n[problem]", "coefficients = [1]\n\n[problem]")).unwrap_err();
        assert!(e.message.contains("both sides"));
    }
}
