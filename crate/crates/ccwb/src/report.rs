//! Report structures and their table, JSON and CSV renderings.

use std::fmt::Write as _;

use ccwb_core::conv::WidthClass;
use ccwb_core::{CallingConvention, Cost, ScoreWeights};
use serde::Serialize;

use crate::io::{CliError, CliResult};

/// Percentage change from `base` to `value` in tenths of a percent,
/// rounded half to even. `None` when `base` is zero.
pub fn delta_tenths(base: u64, value: u64) -> Option<i64> {
    if base == 0 {
        return None;
    }
    let num = (i128::from(value) - i128::from(base)) * 1000;
    let den = i128::from(base);
    let (q, r) = (num.div_euclid(den), num.rem_euclid(den));
    let q = match (2 * r).cmp(&den) {
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal if q % 2 != 0 => q + 1,
        _ => q,
    };
    Some(q as i64)
}

pub fn format_tenths(t: i64) -> String {
    let sign = if t < 0 { "-" } else { "" };
    format!("{sign}{}.{}", t.unsigned_abs() / 10, t.unsigned_abs() % 10)
}

/// Tenths as a JSON number with one decimal.
fn tenths_value(t: Option<i64>) -> Option<f64> {
    t.map(|t| t as f64 / 10.0)
}

pub fn format_score(s: f64) -> String {
    format!("{s:.3}")
}

/// One-line description of a convention's choices.
pub fn summary(c: &CallingConvention) -> String {
    let ret: Vec<String> = c.ret.iter().map(ToString::to_string).collect();
    let args: Vec<String> = WidthClass::ALL
        .iter()
        .map(|w| {
            let items: Vec<String> = c.prefs(*w).iter().map(ToString::to_string).collect();
            format!("[{}]", items.join(" "))
        })
        .collect();
    format!("ret={} args={} cleanup={} slot8={}", ret.join(","), args.join(","), c.cleanup, c.stack_slot_width_for_8bit)
}

/// Renders rows as aligned columns; the first column is left-aligned.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, "  {cell:>w$}");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut headers.iter().copied());
    for r in rows {
        line(&mut r.iter().map(String::as_str));
    }
    out
}

pub fn csv(headers: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Usage(format!("csv output failed: {e}"));
    w.write_record(headers).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct Weights {
    pub alpha_bytes: f64,
    pub beta_cycles: f64,
}

impl From<ScoreWeights> for Weights {
    fn from(w: ScoreWeights) -> Self {
        Weights { alpha_bytes: w.alpha_bytes(), beta_cycles: w.beta_cycles() }
    }
}

#[derive(Serialize)]
pub struct Total {
    pub bytes: u64,
    pub cycles: u64,
    pub score: f64,
}

impl Total {
    pub fn new(c: Cost, w: ScoreWeights) -> Self {
        Total { bytes: c.bytes, cycles: c.cycles, score: ccwb_core::score(c, w) }
    }
}

#[derive(Serialize)]
pub struct EvalEntry {
    pub signature: String,
    pub call_weight: u64,
    pub def_weight: u64,
    pub call_bytes: u64,
    pub call_cycles: u64,
    pub def_bytes: u64,
    pub def_cycles: u64,
    /// Weighted.
    pub bytes: u64,
    pub cycles: u64,
    pub score: f64,
}

#[derive(Serialize)]
pub struct EvalReport {
    pub arch: String,
    pub convention: String,
    pub weights: Weights,
    pub tail_call_hazard: bool,
    pub entries: Vec<EvalEntry>,
    pub total: Total,
}

const EVAL_HEADERS: [&str; 10] = [
    "signature",
    "call_weight",
    "def_weight",
    "call_bytes",
    "call_cycles",
    "def_bytes",
    "def_cycles",
    "bytes",
    "cycles",
    "score",
];

impl EvalReport {
    fn rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.signature.clone(),
                    e.call_weight.to_string(),
                    e.def_weight.to_string(),
                    e.call_bytes.to_string(),
                    e.call_cycles.to_string(),
                    e.def_bytes.to_string(),
                    e.def_cycles.to_string(),
                    e.bytes.to_string(),
                    e.cycles.to_string(),
                    format_score(e.score),
                ]
            })
            .collect();
        let mut total = vec![String::new(); EVAL_HEADERS.len()];
        total[0] = "total".into();
        total[7] = self.total.bytes.to_string();
        total[8] = self.total.cycles.to_string();
        total[9] = format_score(self.total.score);
        rows.push(total);
        rows
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "convention {} on {} (weights {},{})\n",
            self.convention, self.arch, self.weights.alpha_bytes, self.weights.beta_cycles
        );
        out += &table(&EVAL_HEADERS, &self.rows());
        if self.tail_call_hazard {
            out += "note: callee cleanup can block tail calls (not costed)\n";
        }
        out
    }

    pub fn csv(&self) -> CliResult<String> {
        csv(&EVAL_HEADERS, &self.rows())
    }
}

#[derive(Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub name: String,
    pub bytes: u64,
    pub cycles: u64,
    pub score: f64,
    pub summary: String,
    pub convention: CallingConvention,
}

#[derive(Serialize)]
pub struct OverrideItem {
    pub signature: String,
    pub winner: String,
    pub winner_summary: String,
    pub base_bytes: u64,
    pub base_cycles: u64,
    pub base_score: f64,
    pub bytes: u64,
    pub cycles: u64,
    pub score: f64,
}

#[derive(Serialize)]
pub struct OverrideReport {
    pub base: String,
    pub base_total: Total,
    pub total: Total,
    pub score_delta: f64,
    pub items: Vec<OverrideItem>,
}

#[derive(Serialize)]
pub struct SearchReport {
    pub arch: String,
    pub evaluated_count: usize,
    pub weights: Weights,
    pub ranked: Vec<RankRow>,
    pub pareto: Vec<RankRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overrides: Option<OverrideReport>,
}

pub const RANK_HEADERS: [&str; 6] = ["rank", "name", "bytes", "cycles", "score", "summary"];

pub fn rank_rows(rows: &[RankRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.rank.to_string(),
                r.name.clone(),
                r.bytes.to_string(),
                r.cycles.to_string(),
                format_score(r.score),
                r.summary.clone(),
            ]
        })
        .collect()
}

impl SearchReport {
    pub fn table(&self) -> String {
        let mut out = format!(
            "{} candidates on {} (weights {},{})\n\n",
            self.evaluated_count, self.arch, self.weights.alpha_bytes, self.weights.beta_cycles
        );
        out += &table(&RANK_HEADERS, &rank_rows(&self.ranked));
        out += &format!("\npareto front ({} points)\n", self.pareto.len());
        out += &table(&RANK_HEADERS, &rank_rows(&self.pareto));
        if let Some(o) = &self.overrides {
            out += &format!("\noverrides against {}\n", o.base);
            let rows: Vec<Vec<String>> = o
                .items
                .iter()
                .map(|i| {
                    vec![
                        i.signature.clone(),
                        i.winner.clone(),
                        format_score(i.base_score),
                        format_score(i.score),
                        i.winner_summary.clone(),
                    ]
                })
                .collect();
            out += &table(&["signature", "winner", "base_score", "score", "summary"], &rows);
            out += &format!(
                "total {} bytes {} cycles -> {} bytes {} cycles (score delta {})\n",
                o.base_total.bytes,
                o.base_total.cycles,
                o.total.bytes,
                o.total.cycles,
                format_score(o.score_delta)
            );
        }
        out
    }

    pub fn csv(&self) -> CliResult<String> {
        csv(&RANK_HEADERS, &rank_rows(&self.ranked))
    }
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub bytes: u64,
    pub cycles: u64,
    pub bytes_delta_pct: Option<f64>,
    pub cycles_delta_pct: Option<f64>,
}

/// Percentage deltas of every result against the first one.
pub fn comparison(results: &[(String, Cost)]) -> CliResult<Vec<CompareRow>> {
    let Some((_, base)) = results.first() else {
        return Err(CliError::Usage("a comparison needs at least two results".into()));
    };
    if results.len() < 2 {
        return Err(CliError::Usage("a comparison needs at least two results".into()));
    }
    Ok(results
        .iter()
        .map(|(label, c)| CompareRow {
            label: label.clone(),
            bytes: c.bytes,
            cycles: c.cycles,
            bytes_delta_pct: tenths_value(delta_tenths(base.bytes, c.bytes)),
            cycles_delta_pct: tenths_value(delta_tenths(base.cycles, c.cycles)),
        })
        .collect())
}

#[derive(Serialize)]
pub struct SignatureComparison {
    pub signature: String,
    pub rows: Vec<CompareRow>,
}

#[derive(Serialize)]
pub struct CompareReport {
    pub arch: String,
    pub baseline: String,
    pub totals: Vec<CompareRow>,
    pub signatures: Vec<SignatureComparison>,
}

pub const COMPARE_HEADERS: [&str; 5] = ["label", "bytes", "cycles", "bytes_delta_pct", "cycles_delta_pct"];

fn pct(v: Option<f64>) -> String {
    // values carry exactly one decimal, so tenths round-trip
    v.map(|x| format_tenths((x * 10.0).round() as i64)).unwrap_or_default()
}

pub fn compare_rows(rows: &[CompareRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.bytes.to_string(),
                r.cycles.to_string(),
                pct(r.bytes_delta_pct),
                pct(r.cycles_delta_pct),
            ]
        })
        .collect()
}

impl CompareReport {
    pub fn table(&self) -> String {
        let mut out = format!("totals on {} relative to {}\n", self.arch, self.baseline);
        out += &table(&COMPARE_HEADERS, &compare_rows(&self.totals));
        for s in &self.signatures {
            out += &format!("\n{}\n", s.signature);
            out += &table(&COMPARE_HEADERS, &compare_rows(&s.rows));
        }
        out
    }

    /// Totals only.
    pub fn csv(&self) -> CliResult<String> {
        csv(&COMPARE_HEADERS, &compare_rows(&self.totals))
    }
}
