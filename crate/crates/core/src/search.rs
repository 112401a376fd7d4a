//! Exhaustive search over convention design spaces.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::arch::{get_architecture, ArchId, Architecture, Family};
use crate::conv::{ArgPref, CallingConvention, CleanupPolicy, RetLoc, WidthClass};
use crate::cost::Cost;
use crate::costing::{score, signature_cost, weigh, ScoreWeights};
use crate::error::{Error, Result};
use crate::sig::{Corpus, FunctionSignature};
use crate::text::{content_lines, doc_line, parse_bool, parse_u64, parse_width, unknown_key, DocLine};

/// Set-valued description of a family of conventions. Every combination
/// of one choice per dimension is a candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchSpace {
    pub arch: ArchId,
    pub exclude_reserved: bool,
    /// Return location choices for 8, 16 and 32-bit values.
    pub ret: [Vec<RetLoc>; 3],
    /// Candidate preference lists for 8, 16 and 32-bit arguments.
    pub args: [Vec<Vec<ArgPref>>; 3],
    pub max_register_params: u8,
    pub stop_on_stack: bool,
    pub first_of_each_width: bool,
    pub cleanup: Vec<CleanupPolicy>,
    pub slot_widths: Vec<u8>,
}

const SPACE_STM8: &str = include_str!("../data/spaces/stm8.space");
const SPACE_Z80: &str = include_str!("../data/spaces/z80.space");
const SPACE_SM83: &str = include_str!("../data/spaces/sm83.space");
const SPACE_RABBIT: &str = include_str!("../data/spaces/rabbit.space");

impl SearchSpace {
    pub fn builtin_source(family: Family) -> &'static str {
        match family {
            Family::Stm8 => SPACE_STM8,
            Family::Z80 => SPACE_Z80,
            Family::Sm83 => SPACE_SM83,
            Family::Rabbit => SPACE_RABBIT,
        }
    }

    /// The default space of `id`'s family, retargeted to `id`.
    pub fn builtin(id: ArchId) -> SearchSpace {
        match SearchSpace::parse(Self::builtin_source(id.family())) {
            Ok(s) => SearchSpace { arch: id, ..s },
            Err(e) => panic!("embedded search space for {id} is invalid: {e}"),
        }
    }

    /// Size of the raw product, before invalid candidates are dropped.
    pub fn product_size(&self) -> usize {
        self.ret.iter().map(Vec::len).product::<usize>()
            * self.args.iter().map(Vec::len).product::<usize>()
            * self.cleanup.len()
            * self.slot_widths.len()
    }

    /// Every valid candidate in canonical order: nested loops over return
    /// 8/16/32, arguments 8/16/32, cleanup policy and slot width, innermost
    /// last. Invalid and repeated candidates are skipped; the rest are
    /// named `<arch>-c<index>`.
    pub fn enumerate(&self) -> Result<Vec<CallingConvention>> {
        let arch = get_architecture(self.arch, self.exclude_reserved);
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for r8 in &self.ret[0] {
            for r16 in &self.ret[1] {
                for r32 in &self.ret[2] {
                    for a8 in &self.args[0] {
                        for a16 in &self.args[1] {
                            for a32 in &self.args[2] {
                                for cleanup in &self.cleanup {
                                    for slot in &self.slot_widths {
                                        let conv = CallingConvention {
                                            name: String::new(),
                                            arch: self.arch,
                                            exclude_reserved: self.exclude_reserved,
                                            ret: [*r8, *r16, *r32],
                                            arg_prefs: [a8.clone(), a16.clone(), a32.clone()],
                                            max_register_params: self.max_register_params,
                                            stop_on_stack: self.stop_on_stack,
                                            first_of_each_width: self.first_of_each_width,
                                            cleanup: *cleanup,
                                            stack_slot_width_for_8bit: *slot,
                                        };
                                        if conv.validate_for(&arch).is_ok() && seen.insert(conv.clone()) {
                                            out.push(conv);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (i, c) in out.iter_mut().enumerate() {
            c.name = format!("{}-c{i:05}", self.arch);
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<SearchSpace> {
        let mut b = SpaceBuilder::default();
        let mut section = String::new();
        for (n, line) in content_lines(text) {
            let mut step = || -> Result<()> {
                match doc_line(line)? {
                    DocLine::Section(s) => {
                        if !["return", "args", "cleanup", "stack"].contains(&s) {
                            return Err(Error::syntax(1, format!("unknown section `[{s}]`")));
                        }
                        section = s.to_string();
                        Ok(())
                    }
                    DocLine::Entry { key, value } => b.set(&section, key, value),
                }
            };
            step().map_err(|e| e.at_line(n))?;
        }
        b.finish()
    }

    pub fn print(&self) -> String {
        fn alts<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
            items.iter().map(f).collect::<Vec<_>>().join(" | ")
        }
        let list = |prefs: &Vec<ArgPref>| {
            if prefs.is_empty() {
                "-".to_string()
            } else {
                prefs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
            }
        };
        let mut out = format!("arch = {}\nexclude_reserved = {}\n\n[return]\n", self.arch, self.exclude_reserved);
        for w in WidthClass::ALL {
            out += &format!("{} = {}\n", w.bits(), alts(&self.ret[w.index()], ToString::to_string));
        }
        out += "\n[args]\n";
        for w in WidthClass::ALL {
            out += &format!("{} = {}\n", w.bits(), alts(&self.args[w.index()], list));
        }
        out += &format!(
            "max_register_params = {}\nstop_on_stack = {}\nfirst_of_each_width = {}\n",
            self.max_register_params, self.stop_on_stack, self.first_of_each_width
        );
        out += &format!("\n[cleanup]\npolicies = {}\n", alts(&self.cleanup, ToString::to_string));
        out += &format!("\n[stack]\nslot_width_8bit = {}\n", alts(&self.slot_widths, ToString::to_string));
        out
    }
}

#[derive(Default)]
struct SpaceBuilder {
    arch: Option<ArchId>,
    exclude_reserved: Option<bool>,
    ret: [Option<Vec<RetLoc>>; 3],
    args: [Option<Vec<Vec<ArgPref>>>; 3],
    max_register_params: Option<u8>,
    stop_on_stack: Option<bool>,
    first_of_each_width: Option<bool>,
    cleanup: Option<Vec<CleanupPolicy>>,
    slots: Option<Vec<u8>>,
}

fn put<T>(slot: &mut Option<T>, key: &str, v: T) -> Result<()> {
    if slot.replace(v).is_some() {
        return Err(Error::syntax(1, format!("duplicate key `{key}`")));
    }
    Ok(())
}

/// Splits `a | b | c`, rejecting empty alternatives and repeats.
fn alternatives<T: PartialEq>(value: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let mut out: Vec<T> = Vec::new();
    for alt in value.split('|').map(str::trim) {
        if alt.is_empty() {
            return Err(Error::syntax(1, "empty alternative"));
        }
        let v = parse(alt)?;
        if out.contains(&v) {
            return Err(Error::syntax(1, format!("repeated alternative `{alt}`")));
        }
        out.push(v);
    }
    Ok(out)
}

fn pref_list(alt: &str) -> Result<Vec<ArgPref>> {
    if alt == "-" {
        return Ok(Vec::new());
    }
    alt.split_whitespace().map(str::parse).collect()
}

impl SpaceBuilder {
    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let width_slot = || WidthClass::from_bits(parse_width(key)?).map(WidthClass::index);
        match (section, key) {
            ("", "arch") => put(&mut self.arch, key, value.parse()?),
            ("", "exclude_reserved") => put(&mut self.exclude_reserved, key, parse_bool(value)?),
            ("return", "8" | "16" | "32") => {
                let i = width_slot()?;
                put(&mut self.ret[i], key, alternatives(value, str::parse)?)
            }
            ("args", "8" | "16" | "32") => {
                let i = width_slot()?;
                put(&mut self.args[i], key, alternatives(value, pref_list)?)
            }
            ("args", "max_register_params") => {
                let n = u8::try_from(parse_u64(value)?)
                    .map_err(|_| Error::syntax(1, "max_register_params is too large"))?;
                put(&mut self.max_register_params, key, n)
            }
            ("args", "stop_on_stack") => put(&mut self.stop_on_stack, key, parse_bool(value)?),
            ("args", "first_of_each_width") => put(&mut self.first_of_each_width, key, parse_bool(value)?),
            ("cleanup", "policies") => put(&mut self.cleanup, key, alternatives(value, str::parse)?),
            ("stack", "slot_width_8bit") => put(&mut self.slots, key, alternatives(value, parse_width)?),
            _ => Err(unknown_key(section, key)),
        }
    }

    fn finish(self) -> Result<SearchSpace> {
        let missing = |k: &str| Error::syntax(1, format!("missing required key `{k}`"));
        let [r8, r16, r32] = self.ret;
        let [a8, a16, a32] = self.args;
        let one_empty = || alloc::vec![Vec::new()];
        Ok(SearchSpace {
            arch: self.arch.ok_or_else(|| missing("arch"))?,
            exclude_reserved: self.exclude_reserved.unwrap_or(false),
            ret: [
                r8.ok_or_else(|| missing("return.8"))?,
                r16.ok_or_else(|| missing("return.16"))?,
                r32.ok_or_else(|| missing("return.32"))?,
            ],
            args: [a8.unwrap_or_else(one_empty), a16.unwrap_or_else(one_empty), a32.unwrap_or_else(one_empty)],
            max_register_params: self.max_register_params.unwrap_or(2),
            stop_on_stack: self.stop_on_stack.unwrap_or(false),
            first_of_each_width: self.first_of_each_width.unwrap_or(false),
            cleanup: self.cleanup.unwrap_or_else(|| alloc::vec![CleanupPolicy::CALLER]),
            slot_widths: self.slots.unwrap_or_else(|| alloc::vec![8]),
        })
    }
}

/// Weighted per-entry costs of every candidate of a space over a corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub candidates: Vec<CallingConvention>,
    /// `entry_costs[c][e]`: weighted cost of corpus entry `e` under candidate `c`.
    pub entry_costs: Vec<Vec<Cost>>,
}

/// Weighted cost of every corpus entry under one convention.
pub fn evaluate_candidate(conv: &CallingConvention, corpus: &Corpus, arch: &Architecture) -> Result<Vec<Cost>> {
    corpus
        .entries()
        .iter()
        .map(|e| Ok(weigh(signature_cost(conv, &e.sig, arch)?, e.call_weight, e.def_weight)))
        .collect()
}

/// Checks that `arch` can evaluate candidates of `space`.
pub fn check_arch(space: &SearchSpace, arch: &Architecture) -> Result<()> {
    if space.arch != arch.id {
        return Err(Error::ArchMismatch { expected: space.arch, found: arch.id });
    }
    Ok(())
}

impl Evaluation {
    /// Evaluates every candidate on the current thread.
    pub fn run(space: &SearchSpace, corpus: &Corpus, arch: &Architecture) -> Result<Evaluation> {
        check_arch(space, arch)?;
        let candidates = space.enumerate()?;
        let entry_costs = candidates.iter().map(|c| evaluate_candidate(c, corpus, arch)).collect::<Result<Vec<_>>>()?;
        Ok(Evaluation { candidates, entry_costs })
    }

    pub fn total(&self, candidate: usize) -> Cost {
        self.entry_costs[candidate].iter().copied().sum()
    }

    /// Ranks all candidates by score, then bytes, cycles and enumeration
    /// index, and extracts the Pareto front over (bytes, cycles).
    pub fn rank(&self, weights: ScoreWeights) -> SearchResult {
        let mut ranked: Vec<Ranked> = (0..self.candidates.len())
            .map(|i| {
                let cost = self.total(i);
                Ranked { index: i, conv: self.candidates[i].clone(), cost, score: score(cost, weights) }
            })
            .collect();
        ranked.sort_by(Ranked::order);
        let pareto = pareto_front(&ranked);
        SearchResult { evaluated_count: self.candidates.len(), ranked, pareto }
    }

    /// For each hot type, the candidate that is cheapest for that entry
    /// alone, with every other entry kept on the base candidate.
    pub fn overrides(
        &self,
        base: usize,
        corpus: &Corpus,
        hot: &[FunctionSignature],
        weights: ScoreWeights,
    ) -> Result<Overrides> {
        let base_total = self.total(base);
        let mut total = base_total;
        let mut items: Vec<Override> = Vec::new();
        for sig in hot {
            let e = corpus
                .entries()
                .iter()
                .position(|x| &x.sig == sig)
                .ok_or_else(|| Error::UnknownHotType(sig.to_string()))?;
            if items.iter().any(|o| &o.sig == sig) {
                continue;
            }
            let key = |c: usize| {
                let cost = self.entry_costs[c][e];
                (score(cost, weights), cost.bytes, cost.cycles, c)
            };
            let winner = (0..self.candidates.len())
                .min_by(|a, b| {
                    let (ka, kb) = (key(*a), key(*b));
                    ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(ka.2.cmp(&kb.2)).then(ka.3.cmp(&kb.3))
                })
                .unwrap_or(base);
            let base_cost = self.entry_costs[base][e];
            let cost = self.entry_costs[winner][e];
            total =
                Cost::new(total.bytes - base_cost.bytes + cost.bytes, total.cycles - base_cost.cycles + cost.cycles);
            items.push(Override {
                sig: sig.clone(),
                base_cost,
                base_score: score(base_cost, weights),
                winner: self.candidates[winner].clone(),
                winner_index: winner,
                cost,
                score: score(cost, weights),
            });
        }
        Ok(Overrides { base_total, total, score_delta: score(total, weights) - score(base_total, weights), items })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ranked {
    /// Position in enumeration order.
    pub index: usize,
    pub conv: CallingConvention,
    pub cost: Cost,
    pub score: f64,
}

impl Ranked {
    fn order(a: &Ranked, b: &Ranked) -> Ordering {
        a.score
            .total_cmp(&b.score)
            .then(a.cost.bytes.cmp(&b.cost.bytes))
            .then(a.cost.cycles.cmp(&b.cost.cycles))
            .then(a.index.cmp(&b.index))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    /// Best first.
    pub ranked: Vec<Ranked>,
    /// Undominated candidates by ascending bytes (then cycles, index).
    pub pareto: Vec<Ranked>,
    pub evaluated_count: usize,
}

impl SearchResult {
    pub fn best(&self) -> &Ranked {
        &self.ranked[0]
    }
}

fn pareto_front(items: &[Ranked]) -> Vec<Ranked> {
    let mut sorted: Vec<&Ranked> = items.iter().collect();
    sorted.sort_by(|a, b| a.cost.cmp(&b.cost).then(a.index.cmp(&b.index)));
    let mut front: Vec<Ranked> = Vec::new();
    let mut min_cycles = u64::MAX;
    for r in sorted {
        let same_as_last = front.last().is_some_and(|l| l.cost == r.cost);
        if r.cost.cycles < min_cycles || same_as_last {
            min_cycles = min_cycles.min(r.cost.cycles);
            front.push(r.clone());
        }
    }
    front
}

#[derive(Clone, Debug, PartialEq)]
pub struct Override {
    pub sig: FunctionSignature,
    pub base_cost: Cost,
    pub base_score: f64,
    pub winner: CallingConvention,
    pub winner_index: usize,
    pub cost: Cost,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Overrides {
    pub items: Vec<Override>,
    pub base_total: Cost,
    /// Corpus total with every override applied.
    pub total: Cost,
    pub score_delta: f64,
}

/// Evaluates, ranks and extracts the Pareto front on the current thread.
pub fn search(
    space: &SearchSpace,
    corpus: &Corpus,
    arch: &Architecture,
    weights: ScoreWeights,
) -> Result<SearchResult> {
    Ok(Evaluation::run(space, corpus, arch)?.rank(weights))
}

/// [`search`], then per-hot-type overrides against the best candidate.
pub fn search_with_overrides(
    space: &SearchSpace,
    corpus: &Corpus,
    arch: &Architecture,
    weights: ScoreWeights,
    hot: &[FunctionSignature],
) -> Result<(SearchResult, Overrides)> {
    let eval = Evaluation::run(space, corpus, arch)?;
    let result = eval.rank(weights);
    let overrides = eval.overrides(result.best().index, corpus, hot, weights)?;
    Ok((result, overrides))
}
