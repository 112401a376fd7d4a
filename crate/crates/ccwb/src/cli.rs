//! Argument parsing and verb dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use ccwb_core::{
    assign, corpus_cost, entry_cost, parse_signature, signature_cost, ArchId, Architecture, CallingConvention, Corpus,
    FunctionSignature, ParamLoc, ScoreWeights, SearchSpace,
};
use clap::{Parser, Subcommand, ValueEnum};

use crate::io::{self, CliError, CliResult};
use crate::parallel;
use crate::report::{self, CompareReport, EvalEntry, EvalReport, RankRow, SearchReport, Total};

#[derive(Parser, Debug)]
#[command(name = "ccwb", version, about = "Calling-convention workbench for small irregular targets")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
    Csv,
}

#[derive(clap::Args, Debug)]
struct CostArgs {
    /// Cost table file, or a directory of `<arch>.cost` files.
    #[arg(long, value_name = "PATH")]
    cost_tables: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// List the supported architectures.
    ArchList {
        #[arg(long, value_enum, default_value = "table")]
        format: ReportFormat,
    },
    /// Print a convention as a document or as JSON.
    ConvShow {
        /// Builtin name, `.json` file or convention document.
        conv: String,
        #[arg(long, value_enum, default_value = "text")]
        format: TextFormat,
    },
    /// Show where each parameter and the return value of a signature go.
    Assign {
        #[arg(long)]
        arch: String,
        #[arg(long)]
        conv: String,
        /// Signature such as "i16 f(u8, i16)".
        sig: String,
        #[arg(long, value_enum, default_value = "text")]
        format: TextFormat,
    },
    /// Cost one convention over a corpus.
    Eval {
        #[arg(long)]
        arch: String,
        #[arg(long)]
        conv: String,
        /// `default` or a corpus file.
        #[arg(long, default_value = "default")]
        corpus: String,
        /// Score weights `alpha,beta` for bytes and cycles.
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: ReportFormat,
    },
    /// Evaluate every convention of a design space.
    Search {
        #[arg(long)]
        arch: String,
        #[arg(long, default_value = "default")]
        corpus: String,
        /// Search-space file; defaults to the architecture's builtin space.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        /// Number of ranked candidates to report.
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Also write the Pareto front to this CSV file.
        #[arg(long, value_name = "CSV")]
        pareto: Option<PathBuf>,
        /// Hot signatures to optimize independently of the rest.
        #[arg(long, num_args = 1.., value_name = "SIG")]
        overrides: Vec<String>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<NonZeroUsize>,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: ReportFormat,
    },
    /// Compare conventions over a corpus relative to the first one.
    Compare {
        #[arg(long)]
        arch: String,
        #[arg(required = true, num_args = 2.., value_name = "CONV")]
        convs: Vec<String>,
        #[arg(long, default_value = "default")]
        corpus: String,
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(long, value_enum, default_value = "table")]
        format: ReportFormat,
    },
}

/// Runs one invocation and returns its exit status: 0 on success, 1 on
/// domain errors and 2 on usage errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.verb) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn arch_id(name: &str) -> CliResult<ArchId> {
    Ok(name.parse::<ArchId>()?)
}

fn weights(spec: Option<&str>) -> CliResult<ScoreWeights> {
    match spec {
        None => Ok(ScoreWeights::default()),
        Some(s) => Ok(s.parse()?),
    }
}

fn signature(text: &str) -> CliResult<FunctionSignature> {
    Ok(parse_signature(text)?)
}

/// The target with the convention's reserved-register profile, checked to
/// declare every register the convention uses.
fn arch_for(id: ArchId, conv: &CallingConvention, tables: Option<&Path>) -> CliResult<Architecture> {
    let arch = io::architecture(id, conv.exclude_reserved, tables)?;
    conv.validate_for(&arch)?;
    Ok(arch)
}

fn dispatch(verb: Verb) -> CliResult<String> {
    match verb {
        Verb::ArchList { format } => arch_list(format),
        Verb::ConvShow { conv, format } => {
            let c = io::load_convention(&conv)?;
            Ok(match format {
                TextFormat::Text => c.print(),
                TextFormat::Json => report::json(&c),
            })
        }
        Verb::Assign { arch, conv, sig, format } => assign_verb(&arch, &conv, &sig, format),
        Verb::Eval { arch, conv, corpus, weights: w, cost, format } => {
            let id = arch_id(&arch)?;
            let conv = io::load_convention(&conv)?;
            let tables = io::cost_table_source(cost.cost_tables.as_deref());
            let arch = arch_for(id, &conv, tables.as_deref())?;
            let corpus = io::load_corpus(&corpus)?;
            let w = weights(w.as_deref())?;
            let r = eval_report(&conv, &corpus, &arch, w)?;
            render(format, || Ok(r.table()), || Ok(report::json(&r)), || r.csv())
        }
        Verb::Search { arch, corpus, space, weights: w, top, pareto, overrides, jobs, cost, format } => {
            let id = arch_id(&arch)?;
            let space = match space {
                Some(p) => io::load_space(&p)?,
                None => SearchSpace::builtin(id),
            };
            if space.arch != id {
                return Err(ccwb_core::Error::ArchMismatch { expected: id, found: space.arch }.into());
            }
            let tables = io::cost_table_source(cost.cost_tables.as_deref());
            let arch = io::architecture(id, space.exclude_reserved, tables.as_deref())?;
            let corpus = io::load_corpus(&corpus)?;
            let w = weights(w.as_deref())?;
            let hot = overrides.iter().map(|s| signature(s)).collect::<CliResult<Vec<_>>>()?;
            let jobs = jobs.unwrap_or_else(parallel::default_jobs);
            let r = search_report(&space, &corpus, &arch, w, top, &hot, jobs)?;
            if let Some(path) = pareto {
                let text = report::csv(&report::RANK_HEADERS, &report::rank_rows(&r.pareto))?;
                std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
            }
            render(format, || Ok(r.table()), || Ok(report::json(&r)), || r.csv())
        }
        Verb::Compare { arch, convs, corpus, weights: w, cost, format } => {
            let id = arch_id(&arch)?;
            let corpus = io::load_corpus(&corpus)?;
            let tables = io::cost_table_source(cost.cost_tables.as_deref());
            // weights only validate here; comparisons are in bytes and cycles
            weights(w.as_deref())?;
            let r = compare_report(id, &convs, &corpus, tables.as_deref())?;
            render(format, || Ok(r.table()), || Ok(report::json(&r)), || r.csv())
        }
    }
}

fn render(
    format: ReportFormat,
    table: impl FnOnce() -> CliResult<String>,
    json: impl FnOnce() -> CliResult<String>,
    csv: impl FnOnce() -> CliResult<String>,
) -> CliResult<String> {
    match format {
        ReportFormat::Table => table(),
        ReportFormat::Json => json(),
        ReportFormat::Csv => csv(),
    }
}

fn arch_list(format: ReportFormat) -> CliResult<String> {
    #[derive(serde::Serialize)]
    struct Row {
        id: String,
        family: String,
        registers: Vec<String>,
        reserved: Vec<String>,
        push_granularity: u8,
    }
    let rows: Vec<Row> = ArchId::ALL
        .iter()
        .map(|id| {
            let a = ccwb_core::get_architecture(*id, false);
            Row {
                id: id.to_string(),
                family: format!("{:?}", id.family()).to_lowercase(),
                registers: a.registers.iter().map(|r| r.reg.to_string()).collect(),
                reserved: a.reserved.iter().map(ToString::to_string).collect(),
                push_granularity: a.push_granularity,
            }
        })
        .collect();
    let headers = ["id", "family", "push_bits", "reserved", "registers"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.id.clone(),
                r.family.clone(),
                r.push_granularity.to_string(),
                r.reserved.join(" "),
                r.registers.join(" "),
            ]
        })
        .collect();
    render(format, || Ok(report::table(&headers, &cells)), || Ok(report::json(&rows)), || report::csv(&headers, &cells))
}

fn assign_verb(arch: &str, conv: &str, sig: &str, format: TextFormat) -> CliResult<String> {
    let id = arch_id(arch)?;
    let conv = io::load_convention(conv)?;
    let arch = arch_for(id, &conv, None)?;
    let sig = signature(sig)?;
    let plan = assign(&conv, &sig, &arch)?;
    let params: Vec<String> = plan.param_locs.iter().map(ToString::to_string).collect();
    let ret = plan.return_loc.map_or_else(|| "none".to_string(), |r| r.to_string());
    match format {
        TextFormat::Text => {
            let mut out = String::new();
            for (i, p) in params.iter().enumerate() {
                out += &format!("p{}={p}\n", i + 1);
            }
            out += &format!("ret={ret}\ncleanup={}\nstack_bytes={}\n", plan.cleanup_side, plan.stack_arg_bytes);
            Ok(out)
        }
        TextFormat::Json => {
            #[derive(serde::Serialize)]
            struct Param {
                location: String,
                #[serde(skip_serializing_if = "Option::is_none")]
                offset: Option<u64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                slot_bytes: Option<u64>,
            }
            #[derive(serde::Serialize)]
            struct Out {
                signature: String,
                convention: String,
                params: Vec<Param>,
                ret: String,
                cleanup: String,
                stack_bytes: u64,
            }
            let params = plan
                .param_locs
                .iter()
                .map(|l| match *l {
                    ParamLoc::Registers(r) => Param { location: r.to_string(), offset: None, slot_bytes: None },
                    ParamLoc::Stack { offset, slot_bytes, .. } => {
                        Param { location: "stack".into(), offset: Some(offset), slot_bytes: Some(slot_bytes) }
                    }
                })
                .collect();
            Ok(report::json(&Out {
                signature: sig.to_string(),
                convention: conv.name.clone(),
                params,
                ret,
                cleanup: plan.cleanup_side.to_string(),
                stack_bytes: plan.stack_arg_bytes,
            }))
        }
    }
}

pub fn eval_report(
    conv: &CallingConvention,
    corpus: &Corpus,
    arch: &Architecture,
    w: ScoreWeights,
) -> CliResult<EvalReport> {
    let mut entries = Vec::new();
    for e in corpus.entries() {
        let s = signature_cost(conv, &e.sig, arch)?;
        let weighted = entry_cost(conv, e, arch)?;
        entries.push(EvalEntry {
            signature: e.sig.to_string(),
            call_weight: e.call_weight,
            def_weight: e.def_weight,
            call_bytes: s.call_site.bytes,
            call_cycles: s.call_site.cycles,
            def_bytes: s.definition.bytes,
            def_cycles: s.definition.cycles,
            bytes: weighted.bytes,
            cycles: weighted.cycles,
            score: ccwb_core::score(weighted, w),
        });
    }
    Ok(EvalReport {
        arch: arch.id.to_string(),
        convention: conv.name.clone(),
        weights: w.into(),
        tail_call_hazard: conv.may_hinder_tail_calls(),
        entries,
        total: Total::new(corpus_cost(conv, corpus, arch)?, w),
    })
}

fn rank_row(rank: usize, r: &ccwb_core::Ranked) -> RankRow {
    RankRow {
        rank,
        name: r.conv.name.clone(),
        bytes: r.cost.bytes,
        cycles: r.cost.cycles,
        score: r.score,
        summary: report::summary(&r.conv),
        convention: r.conv.clone(),
    }
}

pub fn search_report(
    space: &SearchSpace,
    corpus: &Corpus,
    arch: &Architecture,
    w: ScoreWeights,
    top: usize,
    hot: &[FunctionSignature],
    jobs: NonZeroUsize,
) -> CliResult<SearchReport> {
    let eval = parallel::evaluate(space, corpus, arch, jobs)?;
    let result = eval.rank(w);
    let rank_of = |index: usize| result.ranked.iter().position(|r| r.index == index).map_or(0, |p| p + 1);
    let overrides = if hot.is_empty() {
        None
    } else {
        let best = result.best();
        let o = eval.overrides(best.index, corpus, hot, w)?;
        Some(report::OverrideReport {
            base: best.conv.name.clone(),
            base_total: Total::new(o.base_total, w),
            total: Total::new(o.total, w),
            score_delta: o.score_delta,
            items: o
                .items
                .iter()
                .map(|i| report::OverrideItem {
                    signature: i.sig.to_string(),
                    winner: i.winner.name.clone(),
                    winner_summary: report::summary(&i.winner),
                    base_bytes: i.base_cost.bytes,
                    base_cycles: i.base_cost.cycles,
                    base_score: i.base_score,
                    bytes: i.cost.bytes,
                    cycles: i.cost.cycles,
                    score: i.score,
                })
                .collect(),
        })
    };
    Ok(SearchReport {
        arch: arch.id.to_string(),
        evaluated_count: result.evaluated_count,
        weights: w.into(),
        ranked: result.ranked.iter().take(top).enumerate().map(|(i, r)| rank_row(i + 1, r)).collect(),
        pareto: result.pareto.iter().map(|r| rank_row(rank_of(r.index), r)).collect(),
        overrides,
    })
}

pub fn compare_report(
    id: ArchId,
    convs: &[String],
    corpus: &Corpus,
    tables: Option<&Path>,
) -> CliResult<CompareReport> {
    let mut loaded = Vec::new();
    for spec in convs {
        let conv = io::load_convention(spec)?;
        let arch = arch_for(id, &conv, tables)?;
        loaded.push((conv, arch));
    }
    let mut totals = Vec::new();
    for (conv, arch) in &loaded {
        totals.push((conv.name.clone(), corpus_cost(conv, corpus, arch)?));
    }
    let mut signatures = Vec::new();
    for e in corpus.entries() {
        let mut per = Vec::new();
        for (conv, arch) in &loaded {
            per.push((conv.name.clone(), entry_cost(conv, e, arch)?));
        }
        signatures.push(report::SignatureComparison { signature: e.sig.to_string(), rows: report::comparison(&per)? });
    }
    Ok(CompareReport {
        arch: id.to_string(),
        baseline: loaded[0].0.name.clone(),
        totals: report::comparison(&totals)?,
        signatures,
    })
}
