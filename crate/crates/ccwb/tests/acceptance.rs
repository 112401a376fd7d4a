//! Acceptance criteria 1-8. Each test prints one `criterion N: PASS|FAIL`
//! line before asserting, so `cargo test --test acceptance -- --nocapture`
//! doubles as a report.

use std::cell::Cell;
use std::num::NonZeroUsize;
use std::time::{Duration, Instant};

use ccwb::cli;
use ccwb_core::costing::{cost_of, lower_call_site, MarshalStep};
use ccwb_core::{
    assign, builtin_convention, corpus_cost, get_architecture, parse_signature, ArchId, Architecture, ArgPref,
    CallingConvention, CleanupMode, CleanupPolicy, Corpus, CorpusEntry, Cost, Evaluation, FunctionSignature, ParamLoc,
    Reg, RegLoc, RetLoc, ScoreWeights, SearchSpace, Side, TypeClass, BUILTIN_CONVENTIONS,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

// Pinned budgets and sample sizes.
const GOLDEN_MIN_CASES: usize = 40;
const GOLDEN_BUDGET: Duration = Duration::from_secs(1);
const ORDERING_BUDGET: Duration = Duration::from_secs(1);
const CLEANUP_MIN_SIGNATURES: u32 = 200;
const CLEANUP_BUDGET: Duration = Duration::from_secs(5);
const SLOT_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_MIN_SPACES: usize = 5;
const ORACLE_MAX_CANDIDATES: usize = 512;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const SCALE_BUDGET: Duration = Duration::from_secs(60);
const ROUND_TRIP_DOCS: u32 = 1000;
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(5);

fn report(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ccwb").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn sig(text: &str) -> FunctionSignature {
    parse_signature(text).unwrap()
}

fn conv(name: &str) -> CallingConvention {
    builtin_convention(name).unwrap()
}

fn arch_for(c: &CallingConvention, id: ArchId) -> Architecture {
    get_architecture(id, c.exclude_reserved)
}

/// Every builtin convention paired with every target it can run on.
fn convention_targets() -> Vec<(CallingConvention, Architecture)> {
    let mut out = Vec::new();
    for name in BUILTIN_CONVENTIONS {
        let c = conv(name);
        for id in ArchId::ALL {
            let a = arch_for(&c, id);
            if c.validate_for(&a).is_ok() {
                out.push((c.clone(), a));
            }
        }
    }
    out
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_golden_convention_tables() {
    let fixture = include_str!("fixtures/golden_assign.txt");
    let start = Instant::now();
    let mut cases = 0;
    let mut failures = Vec::new();
    let mut covered = std::collections::BTreeSet::new();
    for line in fixture.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(" | ").collect();
        let [name, arch, signature, params, ret, cleanup, stack] = f[..] else {
            panic!("malformed fixture line: {line}");
        };
        covered.insert(name);
        let mut expected = String::new();
        if params != "-" {
            for (i, p) in params.split(' ').enumerate() {
                expected += &format!("p{}={p}\n", i + 1);
            }
        }
        expected += &format!("ret={ret}\ncleanup={cleanup}\nstack_bytes={stack}\n");
        let (code, out, err) = run_cli(&["assign", "--arch", arch, "--conv", name, signature]);
        if code != 0 || out != expected {
            failures.push(format!("{name} `{signature}`: expected\n{expected}got (exit {code})\n{out}{err}"));
        }
        cases += 1;
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty()
        && cases >= GOLDEN_MIN_CASES
        && covered.len() == BUILTIN_CONVENTIONS.len()
        && elapsed < GOLDEN_BUDGET;
    report(1, ok, &format!("{cases} cases, {} mismatches, {elapsed:.2?}", failures.len()));
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(cases >= GOLDEN_MIN_CASES);
    assert_eq!(covered.len(), BUILTIN_CONVENTIONS.len());
    assert!(elapsed < GOLDEN_BUDGET, "{elapsed:?}");
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_2_x_outranks_y() {
    let start = Instant::now();
    let space = SearchSpace::parse(
        "arch = stm8\n[return]\n8 = a\n16 = x\n32 = x:y\n[args]\n8 = a\n16 = x | y\n\
         max_register_params = 2\nstop_on_stack = true\n",
    )
    .unwrap();
    let arch = get_architecture(ArchId::Stm8, false);
    let corpus = Corpus::builtin();
    let result = Evaluation::run(&space, &corpus, &arch).unwrap().rank(ScoreWeights::default());
    let pos = |r: Reg| {
        result.ranked.iter().position(|c| c.conv.prefs(ccwb_core::WidthClass::W16)[0].loc == RegLoc::One(r)).unwrap()
    };
    let (px, py) = (pos(Reg::X), pos(Reg::Y));
    let (bx, by) = (result.ranked[px].cost.bytes, result.ranked[py].cost.bytes);
    let elapsed = start.elapsed();
    let ok = result.ranked.len() == 2 && px < py && bx < by && elapsed < ORDERING_BUDGET;
    report(2, ok, &format!("x: rank {} {bx} bytes, y: rank {} {by} bytes", px + 1, py + 1));
    assert_eq!(result.ranked.len(), 2);
    assert!(px < py);
    assert!(bx < by);
    assert!(elapsed < ORDERING_BUDGET);
}

// ---------------------------------------------------------------- 3

fn arb_type() -> impl Strategy<Value = TypeClass> {
    prop::sample::select(vec![
        TypeClass::BOOL,
        TypeClass::I8,
        TypeClass::I16,
        TypeClass::I32,
        TypeClass::PTR,
        TypeClass::F32,
    ])
}

fn arb_return() -> impl Strategy<Value = TypeClass> {
    prop_oneof![Just(TypeClass::VOID), arb_type()]
}

fn arb_signature(max_params: usize, varargs: bool) -> impl Strategy<Value = FunctionSignature> {
    (
        arb_return(),
        prop::collection::vec(arb_type(), 1..=max_params),
        if varargs { any::<bool>().boxed() } else { Just(false).boxed() },
    )
        .prop_map(|(r, p, v)| FunctionSignature::new(r, p, v).unwrap())
}

fn with_cleanup(c: &CallingConvention, p: CleanupPolicy) -> CallingConvention {
    CallingConvention { cleanup: p, ..c.clone() }
}

#[test]
fn criterion_3_cleanup_trade_off() {
    let start = Instant::now();
    let targets = convention_targets();
    let mut runner = TestRunner::new(Config { cases: 256, failure_persistence: None, ..Config::default() });
    let signatures = Cell::new(0u32);
    let checks = Cell::new(0u64);
    let result = runner.run(&(arb_signature(5, false), 2u64..=20), |(s, cw)| {
        let corpus = Corpus::new([CorpusEntry { sig: s.clone(), call_weight: cw, def_weight: 1 }]).unwrap();
        let mut any = false;
        for (c, a) in &targets {
            let plan = assign(c, &s, a).unwrap();
            if plan.stack_arg_bytes == 0 {
                continue;
            }
            any = true;
            checks.set(checks.get() + 1);
            let caller = corpus_cost(&with_cleanup(c, CleanupPolicy::CALLER), &corpus, a).unwrap();
            let callee = corpus_cost(&with_cleanup(c, CleanupPolicy::CALLEE), &corpus, a).unwrap();
            prop_assert!(
                callee.bytes <= caller.bytes && caller.cycles <= callee.cycles,
                "{} on {}: `{s}` x{cw}: caller {caller}, callee {callee}",
                c.name,
                a.id
            );
        }
        if any {
            signatures.set(signatures.get() + 1);
        }
        Ok(())
    });
    let (signatures, checks) = (signatures.get(), checks.get());
    let elapsed = start.elapsed();
    let ok = result.is_ok() && signatures >= CLEANUP_MIN_SIGNATURES && elapsed < CLEANUP_BUDGET;
    report(3, ok, &format!("{signatures} signatures, {checks} convention/target checks, {elapsed:.2?}"));
    if let Err(e) = result {
        panic!("{e}");
    }
    assert!(signatures >= CLEANUP_MIN_SIGNATURES, "{signatures}");
    assert!(elapsed < CLEANUP_BUDGET);
}

// ---------------------------------------------------------------- 4

fn all_param_lists(max: usize) -> Vec<Vec<TypeClass>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for p in &frontier {
            for t in [TypeClass::I8, TypeClass::I16, TypeClass::I32] {
                let mut q: Vec<TypeClass> = p.clone();
                q.push(t);
                next.push(q);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn criterion_4_stack_slot_width() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut slot_checks = 0;
    let mut pair_checks = 0;
    let z80_targets: Vec<ArchId> = ArchId::ALL.into_iter().filter(|id| id.is_z80_family()).collect();
    for id in &z80_targets {
        for name in ["z80-old", "z80-new", "sm83-old", "sm83-new", "rabbit-new"] {
            let narrow = conv(name);
            let a = arch_for(&narrow, *id);
            if narrow.validate_for(&a).is_err() {
                continue;
            }
            let wide = CallingConvention { stack_slot_width_for_8bit: 16, ..narrow.clone() };
            for params in all_param_lists(4) {
                let Ok(s) = FunctionSignature::new(TypeClass::VOID, params, false) else { continue };
                let p8 = assign(&narrow, &s, &a).unwrap();
                let p16 = assign(&wide, &s, &a).unwrap();
                let odd =
                    p8.param_locs.iter().filter(|l| matches!(l, ParamLoc::Stack { width: 8, .. })).count() % 2 == 1;
                if odd {
                    slot_checks += 1;
                    if p8.stack_arg_bytes >= p16.stack_arg_bytes {
                        failures
                            .push(format!("{name} on {id} `{s}`: {} vs {}", p8.stack_arg_bytes, p16.stack_arg_bytes));
                    }
                }
            }
        }
        // peephole: one 16-bit push for two adjacent 8-bit arguments
        let a = get_architecture(*id, true);
        let t = &a.cost_tables;
        let single = t.push[&(8, 8)];
        let pair = t.push_pair.expect("16-bit push targets have a pair push");
        pair_checks += 1;
        if pair.bytes > 2 * single.bytes || pair.cycles > 2 * single.cycles {
            failures.push(format!("{id}: push_pair {pair} vs 2 x push {single}"));
        }
        let old = conv("z80-old");
        let plan = assign(&old, &sig("void f(i8, i8)"), &a).unwrap();
        let steps = lower_call_site(&plan, &a);
        if !steps.contains(&MarshalStep::PushPair) {
            failures.push(format!("{id}: no pair push in {steps:?}"));
        }
        let split: Vec<MarshalStep> = steps
            .iter()
            .flat_map(|s| match s {
                MarshalStep::PushPair => vec![MarshalStep::PushStack { slot_width: 8, value_width: 8 }; 2],
                other => vec![*other],
            })
            .collect();
        let (joined, apart) = (cost_of(&steps, t).unwrap(), cost_of(&split, t).unwrap());
        if joined.bytes > apart.bytes || joined.cycles > apart.cycles {
            failures.push(format!("{id}: call site {joined} with pair push vs {apart} without"));
        }
    }
    // STM8 pushes bytes, so the peephole never applies there
    let stm8 = get_architecture(ArchId::Stm8, false);
    let plan = assign(&conv("stm8-old"), &sig("void f(i8, i8)"), &stm8).unwrap();
    if lower_call_site(&plan, &stm8).contains(&MarshalStep::PushPair) {
        failures.push("stm8 uses a pair push".into());
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && slot_checks > 0 && elapsed < SLOT_BUDGET;
    report(4, ok, &format!("{slot_checks} slot-width checks, {pair_checks} targets with pair push, {elapsed:.2?}"));
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(slot_checks > 0);
    assert!(elapsed < SLOT_BUDGET);
}

// ---------------------------------------------------------------- 5

/// Naive re-costing straight from the tables, without the lowering code.
mod oracle {
    use super::*;

    fn t(c: Option<&Cost>, what: &str) -> Cost {
        *c.unwrap_or_else(|| panic!("no table entry for {what}"))
    }

    fn free_pairs(arch: &Architecture, ret: Option<RetLoc>) -> u64 {
        let ret_regs: Vec<Reg> = match ret {
            Some(RetLoc::Registers(l)) => l.regs().collect(),
            _ => vec![],
        };
        arch.allocatable_16bit()
            .into_iter()
            .filter(|r| ret_regs.iter().all(|q| !arch.conflicts(*r, *q).unwrap()))
            .count() as u64
    }

    fn reg_cost(tab: &std::collections::BTreeMap<(Reg, u8), Cost>, loc: RegLoc) -> Cost {
        match loc {
            RegLoc::One(r) => t(tab.get(&(r, r.width())), r.name()),
            RegLoc::Pair(h, l) => t(tab.get(&(h, 16)), h.name()) + t(tab.get(&(l, 16)), l.name()),
        }
    }

    pub fn signature(c: &CallingConvention, s: &FunctionSignature, arch: &Architecture) -> (Cost, Cost) {
        let tab = &arch.cost_tables;
        let plan = assign(c, s, arch).unwrap();
        let mut call = tab.call;
        let mut def = tab.ret;
        let mut pending_narrow = false;
        for loc in &plan.param_locs {
            match *loc {
                ParamLoc::Registers(r) => {
                    call += reg_cost(&tab.load, r);
                    def += reg_cost(&tab.access_reg, r);
                }
                ParamLoc::Stack { width, slot_bytes, .. } => {
                    def += t(tab.access_stack.get(&width), "access_stack");
                    let narrow = width == 8 && slot_bytes == 1 && arch.push_granularity == 16;
                    if narrow && pending_narrow {
                        // undo the single push and replace both with one pair push
                        call = Cost::new(call.bytes - tab.push[&(8, 8)].bytes, call.cycles - tab.push[&(8, 8)].cycles);
                        call += tab.push_pair.unwrap();
                        pending_narrow = false;
                    } else {
                        call += t(tab.push.get(&((slot_bytes * 8) as u8, width)), "push");
                        pending_narrow = narrow;
                    }
                }
            }
        }
        match plan.return_loc {
            Some(RetLoc::Registers(r)) => def += reg_cost(&tab.access_reg, r),
            Some(RetLoc::Pseudo) => def += t(tab.access_stack.get(&plan.return_width), "pseudo"),
            None => {}
        }
        if plan.stack_arg_bytes > 0 {
            let free = free_pairs(arch, plan.return_loc);
            let adj = tab.sp_adjust(plan.cleanup_side, plan.stack_arg_bytes, free).unwrap();
            match plan.cleanup_side {
                Side::Caller => call += adj,
                Side::Callee => def += adj,
            }
        }
        (call, def)
    }

    /// Candidate indices best first, with their totals.
    pub fn rank(
        cands: &[CallingConvention],
        corpus: &Corpus,
        arch: &Architecture,
        w: ScoreWeights,
    ) -> Vec<(usize, Cost)> {
        let mut rows: Vec<(usize, Cost, f64)> = cands
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut total = Cost::ZERO;
                for e in corpus.entries() {
                    let (call, def) = signature(c, &e.sig, arch);
                    total += Cost::new(
                        e.call_weight * call.bytes + e.def_weight * def.bytes,
                        e.call_weight * (call.cycles + def.cycles),
                    );
                }
                let s = w.alpha_bytes() * total.bytes as f64 + w.beta_cycles() * total.cycles as f64;
                (i, total, s)
            })
            .collect();
        rows.sort_by(|a, b| {
            a.2.partial_cmp(&b.2)
                .unwrap()
                .then(a.1.bytes.cmp(&b.1.bytes))
                .then(a.1.cycles.cmp(&b.1.cycles))
                .then(a.0.cmp(&b.0))
        });
        rows.into_iter().map(|(i, c, _)| (i, c)).collect()
    }
}

const REDUCED_SPACES: [&str; 6] = [
    "arch = stm8\n[return]\n8 = a | xl\n16 = x | y\n32 = x:y | y:x\n[args]\n8 = - | a | xl\n16 = - | x | y\n\
     32 = - | x:y\nmax_register_params = 2\nstop_on_stack = true\n[cleanup]\n\
     policies = caller_always | callee_always | conditional(0 8 16 +float)\n",
    "arch = z80\nexclude_reserved = true\n[return]\n8 = a | l\n16 = de | hl\n32 = hl:de | de:hl\n[args]\n\
     8 = - | a@1 l\n16 = - | hl@1 de\n32 = - | hl:de@1\nmax_register_params = 2\nstop_on_stack = true\n\
     [cleanup]\npolicies = caller_always | conditional(0 8 16 +float)\n[stack]\nslot_width_8bit = 8 | 16\n",
    "arch = sm83\n[return]\n8 = a | e\n16 = bc | de\n32 = de:bc\n[args]\n8 = - | a e | a\n16 = - | de bc\n\
     32 = - | de:bc@1\nmax_register_params = 2\nstop_on_stack = true\n[cleanup]\n\
     policies = caller_always | callee_always\n[stack]\nslot_width_8bit = 8 | 16\n",
    "arch = r3ka\nexclude_reserved = true\n[return]\n8 = a | l\n16 = hl | de\n32 = hl:de\n[args]\n\
     8 = - | a l\n16 = - | hl | hl@1 de\n32 = - | hl:de@1\nmax_register_params = 2\nstop_on_stack = true\n\
     [cleanup]\npolicies = caller_always | callee_always | conditional(0 8 16 +float)\n",
    "arch = ez80\n[return]\n8 = a | ixl\n16 = hl | ix\n32 = hl:de | ix:iy\n[args]\n8 = - | a | ixh\n\
     16 = - | hl | iy\nmax_register_params = 1\n[cleanup]\npolicies = caller_always | callee_always\n",
    "arch = tlcs90\nexclude_reserved = true\n[return]\n8 = a | c\n16 = hl | bc\n32 = hl:de\n[args]\n\
     8 = - | a l | c\n16 = - | hl | de hl\nmax_register_params = 3\nfirst_of_each_width = true\n\
     [cleanup]\npolicies = caller_always | conditional(0 8 +float)\n[stack]\nslot_width_8bit = 8 | 16\n",
];

#[test]
fn criterion_5_search_matches_naive_oracle() {
    let start = Instant::now();
    let corpus = Corpus::builtin();
    let mut failures = Vec::new();
    let mut sizes = Vec::new();
    for (k, text) in REDUCED_SPACES.iter().enumerate() {
        let space = SearchSpace::parse(text).unwrap();
        let arch = get_architecture(space.arch, space.exclude_reserved);
        let eval = Evaluation::run(&space, &corpus, &arch).unwrap();
        sizes.push(eval.candidates.len());
        for w in [ScoreWeights::default(), ScoreWeights::new(1.0, 0.0).unwrap(), ScoreWeights::new(0.0, 1.0).unwrap()] {
            let got: Vec<(usize, Cost)> = eval.rank(w).ranked.iter().map(|r| (r.index, r.cost)).collect();
            let want = oracle::rank(&eval.candidates, &corpus, &arch, w);
            if got != want {
                failures.push(format!("space {k} weights {w}: ranking differs"));
            } else if got[0] != want[0] {
                failures.push(format!("space {k} weights {w}: top differs"));
            }
        }
    }
    let elapsed = start.elapsed();
    let small = sizes.iter().all(|&n| n <= ORACLE_MAX_CANDIDATES);
    let ok = failures.is_empty() && sizes.len() >= ORACLE_MIN_SPACES && small && elapsed < ORACLE_BUDGET;
    report(5, ok, &format!("space sizes {sizes:?}, {elapsed:.2?}"));
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(sizes.len() >= ORACLE_MIN_SPACES);
    assert!(small, "{sizes:?}");
    assert!(elapsed < ORACLE_BUDGET);
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_6_full_spaces_at_scale() {
    let start = Instant::now();
    let corpus = Corpus::builtin();
    let mut counts = Vec::new();
    let mut deterministic = true;
    for id in [ArchId::Stm8, ArchId::Z80] {
        let space = SearchSpace::builtin(id);
        let arch = get_architecture(id, space.exclude_reserved);
        let w = ScoreWeights::default();
        let mut outputs = Vec::new();
        for jobs in [1, 3, 8, 8] {
            let r = cli::search_report(&space, &corpus, &arch, w, usize::MAX, &[], NonZeroUsize::new(jobs).unwrap())
                .unwrap();
            counts.push(r.evaluated_count);
            outputs.push(serde_json::to_string(&r).unwrap());
        }
        deterministic &= outputs.windows(2).all(|p| p[0] == p[1]);
    }
    let elapsed = start.elapsed();
    let ok = deterministic && elapsed < SCALE_BUDGET;
    report(
        6,
        ok,
        &format!(
            "candidates {:?} (x4 runs each), deterministic={deterministic}, {elapsed:.2?}",
            [counts[0], counts[4]]
        ),
    );
    assert!(deterministic);
    assert!(elapsed < SCALE_BUDGET, "{elapsed:?}");
}

// ---------------------------------------------------------------- 7

fn regs_of(a: &Architecture, excl: bool, width: u8) -> Vec<Reg> {
    a.registers.iter().filter(|r| r.width == width && a.is_allocatable_under(r.reg, excl)).map(|r| r.reg).collect()
}

fn arb_convention() -> impl Strategy<Value = CallingConvention> {
    (prop::sample::select(ArchId::ALL.to_vec()), any::<bool>()).prop_flat_map(|(id, excl)| {
        let a = get_architecture(id, excl);
        let r8 = regs_of(&a, excl, 8);
        let r16 = regs_of(&a, excl, 16);
        let pairs: Vec<RegLoc> = r16
            .iter()
            .flat_map(|&h| r16.iter().map(move |&l| (h, l)))
            .filter(|&(h, l)| !a.conflicts(h, l).unwrap())
            .map(|(h, l)| RegLoc::Pair(h, l))
            .collect();
        let ones = |rs: &[Reg]| rs.iter().map(|&r| RegLoc::One(r)).collect::<Vec<_>>();
        let locs = [ones(&r8), ones(&r16), pairs];
        let pref = |pool: Vec<RegLoc>| {
            prop::collection::vec(
                (prop::sample::select(pool), prop::option::of(1u8..=4))
                    .prop_map(|(loc, p)| ArgPref { loc, only_position: p }),
                0..=3,
            )
        };
        let ret32 =
            prop_oneof![Just(RetLoc::Pseudo), prop::sample::select(locs[2].clone()).prop_map(RetLoc::Registers)];
        let policy = prop_oneof![
            Just(CleanupPolicy::CALLER),
            Just(CleanupPolicy::CALLEE),
            (prop::collection::btree_set(prop::sample::select(vec![0u8, 8, 16, 32]), 0..=4), any::<bool>()).prop_map(
                |(ws, float)| CleanupPolicy {
                    mode: CleanupMode::Conditional,
                    callee_if_return_width_in: ccwb_core::WidthSet::of(&ws.into_iter().collect::<Vec<_>>()).unwrap(),
                    callee_if_float_float: float,
                }
            ),
        ];
        let slots = if a.push_granularity == 16 { vec![8u8, 16] } else { vec![8u8] };
        (
            "[a-z][a-z0-9_-]{0,12}",
            prop::sample::select(locs[0].clone()),
            prop::sample::select(locs[1].clone()),
            ret32,
            (pref(locs[0].clone()), pref(locs[1].clone()), pref(locs[2].clone())),
            (0u8..=4, any::<bool>(), any::<bool>(), policy, prop::sample::select(slots)),
        )
            .prop_map(move |(name, r8, r16, r32, (a8, a16, a32), (max, stop, first, cleanup, slot))| {
                CallingConvention {
                    name,
                    arch: id,
                    exclude_reserved: excl,
                    ret: [RetLoc::Registers(r8), RetLoc::Registers(r16), r32],
                    arg_prefs: [a8, a16, a32],
                    max_register_params: max,
                    stop_on_stack: stop,
                    first_of_each_width: first,
                    cleanup,
                    stack_slot_width_for_8bit: slot,
                }
            })
    })
}

#[test]
fn criterion_7_round_trips() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for name in BUILTIN_CONVENTIONS {
        let c = conv(name);
        let text = c.print();
        match CallingConvention::parse(&text) {
            Ok(back) if back == c && back.print() == text => {}
            other => failures.push(format!("{name}: {other:?}")),
        }
    }
    for e in Corpus::builtin().entries() {
        let text = e.sig.to_string();
        if parse_signature(&text).ok().as_ref() != Some(&e.sig) {
            failures.push(format!("signature `{text}`"));
        }
    }
    let mut runner = TestRunner::new(Config { cases: ROUND_TRIP_DOCS, failure_persistence: None, ..Config::default() });
    let docs = Cell::new(0u32);
    let convs = runner.run(&arb_convention(), |c| {
        c.validate().map_err(|e| TestCaseError::fail(format!("generator produced an invalid convention: {e}")))?;
        let text = c.print();
        let back = CallingConvention::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.print(), text);
        docs.set(docs.get() + 1);
        Ok(())
    });
    let sigs = Cell::new(0u32);
    let mut runner = TestRunner::new(Config { cases: ROUND_TRIP_DOCS, failure_persistence: None, ..Config::default() });
    let sig_run = runner.run(&arb_signature(6, true), |s| {
        let text = s.to_string();
        prop_assert_eq!(parse_signature(&text).ok(), Some(s));
        sigs.set(sigs.get() + 1);
        Ok(())
    });
    let (docs, sigs) = (docs.get(), sigs.get());
    let elapsed = start.elapsed();
    let ok = failures.is_empty()
        && convs.is_ok()
        && sig_run.is_ok()
        && docs >= ROUND_TRIP_DOCS
        && sigs >= ROUND_TRIP_DOCS
        && elapsed < ROUND_TRIP_BUDGET;
    report(
        7,
        ok,
        &format!(
            "{} builtins, {docs} generated documents, {sigs} signatures, {elapsed:.2?}",
            BUILTIN_CONVENTIONS.len()
        ),
    );
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    if let Err(e) = convs {
        panic!("{e}");
    }
    if let Err(e) = sig_run {
        panic!("{e}");
    }
    assert!(docs >= ROUND_TRIP_DOCS);
    assert!(sigs >= ROUND_TRIP_DOCS);
    assert!(elapsed < ROUND_TRIP_BUDGET, "{elapsed:?}");
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_8_new_conventions_are_smaller() {
    let mut lines = Vec::new();
    let mut ok = true;
    for (arch, old, new) in [("z80", "z80-old", "z80-new"), ("stm8", "stm8-old", "stm8-new")] {
        let (code, out, err) = run_cli(&["compare", "--arch", arch, old, new, "--format", "json"]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let row = &v["totals"][1];
        assert_eq!(row["label"], new);
        let delta = row["bytes_delta_pct"].as_f64().unwrap();
        ok &= delta < 0.0;
        lines.push(format!("{arch} {new} bytes {delta:+.1}%"));
    }
    report(8, ok, &lines.join(", "));
    assert!(ok, "{lines:?}");
}
