//! Lowering of assignment plans to marshalling steps, and their cost.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::arch::{Architecture, Reg};
use crate::conv::{assign, AssignmentPlan, CallingConvention, ParamLoc, RegLoc, RetLoc, Side};
use crate::cost::{Cost, CostTables};
use crate::error::{Error, Result};
use crate::sig::{Corpus, CorpusEntry, FunctionSignature};

/// One abstract code fragment on the caller or callee side of a call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MarshalStep {
    LoadReg {
        reg: Reg,
        width: u8,
    },
    PushStack {
        slot_width: u8,
        value_width: u8,
    },
    /// Two adjacent 8-bit arguments stored by one 16-bit push.
    PushPair,
    Call,
    SpAdjust {
        bytes: u64,
        side: Side,
        free_16bit_regs: u64,
    },
    Ret,
    AccessReg {
        reg: Reg,
        width: u8,
    },
    AccessStack {
        width: u8,
    },
}

impl fmt::Display for MarshalStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarshalStep::LoadReg { reg, width } => write!(f, "load_reg({reg}, {width})"),
            MarshalStep::PushStack { slot_width, value_width } => {
                write!(f, "push_stack({slot_width}, {value_width})")
            }
            MarshalStep::PushPair => f.write_str("push_pair"),
            MarshalStep::Call => f.write_str("call"),
            MarshalStep::SpAdjust { bytes, side, free_16bit_regs } => {
                write!(f, "sp_adjust({bytes}, {side}, {free_16bit_regs})")
            }
            MarshalStep::Ret => f.write_str("ret"),
            MarshalStep::AccessReg { reg, width } => write!(f, "access_reg({reg}, {width})"),
            MarshalStep::AccessStack { width } => write!(f, "access_stack({width})"),
        }
    }
}

/// Number of allocatable 16-bit registers not holding the return value.
pub fn free_16bit_regs(plan: &AssignmentPlan, arch: &Architecture) -> u64 {
    let taken = match plan.return_loc {
        Some(RetLoc::Registers(loc)) => loc.regs().map(|r| arch.atoms(r)).fold(0, |a, b| a | b),
        _ => 0,
    };
    arch.allocatable().filter(|r| r.width == 16 && arch.atoms(r.reg) & taken == 0).count() as u64
}

fn reg_steps(loc: RegLoc, step: fn(Reg, u8) -> MarshalStep, out: &mut Vec<MarshalStep>) {
    match loc {
        RegLoc::One(r) => out.push(step(r, r.width())),
        RegLoc::Pair(h, l) => {
            out.push(step(h, 16));
            out.push(step(l, 16));
        }
    }
}

/// Caller-side steps: stack arguments pushed right to left, register
/// loads, the call, and the caller's stack cleanup if it owns it.
///
/// On targets that can only push 16 bits at a time, two adjacent 8-bit
/// stack arguments in 8-bit slots share one push.
pub fn lower_call_site(plan: &AssignmentPlan, arch: &Architecture) -> Vec<MarshalStep> {
    let mut groups = Vec::new();
    let stack: Vec<(u8, u64)> = plan
        .param_locs
        .iter()
        .filter_map(|l| match *l {
            ParamLoc::Stack { width, slot_bytes, .. } => Some((width, slot_bytes)),
            ParamLoc::Registers(_) => None,
        })
        .collect();
    let narrow = |i: usize| stack.get(i).is_some_and(|&(w, s)| w == 8 && s == 1);
    let mut i = 0;
    while i < stack.len() {
        if arch.push_granularity == 16 && narrow(i) && narrow(i + 1) {
            groups.push(MarshalStep::PushPair);
            i += 2;
        } else {
            let (w, s) = stack[i];
            groups.push(MarshalStep::PushStack { slot_width: (s * 8) as u8, value_width: w });
            i += 1;
        }
    }
    let mut steps: Vec<MarshalStep> = groups.into_iter().rev().collect();
    for loc in &plan.param_locs {
        if let ParamLoc::Registers(r) = loc {
            reg_steps(*r, |reg, width| MarshalStep::LoadReg { reg, width }, &mut steps);
        }
    }
    steps.push(MarshalStep::Call);
    if plan.cleanup_side == Side::Caller && plan.stack_arg_bytes > 0 {
        steps.push(MarshalStep::SpAdjust {
            bytes: plan.stack_arg_bytes,
            side: Side::Caller,
            free_16bit_regs: free_16bit_regs(plan, arch),
        });
    }
    steps
}

/// Callee-side steps: one representative access per parameter and for the
/// return value, the callee's stack cleanup if it owns it, and the return.
pub fn lower_definition(plan: &AssignmentPlan, arch: &Architecture) -> Vec<MarshalStep> {
    let mut steps = Vec::new();
    for loc in &plan.param_locs {
        match *loc {
            ParamLoc::Registers(r) => reg_steps(r, |reg, width| MarshalStep::AccessReg { reg, width }, &mut steps),
            ParamLoc::Stack { width, .. } => steps.push(MarshalStep::AccessStack { width }),
        }
    }
    match plan.return_loc {
        Some(RetLoc::Registers(r)) => reg_steps(r, |reg, width| MarshalStep::AccessReg { reg, width }, &mut steps),
        Some(RetLoc::Pseudo) => steps.push(MarshalStep::AccessStack { width: plan.return_width }),
        None => {}
    }
    if plan.cleanup_side == Side::Callee && plan.stack_arg_bytes > 0 {
        steps.push(MarshalStep::SpAdjust {
            bytes: plan.stack_arg_bytes,
            side: Side::Callee,
            free_16bit_regs: free_16bit_regs(plan, arch),
        });
    }
    steps.push(MarshalStep::Ret);
    steps
}

/// Sums the table entries of `steps`.
pub fn cost_of(steps: &[MarshalStep], tables: &CostTables) -> Result<Cost> {
    steps.iter().try_fold(Cost::ZERO, |acc, step| {
        let c = match *step {
            MarshalStep::LoadReg { reg, width } => tables.load.get(&(reg, width)).copied(),
            MarshalStep::PushStack { slot_width, value_width } => tables.push.get(&(slot_width, value_width)).copied(),
            MarshalStep::PushPair => tables.push_pair,
            MarshalStep::Call => Some(tables.call),
            MarshalStep::SpAdjust { bytes, side, free_16bit_regs } => tables.sp_adjust(side, bytes, free_16bit_regs),
            MarshalStep::Ret => Some(tables.ret),
            MarshalStep::AccessReg { reg, width } => tables.access_reg.get(&(reg, width)).copied(),
            MarshalStep::AccessStack { width } => tables.access_stack.get(&width).copied(),
        };
        c.map(|c| acc + c).ok_or_else(|| Error::MissingTableEntry(format!("{step} on {}", tables.arch)))
    })
}

/// Per-call-site and one-time definition cost of one function type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SignatureCost {
    pub call_site: Cost,
    pub definition: Cost,
}

pub fn signature_cost(conv: &CallingConvention, sig: &FunctionSignature, arch: &Architecture) -> Result<SignatureCost> {
    let plan = assign(conv, sig, arch)?;
    Ok(SignatureCost {
        call_site: cost_of(&lower_call_site(&plan, arch), &arch.cost_tables)?,
        definition: cost_of(&lower_definition(&plan, arch), &arch.cost_tables)?,
    })
}

/// Weighted cost of one corpus entry.
///
/// Call-site code is repeated per call and definition code per definition,
/// but the definition's instructions also run on every call. So bytes are
/// `call_weight * call_site + def_weight * definition` while cycles are
/// `call_weight * (call_site + definition)`.
pub fn weigh(c: SignatureCost, call_weight: u64, def_weight: u64) -> Cost {
    Cost::new(
        call_weight * c.call_site.bytes + def_weight * c.definition.bytes,
        call_weight * (c.call_site.cycles + c.definition.cycles),
    )
}

pub fn entry_cost(conv: &CallingConvention, entry: &CorpusEntry, arch: &Architecture) -> Result<Cost> {
    Ok(weigh(signature_cost(conv, &entry.sig, arch)?, entry.call_weight, entry.def_weight))
}

pub fn corpus_cost(conv: &CallingConvention, corpus: &Corpus, arch: &Architecture) -> Result<Cost> {
    corpus.entries().iter().try_fold(Cost::ZERO, |acc, e| Ok(acc + entry_cost(conv, e, arch)?))
}

/// Linear trade-off between code size and speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreWeights {
    alpha_bytes: f64,
    beta_cycles: f64,
}

impl ScoreWeights {
    pub fn new(alpha_bytes: f64, beta_cycles: f64) -> Result<Self> {
        if !(alpha_bytes.is_finite() && beta_cycles.is_finite()) {
            return Err(Error::invariant("score-weights", "weights must be finite"));
        }
        if alpha_bytes < 0.0 || beta_cycles < 0.0 {
            return Err(Error::NegativeWeight);
        }
        if alpha_bytes + beta_cycles <= 0.0 {
            return Err(Error::invariant("score-weights", "at least one weight must be positive"));
        }
        Ok(ScoreWeights { alpha_bytes, beta_cycles })
    }

    pub fn alpha_bytes(self) -> f64 {
        self.alpha_bytes
    }

    pub fn beta_cycles(self) -> f64 {
        self.beta_cycles
    }
}

impl Default for ScoreWeights {
    /// Size first: ten cycles weigh as much as one byte.
    fn default() -> Self {
        ScoreWeights { alpha_bytes: 1.0, beta_cycles: 0.1 }
    }
}

impl fmt::Display for ScoreWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.alpha_bytes, self.beta_cycles)
    }
}

impl core::str::FromStr for ScoreWeights {
    type Err = Error;

    /// `alpha,beta`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) =
            s.split_once(',').ok_or_else(|| Error::syntax(1, format!("expected `alpha,beta`, found `{s}`")))?;
        let num =
            |t: &str| t.trim().parse::<f64>().map_err(|_| Error::syntax(1, format!("`{}` is not a number", t.trim())));
        ScoreWeights::new(num(a)?, num(b)?)
    }
}

pub fn score(cost: Cost, w: ScoreWeights) -> f64 {
    w.alpha_bytes * cost.bytes as f64 + w.beta_cycles * cost.cycles as f64
}

/// Human-readable listing of a step sequence.
pub fn describe(steps: &[MarshalStep]) -> alloc::string::String {
    steps.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
