//! Per-architecture cost tables and their text format.
//!
//! A table file is a versioned list of rows
//! `<primitive> <key-fields...> <bytes> <cycles>` with `#` comments. The
//! `sp_adjust` rows accept `lo-hi` ranges in both key fields.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul, RangeInclusive};

use crate::arch::{register_file, ArchId, Reg};
use crate::conv::Side;
use crate::error::{Error, Result};
use crate::text::{content_lines, parse_u64, parse_width};

pub const FORMAT_HEADER: &str = "ccwb-cost-tables 1";

/// Code size and execution time of a code fragment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cost {
    pub bytes: u64,
    pub cycles: u64,
}

impl Cost {
    pub const ZERO: Cost = Cost { bytes: 0, cycles: 0 };

    pub const fn new(bytes: u64, cycles: u64) -> Self {
        Cost { bytes, cycles }
    }

    /// Weakly better on both axes and strictly better on one.
    pub fn dominates(self, other: Cost) -> bool {
        self.bytes <= other.bytes && self.cycles <= other.cycles && self != other
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost::new(self.bytes + o.bytes, self.cycles + o.cycles)
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, o: Cost) {
        *self = *self + o;
    }
}

impl Mul<u64> for Cost {
    type Output = Cost;
    fn mul(self, k: u64) -> Cost {
        Cost::new(self.bytes * k, self.cycles * k)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bytes, {} cycles", self.bytes, self.cycles)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct SpRow {
    side: Side,
    bytes: RangeInclusive<u64>,
    free: RangeInclusive<u64>,
    cost: Cost,
}

/// Costs of the marshalling primitives on one architecture variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostTables {
    pub arch: ArchId,
    pub call: Cost,
    pub ret: Cost,
    /// Caller side: (register, value width) from a stack-resident local.
    pub load: BTreeMap<(Reg, u8), Cost>,
    /// Caller side: (slot width, value width) per pushed argument.
    pub push: BTreeMap<(u8, u8), Cost>,
    /// Caller side: two adjacent 8-bit arguments in one 16-bit push.
    pub push_pair: Option<Cost>,
    /// Callee side: one representative use of a register parameter.
    pub access_reg: BTreeMap<(Reg, u8), Cost>,
    /// Callee side: one representative use of a stack parameter, by width.
    pub access_stack: BTreeMap<u8, Cost>,
    sp_adjust: Vec<SpRow>,
}

const BUILTIN: [(ArchId, &str); 10] = [
    (ArchId::Stm8, include_str!("../data/costs/stm8.cost")),
    (ArchId::Z80, include_str!("../data/costs/z80.cost")),
    (ArchId::Z180, include_str!("../data/costs/z180.cost")),
    (ArchId::Z80n, include_str!("../data/costs/z80n.cost")),
    (ArchId::Sm83, include_str!("../data/costs/sm83.cost")),
    (ArchId::R2k, include_str!("../data/costs/r2k.cost")),
    (ArchId::R2ka, include_str!("../data/costs/r2ka.cost")),
    (ArchId::R3ka, include_str!("../data/costs/r3ka.cost")),
    (ArchId::Ez80, include_str!("../data/costs/ez80.cost")),
    (ArchId::Tlcs90, include_str!("../data/costs/tlcs90.cost")),
];

impl CostTables {
    /// Text of the embedded default table for `id`.
    pub fn builtin_source(id: ArchId) -> &'static str {
        BUILTIN.iter().find(|(a, _)| *a == id).map(|(_, s)| *s).unwrap_or_default()
    }

    pub fn builtin(id: ArchId) -> CostTables {
        match CostTables::parse(Self::builtin_source(id)) {
            Ok(t) => t,
            Err(e) => panic!("embedded cost table for {id} is invalid: {e}"),
        }
    }

    fn empty(arch: ArchId) -> Self {
        CostTables {
            arch,
            call: Cost::ZERO,
            ret: Cost::ZERO,
            load: BTreeMap::new(),
            push: BTreeMap::new(),
            push_pair: None,
            access_reg: BTreeMap::new(),
            access_stack: BTreeMap::new(),
            sp_adjust: Vec::new(),
        }
    }

    /// Cost of adjusting the stack pointer by `bytes` on `side` with `free`
    /// unused 16-bit registers available.
    pub fn sp_adjust(&self, side: Side, bytes: u64, free: u64) -> Option<Cost> {
        self.sp_adjust
            .iter()
            .find(|r| r.side == side && r.bytes.contains(&bytes) && r.free.contains(&free))
            .map(|r| r.cost)
    }

    /// Largest free-register count with any `sp_adjust` row.
    pub fn max_free(&self) -> u64 {
        self.sp_adjust.iter().map(|r| *r.free.end()).max().unwrap_or(0)
    }

    /// Largest stack adjustment with any `sp_adjust` row.
    pub fn max_sp_bytes(&self) -> u64 {
        self.sp_adjust.iter().map(|r| *r.bytes.end()).max().unwrap_or(0)
    }

    pub fn parse(text: &str) -> Result<CostTables> {
        let mut lines = content_lines(text);
        match lines.next() {
            Some((_, FORMAT_HEADER)) => {}
            Some((n, other)) => {
                return Err(Error::syntax(1, format!("expected `{FORMAT_HEADER}`, found `{other}`")).at_line(n))
            }
            None => return Err(Error::syntax(1, format!("missing `{FORMAT_HEADER}` header"))),
        }
        let arch = match lines.next() {
            Some((n, line)) => {
                let id =
                    line.strip_prefix("arch ").ok_or_else(|| Error::syntax(1, "expected `arch <id>`").at_line(n))?;
                id.trim().parse::<ArchId>().map_err(|e| e.at_line(n))?
            }
            None => return Err(Error::syntax(1, "missing `arch <id>` line")),
        };
        let regs = register_file(arch);
        let reg = |name: &str| -> Result<Reg> {
            name.parse::<Reg>()
                .ok()
                .filter(|r| regs.iter().any(|d| d.reg == *r))
                .ok_or_else(|| Error::UnknownRegister { arch, name: name.to_string() })
        };

        let mut t = CostTables::empty(arch);
        let (mut call, mut ret) = (None, None);
        for (n, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let wrap = |e: Error| e.at_line(n);
            let (key, nums) = fields.split_at(fields.len().saturating_sub(2));
            if nums.len() != 2 || key.is_empty() {
                return Err(wrap(Error::syntax(1, "expected `<primitive> <keys...> <bytes> <cycles>`")));
            }
            let cost = Cost::new(parse_u64(nums[0]).map_err(wrap)?, parse_u64(nums[1]).map_err(wrap)?);
            let dup = || wrap(Error::syntax(1, format!("duplicate entry `{}`", key.join(" "))));
            let arity = |k: usize| {
                if key.len() == k + 1 {
                    Ok(())
                } else {
                    Err(wrap(Error::syntax(1, format!("`{}` takes {k} key field(s)", key[0]))))
                }
            };
            match key[0] {
                "call" | "ret" => {
                    arity(0)?;
                    let slot = if key[0] == "call" { &mut call } else { &mut ret };
                    if slot.replace(cost).is_some() {
                        return Err(dup());
                    }
                }
                "push_pair" => {
                    arity(0)?;
                    if t.push_pair.replace(cost).is_some() {
                        return Err(dup());
                    }
                }
                "load" | "access_reg" => {
                    arity(2)?;
                    let r = reg(key[1]).map_err(wrap)?;
                    let w = parse_width(key[2]).map_err(wrap)?;
                    let map = if key[0] == "load" { &mut t.load } else { &mut t.access_reg };
                    if map.insert((r, w), cost).is_some() {
                        return Err(dup());
                    }
                }
                "push" => {
                    arity(2)?;
                    let slot = parse_width(key[1]).map_err(wrap)?;
                    let w = parse_width(key[2]).map_err(wrap)?;
                    if t.push.insert((slot, w), cost).is_some() {
                        return Err(dup());
                    }
                }
                "access_stack" => {
                    arity(1)?;
                    let w = parse_width(key[1]).map_err(wrap)?;
                    if t.access_stack.insert(w, cost).is_some() {
                        return Err(dup());
                    }
                }
                "sp_adjust" => {
                    arity(3)?;
                    let side = match key[1] {
                        "caller" => Side::Caller,
                        "callee" => Side::Callee,
                        other => {
                            return Err(wrap(Error::syntax(1, format!("expected caller or callee, found `{other}`"))))
                        }
                    };
                    let row = SpRow {
                        side,
                        bytes: parse_range(key[2]).map_err(wrap)?,
                        free: parse_range(key[3]).map_err(wrap)?,
                        cost,
                    };
                    let overlaps = t.sp_adjust.iter().any(|o| {
                        o.side == row.side
                            && o.bytes.start() <= row.bytes.end()
                            && row.bytes.start() <= o.bytes.end()
                            && o.free.start() <= row.free.end()
                            && row.free.start() <= o.free.end()
                    });
                    if overlaps {
                        return Err(wrap(Error::syntax(1, "sp_adjust row overlaps an earlier row")));
                    }
                    t.sp_adjust.push(row);
                }
                other => return Err(wrap(Error::syntax(1, format!("unknown primitive `{other}`")))),
            }
        }
        t.call = call.ok_or_else(|| Error::MissingTableEntry("call".to_string()))?;
        t.ret = ret.ok_or_else(|| Error::MissingTableEntry("ret".to_string()))?;
        Ok(t)
    }

    /// Renders the tables in the text format, one row per key with
    /// `sp_adjust` ranges kept as loaded.
    pub fn print(&self) -> String {
        let mut out = String::new();
        let mut row = |key: String, c: Cost| {
            out.push_str(&format!("{key} {} {}\n", c.bytes, c.cycles));
        };
        row(format!("{FORMAT_HEADER}\narch {}\ncall", self.arch), self.call);
        row("ret".to_string(), self.ret);
        for ((r, w), c) in &self.load {
            row(format!("load {r} {w}"), *c);
        }
        for ((s, w), c) in &self.push {
            row(format!("push {s} {w}"), *c);
        }
        if let Some(c) = self.push_pair {
            row("push_pair".to_string(), c);
        }
        for ((r, w), c) in &self.access_reg {
            row(format!("access_reg {r} {w}"), *c);
        }
        for (w, c) in &self.access_stack {
            row(format!("access_stack {w}"), *c);
        }
        for r in &self.sp_adjust {
            let range = |x: &RangeInclusive<u64>| {
                if x.start() == x.end() {
                    x.start().to_string()
                } else {
                    format!("{}-{}", x.start(), x.end())
                }
            };
            row(format!("sp_adjust {} {} {}", r.side, range(&r.bytes), range(&r.free)), r.cost);
        }
        out
    }
}

fn parse_range(token: &str) -> Result<RangeInclusive<u64>> {
    let (lo, hi) = match token.split_once('-') {
        Some((lo, hi)) => (parse_u64(lo)?, parse_u64(hi)?),
        None => {
            let v = parse_u64(token)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(Error::syntax(1, format!("empty range `{token}`")));
    }
    Ok(lo..=hi)
}
