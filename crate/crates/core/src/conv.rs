//! Declarative calling conventions and the parameter assignment they induce.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::arch::{get_architecture, ArchId, Architecture, Reg};
use crate::error::{Error, Result};
use crate::sig::{FunctionSignature, TypeKind};
use crate::text::{content_lines, doc_line, parse_bool, parse_u64, parse_width, unknown_key, DocLine};

/// Which side of a call removes stack arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Caller,
    Callee,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Caller => "caller",
            Side::Callee => "callee",
        })
    }
}

/// The three value widths a convention distinguishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WidthClass {
    W8,
    W16,
    W32,
}

impl WidthClass {
    pub const ALL: [WidthClass; 3] = [WidthClass::W8, WidthClass::W16, WidthClass::W32];

    pub fn from_bits(bits: u8) -> Result<Self> {
        match bits {
            8 => Ok(WidthClass::W8),
            16 => Ok(WidthClass::W16),
            32 => Ok(WidthClass::W32),
            w => Err(Error::UnsupportedWidth(w)),
        }
    }

    pub fn bits(self) -> u8 {
        match self {
            WidthClass::W8 => 8,
            WidthClass::W16 => 16,
            WidthClass::W32 => 32,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A set of value widths drawn from {0, 8, 16, 32}; 0 stands for void.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct WidthSet(u8);

impl WidthSet {
    pub const EMPTY: WidthSet = WidthSet(0);
    const WIDTHS: [u8; 4] = [0, 8, 16, 32];

    fn bit(width: u8) -> Option<u8> {
        Self::WIDTHS.iter().position(|w| *w == width).map(|i| 1 << i)
    }

    pub fn of(widths: &[u8]) -> Result<Self> {
        widths.iter().try_fold(WidthSet::EMPTY, |s, w| {
            Self::bit(*w).map(|b| WidthSet(s.0 | b)).ok_or(Error::UnsupportedWidth(*w))
        })
    }

    pub fn contains(self, width: u8) -> bool {
        Self::bit(width).is_some_and(|b| self.0 & b != 0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for WidthSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for w in Self::WIDTHS.into_iter().filter(|w| self.contains(*w)) {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{w}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for WidthSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let widths = s.split_whitespace().map(parse_width).collect::<Result<Vec<_>>>()?;
        WidthSet::of(&widths)
    }
}

/// A register, or an ordered pair of 16-bit registers (most significant
/// first) holding a 32-bit value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub enum RegLoc {
    One(Reg),
    Pair(Reg, Reg),
}

impl RegLoc {
    /// Width of the value this location holds.
    pub fn width(self) -> u8 {
        match self {
            RegLoc::One(r) => r.width(),
            RegLoc::Pair(..) => 32,
        }
    }

    pub fn regs(self) -> impl Iterator<Item = Reg> {
        let (a, b) = match self {
            RegLoc::One(r) => (r, None),
            RegLoc::Pair(h, l) => (h, Some(l)),
        };
        core::iter::once(a).chain(b)
    }

    fn atoms(self, arch: &Architecture) -> u32 {
        self.regs().map(|r| arch.atoms(r)).fold(0, |a, b| a | b)
    }
}

impl fmt::Display for RegLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegLoc::One(r) => write!(f, "{r}"),
            RegLoc::Pair(h, l) => write!(f, "{h}:{l}"),
        }
    }
}

impl FromStr for RegLoc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((h, l)) => Ok(RegLoc::Pair(h.parse()?, l.parse()?)),
            None => Ok(RegLoc::One(s.parse()?)),
        }
    }
}

/// One entry of an argument preference list. `only_position` restricts
/// the entry to the parameter at that 1-based position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct ArgPref {
    pub loc: RegLoc,
    pub only_position: Option<u8>,
}

impl ArgPref {
    pub fn any(loc: RegLoc) -> Self {
        ArgPref { loc, only_position: None }
    }

    pub fn at(loc: RegLoc, position: u8) -> Self {
        ArgPref { loc, only_position: Some(position) }
    }
}

impl fmt::Display for ArgPref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.loc)?;
        if let Some(p) = self.only_position {
            write!(f, "@{p}")?;
        }
        Ok(())
    }
}

impl FromStr for ArgPref {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('@') {
            Some((loc, pos)) => {
                let p = pos
                    .parse::<u8>()
                    .ok()
                    .filter(|p| *p >= 1)
                    .ok_or_else(|| Error::syntax(1, format!("bad position tag `@{pos}`")))?;
                Ok(ArgPref::at(loc.parse()?, p))
            }
            None => Ok(ArgPref::any(s.parse()?)),
        }
    }
}

/// Where a return value of one width lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub enum RetLoc {
    Registers(RegLoc),
    /// Fixed memory locations used like registers; costed as stack memory.
    Pseudo,
}

impl fmt::Display for RetLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetLoc::Registers(l) => write!(f, "{l}"),
            RetLoc::Pseudo => f.write_str("pseudo"),
        }
    }
}

impl FromStr for RetLoc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pseudo" => Ok(RetLoc::Pseudo),
            s => Ok(RetLoc::Registers(s.parse()?)),
        }
    }
}

macro_rules! string_serde {
    ($($t:ty),*) => {$(
        impl TryFrom<String> for $t {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                s.parse()
            }
        }

        impl From<$t> for String {
            fn from(v: $t) -> String {
                v.to_string()
            }
        }
    )*};
}

string_serde!(WidthSet, RegLoc, ArgPref, RetLoc);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CleanupMode {
    CallerAlways,
    CalleeAlways,
    Conditional,
}

impl CleanupMode {
    fn name(self) -> &'static str {
        match self {
            CleanupMode::CallerAlways => "caller_always",
            CleanupMode::CalleeAlways => "callee_always",
            CleanupMode::Conditional => "conditional",
        }
    }
}

impl FromStr for CleanupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [CleanupMode::CallerAlways, CleanupMode::CalleeAlways, CleanupMode::Conditional]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::syntax(1, format!("unknown cleanup mode `{s}`")))
    }
}

/// Who removes stack arguments, possibly depending on the function type.
/// The two conditions are only consulted in conditional mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CleanupPolicy {
    pub mode: CleanupMode,
    pub callee_if_return_width_in: WidthSet,
    pub callee_if_float_float: bool,
}

impl CleanupPolicy {
    pub const CALLER: CleanupPolicy = CleanupPolicy {
        mode: CleanupMode::CallerAlways,
        callee_if_return_width_in: WidthSet::EMPTY,
        callee_if_float_float: false,
    };

    pub const CALLEE: CleanupPolicy = CleanupPolicy { mode: CleanupMode::CalleeAlways, ..CleanupPolicy::CALLER };

    /// Callee cleanup when the return value leaves a 16-bit register free
    /// (void, 8 or 16 bits) or for float functions of a float.
    pub fn small_return_or_float() -> CleanupPolicy {
        CleanupPolicy {
            mode: CleanupMode::Conditional,
            callee_if_return_width_in: WidthSet(0b0111),
            callee_if_float_float: true,
        }
    }
}

impl fmt::Display for CleanupPolicy {
    /// Compact one-line form, e.g. `conditional(0 8 16 +float)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mode.name())?;
        if self.mode == CleanupMode::Conditional {
            write!(f, "({}", self.callee_if_return_width_in)?;
            if self.callee_if_float_float {
                let sep = if self.callee_if_return_width_in.is_empty() { "" } else { " " };
                write!(f, "{sep}+float")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for CleanupPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(inner) = s.strip_prefix("conditional(") else {
            let mode: CleanupMode = s.parse()?;
            if mode == CleanupMode::Conditional {
                return Err(Error::syntax(1, "conditional policy needs `(widths [+float])`"));
            }
            return Ok(CleanupPolicy { mode, ..CleanupPolicy::CALLER });
        };
        let inner = inner.strip_suffix(')').ok_or_else(|| Error::syntax(1, format!("missing `)` in `{s}`")))?;
        let mut widths = Vec::new();
        let mut float = false;
        for tok in inner.split_whitespace() {
            if tok == "+float" {
                float = true;
            } else {
                widths.push(parse_width(tok)?);
            }
        }
        Ok(CleanupPolicy {
            mode: CleanupMode::Conditional,
            callee_if_return_width_in: WidthSet::of(&widths)?,
            callee_if_float_float: float,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CallingConvention {
    pub name: String,
    /// Architecture the convention was designed for. It may be used on any
    /// target that declares every register it mentions.
    pub arch: ArchId,
    /// Whether ix and iy are kept out of the convention.
    pub exclude_reserved: bool,
    /// Return locations for 8, 16 and 32-bit values.
    pub ret: [RetLoc; 3],
    /// Argument preference lists for 8, 16 and 32-bit parameters.
    pub arg_prefs: [Vec<ArgPref>; 3],
    pub max_register_params: u8,
    /// Once a parameter goes to the stack, all later ones do too.
    pub stop_on_stack: bool,
    /// Only the first parameter of each width may use a register.
    pub first_of_each_width: bool,
    pub cleanup: CleanupPolicy,
    /// Bits an 8-bit stack argument occupies (8 or 16).
    pub stack_slot_width_for_8bit: u8,
}

impl CallingConvention {
    pub fn ret_loc(&self, w: WidthClass) -> RetLoc {
        self.ret[w.index()]
    }

    pub fn prefs(&self, w: WidthClass) -> &[ArgPref] {
        &self.arg_prefs[w.index()]
    }

    /// True when some function type gets callee cleanup, which can block
    /// tail calls. Reported but not costed.
    pub fn may_hinder_tail_calls(&self) -> bool {
        match self.cleanup.mode {
            CleanupMode::CallerAlways => false,
            CleanupMode::CalleeAlways => true,
            CleanupMode::Conditional => {
                !self.cleanup.callee_if_return_width_in.is_empty() || self.cleanup.callee_if_float_float
            }
        }
    }

    fn locations(&self) -> impl Iterator<Item = RegLoc> + '_ {
        let rets = self.ret.iter().filter_map(|r| match r {
            RetLoc::Registers(l) => Some(*l),
            RetLoc::Pseudo => None,
        });
        rets.chain(self.arg_prefs.iter().flatten().map(|p| p.loc))
    }

    /// Checks every invariant against the convention's own architecture.
    pub fn validate(&self) -> Result<()> {
        self.validate_for(&get_architecture(self.arch, self.exclude_reserved))
    }

    /// Checks every invariant against `arch` (with the convention's own
    /// reserved-register profile).
    pub fn validate_for(&self, arch: &Architecture) -> Result<()> {
        for loc in self.locations() {
            for r in loc.regs() {
                if !arch.declares(r) {
                    return Err(Error::invariant(
                        "registers-declared",
                        format!("`{r}` is not a register of {}", arch.id),
                    ));
                }
                if !arch.is_allocatable_under(r, self.exclude_reserved) {
                    return Err(Error::invariant(
                        "registers-allocatable",
                        format!("`{r}` is reserved under the ix/iy exclusion profile"),
                    ));
                }
            }
            if let RegLoc::Pair(h, l) = loc {
                if arch.atoms(h) & arch.atoms(l) != 0 {
                    return Err(Error::invariant(
                        "pair-non-conflicting",
                        format!("`{h}` and `{l}` overlap in `{loc}`"),
                    ));
                }
                if h.width() != 16 || l.width() != 16 {
                    return Err(Error::invariant("pair-of-16-bit", format!("`{loc}` must pair two 16-bit registers")));
                }
            }
        }
        for w in WidthClass::ALL {
            let ok = match self.ret_loc(w) {
                RetLoc::Pseudo => w == WidthClass::W32,
                RetLoc::Registers(l) => l.width() == w.bits(),
            };
            if !ok {
                return Err(Error::invariant(
                    "return-width",
                    format!("{}-bit return location `{}` has the wrong width", w.bits(), self.ret_loc(w)),
                ));
            }
            for p in self.prefs(w) {
                if p.loc.width() != w.bits() {
                    return Err(Error::invariant(
                        "argument-width",
                        format!("`{p}` cannot hold a {}-bit argument", w.bits()),
                    ));
                }
                if p.only_position == Some(0) {
                    return Err(Error::invariant("position-tag", format!("`{p}`: positions start at 1")));
                }
            }
        }
        if !matches!(self.stack_slot_width_for_8bit, 8 | 16) {
            return Err(Error::invariant(
                "slot-width",
                format!("8-bit stack slots must be 8 or 16 bits, not {}", self.stack_slot_width_for_8bit),
            ));
        }
        Ok(())
    }

    /// Renders the convention document.
    pub fn print(&self) -> String {
        let list = |prefs: &[ArgPref]| prefs.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
        let eq = |k: &str, v: &dyn fmt::Display| {
            let v = v.to_string();
            if v.is_empty() {
                format!("{k} =\n")
            } else {
                format!("{k} = {v}\n")
            }
        };
        let mut out = String::new();
        out += &eq("name", &self.name);
        out += &eq("arch", &self.arch);
        out += &eq("exclude_reserved", &self.exclude_reserved);
        out += "\n[return]\n";
        for w in WidthClass::ALL {
            out += &eq(&w.bits().to_string(), &self.ret_loc(w));
        }
        out += "\n[args]\n";
        for w in WidthClass::ALL {
            out += &eq(&w.bits().to_string(), &list(self.prefs(w)));
        }
        out += &eq("max_register_params", &self.max_register_params);
        out += &eq("stop_on_stack", &self.stop_on_stack);
        out += &eq("first_of_each_width", &self.first_of_each_width);
        out += "\n[cleanup]\n";
        out += &eq("mode", &self.cleanup.mode.name());
        out += &eq("callee_if_return_width_in", &self.cleanup.callee_if_return_width_in);
        out += &eq("callee_if_float_float", &self.cleanup.callee_if_float_float);
        out += "\n[stack]\n";
        out += &eq("slot_width_8bit", &self.stack_slot_width_for_8bit);
        out
    }

    /// Parses and validates a convention document.
    pub fn parse(text: &str) -> Result<CallingConvention> {
        let mut b = Builder::default();
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
        let conv = b.finish()?;
        conv.validate()?;
        Ok(conv)
    }
}

impl fmt::Display for CallingConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

#[derive(Default)]
struct Builder {
    name: Option<String>,
    arch: Option<ArchId>,
    exclude_reserved: Option<bool>,
    ret: [Option<RetLoc>; 3],
    args: [Option<Vec<ArgPref>>; 3],
    max_register_params: Option<u8>,
    stop_on_stack: Option<bool>,
    first_of_each_width: Option<bool>,
    mode: Option<CleanupMode>,
    widths: Option<WidthSet>,
    float_float: Option<bool>,
    slot: Option<u8>,
}

fn put<T>(slot: &mut Option<T>, key: &str, v: T) -> Result<()> {
    if slot.replace(v).is_some() {
        return Err(Error::syntax(1, format!("duplicate key `{key}`")));
    }
    Ok(())
}

impl Builder {
    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let width_slot = || WidthClass::from_bits(parse_width(key)?).map(WidthClass::index);
        match (section, key) {
            ("", "name") => {
                if value.is_empty() || value.contains(char::is_whitespace) {
                    return Err(Error::syntax(1, "name must be one non-empty word"));
                }
                put(&mut self.name, key, value.to_string())
            }
            ("", "arch") => put(&mut self.arch, key, value.parse()?),
            ("", "exclude_reserved") => put(&mut self.exclude_reserved, key, parse_bool(value)?),
            ("return", "8" | "16" | "32") => {
                let i = width_slot()?;
                put(&mut self.ret[i], key, value.parse()?)
            }
            ("args", "8" | "16" | "32") => {
                let i = width_slot()?;
                let prefs = value.split_whitespace().map(str::parse).collect::<Result<Vec<_>>>()?;
                put(&mut self.args[i], key, prefs)
            }
            ("args", "max_register_params") => {
                let n = u8::try_from(parse_u64(value)?)
                    .map_err(|_| Error::syntax(1, "max_register_params is too large"))?;
                put(&mut self.max_register_params, key, n)
            }
            ("args", "stop_on_stack") => put(&mut self.stop_on_stack, key, parse_bool(value)?),
            ("args", "first_of_each_width") => put(&mut self.first_of_each_width, key, parse_bool(value)?),
            ("cleanup", "mode") => put(&mut self.mode, key, value.parse()?),
            ("cleanup", "callee_if_return_width_in") => put(&mut self.widths, key, value.parse()?),
            ("cleanup", "callee_if_float_float") => put(&mut self.float_float, key, parse_bool(value)?),
            ("stack", "slot_width_8bit") => put(&mut self.slot, key, parse_width(value)?),
            _ => Err(unknown_key(section, key)),
        }
    }

    fn finish(self) -> Result<CallingConvention> {
        let missing = |k: &str| Error::syntax(1, format!("missing required key `{k}`"));
        let [r8, r16, r32] = self.ret;
        let [a8, a16, a32] = self.args;
        Ok(CallingConvention {
            name: self.name.ok_or_else(|| missing("name"))?,
            arch: self.arch.ok_or_else(|| missing("arch"))?,
            exclude_reserved: self.exclude_reserved.unwrap_or(false),
            ret: [
                r8.ok_or_else(|| missing("return.8"))?,
                r16.ok_or_else(|| missing("return.16"))?,
                r32.ok_or_else(|| missing("return.32"))?,
            ],
            arg_prefs: [a8.unwrap_or_default(), a16.unwrap_or_default(), a32.unwrap_or_default()],
            max_register_params: self.max_register_params.unwrap_or(2),
            stop_on_stack: self.stop_on_stack.unwrap_or(false),
            first_of_each_width: self.first_of_each_width.unwrap_or(false),
            cleanup: CleanupPolicy {
                mode: self.mode.unwrap_or(CleanupMode::CallerAlways),
                callee_if_return_width_in: self.widths.unwrap_or_default(),
                callee_if_float_float: self.float_float.unwrap_or(false),
            },
            stack_slot_width_for_8bit: self.slot.unwrap_or(8),
        })
    }
}

/// Names accepted by [`builtin_convention`].
pub const BUILTIN_CONVENTIONS: [&str; 10] = [
    "stm8-old",
    "stm8-new",
    "stm8-raisonance",
    "stm8-cosmic",
    "stm8-iar",
    "z80-old",
    "z80-new",
    "sm83-old",
    "sm83-new",
    "rabbit-new",
];

const BUILTIN_DOCS: [&str; 10] = [
    include_str!("../data/conventions/stm8-old.conv"),
    include_str!("../data/conventions/stm8-new.conv"),
    include_str!("../data/conventions/stm8-raisonance.conv"),
    include_str!("../data/conventions/stm8-cosmic.conv"),
    include_str!("../data/conventions/stm8-iar.conv"),
    include_str!("../data/conventions/z80-old.conv"),
    include_str!("../data/conventions/z80-new.conv"),
    include_str!("../data/conventions/sm83-old.conv"),
    include_str!("../data/conventions/sm83-new.conv"),
    include_str!("../data/conventions/rabbit-new.conv"),
];

pub fn builtin_convention(name: &str) -> Result<CallingConvention> {
    let i = BUILTIN_CONVENTIONS
        .iter()
        .position(|n| *n == name)
        .ok_or_else(|| Error::UnknownConvention(name.to_string()))?;
    match CallingConvention::parse(BUILTIN_DOCS[i]) {
        Ok(c) => Ok(c),
        Err(e) => panic!("embedded convention {name} is invalid: {e}"),
    }
}

/// Location of one parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamLoc {
    Registers(RegLoc),
    /// `offset` counts bytes from the lowest-addressed stack argument.
    Stack {
        offset: u64,
        slot_bytes: u64,
        width: u8,
    },
}

impl fmt::Display for ParamLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamLoc::Registers(l) => write!(f, "{l}"),
            ParamLoc::Stack { offset, .. } => write!(f, "stack+{offset}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AssignmentPlan {
    pub param_locs: Vec<ParamLoc>,
    pub return_loc: Option<RetLoc>,
    /// Width of the return value in bits; 0 for void.
    pub return_width: u8,
    pub cleanup_side: Side,
    pub stack_arg_bytes: u64,
}

impl AssignmentPlan {
    /// Registers used by parameters, in parameter order.
    pub fn param_registers(&self) -> impl Iterator<Item = Reg> + '_ {
        self.param_locs
            .iter()
            .flat_map(|l| match l {
                ParamLoc::Registers(r) => Some(r.regs()),
                ParamLoc::Stack { .. } => None,
            })
            .flatten()
    }
}

/// Resolves who cleans up the stack for `sig`. Varargs functions always
/// use caller cleanup.
pub fn resolve_cleanup(conv: &CallingConvention, sig: &FunctionSignature) -> Side {
    if sig.is_varargs() {
        return Side::Caller;
    }
    let p = &conv.cleanup;
    let callee = match p.mode {
        CleanupMode::CallerAlways => false,
        CleanupMode::CalleeAlways => true,
        CleanupMode::Conditional => {
            let ret = sig.return_type();
            let float_float =
                ret.kind() == TypeKind::Float && sig.params().first().is_some_and(|t| t.kind() == TypeKind::Float);
            p.callee_if_return_width_in.contains(ret.width()) || (p.callee_if_float_float && float_float)
        }
    };
    if callee {
        Side::Callee
    } else {
        Side::Caller
    }
}

/// Assigns each parameter of `sig` to registers or a stack slot, greedily
/// from left to right.
///
/// A parameter takes the first entry of its width's preference list that
/// applies to its position and overlaps no register already taken, as long
/// as fewer than `max_register_params` registers parameters exist. Varargs
/// functions pass everything on the stack.
pub fn assign(conv: &CallingConvention, sig: &FunctionSignature, arch: &Architecture) -> Result<AssignmentPlan> {
    let mut used = 0u32;
    let mut in_regs = 0u8;
    let mut stopped = sig.is_varargs();
    let mut seen_widths = 0u8;
    let mut offset = 0u64;
    let mut param_locs = Vec::with_capacity(sig.params().len());
    for (i, p) in sig.params().iter().enumerate() {
        let w = WidthClass::from_bits(p.width())?;
        let first_of_width = seen_widths & (1 << w.index()) == 0;
        seen_widths |= 1 << w.index();
        let mut chosen = None;
        if !stopped && in_regs < conv.max_register_params && (!conv.first_of_each_width || first_of_width) {
            let pos = i + 1;
            for pref in conv.prefs(w) {
                if pref.only_position.is_some_and(|q| usize::from(q) != pos) {
                    continue;
                }
                for r in pref.loc.regs() {
                    if !arch.declares(r) {
                        return Err(Error::UnknownRegister { arch: arch.id, name: r.name().to_string() });
                    }
                }
                let atoms = pref.loc.atoms(arch);
                if atoms & used == 0 {
                    chosen = Some(pref.loc);
                    used |= atoms;
                    break;
                }
            }
        }
        match chosen {
            Some(loc) => {
                in_regs += 1;
                param_locs.push(ParamLoc::Registers(loc));
            }
            None => {
                let slot_bytes = match w {
                    WidthClass::W8 => u64::from(conv.stack_slot_width_for_8bit / 8),
                    WidthClass::W16 => 2,
                    WidthClass::W32 => 4,
                };
                param_locs.push(ParamLoc::Stack { offset, slot_bytes, width: w.bits() });
                offset += slot_bytes;
                stopped |= conv.stop_on_stack;
            }
        }
    }
    let ret = sig.return_type();
    let return_loc = if ret.is_void() { None } else { Some(conv.ret_loc(WidthClass::from_bits(ret.width())?)) };
    Ok(AssignmentPlan {
        param_locs,
        return_loc,
        return_width: ret.width(),
        cleanup_side: resolve_cleanup(conv, sig),
        stack_arg_bytes: offset,
    })
}
