//! Register files, aliasing and per-target cost tables.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cost::CostTables;
use crate::error::{Error, Result};

/// Supported target architectures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ArchId {
    Stm8,
    Z80,
    Z180,
    Z80n,
    Sm83,
    R2k,
    R2ka,
    R3ka,
    Ez80,
    Tlcs90,
}

/// Targets that share a register file and a byte-level cost table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Stm8,
    Z80,
    Sm83,
    Rabbit,
}

impl ArchId {
    pub const ALL: [ArchId; 10] = [
        ArchId::Stm8,
        ArchId::Z80,
        ArchId::Z180,
        ArchId::Z80n,
        ArchId::Sm83,
        ArchId::R2k,
        ArchId::R2ka,
        ArchId::R3ka,
        ArchId::Ez80,
        ArchId::Tlcs90,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArchId::Stm8 => "stm8",
            ArchId::Z80 => "z80",
            ArchId::Z180 => "z180",
            ArchId::Z80n => "z80n",
            ArchId::Sm83 => "sm83",
            ArchId::R2k => "r2k",
            ArchId::R2ka => "r2ka",
            ArchId::R3ka => "r3ka",
            ArchId::Ez80 => "ez80",
            ArchId::Tlcs90 => "tlcs90",
        }
    }

    pub fn family(self) -> Family {
        match self {
            ArchId::Stm8 => Family::Stm8,
            ArchId::Z80 | ArchId::Z180 | ArchId::Z80n => Family::Z80,
            ArchId::Sm83 => Family::Sm83,
            ArchId::R2k | ArchId::R2ka | ArchId::R3ka | ArchId::Ez80 | ArchId::Tlcs90 => Family::Rabbit,
        }
    }

    /// True for every target derived from the Z80 (including SM83).
    pub fn is_z80_family(self) -> bool {
        self.family() != Family::Stm8
    }
}

impl fmt::Display for ArchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArchId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ArchId::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| Error::UnknownArchitecture(s.to_string()))
    }
}

macro_rules! regs {
    ($($variant:ident => $name:literal, $width:literal;)*) => {
        /// Every register name known to any supported target.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Reg { $($variant),* }

        impl Reg {
            pub const ALL: &'static [Reg] = &[$(Reg::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Reg::$variant => $name),* }
            }

            /// Width in bits.
            pub fn width(self) -> u8 {
                match self { $(Reg::$variant => $width),* }
            }
        }
    };
}

regs! {
    A => "a", 8;
    B => "b", 8;
    C => "c", 8;
    D => "d", 8;
    E => "e", 8;
    H => "h", 8;
    L => "l", 8;
    Bc => "bc", 16;
    De => "de", 16;
    Hl => "hl", 16;
    Ix => "ix", 16;
    Iy => "iy", 16;
    Ixh => "ixh", 8;
    Ixl => "ixl", 8;
    Iyh => "iyh", 8;
    Iyl => "iyl", 8;
    X => "x", 16;
    Xh => "xh", 8;
    Xl => "xl", 8;
    Y => "y", 16;
    Yh => "yh", 8;
    Yl => "yl", 8;
}

const REG_COUNT: usize = 22;

impl Reg {
    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Reg::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::syntax(1, format!("unknown register `{s}`")))
    }
}

/// One declared register of an architecture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub reg: Reg,
    pub width: u8,
    /// The two 8-bit halves, high first; empty for atomic registers.
    pub parts: Vec<Reg>,
}

/// Immutable description of one target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub id: ArchId,
    pub registers: Vec<Register>,
    /// Registers some systems reserve for a BIOS or OS (ix and iy).
    pub reserved: Vec<Reg>,
    pub exclude_reserved: bool,
    /// Smallest unit a push instruction can store, in bits.
    pub push_granularity: u8,
    pub cost_tables: CostTables,
    atoms: [u32; REG_COUNT],
}

pub(crate) fn register_file(id: ArchId) -> Vec<Register> {
    use Reg::*;
    let atomic = |reg: Reg| Register { reg, width: reg.width(), parts: Vec::new() };
    let pair = |reg: Reg, hi: Reg, lo: Reg| Register { reg, width: 16, parts: alloc::vec![hi, lo] };
    match id.family() {
        Family::Stm8 => {
            alloc::vec![atomic(A), pair(X, Xh, Xl), pair(Y, Yh, Yl), atomic(Xh), atomic(Xl), atomic(Yh), atomic(Yl),]
        }
        _ => {
            let mut regs: Vec<Register> = [A, B, C, D, E, H, L].into_iter().map(atomic).collect();
            regs.push(pair(Bc, B, C));
            regs.push(pair(De, D, E));
            regs.push(pair(Hl, H, L));
            match id {
                ArchId::Sm83 => {}
                ArchId::Ez80 => {
                    regs.push(pair(Ix, Ixh, Ixl));
                    regs.push(pair(Iy, Iyh, Iyl));
                    regs.extend([Ixh, Ixl, Iyh, Iyl].into_iter().map(atomic));
                }
                _ => {
                    regs.push(atomic(Ix));
                    regs.push(atomic(Iy));
                }
            }
            regs
        }
    }
}

/// Returns the description of `id` with its default cost tables.
///
/// With `exclude_reserved`, ix and iy (and anything aliasing them) are
/// removed from the allocatable set; this has no effect on stm8 and sm83.
pub fn get_architecture(id: ArchId, exclude_reserved: bool) -> Architecture {
    Architecture::with_tables(id, exclude_reserved, CostTables::builtin(id))
}

/// [`get_architecture`] keyed by name.
pub fn architecture_by_name(name: &str, exclude_reserved: bool) -> Result<Architecture> {
    Ok(get_architecture(name.parse()?, exclude_reserved))
}

impl Architecture {
    pub(crate) fn with_tables(id: ArchId, exclude_reserved: bool, tables: CostTables) -> Self {
        let registers = register_file(id);
        let mut atoms = [0u32; REG_COUNT];
        for r in &registers {
            if r.parts.is_empty() {
                atoms[r.reg.index()] = 1 << r.reg.index();
            }
        }
        for r in &registers {
            if !r.parts.is_empty() {
                atoms[r.reg.index()] = r.parts.iter().map(|p| atoms[p.index()]).fold(0, |a, b| a | b);
            }
        }
        let reserved = match id.family() {
            Family::Stm8 | Family::Sm83 => Vec::new(),
            _ => alloc::vec![Reg::Ix, Reg::Iy],
        };
        Architecture {
            id,
            registers,
            reserved,
            exclude_reserved,
            push_granularity: if id.is_z80_family() { 16 } else { 8 },
            cost_tables: tables,
            atoms,
        }
    }

    /// Replaces the cost tables, checking that they were written for this target.
    pub fn with_cost_tables(mut self, tables: CostTables) -> Result<Self> {
        if tables.arch != self.id {
            return Err(Error::ArchMismatch { expected: self.id, found: tables.arch });
        }
        self.cost_tables = tables;
        Ok(self)
    }

    /// Same target with a different reserved-register profile.
    pub fn with_exclusion(mut self, exclude_reserved: bool) -> Self {
        self.exclude_reserved = exclude_reserved;
        self
    }

    pub fn declares(&self, reg: Reg) -> bool {
        self.atoms[reg.index()] != 0
    }

    pub fn register(&self, reg: Reg) -> Option<&Register> {
        self.registers.iter().find(|r| r.reg == reg)
    }

    /// Resolves a register name declared by this architecture.
    pub fn lookup(&self, name: &str) -> Result<Reg> {
        name.parse::<Reg>()
            .ok()
            .filter(|r| self.declares(*r))
            .ok_or_else(|| Error::UnknownRegister { arch: self.id, name: name.to_string() })
    }

    /// Bit set of the atomic storage cells `reg` occupies; 0 if undeclared.
    pub fn atoms(&self, reg: Reg) -> u32 {
        self.atoms[reg.index()]
    }

    fn reserved_atoms(&self) -> u32 {
        self.reserved.iter().map(|r| self.atoms(*r)).fold(0, |a, b| a | b)
    }

    /// Whether `reg` may carry parameters or return values under the
    /// given reserved-register profile.
    pub fn is_allocatable_under(&self, reg: Reg, exclude_reserved: bool) -> bool {
        self.declares(reg) && !(exclude_reserved && self.atoms(reg) & self.reserved_atoms() != 0)
    }

    pub fn is_allocatable(&self, reg: Reg) -> bool {
        self.is_allocatable_under(reg, self.exclude_reserved)
    }

    pub fn allocatable(&self) -> impl Iterator<Item = &Register> + '_ {
        self.registers.iter().filter(|r| self.is_allocatable(r.reg))
    }

    pub fn allocatable_16bit(&self) -> Vec<Reg> {
        self.allocatable().filter(|r| r.width == 16).map(|r| r.reg).collect()
    }

    /// True iff the registers are equal, one is a part of the other, or
    /// they share a part.
    pub fn conflicts(&self, r1: Reg, r2: Reg) -> Result<bool> {
        for r in [r1, r2] {
            if !self.declares(r) {
                return Err(Error::UnknownRegister { arch: self.id, name: r.name().to_string() });
            }
        }
        Ok(self.atoms(r1) & self.atoms(r2) != 0)
    }

    /// [`Architecture::conflicts`] on register names.
    pub fn conflicts_by_name(&self, r1: &str, r2: &str) -> Result<bool> {
        self.conflicts(self.lookup(r1)?, self.lookup(r2)?)
    }
}
