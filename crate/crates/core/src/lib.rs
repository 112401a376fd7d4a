//! Calling-convention workbench core.
//!
//! Models the register files of small irregular targets (STM8, the Z80
//! family, SM83 and the Rabbit/eZ80/TLCS-90 group), assigns parameters and
//! return values of C function types to registers or stack slots under a
//! declarative [`CallingConvention`], prices the resulting call sites with
//! per-architecture cost tables, and exhaustively searches convention design
//! spaces over a weighted corpus of function types.
//!
//! The crate is `no_std` (it needs `alloc`). File-system access, parallel
//! evaluation and the command line live in the `ccwb` companion crate.

#![no_std]

extern crate alloc;

pub mod arch;
pub mod conv;
pub mod cost;
pub mod costing;
pub mod error;
pub mod search;
pub mod sig;
mod text;

pub use arch::{architecture_by_name, get_architecture, ArchId, Architecture, Family, Reg, Register};
pub use conv::{
    assign, builtin_convention, resolve_cleanup, ArgPref, AssignmentPlan, CallingConvention, CleanupMode,
    CleanupPolicy, ParamLoc, RegLoc, RetLoc, Side, WidthClass, WidthSet, BUILTIN_CONVENTIONS,
};
pub use cost::{Cost, CostTables};
pub use costing::{
    corpus_cost, cost_of, entry_cost, lower_call_site, lower_definition, score, signature_cost, MarshalStep,
    ScoreWeights, SignatureCost,
};
pub use error::{Error, Result};
pub use search::{search, search_with_overrides, Evaluation, Override, Overrides, Ranked, SearchResult, SearchSpace};
pub use sig::{parse_signature, Corpus, CorpusEntry, FunctionSignature, TypeClass, TypeKind};
