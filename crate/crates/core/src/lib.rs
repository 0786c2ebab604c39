//! A model checker for CTL extended with synchronization operators over
//! finite Kripke structures.
//!
//! Besides the usual CTL operators, the logic has quantifier-exchanged
//! untils: `[p UA q]` holds when there is a single position at which `q`
//! holds on all paths (with `p` everywhere before), `[p UE q]` when each
//! earlier position is covered by some path, and the prefixes `GFA`/`GFE`
//! (recurrent synchronization) and `FGA`/`FGE` (eventual permanence).
//!
//! The crate bundles the labelling checker with witness extraction, an
//! independent brute-force oracle, differential fuzzing, SAT-based instance
//! generators, and bisimulation quotienting.

pub mod checker;
pub mod fixtures;
pub mod formula;
pub mod kripke;
pub mod oracle;
pub mod quotient;
pub mod reductions;

pub use checker::{check, CheckOutcome, SemMap, Witness, WitnessKind};
pub use formula::{normalize, parse, Formula};
pub use kripke::{KripkeStructure, StateSet};
