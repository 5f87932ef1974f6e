//! Runtime oracles for the protocol's invariants.
//!
//! Per-state checks take a snapshot; per-step checks take the pre-state,
//! the transition record and the post-state. Every checker returns the
//! full list of violations it found, empty meaning pass.

pub mod blocks;
pub mod busy;
pub mod deadlock;
pub mod lattice;
pub mod mts;

pub use blocks::{
    blocks, check_clean_dominance, check_clean_unique, check_value_provenance, clean_blocks, Block,
    BlockLoc,
};
pub use busy::check_busy_structure;
pub use deadlock::{check_deadlock_enabled, check_voluntary_step, voluntary_measure};
pub use lattice::{
    check_lattice_state, check_lattice_step, lattice_entry, LatticeEntry, LatticeError,
};
pub use mts::check_mts;

use crate::protocol::{Machine, TransitionRecord};
use crate::state::SystemState;
use crate::verdict::{Verdict, Violation};

/// Every per-state oracle.
pub fn check_state(m: &Machine, s: &SystemState) -> Vec<Violation> {
    let cfg = m.config();
    let mut out = check_clean_unique(s, cfg);
    out.extend(check_clean_dominance(s));
    out.extend(check_value_provenance(s, cfg));
    out.extend(check_busy_structure(s, cfg));
    out.extend(check_mts(s, cfg));
    out.extend(check_lattice_state(s, cfg));
    out.extend(check_deadlock_enabled(m, s));
    out
}

/// Every per-transition oracle.
pub fn check_step(
    m: &Machine,
    pre: &SystemState,
    rec: &TransitionRecord,
    post: &SystemState,
) -> Vec<Violation> {
    let mut out = check_lattice_step(m.config(), pre, rec, post);
    out.extend(check_voluntary_step(pre, rec, post));
    out
}

/// Collapses a violation list to its first entry.
pub fn first(violations: Vec<Violation>) -> Verdict {
    match violations.into_iter().next() {
        None => Ok(()),
        Some(v) => Err(v),
    }
}
