//! Executable model of the Tardis timestamp-based cache coherence protocol.
//!
//! The crate is organized bottom-up:
//!
//! - [`types`], [`fifo`], [`config`], [`state`]: domain types, buffers and
//!   system-state construction.
//! - [`protocol`]: the guarded transition rules and their enumeration.
//! - [`processor`]: the in-order-commit processor issuing requests.
//! - [`oracle`]: runtime checkers for the protocol's structural and
//!   timestamp invariants, the progress lattice and deadlock freedom.
//! - [`consistency`]: trace-level SC/TSO checkers and litmus tests.
//! - [`explorer`]: random and exhaustive drivers.
//! - [`cli`]: the `tardis` command-line front end.

pub mod cli;
pub mod config;
pub mod consistency;
pub mod error;
pub mod explorer;
pub mod fifo;
pub mod oracle;
pub mod processor;
pub mod protocol;
pub mod state;
pub mod types;
pub mod verdict;

pub use config::{Config, ConsistencyMode, LoadHitGuard, Op, Program, ValueMode};
pub use error::{Error, Result};
pub use protocol::{Machine, Mutation, Rule, RuleInstance, TransitionRecord};
pub use state::{init_state, CommitEvent, StoreRecord, SystemState};
pub use types::{Access, Addr, CacheState, CoreId, Timestamp, Value};
pub use verdict::{Invariant, Verdict, Violation};
