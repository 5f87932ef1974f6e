//! Memory-model checking: trace checkers, reference models and litmus
//! tests.

pub mod checks;
pub mod litmus;
pub mod models;

pub use checks::{
    check_sc, check_sc_commit_order, check_sc_execution, check_store_sets, check_timestamp_order,
    check_tso, check_tso_commit_order, check_tso_execution, Execution,
};

pub use litmus::{model_outcomes, run_litmus, LitmusReport, LitmusSpec, Predicate};
pub use models::{
    outcome_of, permutation_count, registers, sc_outcomes, sc_outcomes_by_permutation,
    tso_outcomes, ModelOutcomes, Outcome, Reg,
};

use crate::config::{Config, ConsistencyMode};
use crate::verdict::Violation;

/// The execution checks matching the configured consistency mode.
pub fn check_execution(cfg: &Config, x: &Execution) -> Vec<Violation> {
    match cfg.mode {
        ConsistencyMode::Sc => check_sc_execution(x),
        ConsistencyMode::Tso => check_tso_execution(x),
    }
}
