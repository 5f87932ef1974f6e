//! Mutation sensitivity: seeded protocol defects must be caught.

use crate::config::Config;
use crate::explorer::bfs::{explore_bfs, replay_violations, BfsOptions, Counterexample};
use crate::explorer::ExploreStats;
use crate::protocol::{Machine, Mutation};

/// Two cores sharing one address, each storing then loading it, with a
/// short lease.
pub const STANDARD_CONFIG: &str = "\
cores = 2
addrs = 1
lease = 2
prog 0: St 0 1; Ld 0
prog 1: St 0 2; Ld 0
";

/// The standard sweep configuration, optionally with main memory.
pub fn standard_config(memory: bool) -> Config {
    let mut cfg = Config::parse(STANDARD_CONFIG).expect("standard config parses");
    cfg.memory = memory;
    cfg
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationResult {
    pub mutation: Mutation,
    pub memory: bool,
    pub stats: ExploreStats,
    pub counterexample: Option<Counterexample>,
    /// Replaying the counterexample path reproduces its violation.
    pub replayed: bool,
}

impl MutationResult {
    pub fn detected(&self) -> bool {
        self.counterexample.is_some()
    }

    pub fn line(&self) -> String {
        match &self.counterexample {
            Some(cx) => format!(
                "mutation {} memory={} detected={} replayed={} depth={} {}",
                self.mutation,
                if self.memory { "on" } else { "off" },
                cx.violation.invariant,
                self.replayed,
                cx.path.len(),
                cx.violation
            ),
            None => format!(
                "mutation {} memory={} undetected states={}",
                self.mutation,
                if self.memory { "on" } else { "off" },
                self.stats.states
            ),
        }
    }
}

/// Sweeps `cfg` with `mutation` applied, stopping after the first layer
/// that shows a violation, and replays the counterexample.
pub fn mutation_sweep(
    cfg: Config,
    mutation: Mutation,
    depth: usize,
    jobs: usize,
) -> MutationResult {
    let memory = cfg.memory;
    let m = Machine::new(cfg)
        .expect("valid config")
        .with_mutation(Some(mutation));
    let opts = BfsOptions {
        depth,
        jobs,
        stop_on_violation: true,
    };
    let report = explore_bfs(&m, opts);
    let replayed = match &report.counterexample {
        Some(cx) => replay_violations(&m, &cx.path)
            .map(|v| v.iter().any(|x| x.invariant == cx.violation.invariant))
            .unwrap_or(false),
        None => false,
    };
    MutationResult {
        mutation,
        memory,
        stats: report.stats,
        counterexample: report.counterexample,
        replayed,
    }
}
