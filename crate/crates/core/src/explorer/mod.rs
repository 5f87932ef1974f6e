//! Drivers over the transition system: seeded random schedules,
//! adversarial schedules and bounded breadth-first exploration.

pub mod bfs;
pub mod random;
pub mod selftest;

use std::collections::BTreeMap;
use std::fmt;

use crate::consistency::Outcome;
use crate::protocol::Rule;
use crate::state::SystemState;
use crate::verdict::{Invariant, Violation};

pub use bfs::{explore_bfs, replay, BfsOptions, BfsReport, Counterexample};
pub use random::{render_trace, run_random, RunResult};
pub use selftest::{mutation_sweep, standard_config, MutationResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// Weighted random choice among enabled instances.
    Random,
    /// Fire Downgrade, WriteBackReq or WriteBackResp whenever one is
    /// enabled, first in enumeration order; otherwise choose randomly.
    AdversarialVoluntary,
    /// Breadth-first enumeration of every instance.
    Exhaustive,
}

/// Default weight of the rules a cache may fire at will.
pub const VOLUNTARY_WEIGHT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    pub seed: u64,
    pub max_steps: usize,
    pub depth: usize,
    /// Indexed like [`Rule::ALL`].
    pub weights: [f64; 15],
    /// Lease lengths ShReq_S may grant; empty means the configured lease.
    pub leases: Vec<u64>,
    /// Run the per-state and per-step oracles, not only the final trace
    /// checks.
    pub check_states: bool,
}

impl ScheduleConfig {
    pub fn random(seed: u64, max_steps: usize) -> ScheduleConfig {
        let mut weights = [1.0; 15];
        for (w, r) in weights.iter_mut().zip(Rule::ALL) {
            if r.is_voluntary() {
                *w = VOLUNTARY_WEIGHT;
            }
        }
        ScheduleConfig {
            kind: ScheduleKind::Random,
            seed,
            max_steps,
            depth: 0,
            weights,
            leases: Vec::new(),
            check_states: true,
        }
    }

    pub fn adversarial(seed: u64, max_steps: usize) -> ScheduleConfig {
        ScheduleConfig {
            kind: ScheduleKind::AdversarialVoluntary,
            ..ScheduleConfig::random(seed, max_steps)
        }
    }

    pub fn weight(&self, rule: Rule) -> f64 {
        let i = Rule::ALL
            .iter()
            .position(|r| *r == rule)
            .expect("rule listed");
        self.weights[i]
    }
}

/// Counters gathered by every driver. All maps are ordered so rendering
/// is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExploreStats {
    pub states: u64,
    pub transitions: u64,
    pub depth: u64,
    /// Runs (random) or states (exhaustive) with every program committed.
    pub completed: u64,
    pub runs: u64,
    pub frontier_max: u64,
    pub violations: BTreeMap<Invariant, u64>,
    pub max_queue: BTreeMap<&'static str, u64>,
    pub rule_counts: BTreeMap<Rule, u64>,
    pub outcomes: BTreeMap<Outcome, u64>,
}

impl ExploreStats {
    pub fn total_violations(&self) -> u64 {
        self.violations.values().sum()
    }

    pub fn record(&mut self, v: &[Violation]) {
        for x in v {
            *self.violations.entry(x.invariant).or_default() += 1;
        }
    }

    pub fn fired(&mut self, rule: Rule) {
        self.transitions += 1;
        *self.rule_counts.entry(rule).or_default() += 1;
    }

    /// Tracks buffer high-water marks.
    pub fn observe(&mut self, s: &SystemState) {
        let mut bump = |name: &'static str, n: usize| {
            let e = self.max_queue.entry(name).or_default();
            *e = (*e).max(n as u64);
        };
        bump("mrq", s.mrq.iter().map(|q| q.len()).max().unwrap_or(0));
        bump("c2p_rq", s.c2p_rq.len());
        bump("c2p_rp", s.c2p_rp.len());
        bump("p2c", s.p2c.iter().map(|q| q.len()).max().unwrap_or(0));
        bump("mem_rq", s.mem_rq.len());
        bump("mem_rp", s.mem_rp.len());
    }

    /// Folds another set of counters into this one.
    pub fn merge(&mut self, o: &ExploreStats) {
        self.states += o.states;
        self.transitions += o.transitions;
        self.depth = self.depth.max(o.depth);
        self.completed += o.completed;
        self.runs += o.runs;
        self.frontier_max = self.frontier_max.max(o.frontier_max);
        for (k, v) in &o.violations {
            *self.violations.entry(*k).or_default() += v;
        }
        for (k, v) in &o.max_queue {
            let e = self.max_queue.entry(k).or_default();
            *e = (*e).max(*v);
        }
        for (k, v) in &o.rule_counts {
            *self.rule_counts.entry(*k).or_default() += v;
        }
        for (k, v) in &o.outcomes {
            *self.outcomes.entry(k.clone()).or_default() += v;
        }
    }

    /// Machine-readable `stat <name>=<value>` lines.
    pub fn stat_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("stat states={}", self.states),
            format!("stat transitions={}", self.transitions),
            format!("stat depth={}", self.depth),
            format!("stat completed={}", self.completed),
            format!("stat runs={}", self.runs),
            format!("stat frontier_max={}", self.frontier_max),
            format!("stat violations={}", self.total_violations()),
        ];
        out.extend(
            self.violations
                .iter()
                .map(|(k, v)| format!("stat violations.{k}={v}")),
        );
        out.extend(
            self.max_queue
                .iter()
                .map(|(k, v)| format!("stat max_queue.{k}={v}")),
        );
        out.extend(
            self.rule_counts
                .iter()
                .map(|(k, v)| format!("stat rule.{k}={v}")),
        );
        out
    }
}

impl fmt::Display for ExploreStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} states, {} transitions, depth {}, {} completed, {} violations",
            self.states,
            self.transitions,
            self.depth,
            self.completed,
            self.total_violations()
        )?;
        for line in self.stat_lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
