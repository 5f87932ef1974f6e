//! Depth-bounded breadth-first exploration.
//!
//! Every rule fires exactly once per transition and `phys` counts
//! transitions, so a state's depth is its `phys` and duplicates can only
//! occur within one layer. Deduplication is therefore per layer, and each
//! layer keeps parent links so the shortest path to any state can be
//! rebuilt.

use std::fmt;

use indexmap::IndexSet;
use rayon::prelude::*;

use crate::consistency::{check_execution, Execution};
use crate::error::Error;
use crate::explorer::random::fire_violation;
use crate::explorer::ExploreStats;
use crate::oracle::{check_state, check_step};
use crate::protocol::{Machine, RuleInstance, TransitionRecord};
use crate::state::SystemState;
use crate::verdict::Violation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BfsOptions {
    pub depth: usize,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// Finish the current layer and stop once anything has failed.
    pub stop_on_violation: bool,
}

impl BfsOptions {
    pub fn new(depth: usize) -> BfsOptions {
        BfsOptions {
            depth,
            jobs: 1,
            stop_on_violation: false,
        }
    }
}

/// Shortest known path from the initial state to a violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub violation: Violation,
    pub path: Vec<RuleInstance>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.violation)?;
        for (i, inst) in self.path.iter().enumerate() {
            writeln!(f, "path {} {inst}", i + 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsReport {
    pub stats: ExploreStats,
    pub counterexample: Option<Counterexample>,
}

impl BfsReport {
    pub fn passed(&self) -> bool {
        self.stats.total_violations() == 0
    }
}

/// Per-state oracles plus the trace checks on the commits so far.
pub fn state_violations(m: &Machine, s: &SystemState) -> Vec<Violation> {
    let mut v = check_state(m, s);
    v.extend(check_execution(m.config(), &Execution::from_state(s)));
    v
}

struct Edge {
    inst: RuleInstance,
    post: Result<SystemState, Violation>,
    step: Vec<Violation>,
}

fn expand(m: &Machine, s: &SystemState) -> Vec<Edge> {
    m.enabled(s)
        .into_iter()
        .map(|inst| match m.fire(s, &inst) {
            Ok((post, rec)) => Edge {
                step: check_step(m, s, &rec, &post),
                inst,
                post: Ok(post),
            },
            Err(e) => Edge {
                inst,
                post: Err(fire_violation(e, &inst)),
                step: Vec::new(),
            },
        })
        .collect()
}

fn path_to(
    parents: &[Vec<(usize, RuleInstance)>],
    layer: usize,
    mut idx: usize,
) -> Vec<RuleInstance> {
    let mut path = Vec::with_capacity(layer);
    for l in (1..=layer).rev() {
        let (p, inst) = parents[l][idx];
        path.push(inst);
        idx = p;
    }
    path.reverse();
    path
}

/// Explores every state reachable within `opts.depth` transitions,
/// checking every distinct state and every edge.
pub fn explore_bfs(m: &Machine, opts: BfsOptions) -> BfsReport {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .expect("thread pool");
    pool.install(|| explore_in_pool(m, opts))
}

fn explore_in_pool(m: &Machine, opts: BfsOptions) -> BfsReport {
    let cfg = m.config();
    let init = m.init_state();
    let mut stats = ExploreStats {
        states: 1,
        frontier_max: 1,
        ..ExploreStats::default()
    };
    stats.observe(&init);
    let mut counterexample: Option<Counterexample> = None;
    let init_v = state_violations(m, &init);
    stats.record(&init_v);
    if let Some(v) = init_v.into_iter().next() {
        counterexample = Some(Counterexample {
            violation: v,
            path: Vec::new(),
        });
    }
    if init.is_quiescent_for(cfg) {
        stats.completed += 1;
    }

    // parents[l][i] = (index in layer l-1, instance) for state i of layer l.
    let mut parents: Vec<Vec<(usize, RuleInstance)>> = vec![Vec::new()];
    let mut layer = vec![init];

    for depth in 0..opts.depth {
        if layer.is_empty() || (opts.stop_on_violation && counterexample.is_some()) {
            break;
        }
        let edges: Vec<Vec<Edge>> = layer.par_iter().map(|s| expand(m, s)).collect();

        let mut next: IndexSet<SystemState> = IndexSet::new();
        let mut links: Vec<(usize, RuleInstance)> = Vec::new();
        for (pi, out) in edges.into_iter().enumerate() {
            for e in out {
                stats.fired(e.inst.rule());
                stats.record(&e.step);
                if counterexample.is_none() {
                    let first = e
                        .step
                        .first()
                        .cloned()
                        .or_else(|| e.post.as_ref().err().cloned());
                    if let Some(v) = first {
                        let mut path = path_to(&parents, depth, pi);
                        path.push(e.inst);
                        counterexample = Some(Counterexample { violation: v, path });
                    }
                }
                match e.post {
                    Ok(post) => {
                        let (_, fresh) = next.insert_full(post);
                        if fresh {
                            links.push((pi, e.inst));
                        }
                    }
                    Err(v) => stats.record(std::slice::from_ref(&v)),
                }
            }
        }

        let next: Vec<SystemState> = next.into_iter().collect();
        let checked: Vec<Vec<Violation>> =
            next.par_iter().map(|s| state_violations(m, s)).collect();
        parents.push(links);
        for (i, (s, v)) in next.iter().zip(checked).enumerate() {
            stats.observe(s);
            if s.is_quiescent_for(cfg) {
                stats.completed += 1;
            }
            stats.record(&v);
            if counterexample.is_none() {
                if let Some(first) = v.into_iter().next() {
                    counterexample = Some(Counterexample {
                        violation: first,
                        path: path_to(&parents, depth + 1, i),
                    });
                }
            }
        }
        stats.states += next.len() as u64;
        stats.frontier_max = stats.frontier_max.max(next.len() as u64);
        if !next.is_empty() {
            stats.depth = depth as u64 + 1;
        }
        layer = next;
    }
    BfsReport {
        stats,
        counterexample,
    }
}

/// Fires `path` from the initial state, checking each instance is enabled.
pub fn replay(
    m: &Machine,
    path: &[RuleInstance],
) -> Result<(SystemState, Vec<TransitionRecord>), Error> {
    let mut s = m.init_state();
    let mut recs = Vec::with_capacity(path.len());
    for (index, inst) in path.iter().enumerate() {
        let (n, r) = m.apply(&s, inst).map_err(|e| match e {
            Error::NotEnabled(instance) => Error::ReplayNotEnabled { index, instance },
            other => other,
        })?;
        s = n;
        recs.push(r);
    }
    Ok((s, recs))
}

/// Violations observed at the end of a replayed path: the last edge's
/// step checks and the final state's checks.
pub fn replay_violations(m: &Machine, path: &[RuleInstance]) -> Result<Vec<Violation>, Error> {
    let (s, recs) = replay(m, path)?;
    let mut out = Vec::new();
    if let Some(last) = recs.last() {
        let (prev, _) = replay(m, &path[..path.len() - 1])?;
        out.extend(check_step(m, &prev, last, &s));
    }
    out.extend(state_violations(m, &s));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::protocol::Mutation;
    use crate::types::CoreId;

    fn machine(text: &str) -> Machine {
        Machine::new(Config::parse(text).unwrap()).unwrap()
    }

    const SMALL: &str = "cores = 2\naddrs = 1\nlease = 2\nprog 0: St 0 1; Ld 0\nprog 1: Ld 0";

    #[test]
    fn depth_zero_is_the_initial_state() {
        let r = explore_bfs(&machine(SMALL), BfsOptions::new(0));
        assert_eq!(r.stats.states, 1);
        assert_eq!(r.stats.transitions, 0);
        assert!(r.passed());
    }

    #[test]
    fn small_sweep_passes_and_is_deterministic() {
        let m = machine(SMALL);
        let a = explore_bfs(&m, BfsOptions::new(12));
        assert!(a.passed(), "{:?}", a.counterexample);
        assert!(a.stats.completed > 0);
        let mut par = BfsOptions::new(12);
        par.jobs = 4;
        let b = explore_bfs(&m, par);
        assert_eq!(a, b);
    }

    #[test]
    fn mutation_is_found_and_replays() {
        // Owner defaults to core 0, so the store must come from core 1.
        let m = machine("cores = 2\naddrs = 1\nprog 1: St 0 1")
            .with_mutation(Some(Mutation::DropOwnerUpdate));
        let mut opts = BfsOptions::new(12);
        opts.stop_on_violation = true;
        let r = explore_bfs(&m, opts);
        let cx = r.counterexample.expect("violation found");
        let again = replay_violations(&m, &cx.path).unwrap();
        assert!(again.iter().any(|v| v.invariant == cx.violation.invariant));
    }

    #[test]
    fn replay_reports_failing_index() {
        let m = machine(SMALL);
        let path = [
            RuleInstance::L1Miss { core: CoreId(0) },
            RuleInstance::L1Miss { core: CoreId(0) },
        ];
        match replay(&m, &path) {
            Err(Error::ReplayNotEnabled { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        let (s, _) = replay(&m, &[]).unwrap();
        assert_eq!(s, m.init_state());
    }
}
