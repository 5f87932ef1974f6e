//! Single seeded runs.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::consistency::{check_execution, outcome_of, Execution};
use crate::error::Error;
use crate::explorer::{ExploreStats, ScheduleConfig, ScheduleKind};
use crate::oracle::deadlock::is_write_back_family;
use crate::oracle::{check_state, check_step};
use crate::protocol::{Machine, RuleInstance, TransitionRecord};
use crate::state::SystemState;
use crate::verdict::{Invariant, Violation};

#[derive(Debug, Clone)]
pub struct RunResult {
    pub initial: SystemState,
    pub state: SystemState,
    pub records: Vec<TransitionRecord>,
    pub stats: ExploreStats,
    /// Violations in the order they were found.
    pub violations: Vec<Violation>,
    pub completed: bool,
}

impl RunResult {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Error raised while firing, reported as a violation.
pub(crate) fn fire_violation(e: Error, inst: &RuleInstance) -> Violation {
    match e {
        Error::MonotonicityViolation { .. } => {
            Violation::new(Invariant::CommitOrder, format!("{inst}: {e}"))
        }
        other => Violation::new(Invariant::Deadlock, format!("{inst}: {other}")),
    }
}

fn choose(sched: &ScheduleConfig, enabled: &[RuleInstance], rng: &mut ChaCha8Rng) -> usize {
    if sched.kind == ScheduleKind::AdversarialVoluntary {
        if let Some(i) = enabled.iter().position(|i| is_write_back_family(i.rule())) {
            return i;
        }
    }
    let weights: Vec<f64> = enabled.iter().map(|i| sched.weight(i.rule())).collect();
    match WeightedIndex::new(&weights) {
        Ok(d) => d.sample(rng),
        Err(_) => rng.gen_range(0..enabled.len()),
    }
}

/// Substitutes a lease drawn from the schedule's lease set. Any lease end
/// at or above the guard's minimum is a legal binding of ShReq_S.
fn pick_lease(
    s: &SystemState,
    inst: RuleInstance,
    sched: &ScheduleConfig,
    rng: &mut ChaCha8Rng,
) -> RuleInstance {
    match inst {
        RuleInstance::ShReqS { addr, .. } if !sched.leases.is_empty() => {
            let req = s
                .c2p_rq
                .head_for(addr)
                .expect("enabled ShReq_S has a request");
            let lease = sched.leases[rng.gen_range(0..sched.leases.len())];
            RuleInstance::ShReqS {
                addr,
                lease_end: s.l2(addr).rts.max(req.pts).plus(lease),
            }
        }
        _ => inst,
    }
}

/// Runs one schedule until every program has committed, nothing is
/// enabled, a violation is found or `max_steps` transitions have fired.
pub fn run_random(m: &Machine, sched: &ScheduleConfig) -> RunResult {
    let cfg = m.config();
    let mut rng = ChaCha8Rng::seed_from_u64(sched.seed);
    let initial = m.init_state();
    let mut s = initial.clone();
    let mut stats = ExploreStats {
        runs: 1,
        states: 1,
        ..ExploreStats::default()
    };
    stats.observe(&s);
    let mut records = Vec::new();
    let mut violations = if sched.check_states {
        check_state(m, &s)
    } else {
        Vec::new()
    };

    while violations.is_empty() && !s.is_quiescent_for(cfg) {
        if records.len() >= sched.max_steps {
            let freq: Vec<String> = stats
                .rule_counts
                .iter()
                .map(|(r, n)| format!("{r}={n}"))
                .collect();
            violations.push(Violation::new(
                Invariant::Livelock,
                format!(
                    "seed={} steps={} rules=[{}]",
                    sched.seed,
                    records.len(),
                    freq.join(",")
                ),
            ));
            break;
        }
        let enabled = m.enabled(&s);
        if enabled.is_empty() {
            violations.push(Violation::new(
                Invariant::Deadlock,
                format!("seed={} phys={} nothing enabled", sched.seed, s.phys),
            ));
            break;
        }
        let inst = pick_lease(
            &s,
            enabled[choose(sched, &enabled, &mut rng)],
            sched,
            &mut rng,
        );
        let (n, rec) = match m.fire(&s, &inst) {
            Ok(x) => x,
            Err(e) => {
                violations.push(fire_violation(e, &inst));
                break;
            }
        };
        stats.fired(inst.rule());
        stats.states += 1;
        stats.observe(&n);
        if sched.check_states {
            violations.extend(check_step(m, &s, &rec, &n));
            violations.extend(check_state(m, &n));
        }
        records.push(rec);
        s = n;
    }

    let completed = s.is_quiescent_for(cfg);
    violations.extend(check_execution(cfg, &Execution::from_state(&s)));
    stats.depth = records.len() as u64;
    stats.completed = u64::from(completed);
    stats.record(&violations);
    if completed {
        if let Some(o) = outcome_of(cfg, &s.trace) {
            stats.outcomes.insert(o, 1);
        }
    }
    RunResult {
        initial,
        state: s,
        records,
        stats,
        violations,
        completed,
    }
}

/// Renders a run as `init`, transition and `commit` lines. Commits appear
/// right after the transition that produced them.
pub fn render_trace(run: &RunResult) -> String {
    let mut out = String::new();
    for (a, v) in run.initial.initial_values().iter().enumerate() {
        out.push_str(&format!("init addr={a} val={v}\n"));
    }
    let mut commits = run.state.trace.iter().peekable();
    while let Some(c) = commits.next_if(|c| c.phys == 0) {
        out.push_str(&format!("{c}\n"));
    }
    for rec in &run.records {
        out.push_str(&format!("{rec}\n"));
        while let Some(c) = commits.next_if(|c| c.phys == rec.step) {
            out.push_str(&format!("{c}\n"));
        }
    }
    for c in commits {
        out.push_str(&format!("{c}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    fn machine(text: &str) -> Machine {
        Machine::new(Config::parse(text).unwrap()).unwrap()
    }

    const SB: &str = "addrs = a b\nprog 0: St a 1; Ld b\nprog 1: St b 1; Ld a";

    #[test]
    fn sb_runs_complete_cleanly() {
        let m = machine(SB);
        for seed in 0..50 {
            let r = run_random(&m, &ScheduleConfig::random(seed, 1000));
            assert!(r.passed(), "seed {seed}: {:?}", r.violations);
            assert!(r.completed);
            assert_eq!(r.state.trace.len(), 4);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let m = machine(SB);
        let a = render_trace(&run_random(&m, &ScheduleConfig::random(7, 1000)));
        let b = render_trace(&run_random(&m, &ScheduleConfig::random(7, 1000)));
        assert_eq!(a, b);
        assert!(a.starts_with("init addr=0 val=0\n"));
        let x = Execution::parse(&a).unwrap();
        assert_eq!(x.commits.len(), 4);
    }

    #[test]
    fn adversarial_schedule_terminates() {
        let m = machine(SB);
        for seed in 0..20 {
            let r = run_random(&m, &ScheduleConfig::adversarial(seed, 200));
            assert!(r.passed() && r.completed, "seed {seed}: {:?}", r.violations);
        }
    }

    #[test]
    fn step_limit_reports_livelock_suspect() {
        let m = machine(SB);
        let r = run_random(&m, &ScheduleConfig::random(1, 2));
        assert_eq!(r.violations[0].invariant, Invariant::Livelock);
    }

    #[test]
    fn lease_choices_stay_legal() {
        let m = machine("cores = 2\naddrs = 2\nmemory = on\nprog 0: Ld 0; St 1 1; Ld 1\nprog 1: St 0 1; Ld 1; Ld 0");
        let mut sched = ScheduleConfig::random(3, 2000);
        sched.leases = vec![0, 1, 5];
        for seed in 0..30 {
            sched.seed = seed;
            let r = run_random(&m, &sched);
            assert!(r.passed() && r.completed, "seed {seed}: {:?}", r.violations);
        }
    }
}
