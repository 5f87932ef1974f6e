//! Acceptance suite. Each test prints one `criterion N PASS|FAIL` line and
//! asserts the same condition. Bounds and run counts are pinned below.

mod common;

use common::{random_config, report};
use tardis::cli::main_with;
use tardis::consistency::{
    check_sc, check_sc_commit_order, check_store_sets, check_timestamp_order, check_tso,
    check_tso_commit_order, check_tso_execution, permutation_count, run_litmus, sc_outcomes,
    sc_outcomes_by_permutation, tso_outcomes, Execution, LitmusSpec, Outcome,
};
use tardis::explorer::{
    explore_bfs, mutation_sweep, replay, run_random, standard_config, BfsOptions, ScheduleConfig,
};
use tardis::{ConsistencyMode, Machine, Mutation, Rule, Value};

const SWEEP_DEPTH: usize = 25;
const LITMUS_RUNS: u64 = 10_000;
const BATTERY_RUNS: u64 = 1_000;
const STEP_LIMIT: usize = 100_000;
/// Adversarial step budget per program operation.
const ADVERSARIAL_STEPS_PER_OP: usize = 50;

const SB: &str = "name = SB\naddrs = x y\nprog 0: St x 1; Ld y\nprog 1: St y 1; Ld x\nforbid: r(0,1)=0 & r(1,1)=0\n";
const MP: &str = "name = MP\naddrs = d f\nprog 0: St d 1; St f 1\nprog 1: Ld f; Ld d\nforbid: r(1,0)=1 & r(1,1)=0\n";

fn outcome(a: u64, b: u64) -> Outcome {
    Outcome(vec![Value(a), Value(b)])
}

fn sweep(memory: bool) -> tardis::explorer::BfsReport {
    let m = Machine::new(standard_config(memory)).unwrap();
    explore_bfs(
        &m,
        BfsOptions {
            depth: SWEEP_DEPTH,
            jobs: 0,
            stop_on_violation: false,
        },
    )
}

#[test]
fn criterion_1_exhaustive_sweep_without_memory() {
    let r = sweep(false);
    let ok = r.passed() && r.counterexample.is_none();
    report(
        1,
        "exhaustive sweep, 2 cores x 1 address, memory off, depth 25",
        ok,
        &format!(
            "states={} transitions={} depth={} completed={} violations={}",
            r.stats.states,
            r.stats.transitions,
            r.stats.depth,
            r.stats.completed,
            r.stats.total_violations()
        ),
    );
    assert!(ok, "{:?}", r.counterexample);
    assert!(r.stats.completed > 0);
}

#[test]
fn criterion_2_exhaustive_sweep_with_memory() {
    let r = sweep(true);
    let ok = r.passed() && r.counterexample.is_none();
    report(
        2,
        "exhaustive sweep, memory on, depth 25",
        ok,
        &format!(
            "states={} transitions={} depth={} violations={}",
            r.stats.states,
            r.stats.transitions,
            r.stats.depth,
            r.stats.total_violations()
        ),
    );
    assert!(ok, "{:?}", r.counterexample);
}

#[test]
fn criterion_3_litmus_sb_and_mp_under_sc() {
    let sb = LitmusSpec::parse(SB).unwrap();
    let r = run_litmus(&sb, LITMUS_RUNS, 0, STEP_LIMIT, 0).unwrap();
    let model = sc_outcomes(&sb.config);
    let by_perm = sc_outcomes_by_permutation(&sb.config);
    let expected = [outcome(0, 1), outcome(1, 0), outcome(1, 1)];
    let sb_ok = r.passed()
        && r.count(&outcome(0, 0)) == 0
        && expected.iter().all(|o| r.count(o) >= 1)
        && model.outcomes == expected.iter().cloned().collect()
        && by_perm.outcomes == model.outcomes
        && permutation_count(&sb.config) == 24;
    for l in r.lines() {
        println!("  {l}");
    }

    let mp = LitmusSpec::parse(MP).unwrap();
    let rm = run_litmus(&mp, LITMUS_RUNS, 0, STEP_LIMIT, 0).unwrap();
    let mp_ok = rm.passed() && rm.count(&outcome(1, 0)) == 0;
    for l in rm.lines() {
        println!("  {l}");
    }
    let ok = sb_ok && mp_ok;
    report(
        3,
        "SB and MP litmus under SC, 10000 schedules each",
        ok,
        &format!(
            "sb(0,0)={} sb(0,1)={} sb(1,0)={} sb(1,1)={} permutations={} mp(f=1,d=0)={}",
            r.count(&outcome(0, 0)),
            r.count(&outcome(0, 1)),
            r.count(&outcome(1, 0)),
            r.count(&outcome(1, 1)),
            permutation_count(&sb.config),
            rm.count(&outcome(1, 0))
        ),
    );
    assert!(ok);
}

fn battery(mode: ConsistencyMode) -> (u64, Vec<String>) {
    let mut failures = Vec::new();
    let mut loads = 0;
    for seed in 0..BATTERY_RUNS {
        let cfg = random_config(seed, mode);
        let m = Machine::new(cfg).unwrap();
        let run = run_random(&m, &ScheduleConfig::random(seed, STEP_LIMIT));
        let x = Execution::from_state(&run.state);
        loads += x.loads().count() as u64;
        let mut v = run.violations.clone();
        match mode {
            ConsistencyMode::Sc => {
                v.extend(check_timestamp_order(&x));
                v.extend(check_sc_commit_order(&x));
                v.extend(check_sc(&x));
                v.extend(check_store_sets(&x));
            }
            // Store-buffer forwarding lets a load read its own core's store
            // below that store's timestamp, so the plain timestamp
            // load-value check does not apply.
            ConsistencyMode::Tso => {
                v.extend(check_tso_commit_order(&x));
                v.extend(check_tso(&x));
                v.extend(check_tso_execution(&x));
            }
        }
        if !run.completed {
            failures.push(format!("seed {seed}: incomplete"));
        }
        if let Some(first) = v.first() {
            failures.push(format!("seed {seed}: {first}"));
        }
    }
    (loads, failures)
}

#[test]
fn criterion_4_random_runs_satisfy_sc() {
    let (loads, failures) = battery(ConsistencyMode::Sc);
    let ok = failures.is_empty();
    report(
        4,
        "1000 random programs under SC: timestamp order, commit order, SC, store sets",
        ok,
        &format!(
            "runs={BATTERY_RUNS} loads={loads} failures={}",
            failures.len()
        ),
    );
    assert!(ok, "{failures:?}");
}

#[test]
fn criterion_5_adversarial_voluntary_schedule_completes() {
    let mut failures = Vec::new();
    for seed in 0..BATTERY_RUNS {
        let cfg = random_config(seed, ConsistencyMode::Sc);
        let budget = ADVERSARIAL_STEPS_PER_OP * cfg.total_ops();
        let m = Machine::new(cfg).unwrap();
        let run = run_random(&m, &ScheduleConfig::adversarial(seed, budget));
        if !run.completed || !run.passed() {
            failures.push(format!("seed {seed}: {:?}", run.violations.first()));
        }
    }
    let ok = failures.is_empty();
    report(
        5,
        "adversarial voluntary schedule within 50 steps per operation",
        ok,
        &format!("runs={BATTERY_RUNS} failures={}", failures.len()),
    );
    assert!(ok, "{failures:?}");
}

#[test]
fn criterion_6_random_runs_satisfy_tso() {
    let (loads, failures) = battery(ConsistencyMode::Tso);
    let mut sb = LitmusSpec::parse(SB).unwrap();
    sb.config.mode = ConsistencyMode::Tso;
    let r = run_litmus(&sb, LITMUS_RUNS, 0, STEP_LIMIT, 0).unwrap();
    for l in r.lines() {
        println!("  {l}");
    }
    let ok =
        failures.is_empty() && r.passed() && r.model.outcomes == tso_outcomes(&sb.config).outcomes;
    report(
        6,
        "1000 random programs under TSO, SB histogram reported",
        ok,
        &format!(
            "runs={BATTERY_RUNS} loads={loads} failures={} sb(0,0)={} observed",
            failures.len(),
            r.count(&outcome(0, 0))
        ),
    );
    assert!(ok, "{failures:?}");
}

#[test]
fn criterion_7_mutations_detected_by_standard_sweep() {
    let mut all = true;
    let mut detail = Vec::new();
    for mutation in Mutation::ALL {
        // The mts mutation lives in L2Evict, which only exists with memory.
        let res = mutation_sweep(
            standard_config(mutation.needs_memory()),
            mutation,
            SWEEP_DEPTH,
            0,
        );
        let replays = res.counterexample.as_ref().is_some_and(|cx| {
            replay(
                &Machine::new(standard_config(res.memory))
                    .unwrap()
                    .with_mutation(Some(mutation)),
                &cx.path,
            )
            .is_ok()
        });
        let ok = res.detected() && res.replayed && replays;
        all &= ok;
        println!("  {}", res.line());
        if !ok {
            let shared = res
                .stats
                .rule_counts
                .get(&Rule::ShReqS)
                .copied()
                .unwrap_or(0);
            println!(
                "  {mutation}: ShReq_S fired {shared} times in the unmutated-equivalent sweep"
            );
        }
        detail.push(format!(
            "{mutation}={}",
            if ok { "detected" } else { "missed" }
        ));
    }
    report(
        7,
        "each protocol mutation caught by the standard sweep",
        all,
        &detail.join(" "),
    );
    assert!(all, "{}", detail.join(" "));
}

#[test]
fn criterion_8_determinism() {
    let a = sweep(false);
    let b = sweep(false);
    let m = Machine::new(standard_config(false)).unwrap();
    let serial = explore_bfs(&m, BfsOptions::new(SWEEP_DEPTH));
    let stats_ok = a.stats == b.stats && a.stats == serial.stats;

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("standard.cfg");
    std::fs::write(&cfg, tardis::explorer::selftest::STANDARD_CONFIG).unwrap();
    let run = |seed: &str| {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let args = ["tardis", "run", cfg.to_str().unwrap(), "--seed", seed];
        let code = main_with(args, &mut out, &mut err);
        (code, out)
    };
    let (c1, t1) = run("42");
    let (c2, t2) = run("42");
    let trace_ok = c1 == 0 && c1 == c2 && t1 == t2 && !t1.is_empty();
    let ok = stats_ok && trace_ok;
    report(
        8,
        "identical sweep stats and byte-identical seeded traces",
        ok,
        &format!("states={} trace_bytes={}", a.stats.states, t1.len()),
    );
    assert!(ok);
}
