//! Property tests over random programs and random schedules.

mod common;

use common::random_config;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tardis::oracle::blocks::clean_blocks;
use tardis::oracle::{check_state, check_step};
use tardis::{CacheState, Config, ConsistencyMode, Machine, SystemState};

fn timestamps_ordered(s: &SystemState) -> bool {
    let l1 =
        s.l1.iter()
            .flatten()
            .filter(|l| l.state != CacheState::I)
            .all(|l| l.wts <= l.rts);
    let l2 =
        s.l2.iter()
            .filter(|l| l.state != CacheState::I)
            .all(|l| l.wts <= l.rts);
    l1 && l2
}

/// Walks `steps` random transitions, checking each edge with `check`.
fn walk(
    cfg: Config,
    seed: u64,
    steps: usize,
    mut check: impl FnMut(&Machine, &SystemState, &tardis::TransitionRecord, &SystemState),
) {
    let m = Machine::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = m.init_state();
    for _ in 0..steps {
        let enabled = m.enabled(&s);
        if enabled.is_empty() {
            break;
        }
        let inst = enabled[rng.gen_range(0..enabled.len())];
        let (n, rec) = m.fire(&s, &inst).unwrap();
        check(&m, &s, &rec, &n);
        s = n;
    }
}

fn mode_strategy() -> impl Strategy<Value = ConsistencyMode> {
    prop_oneof![Just(ConsistencyMode::Sc), Just(ConsistencyMode::Tso)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracles_hold_on_random_walks(prog in any::<u64>(), sched in any::<u64>(), mode in mode_strategy(), memory in any::<bool>()) {
        let mut cfg = random_config(prog, mode);
        cfg.memory = memory;
        let mut bad = Vec::new();
        walk(cfg, sched, 300, |m, pre, rec, post| {
            bad.extend(check_step(m, pre, rec, post));
            bad.extend(check_state(m, post));
        });
        prop_assert!(bad.is_empty(), "{:?}", bad.first());
    }

    #[test]
    fn write_timestamp_never_exceeds_read_timestamp(prog in any::<u64>(), sched in any::<u64>(), memory in any::<bool>()) {
        let mut cfg = random_config(prog, ConsistencyMode::Sc);
        cfg.memory = memory;
        let mut ok = true;
        walk(cfg, sched, 300, |_, _, _, post| ok &= timestamps_ordered(post));
        prop_assert!(ok);
    }

    #[test]
    fn rules_touch_only_their_address(prog in any::<u64>(), sched in any::<u64>()) {
        let cfg = random_config(prog, ConsistencyMode::Sc);
        let mut broken = None;
        walk(cfg, sched, 300, |_, pre, rec, post| {
            check_frame(pre, rec, post, &mut broken);
        });
        prop_assert!(broken.is_none(), "{:?}", broken);
    }

    #[test]
    fn at_most_one_clean_block_per_address(prog in any::<u64>(), sched in any::<u64>(), memory in any::<bool>()) {
        let mut cfg = random_config(prog, ConsistencyMode::Sc);
        cfg.memory = memory;
        let mut worst = 0;
        walk(cfg, sched, 300, |_, _, _, post| {
            for a in post.addr_ids() {
                worst = worst.max(clean_blocks(post, a).len());
            }
        });
        prop_assert!(worst <= 1);
    }

    #[test]
    fn physical_time_counts_transitions(prog in any::<u64>(), sched in any::<u64>()) {
        let cfg = random_config(prog, ConsistencyMode::Sc);
        let mut ok = true;
        walk(cfg, sched, 200, |_, pre, rec, post| {
            ok &= post.phys == pre.phys + 1 && rec.step == post.phys;
        });
        prop_assert!(ok);
    }

    #[test]
    fn config_text_round_trips(prog in any::<u64>(), mode in mode_strategy(), memory in any::<bool>()) {
        let mut cfg = random_config(prog, mode);
        cfg.memory = memory;
        let again = Config::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(again, cfg);
    }
}

/// Cache lines of addresses other than the rule's own must not change.
fn check_frame(
    pre: &SystemState,
    rec: &tardis::TransitionRecord,
    post: &SystemState,
    broken: &mut Option<String>,
) {
    let Some(addr) = rec.addr else { return };
    for a in pre.addr_ids().filter(|&a| a != addr) {
        let l1_same = pre.core_ids().all(|c| pre.l1(c, a) == post.l1(c, a));
        if !l1_same || pre.l2(a) != post.l2(a) {
            broken.get_or_insert_with(|| format!("{} changed addr {a}", rec.instance));
        }
    }
}
