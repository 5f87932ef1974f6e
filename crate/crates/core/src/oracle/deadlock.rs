//! Deadlock freedom and bounded voluntary activity.

use crate::protocol::{Machine, Rule, TransitionRecord};
use crate::state::SystemState;
use crate::types::CacheState;
use crate::verdict::{Invariant, Violation};

/// While any request is pending, some non-voluntary rule is enabled.
/// Only asserted with unbounded buffers.
pub fn check_deadlock_enabled(m: &Machine, s: &SystemState) -> Vec<Violation> {
    if m.config().capacity != 0 || !s.has_pending() {
        return Vec::new();
    }
    let enabled = m.enabled(s);
    if enabled.iter().any(|i| !i.rule().is_voluntary()) {
        return Vec::new();
    }
    let pending: Vec<String> = s
        .core_ids()
        .filter_map(|c| {
            s.pending(c)
                .map(|r| format!("{c}:{}{}", r.kind.mnemonic(), r.addr))
        })
        .collect();
    vec![Violation::new(
        Invariant::Deadlock,
        format!(
            "phys={} pending=[{}] enabled=[{}]",
            s.phys,
            pending.join(","),
            enabled
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
    )]
}

/// Weighted count that Downgrade, WriteBackReq and WriteBackResp each
/// strictly decrease: L1 lines in M weigh 3 and in S weigh 1, in-flight
/// WBRq weigh 2 and WBRp weigh 1.
pub fn voluntary_measure(s: &SystemState) -> u64 {
    let lines: u64 =
        s.l1.iter()
            .flatten()
            .map(|l| match l.state {
                CacheState::M => 3,
                CacheState::S => 1,
                CacheState::I => 0,
            })
            .sum();
    let wbrq = s
        .p2c
        .iter()
        .flat_map(|q| q.iter())
        .filter(|m| m.is_wbrq())
        .count() as u64;
    let wbrp = s.c2p_rp.len() as u64;
    lines + 2 * wbrq + wbrp
}

pub fn is_write_back_family(rule: Rule) -> bool {
    matches!(
        rule,
        Rule::Downgrade | Rule::WriteBackReq | Rule::WriteBackResp
    )
}

/// The write-back family can only fire finitely often in a row.
pub fn check_voluntary_step(
    pre: &SystemState,
    rec: &TransitionRecord,
    post: &SystemState,
) -> Vec<Violation> {
    let rule = rec.instance.rule();
    if !is_write_back_family(rule) {
        return Vec::new();
    }
    let (a, b) = (voluntary_measure(pre), voluntary_measure(post));
    if b < a {
        Vec::new()
    } else {
        vec![Violation::new(
            Invariant::Livelock,
            format!("rule={} measure {a} -> {b}", rule.name()),
        )]
    }
}
