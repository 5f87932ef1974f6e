//! Structural invariants around busy lines and in-flight requests.

use crate::config::Config;
use crate::oracle::blocks::clean_blocks;
use crate::protocol::is_miss;
use crate::state::{MemKind, SystemState};
use crate::types::{Access, Addr, CacheState, CoreId};
use crate::verdict::{Invariant, Violation};

/// GetS/GetM entries from `core` for `addr` in the shared request buffer.
pub fn inflight_requests(s: &SystemState, core: CoreId, addr: Addr) -> usize {
    s.c2p_rq
        .iter()
        .filter(|m| m.id == core && m.addr == addr)
        .count()
}

/// ToS/ToM entries for `addr` in `core`'s downstream buffer.
pub fn inflight_responses(s: &SystemState, core: CoreId, addr: Addr) -> usize {
    s.p2c[core.index()]
        .iter()
        .filter(|m| m.addr == addr && m.is_resp())
        .count()
}

fn wbrq_to(s: &SystemState, core: CoreId, addr: Addr) -> bool {
    s.p2c[core.index()]
        .iter()
        .any(|m| m.addr == addr && m.is_wbrq())
}

fn wbrp_from(s: &SystemState, core: CoreId, addr: Addr) -> bool {
    s.c2p_rp.iter().any(|m| m.addr == addr && m.id == core)
}

/// Memory traffic that justifies an invalid L2 line being busy.
fn fill_outstanding(s: &SystemState, addr: Addr) -> bool {
    s.mem_rq
        .iter()
        .any(|m| m.addr == addr && m.kind == MemKind::Fetch)
        || s.mem_rp.iter().any(|m| m.addr == addr)
}

/// Busy-line, request-mirroring and ownership invariants.
pub fn check_busy_structure(s: &SystemState, cfg: &Config) -> Vec<Violation> {
    let mut out = Vec::new();
    for core in s.core_ids() {
        for addr in s.addr_ids() {
            let line = s.l1(core, addr);
            let n = inflight_requests(s, core, addr) + inflight_responses(s, core, addr);
            let expected = usize::from(line.busy);
            if n != expected {
                out.push(Violation::new(
                    Invariant::L1BusyInflight,
                    format!("core={core} addr={addr} busy={} inflight={n}", line.busy),
                ));
            }
            if line.busy {
                match s.pending(core) {
                    Some(req) if req.addr == addr && is_miss(req, line) => {}
                    Some(req) => out.push(Violation::new(
                        Invariant::L1BusyHeadMiss,
                        format!(
                            "core={core} addr={addr} head={}:{} pts={} line={}/{}",
                            req.kind.mnemonic(),
                            req.addr,
                            req.pts,
                            line.state,
                            line.rts
                        ),
                    )),
                    None => out.push(Violation::new(
                        Invariant::L1BusyHeadMiss,
                        format!("core={core} addr={addr} busy with empty mrq"),
                    )),
                }
            }
        }
    }

    for addr in s.addr_ids() {
        let l2 = s.l2(addr);
        if l2.busy {
            let shape_ok = match l2.state {
                CacheState::M => true,
                CacheState::I => cfg.memory && fill_outstanding(s, addr),
                CacheState::S => false,
            };
            if !shape_ok {
                out.push(Violation::new(
                    Invariant::L2BusyModified,
                    format!("addr={addr} state={} busy", l2.state),
                ));
            }
            if l2.state == CacheState::M
                && !wbrq_to(s, l2.owner, addr)
                && !wbrp_from(s, l2.owner, addr)
            {
                out.push(Violation::new(
                    Invariant::L2BusyWriteback,
                    format!("addr={addr} owner={} no WBRq or WBRp in flight", l2.owner),
                ));
            }
            // L2Downgrade makes a modified line busy with no request behind
            // it, so with memory the check only covers fills.
            let needs_request = !cfg.memory || l2.state == CacheState::I;
            if needs_request && s.c2p_rq.head_for(addr).is_none() {
                out.push(Violation::new(
                    Invariant::L2BusyRequestReady,
                    format!("addr={addr} busy without a ready request"),
                ));
            }
        }
        if l2.state == CacheState::M {
            for b in clean_blocks(s, addr) {
                if b.loc.id() != Some(l2.owner) {
                    out.push(Violation::new(
                        Invariant::L2OwnerMatchesClean,
                        format!("addr={addr} owner={} clean={b}", l2.owner),
                    ));
                }
            }
        }
    }

    for m in s.c2p_rq.iter() {
        match s.pending(m.id) {
            Some(req) if req.addr == m.addr && req.kind == m.kind && req.pts == m.pts => {}
            other => out.push(Violation::new(
                Invariant::RequestMirrorsHead,
                format!(
                    "core={} addr={} kind={} pts={} head={}",
                    m.id,
                    m.addr,
                    m.kind.mnemonic(),
                    m.pts,
                    other.map_or("none".to_string(), |r| format!(
                        "{}:{} pts={}",
                        r.kind.mnemonic(),
                        r.addr,
                        r.pts
                    ))
                ),
            )),
        }
    }

    for core in s.core_ids() {
        for m in s.p2c[core.index()].iter().filter(|m| m.is_resp()) {
            let kind = if m.is_tom() {
                Access::Store
            } else {
                Access::Load
            };
            let ok = match s.pending(core) {
                Some(req) => {
                    req.addr == m.addr
                        && req.kind == kind
                        && (kind == Access::Store || m.rts >= req.pts)
                }
                None => false,
            };
            if !ok {
                out.push(Violation::new(
                    Invariant::ResponseMatchesHead,
                    format!(
                        "core={core} addr={} state={} rts={}",
                        m.addr, m.state, m.rts
                    ),
                ));
            }
        }
    }
    out
}
