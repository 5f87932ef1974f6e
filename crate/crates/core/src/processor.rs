//! In-order-commit processor model.
//!
//! Each core keeps at most one request outstanding. Requests carry a
//! timestamp floor (`pts`) derived from what the core has already
//! committed, and responses are consumed as soon as they appear.

use crate::config::{Config, ConsistencyMode, Op};
use crate::error::Error;
use crate::state::{store_value, CommitEvent, ProcRequest, SystemState};
use crate::types::{Access, CoreId, Timestamp};

/// Floor for the next request of `core`.
pub fn floor_for(
    state: &SystemState,
    mode: ConsistencyMode,
    core: CoreId,
    kind: Access,
) -> Timestamp {
    let p = &state.procs[core.index()];
    match (mode, kind) {
        (ConsistencyMode::Sc, _) => p.last_commit_ts,
        (ConsistencyMode::Tso, Access::Load) => p.last_load_ts,
        (ConsistencyMode::Tso, Access::Store) => p.last_load_ts.max(p.last_store_ts),
    }
}

/// Issues the next program operation of `core` if nothing is outstanding.
/// Returns whether a request was enqueued.
pub fn issue(state: &mut SystemState, cfg: &Config, core: CoreId) -> bool {
    let idx = core.index();
    let p = state.procs[idx];
    let prog = &cfg.programs[idx];
    if p.outstanding.is_some() || p.pc as usize >= prog.ops.len() || !state.mrq[idx].has_room() {
        return false;
    }
    let seq = p.pc;
    let op = prog.ops[seq as usize];
    let (kind, addr) = match op {
        Op::Load(a) => (Access::Load, a),
        Op::Store(a, _) => (Access::Store, a),
    };
    let req = ProcRequest {
        seq,
        kind,
        addr,
        data: store_value(cfg, core, seq as usize),
        pts: floor_for(state, cfg.mode, core, kind),
    };
    state.mrq[idx].enq(req).expect("room checked");
    let p = &mut state.procs[idx];
    p.pc += 1;
    p.outstanding = Some(seq);
    true
}

/// Consumes the head of `core`'s response buffer and records the commit.
pub fn commit(state: &mut SystemState, cfg: &Config, core: CoreId) -> Result<CommitEvent, Error> {
    let idx = core.index();
    let rsp = state.mrp[idx].deq()?;
    let floor = floor_for(state, cfg.mode, core, rsp.kind);
    if rsp.ts < floor {
        return Err(Error::MonotonicityViolation {
            core,
            floor,
            got: rsp.ts,
        });
    }
    let ev = CommitEvent {
        core,
        seq: rsp.seq,
        kind: rsp.kind,
        addr: rsp.addr,
        value: rsp.data,
        ts: rsp.ts,
        phys: state.phys,
    };
    let p = &mut state.procs[idx];
    p.last_commit_ts = p.last_commit_ts.max(rsp.ts);
    match rsp.kind {
        Access::Load => p.last_load_ts = p.last_load_ts.max(rsp.ts),
        Access::Store => p.last_store_ts = p.last_store_ts.max(rsp.ts),
    }
    if p.outstanding == Some(rsp.seq) {
        p.outstanding = None;
    }
    state.trace.push(ev);
    Ok(ev)
}

/// Commits every available response and issues follow-up requests.
pub fn settle(state: &mut SystemState, cfg: &Config) -> Result<(), Error> {
    for c in 0..state.cores() {
        let core = CoreId(c as u8);
        while !state.mrp[c].is_empty() {
            commit(state, cfg, core)?;
        }
        issue(state, cfg, core);
    }
    Ok(())
}

/// Program-order violation found on a commit list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderViolation {
    pub earlier: CommitEvent,
    pub later: CommitEvent,
    pub reason: &'static str,
}

/// In-order commit: for ops X before Y of one core, `X.ts <= Y.ts` and
/// `X.phys < Y.phys`.
pub fn check_sc_program_order(trace: &[CommitEvent]) -> Result<(), OrderViolation> {
    check_pairs(trace, |x, y| {
        if x.phys >= y.phys {
            Some("physical commit order differs from program order")
        } else if x.ts > y.ts {
            Some("timestamp decreases along program order")
        } else {
            None
        }
    })
}

/// TSO processor: load->load, load->store and store->store pairs keep
/// timestamp order; store->load pairs may invert. All pairs keep physical
/// order.
pub fn check_tso_program_order(trace: &[CommitEvent]) -> Result<(), OrderViolation> {
    check_pairs(trace, |x, y| {
        if x.phys >= y.phys {
            Some("physical commit order differs from program order")
        } else if !(x.kind == Access::Store && y.kind == Access::Load) && x.ts > y.ts {
            Some("timestamp decreases along an ordered program pair")
        } else {
            None
        }
    })
}

fn check_pairs(
    trace: &[CommitEvent],
    bad: impl Fn(&CommitEvent, &CommitEvent) -> Option<&'static str>,
) -> Result<(), OrderViolation> {
    let cores = trace.iter().map(|e| e.core.index() + 1).max().unwrap_or(0);
    for c in 0..cores {
        let mut events: Vec<&CommitEvent> = trace.iter().filter(|e| e.core.index() == c).collect();
        events.sort_by_key(|e| e.seq);
        for (i, x) in events.iter().enumerate() {
            for y in &events[i + 1..] {
                if let Some(reason) = bad(x, y) {
                    return Err(OrderViolation {
                        earlier: **x,
                        later: **y,
                        reason,
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{init_state, ProcResponse};
    use crate::types::Addr;

    fn setup(mode: &str, prog: &str) -> (Config, SystemState) {
        let cfg = Config::parse(&format!(
            "cores = 1\naddrs = a b\nmode = {mode}\nprog 0: {prog}"
        ))
        .unwrap();
        let s = init_state(&cfg).unwrap();
        (cfg, s)
    }

    fn respond(s: &mut SystemState, kind: Access, ts: u64) {
        s.phys += 1;
        let head = s.mrq[0].deq().unwrap();
        s.mrp[0]
            .enq(ProcResponse {
                seq: head.seq,
                kind,
                addr: head.addr,
                data: head.data,
                ts: Timestamp(ts),
            })
            .unwrap();
    }

    #[test]
    fn sc_floor_is_last_commit() {
        let (cfg, mut s) = setup("sc", "St a 1; Ld b");
        assert_eq!(s.pending(CoreId(0)).unwrap().pts, Timestamp(0));
        s.procs[0].last_commit_ts = Timestamp(5);
        respond(&mut s, Access::Store, 7);
        settle(&mut s, &cfg).unwrap();
        assert_eq!(s.procs[0].last_commit_ts, Timestamp(7));
        let head = s.pending(CoreId(0)).unwrap();
        assert_eq!(
            (head.kind, head.addr, head.pts),
            (Access::Load, Addr(1), Timestamp(7))
        );
    }

    #[test]
    fn tso_load_floor_ignores_stores() {
        let (cfg, mut s) = setup("tso", "Ld a; St a 2; Ld b");
        respond(&mut s, Access::Load, 3);
        settle(&mut s, &cfg).unwrap();
        assert_eq!(s.pending(CoreId(0)).unwrap().pts, Timestamp(3));
        respond(&mut s, Access::Store, 9);
        settle(&mut s, &cfg).unwrap();
        assert_eq!(s.pending(CoreId(0)).unwrap().pts, Timestamp(3));
        // A load may commit below the earlier store.
        respond(&mut s, Access::Load, 3);
        settle(&mut s, &cfg).unwrap();
        assert!(check_tso_program_order(&s.trace).is_ok());
        assert!(check_sc_program_order(&s.trace).is_err());
    }

    #[test]
    fn commit_below_floor_is_rejected() {
        let (cfg, mut s) = setup("sc", "Ld a");
        s.procs[0].last_commit_ts = Timestamp(7);
        respond(&mut s, Access::Load, 5);
        let err = commit(&mut s, &cfg, CoreId(0)).unwrap_err();
        assert_eq!(
            err,
            Error::MonotonicityViolation {
                core: CoreId(0),
                floor: Timestamp(7),
                got: Timestamp(5)
            }
        );
    }

    #[test]
    fn one_outstanding_request() {
        let (cfg, mut s) = setup("sc", "Ld a; Ld b");
        assert!(!issue(&mut s, &cfg, CoreId(0)));
        assert_eq!(s.mrq[0].len(), 1);
        assert_eq!(s.procs[0].outstanding, Some(0));
    }
}
