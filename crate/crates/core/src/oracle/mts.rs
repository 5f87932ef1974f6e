//! Main-memory timestamp invariants.

use crate::config::{Config, ValueMode};
use crate::oracle::blocks::{blocks, provenance, store_between};
use crate::state::{MemKind, SystemState};
use crate::types::{Addr, CacheState, Value};
use crate::verdict::{Invariant, Violation};

/// The value memory will hold for `addr` once queued writebacks drain.
pub fn effective_memory_value(s: &SystemState, addr: Addr) -> Value {
    s.mem_rq
        .iter()
        .filter(|m| m.addr == addr && m.kind == MemKind::WriteBack)
        .last()
        .map_or(s.mem[addr.index()], |m| m.data)
}

/// For every address whose L2 line is invalid: `mts` bounds the rts of
/// every copy and the timestamp of every store, and the memory data is
/// still current at `mts`. Vacuous without main memory.
pub fn check_mts(s: &SystemState, cfg: &Config) -> Vec<Violation> {
    let mut out = Vec::new();
    if !cfg.memory {
        return out;
    }
    for addr in s.addr_ids() {
        if s.l2(addr).state != CacheState::I {
            continue;
        }
        for b in blocks(s, addr) {
            if b.rts > s.mts {
                out.push(Violation::new(
                    Invariant::MtsDominatesRts,
                    format!("addr={addr} mts={} block={b}", s.mts),
                ));
            }
        }
        let history = &s.history[addr.index()];
        if let Some(st) = history.iter().find(|st| st.ts > s.mts) {
            out.push(Violation::new(
                Invariant::MtsBoundsStores,
                format!(
                    "addr={addr} mts={} store_ts={} store_phys={}",
                    s.mts, st.ts, st.phys
                ),
            ));
        }
        if cfg.values != ValueMode::Fresh {
            continue;
        }
        let mut values = vec![effective_memory_value(s, addr)];
        values.extend(s.mem_rp.iter().filter(|m| m.addr == addr).map(|m| m.data));
        for v in values {
            match provenance(s, addr, v) {
                None => out.push(Violation::new(
                    Invariant::MtsProvenance,
                    format!("addr={addr} memory value={v} has no originating store"),
                )),
                Some(st) => {
                    if let Some(later) = store_between(history, st.ts, s.mts) {
                        out.push(Violation::new(
                            Invariant::MtsProvenance,
                            format!(
                                "addr={addr} value={v} source_ts={} intervening_ts={} mts={}",
                                st.ts, later.ts, s.mts
                            ),
                        ));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Machine, Mutation, RuleInstance};
    use crate::types::{CoreId, Timestamp};

    fn machine(text: &str, mutation: Option<Mutation>) -> Machine {
        Machine::new(Config::parse(text).unwrap())
            .unwrap()
            .with_mutation(mutation)
    }

    fn fill_and_evict(m: &Machine) -> crate::state::SystemState {
        let mut s = m.init_state();
        for inst in [
            RuleInstance::L1Miss { core: CoreId(0) },
            RuleInstance::L2Miss { addr: Addr(0) },
            RuleInstance::MemProcess { addr: Addr(0) },
            RuleInstance::MemResp { addr: Addr(0) },
            RuleInstance::ShReqS {
                addr: Addr(0),
                lease_end: Timestamp(10),
            },
            RuleInstance::L2Evict { addr: Addr(0) },
        ] {
            s = m.apply(&s, &inst).unwrap().0;
        }
        s
    }

    #[test]
    fn eviction_raises_mts() {
        let m = machine("cores = 1\naddrs = 1\nmemory = on\nprog 0: Ld 0", None);
        assert!(check_mts(&m.init_state(), m.config()).is_empty());
        let s = fill_and_evict(&m);
        assert_eq!(s.mts, Timestamp(10));
        assert!(check_mts(&s, m.config()).is_empty());
    }

    #[test]
    fn skipped_mts_update_is_caught() {
        let m = machine(
            "cores = 1\naddrs = 1\nmemory = on\nprog 0: Ld 0",
            Some(Mutation::SkipMtsUpdate),
        );
        let s = fill_and_evict(&m);
        let v = check_mts(&s, m.config());
        assert!(v.iter().any(|v| v.invariant == Invariant::MtsDominatesRts));
    }

    #[test]
    fn pending_writeback_counts_as_memory_value() {
        let m = machine("cores = 1\naddrs = 1\nmemory = on", None);
        let mut s = m.init_state();
        s.mem_rq
            .enq(crate::state::MemRq {
                kind: MemKind::WriteBack,
                addr: Addr(0),
                data: Value(9),
            })
            .unwrap();
        assert_eq!(effective_memory_value(&s, Addr(0)), Value(9));
    }
}
