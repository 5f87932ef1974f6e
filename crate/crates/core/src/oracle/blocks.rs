//! Clean blocks and the timestamp invariants over all data copies.

use std::fmt;

use crate::config::{Config, ValueMode};
use crate::state::{StoreRecord, SystemState};
use crate::types::{Addr, CacheState, CoreId, Timestamp, Value};
use crate::verdict::{Invariant, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockLoc {
    L1Line(CoreId),
    L2Line,
    ToS(CoreId),
    ToM(CoreId),
    WbRp(CoreId),
}

impl BlockLoc {
    /// Core id associated with the block, where one exists.
    pub fn id(&self) -> Option<CoreId> {
        match *self {
            BlockLoc::L1Line(c) | BlockLoc::ToS(c) | BlockLoc::ToM(c) | BlockLoc::WbRp(c) => {
                Some(c)
            }
            BlockLoc::L2Line => None,
        }
    }
}

impl fmt::Display for BlockLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockLoc::L1Line(c) => write!(f, "L1[{c}]"),
            BlockLoc::L2Line => write!(f, "L2"),
            BlockLoc::ToS(c) => write!(f, "ToS[{c}]"),
            BlockLoc::ToM(c) => write!(f, "ToM[{c}]"),
            BlockLoc::WbRp(c) => write!(f, "WBRp[{c}]"),
        }
    }
}

/// A timestamped copy of an address's data, in a cache or in flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub loc: BlockLoc,
    pub addr: Addr,
    pub data: Value,
    pub wts: Timestamp,
    pub rts: Timestamp,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(addr={} val={} wts={} rts={})",
            self.loc, self.addr, self.data, self.wts, self.rts
        )
    }
}

/// Every valid copy of `addr`: L1 and L2 lines not in I, plus ToS, ToM
/// and WBRp messages.
pub fn blocks(s: &SystemState, addr: Addr) -> Vec<Block> {
    let mut out = Vec::new();
    let l2 = s.l2(addr);
    if l2.state != CacheState::I {
        out.push(Block {
            loc: BlockLoc::L2Line,
            addr,
            data: l2.data,
            wts: l2.wts,
            rts: l2.rts,
        });
    }
    for core in s.core_ids() {
        let l = s.l1(core, addr);
        if l.state != CacheState::I {
            out.push(Block {
                loc: BlockLoc::L1Line(core),
                addr,
                data: l.data,
                wts: l.wts,
                rts: l.rts,
            });
        }
    }
    for q in &s.p2c {
        for m in q.iter().filter(|m| m.addr == addr && m.is_resp()) {
            let loc = if m.is_tom() {
                BlockLoc::ToM(m.id)
            } else {
                BlockLoc::ToS(m.id)
            };
            out.push(Block {
                loc,
                addr,
                data: m.data,
                wts: m.wts,
                rts: m.rts,
            });
        }
    }
    for m in s.c2p_rp.iter().filter(|m| m.addr == addr) {
        out.push(Block {
            loc: BlockLoc::WbRp(m.id),
            addr,
            data: m.data,
            wts: m.wts,
            rts: m.rts,
        });
    }
    out
}

/// The L2 line in S, any L1 line in M, and any ToM or WBRp for `addr`.
pub fn clean_blocks(s: &SystemState, addr: Addr) -> Vec<Block> {
    blocks(s, addr)
        .into_iter()
        .filter(|b| match b.loc {
            BlockLoc::L2Line => s.l2(addr).state == CacheState::S,
            BlockLoc::L1Line(c) => s.l1(c, addr).state == CacheState::M,
            BlockLoc::ToM(_) | BlockLoc::WbRp(_) => true,
            BlockLoc::ToS(_) => false,
        })
        .collect()
}

fn list(blocks: &[Block]) -> String {
    blocks
        .iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// At most one clean block per address; exactly one without main memory.
/// With main memory, an L2 line in I implies there is none.
pub fn check_clean_unique(s: &SystemState, cfg: &Config) -> Vec<Violation> {
    let mut out = Vec::new();
    for addr in s.addr_ids() {
        let clean = clean_blocks(s, addr);
        let ok = if cfg.memory {
            clean.len() <= 1
        } else {
            clean.len() == 1
        };
        if !ok {
            out.push(Violation::new(
                Invariant::CleanUnique,
                format!(
                    "addr={addr} count={} blocks=[{}]",
                    clean.len(),
                    list(&clean)
                ),
            ));
        }
        if cfg.memory && s.l2(addr).state == CacheState::I && !clean.is_empty() {
            out.push(Violation::new(
                Invariant::L2InvalidNoClean,
                format!("addr={addr} blocks=[{}]", list(&clean)),
            ));
        }
    }
    out
}

/// The clean block's rts bounds the rts of every other copy and the
/// timestamp of every store performed so far.
pub fn check_clean_dominance(s: &SystemState) -> Vec<Violation> {
    let mut out = Vec::new();
    for addr in s.addr_ids() {
        let clean = clean_blocks(s, addr);
        let Some(b) = clean.first() else { continue };
        for other in blocks(s, addr) {
            if other.rts > b.rts {
                out.push(Violation::new(
                    Invariant::CleanRtsDominates,
                    format!("clean={b} other={other}"),
                ));
            }
        }
        if let Some(st) = s.history[addr.index()].iter().find(|st| st.ts > b.rts) {
            out.push(Violation::new(
                Invariant::CleanRtsBoundsStores,
                format!("clean={b} store_ts={} store_phys={}", st.ts, st.phys),
            ));
        }
    }
    out
}

/// The store that produced `value` at `addr`. Only meaningful when store
/// values are unique per address.
pub fn provenance(s: &SystemState, addr: Addr, value: Value) -> Option<&StoreRecord> {
    s.history[addr.index()].iter().find(|st| st.value == value)
}

/// First store strictly newer than `from` but no newer than `upto`.
pub fn store_between(
    history: &[StoreRecord],
    from: Timestamp,
    upto: Timestamp,
) -> Option<&StoreRecord> {
    history.iter().find(|st| from < st.ts && st.ts <= upto)
}

/// Every copy's data comes from a store that has already happened, and no
/// other store falls strictly after that store and at or before the
/// copy's rts. Needs unique store values, so it is skipped unless the
/// configuration writes fresh tokens.
pub fn check_value_provenance(s: &SystemState, cfg: &Config) -> Vec<Violation> {
    let mut out = Vec::new();
    if cfg.values != ValueMode::Fresh {
        return out;
    }
    for addr in s.addr_ids() {
        let history = &s.history[addr.index()];
        for b in blocks(s, addr) {
            let Some(st) = provenance(s, addr, b.data) else {
                out.push(Violation::new(
                    Invariant::ValueProvenance,
                    format!("block={b} has no originating store"),
                ));
                continue;
            };
            if st.phys > s.phys {
                out.push(Violation::new(
                    Invariant::ValueProvenance,
                    format!("block={b} store phys={} is in the future", st.phys),
                ));
            }
            if let Some(later) = store_between(history, st.ts, b.rts) {
                out.push(Violation::new(
                    Invariant::ValueProvenance,
                    format!("block={b} source_ts={} intervening_ts={}", st.ts, later.ts),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Machine, RuleInstance};
    use crate::state::{L1Line, P2CKind, P2CMsg};

    fn machine(text: &str) -> Machine {
        Machine::new(Config::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn initial_state_has_one_clean_block() {
        let m = machine("cores = 2\naddrs = 1");
        let s = m.init_state();
        let clean = clean_blocks(&s, Addr(0));
        assert_eq!(clean.len(), 1);
        assert_eq!(clean[0].loc, BlockLoc::L2Line);
        assert!(check_clean_unique(&s, m.config()).is_empty());
        assert!(check_clean_dominance(&s).is_empty());
        assert!(check_value_provenance(&s, m.config()).is_empty());
    }

    #[test]
    fn exclusive_grant_moves_the_clean_block_into_tom() {
        let m = machine("cores = 2\naddrs = 1\nprog 1: St 0 1");
        let s = m.init_state();
        let (s, _) = m
            .apply(&s, &RuleInstance::L1Miss { core: CoreId(1) })
            .unwrap();
        let (s, _) = m
            .apply(&s, &RuleInstance::ExReqS { addr: Addr(0) })
            .unwrap();
        let clean = clean_blocks(&s, Addr(0));
        assert_eq!(clean.len(), 1);
        assert_eq!(clean[0].loc, BlockLoc::ToM(CoreId(1)));
    }

    #[test]
    fn invalid_l2_in_memory_mode_has_no_clean_block() {
        let m = machine("cores = 1\naddrs = 1\nmemory = on");
        let s = m.init_state();
        assert!(clean_blocks(&s, Addr(0)).is_empty());
        assert!(check_clean_unique(&s, m.config()).is_empty());
    }

    #[test]
    fn two_modified_copies_are_flagged() {
        let m = machine("cores = 2\naddrs = 1");
        let mut s = m.init_state();
        s.l2_mut(Addr(0)).state = CacheState::M;
        for c in [CoreId(0), CoreId(1)] {
            s.l1_mut(c, Addr(0)).state = CacheState::M;
        }
        let v = check_clean_unique(&s, m.config());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, Invariant::CleanUnique);
    }

    #[test]
    fn stale_lease_above_clean_rts_is_flagged() {
        let m = machine("cores = 2\naddrs = 1");
        let mut s = m.init_state();
        *s.l1_mut(CoreId(0), Addr(0)) = L1Line {
            state: CacheState::S,
            rts: Timestamp(5),
            ..L1Line::default()
        };
        let v = check_clean_dominance(&s);
        assert_eq!(v[0].invariant, Invariant::CleanRtsDominates);
    }

    #[test]
    fn tos_copies_are_blocks_but_not_clean() {
        let m = machine("cores = 1\naddrs = 1");
        let mut s = m.init_state();
        s.p2c[0]
            .enq(P2CMsg {
                id: CoreId(0),
                kind: P2CKind::Resp,
                addr: Addr(0),
                state: CacheState::S,
                data: Value(0),
                wts: Timestamp(0),
                rts: Timestamp(3),
            })
            .unwrap();
        assert_eq!(blocks(&s, Addr(0)).len(), 2);
        assert_eq!(clean_blocks(&s, Addr(0)).len(), 1);
        // The ToS lease exceeds the L2 rts, which the dominance check catches.
        assert!(!check_clean_dominance(&s).is_empty());
    }

    #[test]
    fn unknown_value_fails_provenance() {
        let m = machine("cores = 1\naddrs = 1");
        let mut s = m.init_state();
        s.l2_mut(Addr(0)).data = Value(77);
        let v = check_value_provenance(&s, m.config());
        assert_eq!(v[0].invariant, Invariant::ValueProvenance);
    }
}
