//! Progress lattice for pending requests.
//!
//! Each request at the head of an mrq is classified into one of eleven
//! rows, ordered from furthest to closest to completion. With main memory
//! on, three extra rows cover an invalid L2 line being refilled; they sit
//! between the modified-line rows and the shared-line row because a
//! refill ends with the line in S.

use std::fmt;

use crate::config::Config;
use crate::protocol::{is_miss, Rule, TransitionRecord};
use crate::state::{MemKind, SystemState};
use crate::types::{Addr, CacheState, CoreId};
use crate::verdict::{Invariant, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LatticeEntry {
    /// Rows 1 to 11 of the base lattice.
    Row(u8),
    /// Memory refill rows: 1 = L2 invalid and idle, 2 = fetch queued,
    /// 3 = memory response queued.
    Fill(u8),
}

impl LatticeEntry {
    /// Position in the total progress order; larger is closer to done.
    pub fn rank(self) -> u32 {
        match self {
            LatticeEntry::Row(r) => u32::from(r) * 10,
            LatticeEntry::Fill(f) => 70 + u32::from(f),
        }
    }

    pub fn is_hit(self) -> bool {
        self == LatticeEntry::Row(11)
    }
}

impl fmt::Display for LatticeEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeEntry::Row(r) => write!(f, "{r}"),
            LatticeEntry::Fill(x) => write!(f, "fill{x}"),
        }
    }
}

/// Classification failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    NoEntry,
    MultiEntry(Vec<LatticeEntry>),
}

/// Buffer facts the row predicates are written over.
struct Facts {
    miss: bool,
    busy: bool,
    c2p_exist: bool,
    c2p_rdy: bool,
    l2_state: CacheState,
    l2_busy: bool,
    p2c_rq_exist: bool,
    p2c_rq_rdy: bool,
    owner_state: CacheState,
    p2c_rp_exist: bool,
    p2c_rp_rdy: bool,
    fetch_queued: bool,
    mem_rp_queued: bool,
}

fn facts(s: &SystemState, core: CoreId, addr: Addr) -> Option<Facts> {
    let req = s.pending(core)?;
    let line = s.l1(core, addr);
    let l2 = s.l2(addr);
    let owner_q = &s.p2c[l2.owner.index()];
    let own_q = &s.p2c[core.index()];
    Some(Facts {
        miss: is_miss(req, line),
        busy: line.busy,
        c2p_exist: s.c2p_rq.iter().any(|m| m.id == core && m.addr == addr),
        c2p_rdy: s.c2p_rq.head_for(addr).is_some_and(|m| m.id == core),
        l2_state: l2.state,
        l2_busy: l2.busy,
        p2c_rq_exist: owner_q.iter().any(|m| m.addr == addr && m.is_wbrq()),
        p2c_rq_rdy: owner_q.head_for(addr).is_some_and(|m| m.is_wbrq()),
        owner_state: s.l1(l2.owner, addr).state,
        p2c_rp_exist: own_q.iter().any(|m| m.addr == addr && m.is_resp()),
        p2c_rp_rdy: own_q.head_for(addr).is_some_and(|m| m.is_resp()),
        fetch_queued: s
            .mem_rq
            .iter()
            .any(|m| m.addr == addr && m.kind == MemKind::Fetch),
        mem_rp_queued: s.mem_rp.iter().any(|m| m.addr == addr),
    })
}

/// Every entry whose predicate holds for `core`'s head request. Each row
/// is evaluated independently so coverage and exclusivity are observable.
pub fn matching_entries(s: &SystemState, cfg: &Config, core: CoreId) -> Vec<LatticeEntry> {
    let Some(req) = s.pending(core) else {
        return Vec::new();
    };
    let f = facts(s, core, req.addr).expect("head exists");
    let pend = f.miss && f.busy;
    let at_l2 = pend && f.c2p_rdy;
    let m_busy = at_l2 && f.l2_state == CacheState::M && f.l2_busy;
    let rows = [
        f.miss && !f.busy,
        pend && f.c2p_exist && !f.c2p_rdy,
        at_l2 && f.l2_state == CacheState::M && !f.l2_busy,
        m_busy && f.p2c_rq_exist && !f.p2c_rq_rdy,
        m_busy && f.p2c_rq_rdy && f.owner_state == CacheState::M,
        m_busy && f.p2c_rq_rdy && f.owner_state < CacheState::M,
        m_busy && !f.p2c_rq_exist,
        at_l2 && f.l2_state == CacheState::S,
        pend && f.p2c_rp_exist && !f.p2c_rp_rdy,
        pend && f.p2c_rp_rdy,
        !f.miss,
    ];
    let mut out: Vec<LatticeEntry> = rows
        .iter()
        .enumerate()
        .filter(|(_, &hit)| hit)
        .map(|(i, _)| LatticeEntry::Row(i as u8 + 1))
        .collect();
    if cfg.memory {
        let at_i = at_l2 && f.l2_state == CacheState::I;
        let fills = [
            at_i && !f.l2_busy,
            at_i && f.l2_busy && f.fetch_queued,
            at_i && f.l2_busy && !f.fetch_queued && f.mem_rp_queued,
        ];
        out.extend(
            fills
                .iter()
                .enumerate()
                .filter(|(_, &hit)| hit)
                .map(|(i, _)| LatticeEntry::Fill(i as u8 + 1)),
        );
    }
    out.sort();
    out
}

/// The unique entry for `core`'s head request.
pub fn lattice_entry(
    s: &SystemState,
    cfg: &Config,
    core: CoreId,
) -> Result<LatticeEntry, LatticeError> {
    let m = matching_entries(s, cfg, core);
    match m.len() {
        0 => Err(LatticeError::NoEntry),
        1 => Ok(m[0]),
        _ => Err(LatticeError::MultiEntry(m)),
    }
}

/// Coverage and mutual exclusion for every pending head request.
pub fn check_lattice_state(s: &SystemState, cfg: &Config) -> Vec<Violation> {
    let mut out = Vec::new();
    for core in s.core_ids() {
        if s.pending(core).is_none() {
            continue;
        }
        match lattice_entry(s, cfg, core) {
            Ok(_) => {}
            Err(LatticeError::NoEntry) => out.push(Violation::new(
                Invariant::LatticeCoverage,
                format!("core={core} matches no entry"),
            )),
            Err(LatticeError::MultiEntry(m)) => out.push(Violation::new(
                Invariant::LatticeExclusive,
                format!(
                    "core={core} matches [{}]",
                    m.iter()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                ),
            )),
        }
    }
    out
}

/// Rules allowed to leave every request where it is.
pub fn progress_exempt(rule: Rule) -> bool {
    matches!(
        rule,
        Rule::Downgrade
            | Rule::WriteBackReq
            | Rule::WriteBackResp
            | Rule::L2Downgrade
            | Rule::L2Evict
            | Rule::MemProcess
    )
}

/// Head request of each core keyed by `(core, seq)`, with its entry.
fn heads(s: &SystemState, cfg: &Config) -> Vec<Option<(u32, LatticeEntry)>> {
    s.core_ids()
        .map(|c| {
            let req = s.pending(c)?;
            lattice_entry(s, cfg, c).ok().map(|e| (req.seq, e))
        })
        .collect()
}

/// Per-transition lattice checks: no head request moves backwards, every
/// non-exempt rule dequeues a request or moves one forward, and hit rules
/// fire only from the hit row.
///
/// Evicting a shared L2 line to memory sends waiting requests back to the
/// refill rows, so L2Evict is exempt from the backward check.
pub fn check_lattice_step(
    cfg: &Config,
    pre: &SystemState,
    rec: &TransitionRecord,
    post: &SystemState,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let rule = rec.instance.rule();
    let before = heads(pre, cfg);
    let after = heads(post, cfg);
    let mut advanced = false;
    for (c, (b, a)) in before.iter().zip(&after).enumerate() {
        let core = CoreId(c as u8);
        let (Some((seq_b, eb)), Some((seq_a, ea))) = (b, a) else {
            continue;
        };
        if seq_b != seq_a {
            continue;
        }
        if ea.rank() < eb.rank() && !(cfg.memory && rule == Rule::L2Evict) {
            out.push(Violation::new(
                Invariant::LatticeBackward,
                format!(
                    "rule={} core={core} seq={seq_b} from={eb} to={ea}",
                    rule.name()
                ),
            ));
        }
        if ea.rank() > eb.rank() {
            advanced = true;
        }
    }
    if !progress_exempt(rule) && rec.dequeued.is_empty() && !advanced {
        out.push(Violation::new(
            Invariant::LatticeNoProgress,
            format!("rule={} step={} {}", rule.name(), rec.step, rec.instance),
        ));
    }
    if matches!(rule, Rule::LoadHit | Rule::StoreHit) {
        if let Some(core) = rec.instance.core() {
            if let Some((_, e)) = before[core.index()] {
                if !e.is_hit() {
                    out.push(Violation::new(
                        Invariant::LatticeHitOnMiss,
                        format!("rule={} core={core} entry={e}", rule.name()),
                    ));
                }
            }
        }
    }
    out
}
