//! Trace-level memory-model checks over a finished (or partial) execution.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::processor::{check_sc_program_order, check_tso_program_order, OrderViolation};
use crate::state::{CommitEvent, StoreRecord, SystemState};
use crate::types::{Access, Addr, CoreId, Timestamp, Value};
use crate::verdict::{Invariant, Violation};

/// Committed operations plus the stores they imply, including one initial
/// store per address at timestamp 0 and physical time 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub stores: Vec<StoreRecord>,
    pub commits: Vec<CommitEvent>,
}

impl Execution {
    /// Takes the store log recorded by the protocol rather than the
    /// commit list, so the two can be compared.
    pub fn from_state(s: &SystemState) -> Execution {
        Execution {
            stores: s.all_stores().copied().collect(),
            commits: s.trace.clone(),
        }
    }

    /// Derives stores from store commits.
    pub fn from_commits(initial: &[Value], commits: Vec<CommitEvent>) -> Execution {
        let mut stores: Vec<StoreRecord> = initial
            .iter()
            .enumerate()
            .map(|(a, &value)| StoreRecord {
                addr: Addr(a as u8),
                ts: Timestamp::ZERO,
                value,
                phys: 0,
                core: None,
                seq: 0,
            })
            .collect();
        stores.extend(
            commits
                .iter()
                .filter(|e| e.kind == Access::Store)
                .map(|e| StoreRecord {
                    addr: e.addr,
                    ts: e.ts,
                    value: e.value,
                    phys: e.phys,
                    core: Some(e.core),
                    seq: e.seq,
                }),
        );
        Execution { stores, commits }
    }

    /// Reads `init addr=<a> val=<v>` and commit lines; everything else
    /// (transition lines, stats, verdicts) is ignored.
    pub fn parse(text: &str) -> Result<Execution, Error> {
        let mut initial: Vec<(usize, Value)> = Vec::new();
        let mut commits = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            let err = |m: &str| Error::Parse(format!("line {}: {m}", i + 1));
            if let Some(rest) = line.strip_prefix("init ") {
                let f = fields(rest);
                let addr = get(&f, "addr").ok_or_else(|| err("init needs addr"))?;
                let val = get(&f, "val").ok_or_else(|| err("init needs val"))?;
                initial.push((addr as usize, Value(val)));
            } else if let Some(rest) = line.strip_prefix("commit ") {
                let f = fields(rest);
                let num =
                    |k: &str| get(&f, k).ok_or_else(|| err(&format!("commit needs numeric `{k}`")));
                let kind = match f.iter().find(|(k, _)| *k == "op").map(|(_, v)| *v) {
                    Some("Ld") => Access::Load,
                    Some("St") => Access::Store,
                    _ => return Err(err("commit needs op=Ld|St")),
                };
                commits.push(CommitEvent {
                    core: CoreId(num("core")? as u8),
                    seq: num("seq")? as u32,
                    kind,
                    addr: Addr(num("addr")? as u8),
                    value: Value(num("val")?),
                    ts: Timestamp(num("ts")?),
                    phys: num("phys")?,
                });
            }
        }
        let addrs = initial
            .iter()
            .map(|(a, _)| a + 1)
            .chain(commits.iter().map(|e| e.addr.index() + 1))
            .max()
            .unwrap_or(0);
        let mut values = vec![Value::default(); addrs];
        for (a, v) in initial {
            values[a] = v;
        }
        Ok(Execution::from_commits(&values, commits))
    }

    pub fn loads(&self) -> impl Iterator<Item = &CommitEvent> {
        self.commits.iter().filter(|e| e.kind == Access::Load)
    }

    fn stores_to(&self, addr: Addr) -> impl Iterator<Item = &StoreRecord> {
        self.stores.iter().filter(move |s| s.addr == addr)
    }
}

fn fields(s: &str) -> Vec<(&str, &str)> {
    s.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect()
}

fn get(f: &[(&str, &str)], key: &str) -> Option<u64> {
    f.iter()
        .find(|(k, _)| *k == key)
        .and_then(|(_, v)| v.parse().ok())
}

/// Latest store under the (timestamp, physical time) order.
fn latest<'a>(it: impl Iterator<Item = &'a StoreRecord>) -> Option<&'a StoreRecord> {
    it.max_by_key(|s| (s.ts, s.phys))
}

fn store_id(s: &StoreRecord) -> String {
    match s.core {
        Some(c) => format!("St(core={c} seq={} ts={} val={})", s.seq, s.ts, s.value),
        None => format!("init(addr={} val={})", s.addr, s.value),
    }
}

/// Loads return the latest store at or below their timestamp; stores to
/// one address have distinct timestamps; a store and a load sharing a
/// timestamp are physically ordered store first.
pub fn check_timestamp_order(x: &Execution) -> Vec<Violation> {
    let mut out = Vec::new();
    for l in x.loads() {
        let max = latest(x.stores_to(l.addr).filter(|s| s.ts <= l.ts));
        match max {
            Some(s) if s.value == l.value => {}
            Some(s) => out.push(Violation::new(
                Invariant::LoadValue,
                format!("{l} expected val={} from {}", s.value, store_id(s)),
            )),
            None => out.push(Violation::new(
                Invariant::LoadValue,
                format!("{l} has no visible store"),
            )),
        }
        for s in x
            .stores_to(l.addr)
            .filter(|s| s.ts == l.ts && s.phys >= l.phys && s.core.is_some())
        {
            out.push(Violation::new(
                Invariant::SameTsOrder,
                format!("{l} shares ts with later {} phys={}", store_id(s), s.phys),
            ));
        }
    }
    let mut seen: BTreeSet<(Addr, Timestamp)> = BTreeSet::new();
    for s in &x.stores {
        if !seen.insert((s.addr, s.ts)) {
            out.push(Violation::new(
                Invariant::StoreTsUnique,
                format!("addr={} ts={} second={}", s.addr, s.ts, store_id(s)),
            ));
        }
    }
    out
}

/// Position of an operation in the global memory order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct OrderKey {
    ts: Timestamp,
    phys: u64,
    addr: Addr,
}

#[derive(Debug, Clone, Copy)]
enum MemOp<'a> {
    Store(&'a StoreRecord),
    Load(&'a CommitEvent),
}

/// Builds the memory order by (timestamp, physical time) and checks both
/// SC rules against it directly: per-core program order is embedded, and
/// each load returns the value of the last earlier store to its address.
pub fn check_sc(x: &Execution) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut order: Vec<(OrderKey, MemOp)> = x
        .stores
        .iter()
        .map(|s| {
            (
                OrderKey {
                    ts: s.ts,
                    phys: s.phys,
                    addr: s.addr,
                },
                MemOp::Store(s),
            )
        })
        .chain(x.loads().map(|l| {
            (
                OrderKey {
                    ts: l.ts,
                    phys: l.phys,
                    addr: l.addr,
                },
                MemOp::Load(l),
            )
        }))
        .collect();
    order.sort_by_key(|(k, _)| *k);

    let mut last_seq: Vec<Option<(u32, String)>> = Vec::new();
    let mut mem: Vec<Option<Value>> = Vec::new();
    for (_, op) in &order {
        let (core, seq, addr, desc) = match op {
            MemOp::Store(s) => match s.core {
                Some(c) => (Some(c), s.seq, s.addr, store_id(s)),
                None => (None, 0, s.addr, store_id(s)),
            },
            MemOp::Load(l) => (Some(l.core), l.seq, l.addr, l.to_string()),
        };
        if mem.len() <= addr.index() {
            mem.resize(addr.index() + 1, None);
        }
        if let Some(c) = core {
            if last_seq.len() <= c.index() {
                last_seq.resize(c.index() + 1, None);
            }
            if let Some((prev, prev_desc)) = &last_seq[c.index()] {
                if *prev > seq {
                    out.push(Violation::new(
                        Invariant::ScProgramOrder,
                        format!("{desc} precedes program-earlier {prev_desc} in memory order"),
                    ));
                }
            }
            last_seq[c.index()] = Some((seq, desc.clone()));
        }
        match op {
            MemOp::Store(s) => mem[addr.index()] = Some(s.value),
            MemOp::Load(l) => {
                if mem[addr.index()] != Some(l.value) {
                    out.push(Violation::new(
                        Invariant::ScLoadValue,
                        format!(
                            "{l} but memory order gives {}",
                            mem[addr.index()].map_or("nothing".to_string(), |v| v.to_string())
                        ),
                    ));
                }
            }
        }
    }
    out
}

/// For every load, the stores at or below its timestamp are exactly the
/// stores before it in the memory order.
pub fn check_store_sets(x: &Execution) -> Vec<Violation> {
    let mut out = Vec::new();
    for l in x.loads() {
        let by_ts: BTreeSet<(Timestamp, u64)> = x
            .stores_to(l.addr)
            .filter(|s| s.ts <= l.ts)
            .map(|s| (s.ts, s.phys))
            .collect();
        let by_order: BTreeSet<(Timestamp, u64)> = x
            .stores_to(l.addr)
            .filter(|s| (s.ts, s.phys) < (l.ts, l.phys))
            .map(|s| (s.ts, s.phys))
            .collect();
        if by_ts != by_order {
            out.push(Violation::new(
                Invariant::StoreSetAgreement,
                format!("{l} ts-set={} order-set={}", by_ts.len(), by_order.len()),
            ));
        }
    }
    out
}

/// Loads return the latest store among those at or below their timestamp
/// and the same core's program-earlier stores to the address.
pub fn check_tso(x: &Execution) -> Vec<Violation> {
    let mut out = Vec::new();
    for l in x.loads() {
        let max = latest(
            x.stores_to(l.addr)
                .filter(|s| s.ts <= l.ts || (s.core == Some(l.core) && s.seq < l.seq)),
        );
        match max {
            Some(s) if s.value == l.value => {}
            Some(s) => out.push(Violation::new(
                Invariant::TsoLoadValue,
                format!("{l} expected val={} from {}", s.value, store_id(s)),
            )),
            None => out.push(Violation::new(
                Invariant::TsoLoadValue,
                format!("{l} has no visible store"),
            )),
        }
    }
    out
}

fn order_violation(inv: Invariant, v: OrderViolation) -> Violation {
    Violation::new(inv, format!("{}: {} then {}", v.reason, v.earlier, v.later))
}

/// Per-core in-order commit for SC.
pub fn check_sc_commit_order(x: &Execution) -> Vec<Violation> {
    check_sc_program_order(&x.commits)
        .err()
        .map(|v| order_violation(Invariant::CommitOrder, v))
        .into_iter()
        .collect()
}

/// Per-core ordering constraints for TSO.
pub fn check_tso_commit_order(x: &Execution) -> Vec<Violation> {
    check_tso_program_order(&x.commits)
        .err()
        .map(|v| order_violation(Invariant::CommitOrder, v))
        .into_iter()
        .collect()
}

/// Everything an SC-mode execution must satisfy.
pub fn check_sc_execution(x: &Execution) -> Vec<Violation> {
    let mut out = check_timestamp_order(x);
    out.extend(check_sc_commit_order(x));
    out.extend(check_sc(x));
    out.extend(check_store_sets(x));
    out
}

/// Everything a TSO-mode execution must satisfy.
pub fn check_tso_execution(x: &Execution) -> Vec<Violation> {
    let mut out = check_tso_commit_order(x);
    out.extend(check_tso(x));
    let mut seen: BTreeSet<(Addr, Timestamp)> = BTreeSet::new();
    for s in &x.stores {
        if !seen.insert((s.addr, s.ts)) {
            out.push(Violation::new(
                Invariant::StoreTsUnique,
                format!("addr={} ts={} second={}", s.addr, s.ts, store_id(s)),
            ));
        }
    }
    out
}
