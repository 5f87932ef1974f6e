//! Reference memory models over plain programs, independent of the
//! protocol: atomic-memory interleavings for SC and per-core store
//! buffers for TSO.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::config::{Config, Op};
use crate::state::CommitEvent;
use crate::types::{Access, Addr, CoreId, Value};

/// A load's destination, named by core and program index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reg {
    pub core: CoreId,
    pub idx: u32,
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r({},{})", self.core, self.idx)
    }
}

/// Loaded values in [`registers`] order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome(pub Vec<Value>);

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Every load in the programs, by core then program index.
pub fn registers(cfg: &Config) -> Vec<Reg> {
    let mut out = Vec::new();
    for (c, p) in cfg.programs.iter().enumerate() {
        for (i, op) in p.ops.iter().enumerate() {
            if matches!(op, Op::Load(_)) {
                out.push(Reg {
                    core: CoreId(c as u8),
                    idx: i as u32,
                });
            }
        }
    }
    out
}

/// Outcome of a protocol run, read from its commit list. Missing loads
/// (an unfinished run) yield `None`.
pub fn outcome_of(cfg: &Config, trace: &[CommitEvent]) -> Option<Outcome> {
    registers(cfg)
        .iter()
        .map(|r| {
            trace
                .iter()
                .find(|e| e.core == r.core && e.seq == r.idx && e.kind == Access::Load)
                .map(|e| e.value)
        })
        .collect::<Option<Vec<_>>>()
        .map(Outcome)
}

fn reg_slot(regs: &[Reg], core: usize, idx: usize) -> usize {
    regs.iter()
        .position(|r| r.core.index() == core && r.idx as usize == idx)
        .expect("load registered")
}

/// Result of enumerating a reference model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelOutcomes {
    pub outcomes: BTreeSet<Outcome>,
    /// Complete executions explored (interleavings for SC).
    pub executions: usize,
}

/// All outcomes of executing the programs one whole operation at a time
/// against a single atomic memory, by recursion over per-core prefixes.
pub fn sc_outcomes(cfg: &Config) -> ModelOutcomes {
    let regs = registers(cfg);
    let mut res = ModelOutcomes {
        outcomes: BTreeSet::new(),
        executions: 0,
    };
    let mut pcs = vec![0usize; cfg.cores];
    let mut mem = vec![Value(0); cfg.addrs()];
    let mut vals = vec![Value(0); regs.len()];
    sc_rec(cfg, &regs, &mut pcs, &mut mem, &mut vals, &mut res);
    res
}

fn sc_rec(
    cfg: &Config,
    regs: &[Reg],
    pcs: &mut [usize],
    mem: &mut [Value],
    vals: &mut [Value],
    res: &mut ModelOutcomes,
) {
    let mut progressed = false;
    for c in 0..cfg.cores {
        let Some(&op) = cfg.programs[c].ops.get(pcs[c]) else {
            continue;
        };
        progressed = true;
        let i = pcs[c];
        pcs[c] += 1;
        match op {
            Op::Load(a) => {
                let slot = reg_slot(regs, c, i);
                let old = vals[slot];
                vals[slot] = mem[a.index()];
                sc_rec(cfg, regs, pcs, mem, vals, res);
                vals[slot] = old;
            }
            Op::Store(a, v) => {
                let old = mem[a.index()];
                mem[a.index()] = v;
                sc_rec(cfg, regs, pcs, mem, vals, res);
                mem[a.index()] = old;
            }
        }
        pcs[c] -= 1;
    }
    if !progressed {
        res.executions += 1;
        res.outcomes.insert(Outcome(vals.to_vec()));
    }
}

/// Total orders of all operations, ignoring program order: the size of
/// the brute-force space the interleavings are drawn from.
pub fn permutation_count(cfg: &Config) -> usize {
    (1..=cfg.total_ops()).product()
}

/// SC outcomes by filtering every permutation of the operations for
/// program order. Exponential; for cross-checking small tests only.
pub fn sc_outcomes_by_permutation(cfg: &Config) -> ModelOutcomes {
    let regs = registers(cfg);
    let ops: Vec<(usize, usize, Op)> = cfg
        .programs
        .iter()
        .enumerate()
        .flat_map(|(c, p)| p.ops.iter().enumerate().map(move |(i, &op)| (c, i, op)))
        .collect();
    let mut res = ModelOutcomes {
        outcomes: BTreeSet::new(),
        executions: 0,
    };
    let mut perm: Vec<usize> = Vec::with_capacity(ops.len());
    let mut used = vec![false; ops.len()];
    permute(&ops, &mut perm, &mut used, &mut |order| {
        let mut next = vec![0usize; cfg.cores];
        for &k in order {
            let (c, i, _) = ops[k];
            if next[c] != i {
                return;
            }
            next[c] += 1;
        }
        let mut mem = vec![Value(0); cfg.addrs()];
        let mut vals = vec![Value(0); regs.len()];
        for &k in order {
            match ops[k] {
                (c, i, Op::Load(a)) => vals[reg_slot(&regs, c, i)] = mem[a.index()],
                (_, _, Op::Store(a, v)) => mem[a.index()] = v,
            }
        }
        res.executions += 1;
        res.outcomes.insert(Outcome(vals));
    });
    res
}

fn permute(
    ops: &[(usize, usize, Op)],
    perm: &mut Vec<usize>,
    used: &mut [bool],
    f: &mut impl FnMut(&[usize]),
) {
    if perm.len() == ops.len() {
        f(perm);
        return;
    }
    for k in 0..ops.len() {
        if !used[k] {
            used[k] = true;
            perm.push(k);
            permute(ops, perm, used, f);
            perm.pop();
            used[k] = false;
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct TsoState {
    pcs: Vec<usize>,
    buffers: Vec<VecDeque<(Addr, Value)>>,
    mem: Vec<Value>,
    vals: Vec<Value>,
}

/// All outcomes of an operational TSO machine: stores enter a per-core
/// FIFO buffer, loads read their own newest buffered store to the address
/// or else memory, and buffers drain to memory oldest first at any time.
pub fn tso_outcomes(cfg: &Config) -> ModelOutcomes {
    let regs = registers(cfg);
    let init = TsoState {
        pcs: vec![0; cfg.cores],
        buffers: vec![VecDeque::new(); cfg.cores],
        mem: vec![Value(0); cfg.addrs()],
        vals: vec![Value(0); regs.len()],
    };
    let mut res = ModelOutcomes {
        outcomes: BTreeSet::new(),
        executions: 0,
    };
    let mut seen: HashSet<TsoState> = HashSet::new();
    let mut stack = vec![init];
    while let Some(st) = stack.pop() {
        if !seen.insert(st.clone()) {
            continue;
        }
        let mut terminal = true;
        for c in 0..cfg.cores {
            if let Some(&op) = cfg.programs[c].ops.get(st.pcs[c]) {
                terminal = false;
                let mut n = st.clone();
                let i = n.pcs[c];
                n.pcs[c] += 1;
                match op {
                    Op::Store(a, v) => n.buffers[c].push_back((a, v)),
                    Op::Load(a) => {
                        let fwd = n.buffers[c]
                            .iter()
                            .rev()
                            .find(|(b, _)| *b == a)
                            .map(|(_, v)| *v);
                        n.vals[reg_slot(&regs, c, i)] = fwd.unwrap_or(n.mem[a.index()]);
                    }
                }
                stack.push(n);
            }
            if !st.buffers[c].is_empty() {
                terminal = false;
                let mut n = st.clone();
                let (a, v) = n.buffers[c].pop_front().expect("non-empty");
                n.mem[a.index()] = v;
                stack.push(n);
            }
        }
        if terminal {
            res.executions += 1;
            res.outcomes.insert(Outcome(st.vals.clone()));
        }
    }
    res
}
