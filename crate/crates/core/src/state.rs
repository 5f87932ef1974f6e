//! Cachelines, buffer messages and the complete system snapshot.

use std::fmt;

use crate::config::{Config, Op};
use crate::error::ConfigError;
use crate::fifo::{Addressed, Fifo, FifoMode};
use crate::types::{Access, Addr, CacheState, CoreId, Timestamp, Value};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct L1Line {
    pub state: CacheState,
    pub data: Value,
    pub busy: bool,
    pub wts: Timestamp,
    pub rts: Timestamp,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct L2Line {
    pub state: CacheState,
    pub data: Value,
    pub busy: bool,
    pub owner: CoreId,
    pub wts: Timestamp,
    pub rts: Timestamp,
}

/// Entry of a processor's memory request buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProcRequest {
    /// Program index of the operation; identifies the request across states.
    pub seq: u32,
    pub kind: Access,
    pub addr: Addr,
    pub data: Value,
    pub pts: Timestamp,
}

/// Entry of a processor's memory response buffer. `ts` is the timestamp the
/// operation was actually performed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProcResponse {
    pub seq: u32,
    pub kind: Access,
    pub addr: Addr,
    pub data: Value,
    pub ts: Timestamp,
}

/// GetS / GetM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct C2PReq {
    pub id: CoreId,
    pub kind: Access,
    pub addr: Addr,
    pub pts: Timestamp,
}

/// Write-back response carrying a line from L1 to L2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WbRp {
    pub id: CoreId,
    pub addr: Addr,
    pub data: Value,
    pub wts: Timestamp,
    pub rts: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum P2CKind {
    /// Write-back request (WBRq).
    Req,
    /// ToS or ToM, depending on `state`.
    Resp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct P2CMsg {
    pub id: CoreId,
    pub kind: P2CKind,
    pub addr: Addr,
    pub state: CacheState,
    pub data: Value,
    pub wts: Timestamp,
    pub rts: Timestamp,
}

impl P2CMsg {
    pub fn wbrq(id: CoreId, addr: Addr) -> Self {
        P2CMsg {
            id,
            kind: P2CKind::Req,
            addr,
            state: CacheState::I,
            data: Value::default(),
            wts: Timestamp::ZERO,
            rts: Timestamp::ZERO,
        }
    }

    pub fn is_resp(&self) -> bool {
        self.kind == P2CKind::Resp
    }

    pub fn is_wbrq(&self) -> bool {
        self.kind == P2CKind::Req
    }

    pub fn is_tom(&self) -> bool {
        self.is_resp() && self.state == CacheState::M
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemKind {
    Fetch,
    WriteBack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemRq {
    pub kind: MemKind,
    pub addr: Addr,
    pub data: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemRp {
    pub addr: Addr,
    pub data: Value,
}

macro_rules! addressed {
    ($($t:ty),*) => {
        $(impl Addressed for $t {
            fn addr(&self) -> Addr {
                self.addr
            }
        })*
    };
}
addressed!(
    ProcRequest,
    ProcResponse,
    C2PReq,
    WbRp,
    P2CMsg,
    MemRq,
    MemRp
);

/// One store in the global history. `core` is `None` for the synthetic
/// store that set the initial value at timestamp 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StoreRecord {
    pub addr: Addr,
    pub ts: Timestamp,
    pub value: Value,
    pub phys: u64,
    pub core: Option<CoreId>,
    pub seq: u32,
}

/// One committed load or store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CommitEvent {
    pub core: CoreId,
    pub seq: u32,
    pub kind: Access,
    pub addr: Addr,
    pub value: Value,
    pub ts: Timestamp,
    pub phys: u64,
}

impl fmt::Display for CommitEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "commit core={} seq={} op={} addr={} val={} ts={} phys={}",
            self.core, self.seq, self.kind, self.addr, self.value, self.ts, self.phys
        )
    }
}

/// Processor-side bookkeeping for one core.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ProcState {
    pub pc: u32,
    pub outstanding: Option<u32>,
    pub last_commit_ts: Timestamp,
    pub last_load_ts: Timestamp,
    pub last_store_ts: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemState {
    pub l1: Vec<Vec<L1Line>>,
    pub l2: Vec<L2Line>,
    pub mrq: Vec<Fifo<ProcRequest>>,
    pub mrp: Vec<Fifo<ProcResponse>>,
    pub c2p_rq: Fifo<C2PReq>,
    pub c2p_rp: Fifo<WbRp>,
    pub p2c: Vec<Fifo<P2CMsg>>,
    pub mem: Vec<Value>,
    pub mts: Timestamp,
    pub mem_rq: Fifo<MemRq>,
    pub mem_rp: Fifo<MemRp>,
    /// Number of rules applied so far.
    pub phys: u64,
    /// Store log per address, in the order the stores happened.
    pub history: Vec<Vec<StoreRecord>>,
    pub procs: Vec<ProcState>,
    pub trace: Vec<CommitEvent>,
}

impl SystemState {
    pub fn cores(&self) -> usize {
        self.l1.len()
    }

    pub fn addrs(&self) -> usize {
        self.l2.len()
    }

    pub fn core_ids(&self) -> impl Iterator<Item = CoreId> {
        (0..self.cores()).map(|c| CoreId(c as u8))
    }

    pub fn addr_ids(&self) -> impl Iterator<Item = Addr> {
        (0..self.addrs()).map(|a| Addr(a as u8))
    }

    pub fn l1(&self, core: CoreId, addr: Addr) -> &L1Line {
        &self.l1[core.index()][addr.index()]
    }

    pub fn l1_mut(&mut self, core: CoreId, addr: Addr) -> &mut L1Line {
        &mut self.l1[core.index()][addr.index()]
    }

    pub fn l2(&self, addr: Addr) -> &L2Line {
        &self.l2[addr.index()]
    }

    pub fn l2_mut(&mut self, addr: Addr) -> &mut L2Line {
        &mut self.l2[addr.index()]
    }

    /// Head of a core's request buffer.
    pub fn pending(&self, core: CoreId) -> Option<&ProcRequest> {
        self.mrq[core.index()].head().ok()
    }

    pub fn has_pending(&self) -> bool {
        self.mrq.iter().any(|q| !q.is_empty())
    }

    /// Stores are all issued, performed and committed.
    pub fn is_quiescent_for(&self, cfg: &Config) -> bool {
        !self.has_pending()
            && self
                .procs
                .iter()
                .zip(&cfg.programs)
                .all(|(p, prog)| p.pc as usize == prog.ops.len() && p.outstanding.is_none())
    }

    /// All stores across addresses, initial ones included.
    pub fn all_stores(&self) -> impl Iterator<Item = &StoreRecord> {
        self.history.iter().flatten()
    }

    pub fn initial_values(&self) -> Vec<Value> {
        self.history.iter().map(|h| h[0].value).collect()
    }
}

/// Builds the initial state for `cfg`: L1 lines invalid, L2 lines shared
/// (or invalid with the data in memory when memory mode is on), all
/// timestamps zero, buffers empty, and each core's first operation issued.
pub fn init_state(cfg: &Config) -> Result<SystemState, ConfigError> {
    cfg.validate()?;
    let (cores, addrs) = (cfg.cores, cfg.addrs());
    let initial = Value(0);
    let l2_state = if cfg.memory {
        CacheState::I
    } else {
        CacheState::S
    };
    let fifo = |mode: FifoMode| (mode, cfg.capacity);
    let (net_mode, cap) = fifo(cfg.fifo);

    let history = (0..addrs)
        .map(|a| {
            vec![StoreRecord {
                addr: Addr(a as u8),
                ts: Timestamp::ZERO,
                value: initial,
                phys: 0,
                core: None,
                seq: 0,
            }]
        })
        .collect();

    let mut state = SystemState {
        l1: vec![
            vec![
                L1Line {
                    data: initial,
                    ..L1Line::default()
                };
                addrs
            ];
            cores
        ],
        l2: vec![
            L2Line {
                state: l2_state,
                data: initial,
                ..L2Line::default()
            };
            addrs
        ],
        // A core has at most one request in flight, so the processor-side
        // buffers never need per-address relaxation.
        mrq: vec![Fifo::new(FifoMode::Strict, cap); cores],
        mrp: vec![Fifo::new(FifoMode::Strict, cap); cores],
        c2p_rq: Fifo::new(net_mode, cap),
        c2p_rp: Fifo::new(net_mode, cap),
        p2c: vec![Fifo::new(net_mode, cap); cores],
        mem: vec![initial; addrs],
        mts: Timestamp::ZERO,
        mem_rq: Fifo::new(net_mode, cap),
        mem_rp: Fifo::new(net_mode, cap),
        phys: 0,
        history,
        procs: vec![ProcState::default(); cores],
        trace: Vec::new(),
    };
    for c in 0..cores {
        crate::processor::issue(&mut state, cfg, CoreId(c as u8));
    }
    Ok(state)
}

/// Value written by the store at `seq` of `core`, honoring the value mode.
pub(crate) fn store_value(cfg: &Config, core: CoreId, seq: usize) -> Value {
    match (cfg.values, cfg.programs[core.index()].ops[seq]) {
        (crate::config::ValueMode::Fresh, _) => Value::fresh(core, seq),
        (crate::config::ValueMode::Literal, Op::Store(_, v)) => v,
        (_, Op::Load(_)) => Value::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::parse(text).unwrap()
    }

    #[test]
    fn initial_state_without_memory() {
        let s = init_state(&cfg("cores = 2\naddrs = 1\nprog 0: Ld 0\nprog 1: Ld 0")).unwrap();
        let a = Addr(0);
        assert_eq!(
            *s.l2(a),
            L2Line {
                state: CacheState::S,
                data: Value(0),
                busy: false,
                owner: CoreId(0),
                wts: Timestamp(0),
                rts: Timestamp(0)
            }
        );
        for c in s.core_ids() {
            let l = s.l1(c, a);
            assert_eq!(
                (l.state, l.busy, l.wts, l.rts),
                (CacheState::I, false, Timestamp(0), Timestamp(0))
            );
            assert_eq!(s.mrq[c.index()].len(), 1);
        }
        assert_eq!(s.history[0].len(), 1);
        assert_eq!(s.history[0][0].ts, Timestamp::ZERO);
        assert!(s.c2p_rq.is_empty() && s.c2p_rp.is_empty());
        assert_eq!(s.phys, 0);
    }

    #[test]
    fn initial_state_with_memory() {
        let s = init_state(&cfg("cores = 1\naddrs = 1\nmemory = on")).unwrap();
        assert_eq!(s.l2(Addr(0)).state, CacheState::I);
        assert_eq!(s.mts, Timestamp::ZERO);
        assert_eq!(s.mem[0], Value(0));
        assert!(!s.has_pending());
    }

    #[test]
    fn first_ops_are_issued_with_zero_floor() {
        let s = init_state(&cfg("cores = 1\naddrs = 1\nprog 0: St 0 5; Ld 0")).unwrap();
        let head = s.pending(CoreId(0)).unwrap();
        assert_eq!(
            (head.seq, head.kind, head.pts),
            (0, Access::Store, Timestamp(0))
        );
        assert_eq!(head.data, Value::fresh(CoreId(0), 0));
    }
}
