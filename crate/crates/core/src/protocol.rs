//! Guarded transition rules for the L1 caches, the L2 and main memory.
//!
//! [`Machine::enabled`] enumerates every rule instance whose guard holds;
//! [`Machine::apply`] fires one. Rules never mutate their input state.

use std::fmt;

use crate::config::{Config, LoadHitGuard};
use crate::error::{ConfigError, Error};
use crate::processor;
use crate::state::{
    init_state, C2PReq, L1Line, MemKind, MemRp, MemRq, P2CKind, P2CMsg, ProcRequest, ProcResponse,
    StoreRecord, SystemState, WbRp,
};
use crate::types::{Access, Addr, CacheState, CoreId, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    LoadHit,
    StoreHit,
    L1Miss,
    L2Resp,
    Downgrade,
    WriteBackReq,
    ShReqS,
    ExReqS,
    ReqM,
    WriteBackResp,
    L2Miss,
    MemResp,
    L2Downgrade,
    L2Evict,
    MemProcess,
}

impl Rule {
    pub const ALL: [Rule; 15] = [
        Rule::LoadHit,
        Rule::StoreHit,
        Rule::L1Miss,
        Rule::L2Resp,
        Rule::Downgrade,
        Rule::WriteBackReq,
        Rule::ShReqS,
        Rule::ExReqS,
        Rule::ReqM,
        Rule::WriteBackResp,
        Rule::L2Miss,
        Rule::MemResp,
        Rule::L2Downgrade,
        Rule::L2Evict,
        Rule::MemProcess,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::LoadHit => "LoadHit",
            Rule::StoreHit => "StoreHit",
            Rule::L1Miss => "L1Miss",
            Rule::L2Resp => "L2Resp",
            Rule::Downgrade => "Downgrade",
            Rule::WriteBackReq => "WriteBackReq",
            Rule::ShReqS => "ShReq_S",
            Rule::ExReqS => "ExReq_S",
            Rule::ReqM => "Req_M",
            Rule::WriteBackResp => "WriteBackResp",
            Rule::L2Miss => "L2Miss",
            Rule::MemResp => "MemResp",
            Rule::L2Downgrade => "L2Downgrade",
            Rule::L2Evict => "L2Evict",
            Rule::MemProcess => "MemProcess",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == name)
    }

    /// Rules that may fire at any time without serving a request.
    pub fn is_voluntary(self) -> bool {
        matches!(self, Rule::Downgrade | Rule::L2Downgrade | Rule::L2Evict)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rule together with its binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleInstance {
    LoadHit {
        core: CoreId,
    },
    StoreHit {
        core: CoreId,
    },
    L1Miss {
        core: CoreId,
    },
    L2Resp {
        core: CoreId,
        addr: Addr,
    },
    Downgrade {
        core: CoreId,
        addr: Addr,
        target: CacheState,
    },
    WriteBackReq {
        core: CoreId,
        addr: Addr,
    },
    ShReqS {
        addr: Addr,
        lease_end: Timestamp,
    },
    ExReqS {
        addr: Addr,
    },
    ReqM {
        addr: Addr,
    },
    WriteBackResp {
        addr: Addr,
    },
    L2Miss {
        addr: Addr,
    },
    MemResp {
        addr: Addr,
    },
    L2Downgrade {
        addr: Addr,
    },
    L2Evict {
        addr: Addr,
    },
    MemProcess {
        addr: Addr,
    },
}

impl RuleInstance {
    pub fn rule(&self) -> Rule {
        match self {
            RuleInstance::LoadHit { .. } => Rule::LoadHit,
            RuleInstance::StoreHit { .. } => Rule::StoreHit,
            RuleInstance::L1Miss { .. } => Rule::L1Miss,
            RuleInstance::L2Resp { .. } => Rule::L2Resp,
            RuleInstance::Downgrade { .. } => Rule::Downgrade,
            RuleInstance::WriteBackReq { .. } => Rule::WriteBackReq,
            RuleInstance::ShReqS { .. } => Rule::ShReqS,
            RuleInstance::ExReqS { .. } => Rule::ExReqS,
            RuleInstance::ReqM { .. } => Rule::ReqM,
            RuleInstance::WriteBackResp { .. } => Rule::WriteBackResp,
            RuleInstance::L2Miss { .. } => Rule::L2Miss,
            RuleInstance::MemResp { .. } => Rule::MemResp,
            RuleInstance::L2Downgrade { .. } => Rule::L2Downgrade,
            RuleInstance::L2Evict { .. } => Rule::L2Evict,
            RuleInstance::MemProcess { .. } => Rule::MemProcess,
        }
    }

    pub fn core(&self) -> Option<CoreId> {
        match *self {
            RuleInstance::LoadHit { core }
            | RuleInstance::StoreHit { core }
            | RuleInstance::L1Miss { core }
            | RuleInstance::L2Resp { core, .. }
            | RuleInstance::Downgrade { core, .. }
            | RuleInstance::WriteBackReq { core, .. } => Some(core),
            _ => None,
        }
    }
}

impl fmt::Display for RuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.rule().name();
        match *self {
            RuleInstance::LoadHit { core }
            | RuleInstance::StoreHit { core }
            | RuleInstance::L1Miss { core } => write!(f, "{name}(core={core})"),
            RuleInstance::L2Resp { core, addr } | RuleInstance::WriteBackReq { core, addr } => {
                write!(f, "{name}(core={core},addr={addr})")
            }
            RuleInstance::Downgrade { core, addr, target } => {
                write!(f, "{name}(core={core},addr={addr},to={target})")
            }
            RuleInstance::ShReqS { addr, lease_end } => {
                write!(f, "{name}(addr={addr},pts'={lease_end})")
            }
            RuleInstance::ExReqS { addr }
            | RuleInstance::ReqM { addr }
            | RuleInstance::WriteBackResp { addr }
            | RuleInstance::L2Miss { addr }
            | RuleInstance::MemResp { addr }
            | RuleInstance::L2Downgrade { addr }
            | RuleInstance::L2Evict { addr }
            | RuleInstance::MemProcess { addr } => write!(f, "{name}(addr={addr})"),
        }
    }
}

/// Kind of a message that moved during a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MsgTag {
    GetS,
    GetM,
    ToS,
    ToM,
    WBRq,
    WBRp,
    MemFetch,
    MemWriteBack,
    MemRp,
    LdRp,
    StRp,
}

/// What a fired rule did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionRecord {
    /// Physical time of the transition (the post-state's `phys`).
    pub step: u64,
    pub instance: RuleInstance,
    /// Core the rule acted for: the L1's core, or the id carried by the
    /// message an L2 rule consumed or produced.
    pub core: Option<CoreId>,
    pub addr: Option<Addr>,
    pub detail: String,
    pub sent: Vec<MsgTag>,
    pub received: Vec<MsgTag>,
    /// Processor requests removed from an mrq, as (core, seq).
    pub dequeued: Vec<(CoreId, u32)>,
}

impl fmt::Display for TransitionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step={} rule={}", self.step, self.instance.rule())?;
        match self.core {
            Some(c) => write!(f, " core={c}")?,
            None => write!(f, " core=-")?,
        }
        match self.addr {
            Some(a) => write!(f, " addr={a}")?,
            None => write!(f, " addr=-")?,
        }
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

/// Deliberate protocol defects used to check that the oracles notice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// ExReq_S leaves the L2 owner unchanged.
    DropOwnerUpdate,
    /// ShReq_S does not raise the L2 rts to the granted lease end.
    SkipLeaseRtsUpdate,
    /// LoadHit on an S line ignores lease expiry.
    LoadHitPastLease,
    /// L2Evict does not raise mts.
    SkipMtsUpdate,
    /// StoreHit performs at max(pts, rts) instead of max(pts, rts + 1).
    StoreHitNoIncrement,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::DropOwnerUpdate,
        Mutation::SkipLeaseRtsUpdate,
        Mutation::LoadHitPastLease,
        Mutation::SkipMtsUpdate,
        Mutation::StoreHitNoIncrement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::DropOwnerUpdate => "drop-owner-update",
            Mutation::SkipLeaseRtsUpdate => "skip-lease-rts-update",
            Mutation::LoadHitPastLease => "loadhit-past-lease",
            Mutation::SkipMtsUpdate => "skip-mts-update",
            Mutation::StoreHitNoIncrement => "storehit-no-increment",
        }
    }

    /// Whether the mutated rule only exists with main memory modeled.
    pub fn needs_memory(self) -> bool {
        matches!(self, Mutation::SkipMtsUpdate)
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The protocol for one configuration.
#[derive(Debug, Clone)]
pub struct Machine {
    cfg: Config,
    mutation: Option<Mutation>,
}

impl Machine {
    pub fn new(cfg: Config) -> Result<Machine, ConfigError> {
        cfg.validate()?;
        Ok(Machine {
            cfg,
            mutation: None,
        })
    }

    pub fn with_mutation(mut self, mutation: Option<Mutation>) -> Machine {
        self.mutation = mutation;
        self
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn mutation(&self) -> Option<Mutation> {
        self.mutation
    }

    fn mutated(&self, m: Mutation) -> bool {
        self.mutation == Some(m)
    }

    pub fn init_state(&self) -> SystemState {
        init_state(&self.cfg).expect("config validated on construction")
    }

    /// Whether the request at the head of `core`'s mrq hits as a load.
    pub fn load_hit_guard(&self, s: &SystemState, core: CoreId) -> bool {
        let Some(req) = s.pending(core) else {
            return false;
        };
        if req.kind != Access::Load {
            return false;
        }
        let line = s.l1(core, req.addr);
        if line.busy {
            return false;
        }
        let lease_ok = req.pts <= line.rts || self.mutated(Mutation::LoadHitPastLease);
        match self.cfg.loadhit_guard {
            LoadHitGuard::Table6 => {
                line.state == CacheState::M || (line.state == CacheState::S && lease_ok)
            }
            LoadHitGuard::Table2 => line.state >= CacheState::S && lease_ok,
        }
    }

    pub fn store_hit_guard(&self, s: &SystemState, core: CoreId) -> bool {
        let Some(req) = s.pending(core) else {
            return false;
        };
        let line = s.l1(core, req.addr);
        req.kind == Access::Store && line.state == CacheState::M && !line.busy
    }

    /// "LoadHit and StoreHit cannot fire" is evaluated on this predicate.
    pub fn hit_possible(&self, s: &SystemState, core: CoreId) -> bool {
        self.load_hit_guard(s, core) || self.store_hit_guard(s, core)
    }

    fn l1_miss_guard(&self, s: &SystemState, core: CoreId) -> bool {
        let Some(req) = s.pending(core) else {
            return false;
        };
        let line = s.l1(core, req.addr);
        !line.busy && is_miss(req, line) && s.c2p_rq.has_room()
    }

    /// Every rule instance whose guard holds, in a fixed enumeration order:
    /// per-core L1 rules, then L2 rules, then memory rules.
    pub fn enabled(&self, s: &SystemState) -> Vec<RuleInstance> {
        let mut out = Vec::new();
        for core in s.core_ids() {
            let c = core.index();
            if self.load_hit_guard(s, core) && s.mrp[c].has_room() {
                out.push(RuleInstance::LoadHit { core });
            }
            if self.store_hit_guard(s, core) && s.mrp[c].has_room() {
                out.push(RuleInstance::StoreHit { core });
            }
            if self.l1_miss_guard(s, core) {
                out.push(RuleInstance::L1Miss { core });
            }
            let hit = self.hit_possible(s, core);
            for (_, m) in s.p2c[c].ready() {
                match m.kind {
                    P2CKind::Resp => out.push(RuleInstance::L2Resp { core, addr: m.addr }),
                    P2CKind::Req => {
                        let needs_room = s.l1(core, m.addr).state == CacheState::M;
                        if !hit && (!needs_room || s.c2p_rp.has_room()) {
                            out.push(RuleInstance::WriteBackReq { core, addr: m.addr });
                        }
                    }
                }
            }
            if !hit {
                for addr in s.addr_ids() {
                    let line = s.l1(core, addr);
                    if line.busy {
                        continue;
                    }
                    if line.state == CacheState::M && !s.c2p_rp.has_room() {
                        continue;
                    }
                    for &target in line.state.below() {
                        out.push(RuleInstance::Downgrade { core, addr, target });
                    }
                }
            }
        }

        for (_, req) in s.c2p_rq.ready() {
            let l2 = s.l2(req.addr);
            let addr = req.addr;
            match (l2.state, req.kind) {
                (CacheState::S, Access::Load) => {
                    if s.p2c[req.id.index()].has_room() {
                        out.push(RuleInstance::ShReqS {
                            addr,
                            lease_end: self.lease_end(l2.rts, req.pts),
                        });
                    }
                }
                (CacheState::S, Access::Store) => {
                    if s.p2c[req.id.index()].has_room() {
                        out.push(RuleInstance::ExReqS { addr });
                    }
                }
                (CacheState::M, _) => {
                    if !l2.busy && s.p2c[l2.owner.index()].has_room() {
                        out.push(RuleInstance::ReqM { addr });
                    }
                }
                (CacheState::I, _) => {
                    if self.cfg.memory && !l2.busy && s.mem_rq.has_room() {
                        out.push(RuleInstance::L2Miss { addr });
                    }
                }
            }
        }
        for (_, m) in s.c2p_rp.ready() {
            out.push(RuleInstance::WriteBackResp { addr: m.addr });
        }

        if self.cfg.memory {
            for (_, m) in s.mem_rp.ready() {
                out.push(RuleInstance::MemResp { addr: m.addr });
            }
            for (_, m) in s.mem_rq.ready() {
                if m.kind == MemKind::WriteBack || s.mem_rp.has_room() {
                    out.push(RuleInstance::MemProcess { addr: m.addr });
                }
            }
            for addr in s.addr_ids() {
                let l2 = s.l2(addr);
                if l2.state == CacheState::M && !l2.busy && s.p2c[l2.owner.index()].has_room() {
                    out.push(RuleInstance::L2Downgrade { addr });
                }
                if l2.state == CacheState::S && s.mem_rq.has_room() {
                    out.push(RuleInstance::L2Evict { addr });
                }
            }
        }
        out
    }

    /// Lease granted by ShReq_S: `max(rts, pts) + lease`.
    pub fn lease_end(&self, rts: Timestamp, pts: Timestamp) -> Timestamp {
        rts.max(pts).plus(self.cfg.lease)
    }

    /// Fires `inst` after checking that it is enabled.
    pub fn apply(
        &self,
        s: &SystemState,
        inst: &RuleInstance,
    ) -> Result<(SystemState, TransitionRecord), Error> {
        if !self.enabled(s).contains(inst) {
            return Err(Error::NotEnabled(inst.to_string()));
        }
        self.fire(s, inst)
    }

    /// Fires `inst`, which the caller obtained from [`Machine::enabled`] on
    /// the same state.
    pub fn fire(
        &self,
        s: &SystemState,
        inst: &RuleInstance,
    ) -> Result<(SystemState, TransitionRecord), Error> {
        let mut n = s.clone();
        n.phys += 1;
        let mut rec = TransitionRecord {
            step: n.phys,
            instance: *inst,
            core: inst.core(),
            addr: None,
            detail: String::new(),
            sent: Vec::new(),
            received: Vec::new(),
            dequeued: Vec::new(),
        };
        match *inst {
            RuleInstance::LoadHit { core } => self.load_hit(&mut n, core, &mut rec),
            RuleInstance::StoreHit { core } => self.store_hit(&mut n, core, &mut rec),
            RuleInstance::L1Miss { core } => self.l1_miss(&mut n, core, &mut rec),
            RuleInstance::L2Resp { core, addr } => self.l2_resp(&mut n, core, addr, &mut rec),
            RuleInstance::Downgrade { core, addr, target } => {
                self.downgrade(&mut n, core, addr, target, &mut rec)
            }
            RuleInstance::WriteBackReq { core, addr } => {
                self.write_back_req(&mut n, core, addr, &mut rec)
            }
            RuleInstance::ShReqS { addr, lease_end } => {
                self.sh_req_s(&mut n, addr, lease_end, &mut rec)
            }
            RuleInstance::ExReqS { addr } => self.ex_req_s(&mut n, addr, &mut rec),
            RuleInstance::ReqM { addr } => self.req_m(&mut n, addr, &mut rec),
            RuleInstance::WriteBackResp { addr } => self.write_back_resp(&mut n, addr, &mut rec),
            RuleInstance::L2Miss { addr } => self.l2_miss(&mut n, addr, &mut rec),
            RuleInstance::MemResp { addr } => self.mem_resp(&mut n, addr, &mut rec),
            RuleInstance::L2Downgrade { addr } => self.l2_downgrade(&mut n, addr, &mut rec),
            RuleInstance::L2Evict { addr } => self.l2_evict(&mut n, addr, &mut rec),
            RuleInstance::MemProcess { addr } => self.mem_process(&mut n, addr, &mut rec),
        }
        processor::settle(&mut n, &self.cfg)?;
        Ok((n, rec))
    }

    fn load_hit(&self, s: &mut SystemState, core: CoreId, rec: &mut TransitionRecord) {
        let c = core.index();
        let req = s.mrq[c].deq().expect("guarded");
        let tso = self.cfg.mode == crate::config::ConsistencyMode::Tso;
        let line = s.l1_mut(core, req.addr);
        let ts = if tso && line.state == CacheState::M {
            req.pts
        } else {
            req.pts.max(line.wts)
        };
        if line.state == CacheState::M {
            line.rts = req.pts.max(line.rts);
        }
        let data = line.data;
        s.mrp[c]
            .enq(ProcResponse {
                seq: req.seq,
                kind: Access::Load,
                addr: req.addr,
                data,
                ts,
            })
            .expect("guarded");
        rec.addr = Some(req.addr);
        rec.detail = format!("ts={ts} val={data}");
        rec.dequeued.push((core, req.seq));
        rec.sent.push(MsgTag::LdRp);
    }

    fn store_hit(&self, s: &mut SystemState, core: CoreId, rec: &mut TransitionRecord) {
        let c = core.index();
        let req = s.mrq[c].deq().expect("guarded");
        let phys = s.phys;
        let line = s.l1_mut(core, req.addr);
        let floor = if self.mutated(Mutation::StoreHitNoIncrement) {
            line.rts
        } else {
            line.rts.succ()
        };
        let ts = req.pts.max(floor);
        line.data = req.data;
        line.wts = ts;
        line.rts = ts;
        s.mrp[c]
            .enq(ProcResponse {
                seq: req.seq,
                kind: Access::Store,
                addr: req.addr,
                data: req.data,
                ts,
            })
            .expect("guarded");
        s.history[req.addr.index()].push(StoreRecord {
            addr: req.addr,
            ts,
            value: req.data,
            phys,
            core: Some(core),
            seq: req.seq,
        });
        rec.addr = Some(req.addr);
        rec.detail = format!("ts={ts} val={}", req.data);
        rec.dequeued.push((core, req.seq));
        rec.sent.push(MsgTag::StRp);
    }

    fn l1_miss(&self, s: &mut SystemState, core: CoreId, rec: &mut TransitionRecord) {
        let req = *s.pending(core).expect("guarded");
        s.c2p_rq
            .enq(C2PReq {
                id: core,
                kind: req.kind,
                addr: req.addr,
                pts: req.pts,
            })
            .expect("guarded");
        s.l1_mut(core, req.addr).busy = true;
        let tag = match req.kind {
            Access::Load => MsgTag::GetS,
            Access::Store => MsgTag::GetM,
        };
        rec.addr = Some(req.addr);
        rec.detail = format!("{tag:?} pts={}", req.pts);
        rec.sent.push(tag);
    }

    fn l2_resp(&self, s: &mut SystemState, core: CoreId, addr: Addr, rec: &mut TransitionRecord) {
        let m = s.p2c[core.index()].deq_for(addr).expect("guarded");
        *s.l1_mut(core, addr) = L1Line {
            state: m.state,
            data: m.data,
            busy: false,
            wts: m.wts,
            rts: m.rts,
        };
        rec.addr = Some(addr);
        rec.detail = format!("state={} wts={} rts={}", m.state, m.wts, m.rts);
        rec.received
            .push(if m.is_tom() { MsgTag::ToM } else { MsgTag::ToS });
    }

    fn downgrade(
        &self,
        s: &mut SystemState,
        core: CoreId,
        addr: Addr,
        target: CacheState,
        rec: &mut TransitionRecord,
    ) {
        let line = *s.l1(core, addr);
        if line.state == CacheState::M {
            s.c2p_rp
                .enq(WbRp {
                    id: core,
                    addr,
                    data: line.data,
                    wts: line.wts,
                    rts: line.rts,
                })
                .expect("guarded");
            rec.sent.push(MsgTag::WBRp);
        }
        s.l1_mut(core, addr).state = target;
        rec.addr = Some(addr);
        rec.detail = format!("from={} to={target}", line.state);
    }

    fn write_back_req(
        &self,
        s: &mut SystemState,
        core: CoreId,
        addr: Addr,
        rec: &mut TransitionRecord,
    ) {
        s.p2c[core.index()].deq_for(addr).expect("guarded");
        rec.received.push(MsgTag::WBRq);
        let line = *s.l1(core, addr);
        if line.state == CacheState::M {
            s.c2p_rp
                .enq(WbRp {
                    id: core,
                    addr,
                    data: line.data,
                    wts: line.wts,
                    rts: line.rts,
                })
                .expect("guarded");
            s.l1_mut(core, addr).state = CacheState::S;
            rec.sent.push(MsgTag::WBRp);
            rec.detail = "written-back".into();
        } else {
            rec.detail = "ignored".into();
        }
        rec.addr = Some(addr);
    }

    fn sh_req_s(
        &self,
        s: &mut SystemState,
        addr: Addr,
        lease_end: Timestamp,
        rec: &mut TransitionRecord,
    ) {
        let req = s.c2p_rq.deq_for(addr).expect("guarded");
        let skip = self.mutated(Mutation::SkipLeaseRtsUpdate);
        let l2 = s.l2_mut(addr);
        if !skip {
            l2.rts = lease_end;
        }
        let msg = P2CMsg {
            id: req.id,
            kind: P2CKind::Resp,
            addr,
            state: CacheState::S,
            data: l2.data,
            wts: l2.wts,
            rts: lease_end,
        };
        s.p2c[req.id.index()].enq(msg).expect("guarded");
        rec.core = Some(req.id);
        rec.addr = Some(addr);
        rec.detail = format!("wts={} pts'={lease_end}", msg.wts);
        rec.received.push(MsgTag::GetS);
        rec.sent.push(MsgTag::ToS);
    }

    fn ex_req_s(&self, s: &mut SystemState, addr: Addr, rec: &mut TransitionRecord) {
        let req = s.c2p_rq.deq_for(addr).expect("guarded");
        let skip = self.mutated(Mutation::DropOwnerUpdate);
        let l2 = s.l2_mut(addr);
        l2.state = CacheState::M;
        if !skip {
            l2.owner = req.id;
        }
        let msg = P2CMsg {
            id: req.id,
            kind: P2CKind::Resp,
            addr,
            state: CacheState::M,
            data: l2.data,
            wts: l2.wts,
            rts: l2.rts,
        };
        s.p2c[req.id.index()].enq(msg).expect("guarded");
        rec.core = Some(req.id);
        rec.addr = Some(addr);
        rec.detail = format!("wts={} rts={}", msg.wts, msg.rts);
        rec.received.push(MsgTag::GetM);
        rec.sent.push(MsgTag::ToM);
    }

    fn req_m(&self, s: &mut SystemState, addr: Addr, rec: &mut TransitionRecord) {
        let owner = s.l2(addr).owner;
        s.p2c[owner.index()]
            .enq(P2CMsg::wbrq(owner, addr))
            .expect("guarded");
        s.l2_mut(addr).busy = true;
        rec.core = Some(owner);
        rec.addr = Some(addr);
        rec.detail = format!("owner={owner}");
        rec.sent.push(MsgTag::WBRq);
    }

    fn write_back_resp(&self, s: &mut SystemState, addr: Addr, rec: &mut TransitionRecord) {
        let m = s.c2p_rp.deq_for(addr).expect("guarded");
        let l2 = s.l2_mut(addr);
        l2.state = CacheState::S;
        l2.data = m.data;
        l2.busy = false;
        l2.wts = m.wts;
        l2.rts = m.rts;
        rec.core = Some(m.id);
        rec.addr = Some(addr);
        rec.detail = format!("wts={} rts={}", m.wts, m.rts);
        rec.received.push(MsgTag::WBRp);
    }

    fn l2_miss(&self, s: &mut SystemState, addr: Addr, rec: &mut TransitionRecord) {
        let id = s.c2p_rq.head_for(addr).expect("guarded").id;
        s.mem_rq
            .enq(MemRq {
                kind: MemKind::Fetch,
                addr,
                data: Default::default(),
            })
            .expect("guarded");
        s.l2_mut(addr).busy = true;
        rec.core = Some(id);
        rec.addr = Some(addr);
        rec.sent.push(MsgTag::MemFetch);
    }

    fn mem_resp(&self, s: &mut SystemState, addr: Addr, rec: &mut TransitionRecord) {
        let m = s.mem_rp.deq_for(addr).expect("guarded");
        let mts = s.mts;
        let l2 = s.l2_mut(addr);
        l2.state = CacheState::S;
        l2.data = m.data;
        l2.busy = false;
        l2.wts = mts;
        l2.rts = mts;
        rec.addr = Some(addr);
        rec.detail = format!("mts={mts}");
        rec.received.push(MsgTag::MemRp);
    }

    fn l2_downgrade(&self, s: &mut SystemState, addr: Addr, rec: &mut TransitionRecord) {
        let owner = s.l2(addr).owner;
        s.p2c[owner.index()]
            .enq(P2CMsg::wbrq(owner, addr))
            .expect("guarded");
        s.l2_mut(addr).busy = true;
        rec.core = Some(owner);
        rec.addr = Some(addr);
        rec.detail = format!("owner={owner}");
        rec.sent.push(MsgTag::WBRq);
    }

    fn l2_evict(&self, s: &mut SystemState, addr: Addr, rec: &mut TransitionRecord) {
        let l2 = *s.l2(addr);
        s.mem_rq
            .enq(MemRq {
                kind: MemKind::WriteBack,
                addr,
                data: l2.data,
            })
            .expect("guarded");
        s.l2_mut(addr).state = CacheState::I;
        if !self.mutated(Mutation::SkipMtsUpdate) {
            s.mts = l2.rts.max(s.mts);
        }
        rec.addr = Some(addr);
        rec.detail = format!("mts={}", s.mts);
        rec.sent.push(MsgTag::MemWriteBack);
    }

    fn mem_process(&self, s: &mut SystemState, addr: Addr, rec: &mut TransitionRecord) {
        let m = s.mem_rq.deq_for(addr).expect("guarded");
        match m.kind {
            MemKind::Fetch => {
                s.mem_rp
                    .enq(MemRp {
                        addr,
                        data: s.mem[addr.index()],
                    })
                    .expect("guarded");
                rec.received.push(MsgTag::MemFetch);
                rec.sent.push(MsgTag::MemRp);
                rec.detail = "fetch".into();
            }
            MemKind::WriteBack => {
                s.mem[addr.index()] = m.data;
                rec.received.push(MsgTag::MemWriteBack);
                rec.detail = "writeback".into();
            }
        }
        rec.addr = Some(addr);
    }
}

/// Miss predicate of the progress lattice: a load misses on I, or on S
/// with an expired lease; a store misses below M.
pub fn is_miss(req: &ProcRequest, line: &L1Line) -> bool {
    match req.kind {
        Access::Load => {
            line.state == CacheState::I || (line.state == CacheState::S && req.pts > line.rts)
        }
        Access::Store => line.state < CacheState::M,
    }
}
