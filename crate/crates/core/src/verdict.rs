//! Named invariant violations shared by the oracles and trace checkers.

use std::fmt;

/// Every property the crate checks at runtime. The `id` strings appear in
/// `FAIL <id> ...` report lines and in per-invariant statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    CleanUnique,
    L2InvalidNoClean,
    CleanRtsDominates,
    CleanRtsBoundsStores,
    ValueProvenance,
    L1BusyInflight,
    L1BusyHeadMiss,
    L2BusyModified,
    L2OwnerMatchesClean,
    L2BusyWriteback,
    L2BusyRequestReady,
    RequestMirrorsHead,
    ResponseMatchesHead,
    MtsDominatesRts,
    MtsBoundsStores,
    MtsProvenance,
    LatticeCoverage,
    LatticeExclusive,
    LatticeBackward,
    LatticeNoProgress,
    LatticeHitOnMiss,
    Deadlock,
    Livelock,
    LoadValue,
    StoreTsUnique,
    SameTsOrder,
    CommitOrder,
    ScProgramOrder,
    ScLoadValue,
    StoreSetAgreement,
    TsoLoadValue,
    ForbiddenOutcome,
}

impl Invariant {
    pub fn id(self) -> &'static str {
        match self {
            Invariant::CleanUnique => "clean-unique",
            Invariant::L2InvalidNoClean => "l2-invalid-no-clean",
            Invariant::CleanRtsDominates => "clean-rts-dominates",
            Invariant::CleanRtsBoundsStores => "clean-rts-bounds-stores",
            Invariant::ValueProvenance => "value-provenance",
            Invariant::L1BusyInflight => "l1-busy-inflight",
            Invariant::L1BusyHeadMiss => "l1-busy-head-miss",
            Invariant::L2BusyModified => "l2-busy-modified",
            Invariant::L2OwnerMatchesClean => "l2-owner-matches-clean",
            Invariant::L2BusyWriteback => "l2-busy-writeback",
            Invariant::L2BusyRequestReady => "l2-busy-request-ready",
            Invariant::RequestMirrorsHead => "request-mirrors-head",
            Invariant::ResponseMatchesHead => "response-matches-head",
            Invariant::MtsDominatesRts => "mts-dominates-rts",
            Invariant::MtsBoundsStores => "mts-bounds-stores",
            Invariant::MtsProvenance => "mts-provenance",
            Invariant::LatticeCoverage => "lattice-coverage",
            Invariant::LatticeExclusive => "lattice-exclusive",
            Invariant::LatticeBackward => "lattice-backward",
            Invariant::LatticeNoProgress => "lattice-no-progress",
            Invariant::LatticeHitOnMiss => "lattice-hit-on-miss",
            Invariant::Deadlock => "deadlock",
            Invariant::Livelock => "livelock",
            Invariant::LoadValue => "load-value",
            Invariant::StoreTsUnique => "store-ts-unique",
            Invariant::SameTsOrder => "same-ts-order",
            Invariant::CommitOrder => "commit-order",
            Invariant::ScProgramOrder => "sc-program-order",
            Invariant::ScLoadValue => "sc-load-value",
            Invariant::StoreSetAgreement => "store-set-agreement",
            Invariant::TsoLoadValue => "tso-load-value",
            Invariant::ForbiddenOutcome => "forbidden-outcome",
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Violation {
    pub invariant: Invariant,
    pub witness: String,
}

impl Violation {
    pub fn new(invariant: Invariant, witness: impl Into<String>) -> Self {
        Violation {
            invariant,
            witness: witness.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FAIL {} {}", self.invariant, self.witness)
    }
}

impl std::error::Error for Violation {}

/// Result of one checker.
pub type Verdict = Result<(), Violation>;

/// Renders a verdict as a report line.
pub fn verdict_line(v: &Verdict) -> String {
    match v {
        Ok(()) => "PASS".to_string(),
        Err(e) => e.to_string(),
    }
}
