//! Scalar domain types shared by every layer of the model.

use std::fmt;

/// Logical timestamp. Unbounded for all practical purposes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    pub fn succ(self) -> Timestamp {
        Timestamp(self.0 + 1)
    }

    pub fn plus(self, delta: u64) -> Timestamp {
        Timestamp(self.0 + delta)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Coherence state of a cacheline, totally ordered `I < S < M`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CacheState {
    #[default]
    I,
    S,
    M,
}

impl CacheState {
    /// States strictly below `self`, highest first.
    pub fn below(self) -> &'static [CacheState] {
        match self {
            CacheState::I => &[],
            CacheState::S => &[CacheState::I],
            CacheState::M => &[CacheState::S, CacheState::I],
        }
    }
}

impl fmt::Display for CacheState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CacheState::I => "I",
            CacheState::S => "S",
            CacheState::M => "M",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoreId(pub u8);

impl CoreId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CoreId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index into the fixed address set of a configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Addr(pub u8);

impl Addr {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque data token.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(pub u64);

impl Value {
    /// Globally unique token for the store at program index `seq` of `core`.
    pub fn fresh(core: CoreId, seq: usize) -> Value {
        Value((core.0 as u64 + 1) * FRESH_STRIDE + seq as u64 + 1)
    }
}

/// Upper bound (exclusive) on program length when fresh tokens are used.
pub const FRESH_STRIDE: u64 = 10_000;

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Kind of a processor memory operation. The protocol tables write these
/// as `S` (load) and `M` (store); [`Access::required_state`] recovers that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Access {
    Load,
    Store,
}

impl Access {
    pub fn required_state(self) -> CacheState {
        match self {
            Access::Load => CacheState::S,
            Access::Store => CacheState::M,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Access::Load => "Ld",
            Access::Store => "St",
        }
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_order() {
        assert!(CacheState::I < CacheState::S && CacheState::S < CacheState::M);
        assert_eq!(CacheState::M.below(), &[CacheState::S, CacheState::I]);
        assert!(CacheState::I.below().is_empty());
    }

    #[test]
    fn fresh_tokens_are_distinct() {
        let a = Value::fresh(CoreId(0), 3);
        let b = Value::fresh(CoreId(1), 3);
        let c = Value::fresh(CoreId(0), 4);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, Value(0));
    }
}
