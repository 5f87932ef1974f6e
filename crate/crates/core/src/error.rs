use thiserror::Error;

use crate::types::{CoreId, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BufferError {
    #[error("buffer is empty")]
    EmptyBuffer,
    #[error("buffer is full (capacity {0})")]
    BufferFull(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration needs at least one core")]
    NoCores,
    #[error("configuration needs at least one address")]
    NoAddresses,
    #[error("lease must be a non-negative integer, got {0}")]
    NegativeLease(String),
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        ConfigError::Parse {
            line,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Buffer(#[from] BufferError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("rule instance {0} is not enabled")]
    NotEnabled(String),
    #[error("replay step {index}: rule instance {instance} is not enabled")]
    ReplayNotEnabled { index: usize, instance: String },
    #[error("core {core} committed ts={got} below its floor {floor}")]
    MonotonicityViolation {
        core: CoreId,
        floor: Timestamp,
        got: Timestamp,
    },
    #[error("{0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
