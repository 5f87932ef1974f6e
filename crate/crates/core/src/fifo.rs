//! Message buffers.
//!
//! Buffers are FIFOs. In [`FifoMode::PerAddress`] only the ordering between
//! messages for the same address is preserved: the oldest message of every
//! address is ready, not just the global head.

use std::collections::VecDeque;

use crate::error::BufferError;
use crate::types::Addr;

/// Anything that can sit in a buffer knows which address it concerns.
pub trait Addressed {
    fn addr(&self) -> Addr;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum FifoMode {
    #[default]
    Strict,
    PerAddress,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fifo<T> {
    items: VecDeque<T>,
    mode: FifoMode,
    /// Zero means unbounded.
    capacity: usize,
}

impl<T: Addressed> Fifo<T> {
    pub fn new(mode: FifoMode, capacity: usize) -> Self {
        Fifo {
            items: VecDeque::new(),
            mode,
            capacity,
        }
    }

    pub fn unbounded() -> Self {
        Self::new(FifoMode::Strict, 0)
    }

    pub fn mode(&self) -> FifoMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn has_room(&self) -> bool {
        self.capacity == 0 || self.items.len() < self.capacity
    }

    pub fn enq(&mut self, item: T) -> Result<(), BufferError> {
        if !self.has_room() {
            return Err(BufferError::BufferFull(self.capacity));
        }
        self.items.push_back(item);
        Ok(())
    }

    /// Global head, regardless of mode.
    pub fn head(&self) -> Result<&T, BufferError> {
        self.items.front().ok_or(BufferError::EmptyBuffer)
    }

    pub fn deq(&mut self) -> Result<T, BufferError> {
        self.items.pop_front().ok_or(BufferError::EmptyBuffer)
    }

    /// Position of the ready message for `addr`, if any. In strict mode
    /// that is the global head when it concerns `addr`.
    pub fn ready_position(&self, addr: Addr) -> Option<usize> {
        match self.mode {
            FifoMode::Strict => self.items.front().filter(|m| m.addr() == addr).map(|_| 0),
            FifoMode::PerAddress => self.items.iter().position(|m| m.addr() == addr),
        }
    }

    /// Ready message for `addr` (see [`Fifo::ready_position`]).
    pub fn head_for(&self, addr: Addr) -> Option<&T> {
        self.ready_position(addr).map(|i| &self.items[i])
    }

    /// Removes the ready message for `addr`.
    pub fn deq_for(&mut self, addr: Addr) -> Result<T, BufferError> {
        let pos = self.ready_position(addr).ok_or(BufferError::EmptyBuffer)?;
        Ok(self.items.remove(pos).expect("position in range"))
    }

    /// All ready messages with their positions, oldest first.
    pub fn ready(&self) -> Vec<(usize, &T)> {
        match self.mode {
            FifoMode::Strict => self.items.front().map(|m| (0, m)).into_iter().collect(),
            FifoMode::PerAddress => {
                let mut seen: Vec<Addr> = Vec::new();
                let mut out = Vec::new();
                for (i, m) in self.items.iter().enumerate() {
                    if !seen.contains(&m.addr()) {
                        seen.push(m.addr());
                        out.push((i, m));
                    }
                }
                out
            }
        }
    }

    pub fn is_ready(&self, pos: usize) -> bool {
        self.items
            .get(pos)
            .is_some_and(|m| self.ready_position(m.addr()) == Some(pos))
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.items.iter_mut()
    }
}
