use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

/// Where the history that produced a transition's state lives: the first
/// `len` records of episode `episode`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryRef {
    pub episode: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    /// Embedding pair of the projected action.
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub done: bool,
    pub history: HistoryRef,
}

impl Transition {
    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.s.iter().chain(&self.a).chain(&self.s_next).all(|v| v.is_finite())
    }
}

/// Bounded FIFO of transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be at least 1".into()));
        }
        Ok(Self { items: VecDeque::with_capacity(capacity.min(1 << 16)), capacity })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    pub fn store(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    /// `n` uniform draws with replacement, or `None` while fewer than `n`
    /// transitions are stored.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<Vec<&Transition>> {
        if n == 0 || self.items.len() < n {
            return None;
        }
        Some((0..n).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect())
    }
}
