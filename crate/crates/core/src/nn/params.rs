use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// A named, shaped region of a [`ParamStore`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Flat parameter vector with a manifest of named blocks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    values: Vec<f64>,
    blocks: Vec<Block>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a zero-initialized block and returns its range.
    pub fn alloc(&mut self, name: impl Into<String>, shape: &[usize]) -> Range<usize> {
        let block = Block { name: name.into(), shape: shape.to_vec(), offset: self.values.len() };
        let range = block.range();
        self.values.resize(range.end, 0.0);
        self.blocks.push(block);
        range
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&[f64]> {
        self.blocks.iter().find(|b| b.name == name).map(|b| &self.values[b.range()])
    }

    pub fn block_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let range = self.blocks.iter().find(|b| b.name == name)?.range();
        Some(&mut self.values[range])
    }

    pub fn zeros_like(&self) -> Vec<f64> {
        vec![0.0; self.values.len()]
    }

    /// Name of the block containing flat index `i`.
    pub fn block_of(&self, i: usize) -> &str {
        self.blocks
            .iter()
            .find(|b| b.range().contains(&i))
            .map(|b| b.name.as_str())
            .unwrap_or("<none>")
    }

    /// Same block names and shapes, in the same order.
    pub fn same_layout(&self, other: &ParamStore) -> bool {
        self.blocks == other.blocks
    }

    /// Replaces all values; layouts must match.
    pub fn load_from(&mut self, other: &ParamStore) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::Format("parameter layout mismatch".into()));
        }
        self.values.copy_from_slice(&other.values);
        Ok(())
    }

    /// Overwrites one block by name (checkpoint loading).
    pub fn set_block(&mut self, name: &str, shape: &[usize], data: &[f64]) -> Result<()> {
        let block = self
            .blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::Format(alloc::format!("unknown parameter block `{name}`")))?;
        if block.shape != shape || data.len() != block.len() {
            return Err(Error::Format(alloc::format!(
                "block `{name}`: expected shape {:?}, got {:?}",
                block.shape,
                shape
            )));
        }
        let range = block.range();
        self.values[range].copy_from_slice(data);
        Ok(())
    }

    /// `target ← τ·live + (1−τ)·target`, elementwise.
    pub fn soft_update_from(&mut self, live: &ParamStore, tau: f64) -> Result<()> {
        if !self.same_layout(live) {
            return Err(Error::Contract("soft update between different layouts".into()));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Config(alloc::format!("tau {tau} outside [0, 1]")));
        }
        soft_update(&live.values, &mut self.values, tau);
        Ok(())
    }
}

pub(crate) fn soft_update(live: &[f64], target: &mut [f64], tau: f64) {
    if tau == 1.0 {
        target.copy_from_slice(live);
        return;
    }
    if tau == 0.0 {
        return;
    }
    let keep = 1.0 - tau;
    for (t, l) in target.iter_mut().zip(live) {
        *t = tau * l + keep * *t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_are_contiguous() {
        let mut p = ParamStore::new();
        let a = p.alloc("a", &[2, 3]);
        let b = p.alloc("b", &[4]);
        assert_eq!(a, 0..6);
        assert_eq!(b, 6..10);
        assert_eq!(p.block_of(7), "b");
        assert_eq!(p.block("b").unwrap().len(), 4);
    }

    #[test]
    fn soft_update_endpoints() {
        let mut live = ParamStore::new();
        live.alloc("w", &[3]);
        live.values_mut().copy_from_slice(&[1.0, 2.0, 3.0]);
        let mut target = live.clone();
        target.values_mut().fill(0.0);
        target.soft_update_from(&live, 0.0).unwrap();
        assert_eq!(target.values(), &[0.0; 3]);
        target.soft_update_from(&live, 0.001).unwrap();
        assert_eq!(target.values()[0], 0.001);
        target.soft_update_from(&live, 1.0).unwrap();
        assert_eq!(target.values(), live.values());
    }

    #[test]
    fn set_block_checks_shape() {
        let mut p = ParamStore::new();
        p.alloc("w", &[2, 2]);
        assert!(p.set_block("w", &[4], &[0.0; 4]).is_err());
        assert!(p.set_block("v", &[2, 2], &[0.0; 4]).is_err());
        p.set_block("w", &[2, 2], &[1.0; 4]).unwrap();
        assert_eq!(p.values(), &[1.0; 4]);
    }
}
