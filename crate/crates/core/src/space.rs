//! Mixed-radix encoding of configurations over a list of variables.
//!
//! Configurations are encoded row-major: the first variable is the most
//! significant digit. Every table in the crate (energy tables, channel
//! matrices, distributions) uses this convention.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Maximum log2 of an enumerated state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u32);

impl Default for Budget {
    fn default() -> Self {
        Budget(26)
    }
}

impl Budget {
    pub fn check(self, dims: &[usize]) -> Result<()> {
        let bits: f64 = dims.iter().map(|&d| (d as f64).log2()).sum();
        if bits > self.0 as f64 + 1e-9 {
            return Err(Error::BudgetExceeded {
                bits,
                budget: self.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    dims: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl StateSpace {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        let mut size = 1usize;
        for k in (0..dims.len()).rev() {
            strides[k] = size;
            size = size
                .checked_mul(dims[k])
                .expect("state space size overflows usize");
        }
        StateSpace {
            dims,
            strides,
            size,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn encode(&self, config: &[usize]) -> usize {
        config.iter().zip(&self.strides).map(|(&x, &s)| x * s).sum()
    }

    pub fn decode_into(&self, mut index: usize, out: &mut [usize]) {
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        self.decode_into(index, &mut out);
        out
    }

    /// Iterates all configurations in index order.
    pub fn configs(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size).map(move |i| self.decode(i))
    }
}

const CHUNK: usize = 1 << 12;

/// Sum with a fixed chunked reduction order, so the result does not depend
/// on the number of worker threads.
pub fn ordered_sum(values: &[f64]) -> f64 {
    let partials: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Evaluates `f` on every index of `0..size` in parallel, deterministically.
pub fn par_map_indices<F>(size: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut Vec<usize>) -> f64 + Sync,
{
    let mut out = vec![0.0; size];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(chunk, slice)| {
            let mut scratch = Vec::new();
            let base = chunk * CHUNK;
            for (k, v) in slice.iter_mut().enumerate() {
                *v = f(base + k, &mut scratch);
            }
        });
    out
}
