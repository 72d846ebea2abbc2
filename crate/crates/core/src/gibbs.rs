//! Classical Gibbs models with one energy table per hyperedge.

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::graph::Hypergraph;
use crate::space::{ordered_sum, par_map_indices, Budget, StateSpace};

/// `P(x) ∝ exp(−β Σ_a h_a(x_a))`.
///
/// Table entries may be `+∞`, which marks a local configuration as excluded
/// (weight exactly zero at every β). This is how zero transition
/// probabilities enter spacetime and pinned models.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsModel {
    graph: Hypergraph,
    beta: f64,
    tables: Vec<Vec<f64>>,
    strides: Vec<Vec<usize>>,
}

impl GibbsModel {
    pub fn new(graph: Hypergraph, beta: f64, tables: Vec<Vec<f64>>) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidModel(format!(
                "beta must be finite and nonnegative, got {beta}"
            )));
        }
        if tables.len() != graph.edges().len() {
            return Err(Error::InvalidModel(format!(
                "{} tables for {} hyperedges",
                tables.len(),
                graph.edges().len()
            )));
        }
        let mut strides = Vec::with_capacity(tables.len());
        for (a, (edge, table)) in graph.edges().iter().zip(&tables).enumerate() {
            let space = StateSpace::new(edge.iter().map(|&v| graph.dim(v)).collect());
            if table.len() != space.size() {
                return Err(Error::InvalidModel(format!(
                    "table {a} has {} entries, expected {}",
                    table.len(),
                    space.size()
                )));
            }
            if let Some(e) = table
                .iter()
                .find(|e| e.is_nan() || **e == f64::NEG_INFINITY)
            {
                return Err(Error::InvalidModel(format!(
                    "table {a} has invalid entry {e}"
                )));
            }
            strides.push(space.strides().to_vec());
        }
        Ok(GibbsModel {
            graph,
            beta,
            tables,
            strides,
        })
    }

    /// Every hyperedge gets a copy of `table`.
    pub fn uniform_terms(graph: Hypergraph, beta: f64, table: Vec<f64>) -> Result<Self> {
        let tables = vec![table; graph.edges().len()];
        Self::new(graph, beta, tables)
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.graph.clone(), beta, self.tables.clone())
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Row-major index of `x` restricted to hyperedge `a`.
    #[inline]
    pub fn local_index(&self, a: usize, x: &[usize]) -> usize {
        self.graph.edges()[a]
            .iter()
            .zip(&self.strides[a])
            .map(|(&v, &s)| x[v] * s)
            .sum()
    }

    #[inline]
    pub fn term_energy(&self, a: usize, x: &[usize]) -> f64 {
        self.tables[a][self.local_index(a, x)]
    }

    pub fn energy(&self, x: &[usize]) -> Result<f64> {
        self.check_config(x)?;
        Ok(self.energy_unchecked(x))
    }

    pub fn check_config(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::ConfigurationLength {
                expected: self.n(),
                got: x.len(),
            });
        }
        if let Some(v) = (0..x.len()).find(|&v| x[v] >= self.graph.dim(v)) {
            return Err(Error::InvalidModel(format!(
                "value {} out of range at vertex {v}",
                x[v]
            )));
        }
        Ok(())
    }

    pub fn energy_unchecked(&self, x: &[usize]) -> f64 {
        (0..self.tables.len()).map(|a| self.term_energy(a, x)).sum()
    }

    /// `−β·E(x)`, or `−∞` for excluded configurations.
    pub fn log_weight(&self, x: &[usize]) -> f64 {
        let e = self.energy_unchecked(x);
        if e == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            -self.beta * e
        }
    }

    fn log_weights(&self, budget: Budget) -> Result<(StateSpace, Vec<f64>)> {
        budget.check(self.graph.dims())?;
        let space = StateSpace::new(self.graph.dims().to_vec());
        let lw = par_map_indices(space.size(), |i, scratch| {
            scratch.resize(space.len(), 0);
            space.decode_into(i, scratch);
            self.log_weight(scratch)
        });
        Ok((space, lw))
    }

    pub fn exact_distribution(&self, budget: Budget) -> Result<DiscreteDistribution> {
        let (space, mut lw) = self.log_weights(budget)?;
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::ZeroProbability);
        }
        for w in &mut lw {
            *w = (*w - max).exp();
        }
        DiscreteDistribution::from_weights((0..self.n()).collect(), space.dims().to_vec(), lw)
    }

    /// `ln Z` by exhaustive enumeration.
    pub fn log_partition(&self, budget: Budget) -> Result<f64> {
        let (_, lw) = self.log_weights(budget)?;
        Ok(log_sum_exp(&lw))
    }
}

/// Numerically stable `ln Σ e^{x_i}`, deterministic in summation order.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let terms: Vec<f64> = xs.iter().map(|&x| (x - max).exp()).collect();
    max + ordered_sum(&terms).ln()
}
