//! Gibbs models with pinning fields on a region B.

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::graph::{Hypergraph, Region};
use crate::space::{Budget, StateSpace};

/// A pinning energy on a set of sites, in units where β is already absorbed.
#[derive(Debug, Clone, PartialEq)]
pub struct PinningTerm {
    pub vertices: Vec<usize>,
    pub table: Vec<f64>,
}

/// `H(x) = Σ_a h_a(x_a) + Σ_a p_a(x_a)` with `P(x) ∝ e^{−H(x)}`.
///
/// Interaction tables are `β·h_a` shifted so their minimum is zero. Pinning
/// terms fully inside B are shifted so the favored local configuration has
/// energy zero. Both shifts are recorded; they change `Z` by a constant
/// factor and leave every probability unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct PinnedModel {
    base: Hypergraph,
    full: GibbsModel,
    n_interactions: usize,
    b: Region,
    favored: Vec<usize>,
    interaction_shift: Vec<f64>,
    pinning_shift: Vec<f64>,
    fully_in_b: Vec<bool>,
    h_max: f64,
    p_min: f64,
}

impl PinnedModel {
    /// `favored_b` lists the favored state of each B site in sorted order.
    pub fn new(
        base: &GibbsModel,
        pinning: Vec<PinningTerm>,
        b: Region,
        favored_b: &[usize],
    ) -> Result<Self> {
        let g = base.graph();
        g.check_region(&b)?;
        if favored_b.len() != b.len() {
            return Err(Error::ConfigurationLength {
                expected: b.len(),
                got: favored_b.len(),
            });
        }
        let mut favored = vec![0; g.n()];
        for (v, &f) in b.iter().zip(favored_b) {
            if f >= g.dim(v) {
                return Err(Error::InvalidModel(format!(
                    "favored state {f} out of range at {v}"
                )));
            }
            favored[v] = f;
        }

        let mut edges: Vec<Vec<usize>> = g.edges().to_vec();
        let mut tables = Vec::with_capacity(edges.len() + pinning.len());
        let mut interaction_shift = Vec::with_capacity(edges.len());
        let mut h_max = 0.0f64;
        for t in base.tables() {
            let scaled: Vec<f64> = t
                .iter()
                .map(|&e| {
                    if e == f64::INFINITY {
                        e
                    } else {
                        base.beta() * e
                    }
                })
                .collect();
            let min = finite_min(&scaled).unwrap_or(0.0);
            let shifted: Vec<f64> = scaled.iter().map(|&e| e - min).collect();
            if let Some(m) = finite_max(&shifted) {
                h_max = h_max.max(m);
            }
            interaction_shift.push(min);
            tables.push(shifted);
        }

        let mut pinning_shift = Vec::with_capacity(pinning.len());
        let mut fully_in_b = Vec::with_capacity(pinning.len());
        let mut p_min = f64::INFINITY;
        let mut covered = vec![false; g.n()];
        for (k, term) in pinning.into_iter().enumerate() {
            let dims: Vec<usize> = term.vertices.iter().map(|&v| g.dim(v)).collect();
            let space = StateSpace::new(dims);
            if term.table.len() != space.size() {
                return Err(Error::InvalidModel(format!(
                    "pinning term {k} has {} entries, expected {}",
                    term.table.len(),
                    space.size()
                )));
            }
            let inside = term.vertices.iter().all(|&v| b.contains(v));
            let shift = if inside {
                let fav: Vec<usize> = term.vertices.iter().map(|&v| favored[v]).collect();
                let f = term.table[space.encode(&fav)];
                if !f.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "pinning term {k} excludes its favored configuration"
                    )));
                }
                let fav_idx = space.encode(&fav);
                for (i, &e) in term.table.iter().enumerate() {
                    if i != fav_idx {
                        p_min = p_min.min(e - f);
                    }
                }
                for &v in &term.vertices {
                    covered[v] = true;
                }
                f
            } else {
                0.0
            };
            pinning_shift.push(shift);
            fully_in_b.push(inside);
            tables.push(term.table.iter().map(|&e| e - shift).collect());
            edges.push(term.vertices);
        }
        if b.iter().any(|v| !covered[v]) {
            p_min = 0.0;
        }
        if b.is_empty() {
            p_min = f64::INFINITY;
        }
        let full_graph = Hypergraph::with_dims(g.dims().to_vec(), edges)?;
        let full = GibbsModel::new(full_graph, 1.0, tables)?;
        Ok(PinnedModel {
            base: g.clone(),
            full,
            n_interactions: g.edges().len(),
            b,
            favored,
            interaction_shift,
            pinning_shift,
            fully_in_b,
            h_max,
            p_min,
        })
    }

    /// The interaction graph 𝒢 (without pinning terms).
    pub fn base_graph(&self) -> &Hypergraph {
        &self.base
    }

    /// Graph over interaction and pinning terms together; this is the
    /// adjacency used for polymers.
    pub fn graph(&self) -> &Hypergraph {
        self.full.graph()
    }

    /// All terms as one Gibbs model at β = 1.
    pub fn as_gibbs(&self) -> &GibbsModel {
        &self.full
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn b(&self) -> &Region {
        &self.b
    }

    /// Favored state per vertex; entries outside B are zero and unused.
    pub fn favored(&self) -> &[usize] {
        &self.favored
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// Smallest excitation energy among pinning terms fully inside B. Zero if
    /// some B site is covered by no such term.
    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    /// 𝔡: maximum vertex degree of the interaction graph.
    pub fn degree(&self) -> usize {
        self.base.max_degree()
    }

    /// Largest local dimension over B.
    pub fn q_eff(&self) -> usize {
        self.b.iter().map(|v| self.base.dim(v)).max().unwrap_or(1)
    }

    pub fn n_interactions(&self) -> usize {
        self.n_interactions
    }

    pub fn interaction_shifts(&self) -> &[f64] {
        &self.interaction_shift
    }

    pub fn pinning_shifts(&self) -> &[f64] {
        &self.pinning_shift
    }

    pub fn n_pinning(&self) -> usize {
        self.pinning_shift.len()
    }

    /// Shifted table of pinning term `k`.
    pub fn pinning_table(&self, k: usize) -> &[f64] {
        &self.full.tables()[self.n_interactions + k]
    }

    pub fn pinning_vertices(&self, k: usize) -> &[usize] {
        &self.full.graph().edges()[self.n_interactions + k]
    }

    pub fn pinning_fully_in_b(&self, k: usize) -> bool {
        self.fully_in_b[k]
    }

    /// Total energy `H(x)` after shifts.
    pub fn energy(&self, x: &[usize]) -> Result<f64> {
        self.full.energy(x)
    }

    /// Energy of the terms whose hyperedge touches `sites`.
    pub fn local_energy(&self, x: &[usize], terms: &[usize]) -> f64 {
        terms.iter().map(|&a| self.full.term_energy(a, x)).sum()
    }

    pub fn exact_distribution(&self, budget: Budget) -> Result<DiscreteDistribution> {
        self.full.exact_distribution(budget)
    }

    /// `ln Z_0`: every B site at its favored state, given `x_ac`.
    pub fn log_z0(&self, x: &[usize]) -> f64 {
        let mut y = x.to_vec();
        for v in self.b.iter() {
            y[v] = self.favored[v];
        }
        -self.full.energy_unchecked(&y)
    }
}

fn finite_min(xs: &[f64]) -> Option<f64> {
    xs.iter()
        .copied()
        .filter(|e| e.is_finite())
        .reduce(f64::min)
}

fn finite_max(xs: &[f64]) -> Option<f64> {
    xs.iter()
        .copied()
        .filter(|e| e.is_finite())
        .reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ising_chain;

    fn single_site_pins(b: &[usize], gap: f64) -> Vec<PinningTerm> {
        b.iter()
            .map(|&v| PinningTerm {
                vertices: vec![v],
                table: vec![0.0, gap],
            })
            .collect()
    }

    #[test]
    fn shifts_and_constants() {
        let m = ising_chain(4, false, 0.5);
        let p =
            PinnedModel::new(&m, single_site_pins(&[1, 2], 3.0), [1, 2].into(), &[0, 0]).unwrap();
        assert_eq!(p.h_max(), 1.0);
        assert_eq!(p.interaction_shifts(), &[-0.5, -0.5, -0.5]);
        assert_eq!(p.p_min(), 3.0);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.q_eff(), 2);
        assert_eq!(p.graph().edges().len(), 5);
    }

    #[test]
    fn favored_state_is_shifted_to_zero() {
        let m = ising_chain(3, false, 1.0);
        let pins = vec![PinningTerm {
            vertices: vec![1],
            table: vec![2.0, 0.5],
        }];
        let p = PinnedModel::new(&m, pins, [1].into(), &[1]).unwrap();
        assert_eq!(p.pinning_table(0), &[1.5, 0.0]);
        assert_eq!(p.pinning_shifts(), &[0.5]);
        assert_eq!(p.p_min(), 1.5);
    }

    #[test]
    fn uncovered_b_site_has_no_pinning_guarantee() {
        let m = ising_chain(4, false, 1.0);
        let p = PinnedModel::new(&m, single_site_pins(&[1], 3.0), [1, 2].into(), &[0, 0]).unwrap();
        assert_eq!(p.p_min(), 0.0);
    }

    #[test]
    fn shifts_leave_the_distribution_unchanged() {
        let m = ising_chain(4, false, 0.7);
        let pins = single_site_pins(&[1, 2], 1.3);
        let p = PinnedModel::new(&m, pins.clone(), [1, 2].into(), &[0, 0]).unwrap();
        let mut tables = m
            .tables()
            .iter()
            .map(|t| t.iter().map(|e| 0.7 * e).collect())
            .collect::<Vec<Vec<f64>>>();
        let mut edges = m.graph().edges().to_vec();
        for t in pins {
            edges.push(t.vertices);
            tables.push(t.table);
        }
        let raw = GibbsModel::new(Hypergraph::new(4, 2, edges).unwrap(), 1.0, tables).unwrap();
        let a = p.exact_distribution(Budget::default()).unwrap();
        let b = raw.exact_distribution(Budget::default()).unwrap();
        assert!(a.tv_distance(&b).unwrap() < 1e-14);
    }
}
