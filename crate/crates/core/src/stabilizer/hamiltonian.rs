//! Commuting Pauli Hamiltonians, generator selection and the classical
//! distribution over joint eigenspace labels.

use num_complex::Complex64;

use super::pauli::{is_prime, phase_value, Monomial, PauliOperator};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::graph::{Hypergraph, Region};
use crate::space::{Budget, StateSpace};

/// `h_a = J·(P + P†)/2`; for a Hermitian `P` this is `J·P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub operator: PauliOperator,
}

impl PauliTerm {
    pub fn new(coefficient: f64, operator: PauliOperator) -> Self {
        PauliTerm {
            coefficient,
            operator,
        }
    }
}

/// `P_a = e^{iπ·phase/q} · Π_b G_b^{k_b}` in terms of the canonical generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermExpansion {
    pub powers: Vec<usize>,
    pub phase: usize,
}

/// Row-reduced span of symplectic vectors over `F_q`, tracking each row as a
/// combination of the inserted vectors.
#[derive(Debug, Clone)]
struct Span {
    q: usize,
    rows: Vec<(usize, Vec<usize>, Vec<usize>)>,
    inserted: usize,
}

fn inv_mod(a: usize, q: usize) -> usize {
    let mut r = 1;
    for _ in 0..q - 2 {
        r = r * a % q;
    }
    r
}

impl Span {
    fn new(q: usize) -> Self {
        Span {
            q,
            rows: Vec::new(),
            inserted: 0,
        }
    }

    /// `v = Σ combo_i·g_i + residual`; combo has one entry per inserted vector.
    fn reduce(&self, v: &[usize], combo_len: usize) -> (Vec<usize>, Vec<usize>) {
        let q = self.q;
        let mut res = v.to_vec();
        let mut combo = vec![0; combo_len];
        for (pivot, row, rc) in &self.rows {
            let c = res[*pivot];
            if c == 0 {
                continue;
            }
            for (r, &e) in res.iter_mut().zip(row) {
                *r = (*r + q * q - c * e % q) % q;
            }
            for (k, &e) in combo.iter_mut().zip(rc) {
                *k = (*k + c * e) % q;
            }
        }
        (res, combo)
    }

    /// Inserts `v` if independent and returns whether it was.
    fn insert(&mut self, v: &[usize], combo_len: usize) -> bool {
        let q = self.q;
        let (res, combo) = self.reduce(v, combo_len);
        let Some(pivot) = res.iter().position(|&e| e != 0) else {
            return false;
        };
        let inv = inv_mod(res[pivot], q);
        let row: Vec<usize> = res.iter().map(|&e| e * inv % q).collect();
        let mut rc: Vec<usize> = combo.iter().map(|&e| (q - e) % q * inv % q).collect();
        rc[self.inserted] = (rc[self.inserted] + inv) % q;
        self.rows.push((pivot, row, rc));
        self.inserted += 1;
        true
    }
}

/// A Hamiltonian `H = Σ_a h_a` of mutually commuting Pauli terms together
/// with a maximal independent set of generators.
#[derive(Debug, Clone)]
pub struct StabilizerHamiltonian {
    n: usize,
    q: usize,
    graph: Hypergraph,
    terms: Vec<PauliTerm>,
    generators: Vec<PauliOperator>,
    expansions: Vec<TermExpansion>,
}

/// Index pair of the first non-commuting terms, if any.
pub fn first_noncommuting(ops: &[PauliOperator]) -> Option<(usize, usize)> {
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            if !ops[i].commutes(&ops[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

pub fn check_commuting(h: &StabilizerHamiltonian) -> bool {
    let ops: Vec<PauliOperator> = h.terms.iter().map(|t| t.operator.clone()).collect();
    first_noncommuting(&ops).is_none() && first_noncommuting(&h.generators).is_none()
}

impl StabilizerHamiltonian {
    /// Generators are the first independent terms in declared order.
    pub fn new(n: usize, q: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        Self::validate(n, q, &terms)?;
        let mut span = Span::new(q);
        let mut generators = Vec::new();
        for t in &terms {
            if span.insert(&t.operator.symplectic_vector(), terms.len()) {
                generators.push(t.operator.canonical());
            }
        }
        Self::finish(n, q, terms, generators)
    }

    /// Uses the given generators, e.g. single-site `Z` for a classical
    /// Hamiltonian. They must be independent, commute with every term, and
    /// generate every term up to phase.
    pub fn with_generators(
        n: usize,
        q: usize,
        terms: Vec<PauliTerm>,
        generators: Vec<PauliOperator>,
    ) -> Result<Self> {
        Self::validate(n, q, &terms)?;
        let mut span = Span::new(q);
        for (k, g) in generators.iter().enumerate() {
            if g.n() != n || g.q() != q {
                return Err(Error::InvalidPauli(format!(
                    "generator {k} acts on a different system"
                )));
            }
            if !span.insert(&g.symplectic_vector(), generators.len()) {
                return Err(Error::InvalidPauli(format!(
                    "generator {k} is dependent on earlier ones"
                )));
            }
        }
        if let Some((i, j)) = first_noncommuting(&generators) {
            return Err(Error::NonCommuting(i, j));
        }
        for (a, t) in terms.iter().enumerate() {
            if let Some(k) = generators.iter().position(|g| !g.commutes(&t.operator)) {
                return Err(Error::InvalidPauli(format!(
                    "generator {k} does not commute with term {a}"
                )));
            }
        }
        let generators = generators.iter().map(PauliOperator::canonical).collect();
        Self::finish(n, q, terms, generators)
    }

    fn validate(n: usize, q: usize, terms: &[PauliTerm]) -> Result<()> {
        if !is_prime(q) {
            return Err(Error::InvalidPauli(format!(
                "local dimension {q} is not prime"
            )));
        }
        for (a, t) in terms.iter().enumerate() {
            if t.operator.n() != n || t.operator.q() != q {
                return Err(Error::InvalidPauli(format!(
                    "term {a} acts on a different system"
                )));
            }
            if t.operator.is_scalar() {
                return Err(Error::InvalidPauli(format!(
                    "term {a} is proportional to the identity"
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "term {a} has a non-finite coefficient"
                )));
            }
        }
        let ops: Vec<PauliOperator> = terms.iter().map(|t| t.operator.clone()).collect();
        if let Some((i, j)) = first_noncommuting(&ops) {
            return Err(Error::NonCommuting(i, j));
        }
        Ok(())
    }

    fn finish(
        n: usize,
        q: usize,
        terms: Vec<PauliTerm>,
        generators: Vec<PauliOperator>,
    ) -> Result<Self> {
        let m = generators.len();
        let mut span = Span::new(q);
        for g in &generators {
            span.insert(&g.symplectic_vector(), m);
        }
        let mut expansions = Vec::with_capacity(terms.len());
        for (a, t) in terms.iter().enumerate() {
            let (res, powers) = span.reduce(&t.operator.symplectic_vector(), m);
            if res.iter().any(|&e| e != 0) {
                return Err(Error::InvalidPauli(format!(
                    "term {a} is not generated by the generators"
                )));
            }
            let mut prod = PauliOperator::identity(n, q)?;
            for (g, &k) in generators.iter().zip(&powers) {
                prod = prod.mul(&g.pow(k))?;
            }
            debug_assert_eq!(prod.symplectic_vector(), t.operator.symplectic_vector());
            let q2 = 2 * q;
            let phase = (t.operator.phase() + q2 - prod.phase()) % q2;
            expansions.push(TermExpansion { powers, phase });
        }
        let edges = terms.iter().map(|t| t.operator.support()).collect();
        let graph = Hypergraph::new(n, q, edges)?;
        Ok(StabilizerHamiltonian {
            n,
            q,
            graph,
            terms,
            generators,
            expansions,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Interaction graph on the qudits, one hyperedge per term support.
    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Canonical generators (`G^q = I`), so `G_b Π_{b,s} = ω^s Π_{b,s}`.
    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn expansion(&self, a: usize) -> &TermExpansion {
        &self.expansions[a]
    }

    /// `ln R`, where `R = q^{n−m}` is the common rank of every `Π_s`.
    pub fn log_rank(&self) -> f64 {
        (self.n - self.generators.len()) as f64 * (self.q as f64).ln()
    }

    pub fn rank(&self) -> f64 {
        self.log_rank().exp()
    }

    pub fn generator_support(&self, b: usize) -> Region {
        Region::new(self.generators[b].support())
    }

    /// Generators whose support meets `sites`.
    pub fn generators_touching(&self, sites: &[usize]) -> Vec<usize> {
        (0..self.generators.len())
            .filter(|&b| {
                self.generators[b]
                    .support()
                    .iter()
                    .any(|v| sites.contains(v))
            })
            .collect()
    }

    /// Labels term `a` reads: generators overlapping its support together
    /// with those in its generator expansion.
    pub fn term_labels(&self, a: usize) -> Vec<usize> {
        let mut labels = self.generators_touching(&self.terms[a].operator.support());
        for (b, &k) in self.expansions[a].powers.iter().enumerate() {
            if k != 0 {
                labels.push(b);
            }
        }
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// Eigenvalue of `P_a` on the joint eigenspace `s` (one label per
    /// generator).
    pub fn operator_eigenvalue(&self, a: usize, s: &[usize]) -> Complex64 {
        let e = &self.expansions[a];
        let dot: usize = e
            .powers
            .iter()
            .zip(s)
            .map(|(k, v)| k * v % self.q)
            .sum::<usize>()
            % self.q;
        phase_value(e.phase, self.q) * phase_value(2 * dot, self.q)
    }

    /// `h_a(s)`.
    pub fn term_energy(&self, a: usize, s: &[usize]) -> f64 {
        self.terms[a].coefficient * self.operator_eigenvalue(a, s).re
    }

    /// `H_stab(s) = Σ_a h_a(s_a)`.
    pub fn label_energy(&self, s: &[usize]) -> f64 {
        (0..self.terms.len()).map(|a| self.term_energy(a, s)).sum()
    }

    /// 𝒢_s: one vertex per generator and one hyperedge per term.
    pub fn label_graph(&self) -> Result<Hypergraph> {
        let edges = (0..self.terms.len()).map(|a| self.term_labels(a)).collect();
        Hypergraph::new(self.generators.len(), self.q, edges)
    }

    /// `Π_b G_b^{j_b}` for every `j` in row-major order over `Z_q^m`.
    pub fn group_elements(&self) -> Result<Vec<PauliOperator>> {
        let m = self.generators.len();
        let space = StateSpace::new(vec![self.q; m]);
        let mut out: Vec<PauliOperator> = Vec::with_capacity(space.size());
        out.push(PauliOperator::identity(self.n, self.q)?);
        for idx in 1..space.size() {
            // the last nonzero digit peels off one generator from an earlier element
            let digits = space.decode(idx);
            let b = (0..m)
                .rev()
                .find(|&b| digits[b] != 0)
                .expect("nonzero index");
            let prev = idx - space.strides()[b];
            out.push(out[prev].mul(&self.generators[b])?);
        }
        Ok(out)
    }

    pub fn group_monomials(&self) -> Result<Vec<Monomial>> {
        Ok(self
            .group_elements()?
            .iter()
            .map(PauliOperator::monomial)
            .collect())
    }
}

/// The classical Gibbs distribution `P(s) ∝ e^{−β H_stab(s)}` on 𝒢_s.
#[derive(Debug, Clone)]
pub struct StabilizerDistribution {
    model: GibbsModel,
}

impl StabilizerDistribution {
    pub fn model(&self) -> &GibbsModel {
        &self.model
    }

    pub fn graph(&self) -> &Hypergraph {
        self.model.graph()
    }

    pub fn exact_distribution(&self, budget: Budget) -> Result<DiscreteDistribution> {
        self.model.exact_distribution(budget)
    }
}

pub fn stabilizer_distribution(
    h: &StabilizerHamiltonian,
    beta: f64,
) -> Result<StabilizerDistribution> {
    if !check_commuting(h) {
        let ops: Vec<PauliOperator> = h.terms.iter().map(|t| t.operator.clone()).collect();
        let (i, j) = first_noncommuting(&ops).unwrap_or((0, 0));
        return Err(Error::NonCommuting(i, j));
    }
    let graph = h.label_graph()?;
    let m = h.n_generators();
    let mut tables = Vec::with_capacity(h.terms.len());
    let mut s = vec![0; m];
    for a in 0..h.terms.len() {
        let labels = &graph.edges()[a];
        let local = StateSpace::new(vec![h.q; labels.len()]);
        let mut table = Vec::with_capacity(local.size());
        for cfg in local.configs() {
            s.iter_mut().for_each(|v| *v = 0);
            for (&b, &v) in labels.iter().zip(&cfg) {
                s[b] = v;
            }
            table.push(h.term_energy(a, &s));
        }
        tables.push(table);
    }
    Ok(StabilizerDistribution {
        model: GibbsModel::new(graph, beta, tables)?,
    })
}
