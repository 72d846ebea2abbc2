//! Polymer representation of a pinned model: connected excitations of the
//! pinned region, their weights `Z_γ`, and the bounds that make the cluster
//! expansion converge.

mod cluster;
mod threshold;

pub use cluster::{
    exact_f_ac, ursell, Category, Cluster, ClusterExpansion, ClusterTerm, ExpansionReport,
};
pub use threshold::{
    critical_epsilon, critical_pinning, delta, f_ac_bound_check, kp_certificate, noise_pinning,
    threshold_residual, FacReport, FacRow, KpCertificate,
};

use crate::error::{Error, Result};
use crate::gibbs::log_sum_exp;
use crate::graph::{Hypergraph, Region};
use crate::pinned::PinnedModel;
use crate::space::{Budget, StateSpace};

/// A connected set of pinned sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polymer(Region);

impl Polymer {
    /// Checks connectivity under hyperedge adjacency.
    pub fn new(g: &Hypergraph, sites: Region) -> Result<Self> {
        g.check_region(&sites)?;
        if !g.is_connected_region(&sites) {
            return Err(Error::InvalidRegion(
                "polymer sites are not connected".into(),
            ));
        }
        Ok(Polymer(sites))
    }

    pub fn sites(&self) -> &Region {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    /// Incompatible polymers share a site or a hyperedge.
    pub fn incompatible(&self, other: &Polymer, g: &Hypergraph) -> bool {
        g.touches(&self.0, &other.0)
    }
}

/// All connected subsets of `b` with at most `k_max` sites, each once,
/// ordered by smallest site then discovery order.
pub fn enumerate_polymers(g: &Hypergraph, b: &Region, k_max: usize) -> Vec<Polymer> {
    let mut out = Vec::new();
    for v in b.iter() {
        let ext: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| w > v && b.contains(w))
            .collect();
        extend(g, b, k_max, v, &mut vec![v], ext, &mut out);
    }
    out
}

/// ESU-style extension: every connected set is produced exactly once from
/// its smallest site.
fn extend(
    g: &Hypergraph,
    b: &Region,
    k_max: usize,
    root: usize,
    sub: &mut Vec<usize>,
    mut ext: Vec<usize>,
    out: &mut Vec<Polymer>,
) {
    out.push(Polymer(Region::new(sub.iter().copied())));
    if sub.len() == k_max {
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in g.neighbors(w) {
            if u > root
                && b.contains(u)
                && !sub.contains(&u)
                && u != w
                && !next.contains(&u)
                && !sub.iter().any(|&s| g.adjacent(s, u))
            {
                next.push(u);
            }
        }
        sub.push(w);
        extend(g, b, k_max, root, sub, next, out);
        sub.pop();
    }
}

/// Indices of the terms of `m` whose hyperedge meets `sites`.
pub fn touching_terms(m: &PinnedModel, sites: &Region) -> Vec<usize> {
    let g = m.graph();
    let mut t: Vec<usize> = sites
        .iter()
        .flat_map(|v| g.incident_edges(v).iter().copied())
        .collect();
    t.sort_unstable();
    t.dedup();
    t
}

fn with_b_favored(m: &PinnedModel, x: &[usize]) -> Vec<usize> {
    let mut y = x.to_vec();
    for v in m.b().iter() {
        y[v] = m.favored()[v];
    }
    y
}

/// `ln Σ exp(−(E − E_fav))` over configurations of `d` drawn from `states`,
/// with the rest of B favored, summing only the energies of `terms`.
fn log_restricted_sum(
    m: &PinnedModel,
    d: &Region,
    x: &[usize],
    terms: &[usize],
    non_favored: bool,
) -> Result<f64> {
    if x.len() != m.n() {
        return Err(Error::ConfigurationLength {
            expected: m.n(),
            got: x.len(),
        });
    }
    let mut y = with_b_favored(m, x);
    let e0 = m.local_energy(&y, terms);
    if !e0.is_finite() {
        return Err(Error::Precondition(
            "the all-favored configuration is excluded for this x_AC".into(),
        ));
    }
    let g = m.graph();
    let sites = d.sites();
    let radix: Vec<usize> = sites
        .iter()
        .map(|&v| if non_favored { g.dim(v) - 1 } else { g.dim(v) })
        .collect();
    let space = StateSpace::new(radix);
    let mut lw = Vec::with_capacity(space.size());
    let mut digits = vec![0; sites.len()];
    for i in 0..space.size() {
        space.decode_into(i, &mut digits);
        for (k, &v) in sites.iter().enumerate() {
            let fav = m.favored()[v];
            y[v] = if non_favored && digits[k] >= fav {
                digits[k] + 1
            } else {
                digits[k]
            };
        }
        let e = m.local_energy(&y, terms);
        lw.push(if e.is_finite() {
            -(e - e0)
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok(log_sum_exp(&lw))
}

/// `Z_D` from the hyperedges touching `D` only; `Z_∅ = 1`. Values of `x` on
/// B are ignored.
pub fn polymer_weight(m: &PinnedModel, d: &Region, x: &[usize]) -> Result<f64> {
    if d.is_empty() {
        return Ok(1.0);
    }
    check_inside_b(m, d)?;
    let terms = touching_terms(m, d);
    Ok(log_restricted_sum(m, d, x, &terms, true)?.exp())
}

/// `Z_D` from its definition as a ratio of sums over the whole system.
pub fn polymer_weight_global(m: &PinnedModel, d: &Region, x: &[usize]) -> Result<f64> {
    if d.is_empty() {
        return Ok(1.0);
    }
    check_inside_b(m, d)?;
    let all: Vec<usize> = (0..m.graph().edges().len()).collect();
    Ok(log_restricted_sum(m, d, x, &all, true)?.exp())
}

fn check_inside_b(m: &PinnedModel, d: &Region) -> Result<()> {
    if !d.is_subset(m.b()) {
        return Err(Error::InvalidRegion("polymer sites must lie in B".into()));
    }
    Ok(())
}

/// `ln Ξ_S`, where `Ξ_S = Σ_{D ⊆ S} Z_D`: every site of `S` free, the rest of
/// B favored, normalized by the all-favored weight.
pub fn log_xi(m: &PinnedModel, s: &Region, x: &[usize], budget: Budget) -> Result<f64> {
    check_inside_b(m, s)?;
    budget.check(&s.iter().map(|v| m.graph().dim(v)).collect::<Vec<_>>())?;
    if s.is_empty() {
        return Ok(0.0);
    }
    let terms = touching_terms(m, s);
    log_restricted_sum(m, s, x, &terms, false)
}

/// `ln P̃(x_AC) = ln Σ_{x_B} e^{−H(x)}` by enumeration over B.
pub fn exact_log_p_tilde(m: &PinnedModel, x: &[usize], budget: Budget) -> Result<f64> {
    Ok(m.log_z0(x) + log_xi(m, m.b(), x, budget)?)
}

/// Assignments of the non-B sites adjacent to `d`, embedded in full
/// configurations with B favored.
pub fn relevant_assignments(m: &PinnedModel, d: &Region) -> Vec<Vec<usize>> {
    let g = m.graph();
    let outside = g.outer_neighborhood(d).difference(m.b());
    let space = StateSpace::new(outside.iter().map(|v| g.dim(v)).collect());
    let base = with_b_favored(m, &vec![0; m.n()]);
    space
        .configs()
        .map(|cfg| {
            let mut x = base.clone();
            for (v, s) in outside.iter().zip(cfg) {
                x[v] = s;
            }
            x
        })
        .collect()
}

/// `max_{x_AC} |Z_D|`, maximizing only over the A∪C sites that `Z_D`
/// depends on. Assignments that exclude the favored configuration are
/// skipped.
pub fn max_polymer_weight(m: &PinnedModel, d: &Region) -> Result<f64> {
    let mut best: f64 = 0.0;
    for x in relevant_assignments(m, d) {
        match polymer_weight(m, d, &x) {
            Ok(z) => best = best.max(z.abs()),
            Err(Error::Precondition(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// Outcome of checking `|Z_D| ≤ e^{−δ|D|}` over every nonempty `D ⊆ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZdBoundReport {
    pub delta: f64,
    pub subsets: usize,
    /// `max_D max_{x_AC} |Z_D|·e^{δ|D|}`.
    pub worst_ratio: f64,
    pub worst_subset: Region,
}

impl ZdBoundReport {
    pub fn holds(&self) -> bool {
        self.worst_ratio <= 1.0 + 1e-12
    }
}

pub fn zd_exponential_bound_check(m: &PinnedModel) -> Result<ZdBoundReport> {
    let b = m.b().sites().to_vec();
    if b.len() > 20 {
        return Err(Error::BudgetExceeded {
            bits: b.len() as f64,
            budget: 20,
        });
    }
    let delta = delta(m);
    let mut worst_ratio = 0.0f64;
    let mut worst_subset = Region::empty();
    let mut subsets = 0;
    for mask in 1usize..(1 << b.len()) {
        let d: Region = (0..b.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| b[k])
            .collect();
        let z = max_polymer_weight(m, &d)?;
        let ratio = if z == 0.0 {
            0.0
        } else {
            z * (delta * d.len() as f64).exp()
        };
        subsets += 1;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_subset = d;
        }
    }
    Ok(ZdBoundReport {
        delta,
        subsets,
        worst_ratio,
        worst_subset,
    })
}

/// Largest `|Z_{D1∪D2} − Z_{D1} Z_{D2}|` over the relevant `x_AC`.
pub fn z_factorization_check(m: &PinnedModel, d1: &Region, d2: &Region) -> Result<f64> {
    let g = m.graph();
    if !d1.is_empty() && !d2.is_empty() && g.touches(d1, d2) {
        return Err(Error::Precondition(
            "factorization needs disconnected sets".into(),
        ));
    }
    let union = d1.union(d2);
    let mut worst = 0.0f64;
    for x in relevant_assignments(m, &union) {
        let joint = match polymer_weight(m, &union, &x) {
            Ok(z) => z,
            Err(Error::Precondition(_)) => continue,
            Err(e) => return Err(e),
        };
        let prod = polymer_weight(m, d1, &x)? * polymer_weight(m, d2, &x)?;
        worst = worst.max((joint - prod).abs());
    }
    Ok(worst)
}
