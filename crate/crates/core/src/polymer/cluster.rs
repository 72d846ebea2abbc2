//! Clusters of polymers, Ursell coefficients, and the truncated expansion of
//! `ln P̃(x_AC)`.

use super::{enumerate_polymers, exact_log_p_tilde, log_xi, polymer_weight, Polymer};
use crate::error::{Error, Result};
use crate::graph::{Region, Tripartition};
use crate::pinned::PinnedModel;
use crate::space::Budget;

/// A multiset of polymers, stored as `(polymer index, multiplicity)` with
/// distinct indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub entries: Vec<(usize, u32)>,
}

impl Cluster {
    /// `|W| = Σ μ_i |γ_i|`.
    pub fn weight(&self, polymers: &[Polymer]) -> usize {
        self.entries
            .iter()
            .map(|&(i, mu)| mu as usize * polymers[i].size())
            .sum()
    }

    /// `μ_W = Σ μ_i`.
    pub fn multiplicity(&self) -> u32 {
        self.entries.iter().map(|&(_, mu)| mu).sum()
    }

    /// `W! = Π μ_i!`.
    pub fn factorial(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, mu)| (1..=mu).map(f64::from).product::<f64>())
            .product()
    }

    /// Adjacency of `G_W`: one vertex per copy, edges between incompatible
    /// copies. Copies of the same polymer are always incompatible.
    pub fn graph(&self, incompatible: impl Fn(usize, usize) -> bool) -> Vec<Vec<bool>> {
        let verts: Vec<usize> = self
            .entries
            .iter()
            .flat_map(|&(i, mu)| std::iter::repeat_n(i, mu as usize))
            .collect();
        let m = verts.len();
        let mut adj = vec![vec![false; m]; m];
        for a in 0..m {
            for b in a + 1..m {
                let e = verts[a] == verts[b] || incompatible(verts[a], verts[b]);
                adj[a][b] = e;
                adj[b][a] = e;
            }
        }
        adj
    }
}

fn is_connected(adj: &[Vec<bool>]) -> bool {
    let m = adj.len();
    if m == 0 {
        return false;
    }
    let mut seen = vec![false; m];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for w in 0..m {
            if adj[u][w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Ursell coefficient `φ(G) = Σ_{connected spanning C ⊆ G} (−1)^{|E(C)|}`.
///
/// Computed by the connected-part recursion over vertex subsets: with
/// `g(S) = [S is independent]` (the signed count of all spanning subgraphs),
/// `c(S) = g(S) − Σ_{T ∋ min S, T ⊊ S} c(T)·g(S∖T)`.
pub fn ursell(adj: &[Vec<bool>]) -> Result<f64> {
    let m = adj.len();
    if m == 0 || !is_connected(adj) {
        return Err(Error::Precondition(
            "Ursell function needs a connected graph".into(),
        ));
    }
    if m > 20 {
        return Err(Error::BudgetExceeded {
            bits: m as f64,
            budget: 20,
        });
    }
    let full = (1usize << m) - 1;
    let mut independent = vec![true; 1 << m];
    for s in 1..=full {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        let edge_to_rest = (0..m).any(|w| rest >> w & 1 == 1 && adj[low][w]);
        independent[s] = independent[rest] && !edge_to_rest;
    }
    let g = |s: usize| if independent[s] { 1.0 } else { 0.0 };
    let mut c = vec![0.0f64; 1 << m];
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let others = s ^ low;
        let mut acc = g(s);
        // proper subsets T of S containing the lowest vertex
        let mut sub = others;
        loop {
            let t = sub | low;
            if t != s {
                acc -= c[t] * g(s ^ t);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        c[s] = acc;
    }
    Ok(c[full])
}

/// Which of A and C a cluster touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Neither,
    A,
    C,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTerm {
    pub cluster: Cluster,
    pub weight: usize,
    /// `φ(G_W) / W!`.
    pub coefficient: f64,
    pub category: Category,
}

/// The connected clusters of a pinned model up to a weight cap, independent
/// of `x_AC`.
#[derive(Debug, Clone)]
pub struct ClusterExpansion {
    polymers: Vec<Polymer>,
    terms: Vec<ClusterTerm>,
    w_max: usize,
    tri: Tripartition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub w_max: usize,
    pub log_z0: f64,
    /// Entry `k` holds the truncated `ln P̃` through cluster weight `k + 1`.
    pub log_p_tilde_partial: Vec<f64>,
    /// Entry `k` holds the truncated `F_AC` through cluster weight `k + 1`.
    pub f_ac_partial: Vec<f64>,
    pub f_empty: f64,
    pub f_a: f64,
    pub f_c: f64,
    pub f_ac: f64,
    /// Smallest weight of a cluster touching both A and C, if any within the
    /// cap.
    pub min_f_ac_weight: Option<usize>,
    pub exact_log_p_tilde: f64,
}

impl ExpansionReport {
    pub fn truncated_log_p_tilde(&self) -> f64 {
        *self.log_p_tilde_partial.last().unwrap_or(&self.log_z0)
    }

    /// `|truncated − exact|` through each weight.
    pub fn residuals(&self) -> Vec<f64> {
        self.log_p_tilde_partial
            .iter()
            .map(|v| (v - self.exact_log_p_tilde).abs())
            .collect()
    }

    pub fn residual(&self) -> f64 {
        (self.truncated_log_p_tilde() - self.exact_log_p_tilde).abs()
    }
}

impl ClusterExpansion {
    pub fn new(m: &PinnedModel, tri: &Tripartition, w_max: usize) -> Result<Self> {
        if w_max < 1 {
            return Err(Error::Precondition("w_max must be at least 1".into()));
        }
        if &tri.b != m.b() {
            return Err(Error::InvalidRegion(
                "tripartition B differs from the pinned region".into(),
            ));
        }
        let g = m.graph();
        let polymers = enumerate_polymers(g, m.b(), w_max);
        let p = polymers.len();
        let mut incompat = vec![vec![false; p]; p];
        for i in 0..p {
            for j in 0..p {
                incompat[i][j] = polymers[i].incompatible(&polymers[j], g);
            }
        }
        let touches_a: Vec<bool> = polymers
            .iter()
            .map(|q| g.touches(q.sites(), &tri.a))
            .collect();
        let touches_c: Vec<bool> = polymers
            .iter()
            .map(|q| g.touches(q.sites(), &tri.c))
            .collect();

        let mut terms = Vec::new();
        let mut stack = Vec::new();
        collect_multisets(&polymers, 0, w_max, &mut stack, &mut |entries| {
            let cluster = Cluster {
                entries: entries.to_vec(),
            };
            let adj = cluster.graph(|i, j| incompat[i][j]);
            if !is_connected(&adj) {
                return Ok(());
            }
            let phi = ursell(&adj)?;
            let a = cluster.entries.iter().any(|&(i, _)| touches_a[i]);
            let c = cluster.entries.iter().any(|&(i, _)| touches_c[i]);
            let category = match (a, c) {
                (false, false) => Category::Neither,
                (true, false) => Category::A,
                (false, true) => Category::C,
                (true, true) => Category::Both,
            };
            terms.push(ClusterTerm {
                weight: cluster.weight(&polymers),
                coefficient: phi / cluster.factorial(),
                category,
                cluster,
            });
            Ok(())
        })?;
        terms.sort_by_key(|t| t.weight);
        Ok(ClusterExpansion {
            polymers,
            terms,
            w_max,
            tri: tri.clone(),
        })
    }

    pub fn polymers(&self) -> &[Polymer] {
        &self.polymers
    }

    pub fn terms(&self) -> &[ClusterTerm] {
        &self.terms
    }

    pub fn w_max(&self) -> usize {
        self.w_max
    }

    /// Polymer weights at `x`, in polymer order.
    pub fn weights(&self, m: &PinnedModel, x: &[usize]) -> Result<Vec<f64>> {
        self.polymers
            .iter()
            .map(|p| polymer_weight(m, p.sites(), x))
            .collect()
    }

    /// Truncated expansion at `x` (values on B ignored), alongside the exact
    /// `ln P̃` by enumeration.
    pub fn evaluate(
        &self,
        m: &PinnedModel,
        x: &[usize],
        budget: Budget,
    ) -> Result<ExpansionReport> {
        let z = self.weights(m, x)?;
        let mut by_weight = vec![0.0; self.w_max];
        let mut f_ac_by_weight = vec![0.0; self.w_max];
        let (mut f_empty, mut f_a, mut f_c, mut f_ac) = (0.0, 0.0, 0.0, 0.0);
        let mut min_f_ac_weight = None;
        for t in &self.terms {
            let zw: f64 = t
                .cluster
                .entries
                .iter()
                .map(|&(i, mu)| z[i].powi(mu as i32))
                .product();
            let v = t.coefficient * zw;
            by_weight[t.weight - 1] += v;
            match t.category {
                Category::Neither => f_empty += v,
                Category::A => f_a += v,
                Category::C => f_c += v,
                Category::Both => {
                    f_ac += v;
                    f_ac_by_weight[t.weight - 1] += v;
                    min_f_ac_weight.get_or_insert(t.weight);
                }
            }
        }
        let log_z0 = m.log_z0(x);
        let mut acc = log_z0;
        let log_p_tilde_partial = by_weight
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        let mut acc = 0.0;
        let f_ac_partial = f_ac_by_weight
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        Ok(ExpansionReport {
            w_max: self.w_max,
            log_z0,
            log_p_tilde_partial,
            f_ac_partial,
            f_empty,
            f_a,
            f_c,
            f_ac,
            min_f_ac_weight,
            exact_log_p_tilde: exact_log_p_tilde(m, x, budget)?,
        })
    }

    pub fn tripartition(&self) -> &Tripartition {
        &self.tri
    }
}

type MultisetVisitor<'a> = dyn FnMut(&[(usize, u32)]) -> Result<()> + 'a;

/// Calls `f` on every multiset of polymers (indices ≥ `start`, ascending)
/// with total weight ≤ `budget`.
fn collect_multisets(
    polymers: &[Polymer],
    start: usize,
    budget: usize,
    stack: &mut Vec<(usize, u32)>,
    f: &mut MultisetVisitor,
) -> Result<()> {
    for i in start..polymers.len() {
        let size = polymers[i].size();
        if size > budget {
            continue;
        }
        for mu in 1..=(budget / size) as u32 {
            stack.push((i, mu));
            f(stack)?;
            collect_multisets(polymers, i + 1, budget - mu as usize * size, stack, f)?;
            stack.pop();
        }
    }
    Ok(())
}

/// Exact `F_AC(x_AC)` by inclusion–exclusion over restricted polymer gases:
/// `ln Ξ_B − ln Ξ_{B∖N(A)} − ln Ξ_{B∖N(C)} + ln Ξ_{B∖N(A)∖N(C)}`, where
/// `N(R)` is the set of B sites adjacent to `R`. Equals
/// `ln P̃ − ln Z_A − ln Z_C`.
pub fn exact_f_ac(m: &PinnedModel, tri: &Tripartition, x: &[usize], budget: Budget) -> Result<f64> {
    let g = m.graph();
    let b = m.b();
    let na: Region = g.outer_neighborhood(&tri.a).intersection(b);
    let nc: Region = g.outer_neighborhood(&tri.c).intersection(b);
    let no_a = b.difference(&na);
    let no_c = b.difference(&nc);
    let neither = no_a.difference(&nc);
    Ok(
        log_xi(m, b, x, budget)? - log_xi(m, &no_a, x, budget)? - log_xi(m, &no_c, x, budget)?
            + log_xi(m, &neither, x, budget)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Hypergraph;
    use crate::models::ising_chain;
    use crate::noise::{pin_single_site, LocalChannel};
    use approx::assert_abs_diff_eq;

    fn complete(m: usize) -> Vec<Vec<bool>> {
        (0..m).map(|a| (0..m).map(|b| a != b).collect()).collect()
    }

    /// Coefficient of z1 z2 z3 in ln(1 + z1 + z2 + z3), the grand partition
    /// function of three mutually excluding polymers, from the series
    /// ln(1+u) = Σ (−1)^{k+1} u^k / k with u = z1 + z2 + z3: only k = 3
    /// contributes, with multinomial 3!/(1!1!1!) = 6, giving 6/3 = 2.
    #[test]
    fn triangle_matches_log_series() {
        let series = |k: i32, multinomial: f64| (-1f64).powi(k + 1) * multinomial / k as f64;
        assert_abs_diff_eq!(
            ursell(&complete(3)).unwrap(),
            series(3, 6.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            ursell(&complete(2)).unwrap(),
            series(2, 2.0),
            epsilon = 1e-15
        );
        assert_eq!(ursell(&complete(1)).unwrap(), 1.0);
    }

    #[test]
    fn complete_graph_values() {
        // φ(K_m) = (−1)^{m−1} (m−1)!
        for m in 1..=7usize {
            let expected = (-1f64).powi(m as i32 - 1) * (1..m).map(|k| k as f64).product::<f64>();
            assert_abs_diff_eq!(ursell(&complete(m)).unwrap(), expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn path_and_disconnected_graphs() {
        // a tree has exactly one connected spanning subgraph
        let path = vec![
            vec![false, true, false],
            vec![true, false, true],
            vec![false, true, false],
        ];
        assert_eq!(ursell(&path).unwrap(), 1.0);
        let split = vec![vec![false, false], vec![false, false]];
        assert!(matches!(ursell(&split), Err(Error::Precondition(_))));
    }

    fn chain_instance(n: usize, beta: f64, eps: f64) -> (PinnedModel, Tripartition) {
        let m = ising_chain(n, false, beta);
        let b: Region = (1..n - 1).collect();
        let ch: Vec<LocalChannel> = b
            .iter()
            .map(|v| LocalChannel::bit_flip(v, eps).unwrap())
            .collect();
        let p = pin_single_site(&m, &ch, &vec![0; b.len()]).unwrap();
        let t = Tripartition::new(m.graph(), [0].into(), b, [n - 1].into()).unwrap();
        (p, t)
    }

    #[test]
    fn identity_channels_leave_only_z0() {
        let m = ising_chain(5, false, 0.5);
        let ch: Vec<LocalChannel> = (1..4)
            .map(|v| LocalChannel::identity(vec![v], vec![2]).unwrap())
            .collect();
        let p = pin_single_site(&m, &ch, &[0, 0, 0]).unwrap();
        let t = Tripartition::new(m.graph(), [0].into(), [1, 2, 3].into(), [4].into()).unwrap();
        let exp = ClusterExpansion::new(&p, &t, 3).unwrap();
        let r = exp
            .evaluate(&p, &[1, 0, 0, 0, 1], Budget::default())
            .unwrap();
        assert_eq!(r.truncated_log_p_tilde(), r.log_z0);
        assert_eq!(r.exact_log_p_tilde, r.log_z0);
    }

    #[test]
    fn expansion_converges_to_exact() {
        let (p, t) = chain_instance(6, 0.2, 0.01);
        let exp = ClusterExpansion::new(&p, &t, 6).unwrap();
        for x in [[0, 0, 0, 0, 0, 0], [1, 0, 0, 0, 0, 1], [0, 0, 0, 0, 0, 1]] {
            let r = exp.evaluate(&p, &x, Budget::default()).unwrap();
            let res = r.residuals();
            assert!(res.windows(2).all(|w| w[1] <= w[0]), "{res:?}");
            assert!(r.residual() < 1e-10, "{}", r.residual());
            let f = exact_f_ac(&p, &t, &x, Budget::default()).unwrap();
            assert_abs_diff_eq!(r.f_ac, f, epsilon = 1e-10);
        }
    }

    #[test]
    fn shortest_crossing_cluster_fills_b() {
        let (p, t) = chain_instance(6, 0.2, 0.01);
        let exp = ClusterExpansion::new(&p, &t, 5).unwrap();
        let r = exp
            .evaluate(&p, &[1, 0, 0, 0, 0, 1], Budget::default())
            .unwrap();
        let d_ac = p.graph().distance(&t.a, &t.c).unwrap().unwrap();
        assert_eq!(d_ac, 5);
        assert_eq!(r.min_f_ac_weight, Some(4));
        assert!(r.f_ac_partial[..3].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cluster_bookkeeping() {
        let g = Hypergraph::path(4, 2);
        let polys = enumerate_polymers(&g, &[1, 2].into(), 2);
        let w = Cluster {
            entries: vec![(0, 2), (1, 1)],
        };
        assert_eq!(w.multiplicity(), 3);
        assert_eq!(w.factorial(), 2.0);
        assert_eq!(w.weight(&polys), 2 * polys[0].size() + polys[1].size());
    }
}
