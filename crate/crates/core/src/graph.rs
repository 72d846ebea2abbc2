//! Interaction hypergraphs over qudit sites.
//!
//! Two sites are adjacent when some hyperedge contains both of them. This is
//! the only connectivity notion in the crate: distances, separation,
//! boundaries and polymer connectivity all derive from it.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// A sorted set of vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region(Vec<usize>);

impl Region {
    pub fn new<I: IntoIterator<Item = usize>>(sites: I) -> Self {
        let mut v: Vec<usize> = sites.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Region(v)
    }

    pub fn empty() -> Self {
        Region(Vec::new())
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region(
            self.0
                .iter()
                .copied()
                .filter(|&v| !other.contains(v))
                .collect(),
        )
    }

    pub fn intersection(&self, other: &Region) -> Region {
        Region(
            self.0
                .iter()
                .copied()
                .filter(|&v| other.contains(v))
                .collect(),
        )
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.0.iter().all(|&v| !other.contains(v))
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Position of `v` within the sorted site list.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }
}

impl FromIterator<usize> for Region {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Region::new(iter)
    }
}

impl From<Vec<usize>> for Region {
    fn from(v: Vec<usize>) -> Self {
        Region::new(v)
    }
}

impl<const N: usize> From<[usize; N]> for Region {
    fn from(v: [usize; N]) -> Self {
        Region::new(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    dims: Vec<usize>,
    edges: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Uniform local dimension `q` on `n` vertices.
    pub fn new(n: usize, q: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_dims(vec![q; n], edges)
    }

    pub fn with_dims(dims: Vec<usize>, edges: Vec<Vec<usize>>) -> Result<Self> {
        let n = dims.len();
        if let Some(v) = dims.iter().position(|&d| d < 1) {
            return Err(Error::InvalidGraph(format!(
                "vertex {v} has local dimension 0"
            )));
        }
        let mut incidence = vec![Vec::new(); n];
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::InvalidGraph(format!("hyperedge {e} is empty")));
            }
            let mut sorted = edge.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "hyperedge {e} repeats a vertex"
                )));
            }
            if let Some(&v) = sorted.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidGraph(format!(
                    "hyperedge {e} references vertex {v} but n = {n}"
                )));
            }
            for &u in edge {
                incidence[u].push(e);
                for &w in edge {
                    if w != u {
                        neighbors[u].push(w);
                    }
                }
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }
        Ok(Hypergraph {
            dims,
            edges,
            incidence,
            neighbors,
        })
    }

    pub fn path(n: usize, q: usize) -> Self {
        let edges = (0..n.saturating_sub(1)).map(|i| vec![i, i + 1]).collect();
        Self::new(n, q, edges).expect("path graph is valid")
    }

    pub fn cycle(n: usize, q: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        Self::new(n, q, edges).expect("cycle graph is valid")
    }

    /// `rows × cols` grid with vertex `r * cols + c`; nearest-neighbour edges.
    pub fn grid(rows: usize, cols: usize, q: usize, periodic: bool) -> Self {
        let idx = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push(vec![idx(r, c), idx(r, c + 1)]);
                } else if periodic && cols > 2 {
                    edges.push(vec![idx(r, c), idx(r, 0)]);
                }
                if r + 1 < rows {
                    edges.push(vec![idx(r, c), idx(r + 1, c)]);
                } else if periodic && rows > 2 {
                    edges.push(vec![idx(r, c), idx(0, c)]);
                }
            }
        }
        Self::new(rows * cols, q, edges).expect("grid graph is valid")
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, v: usize) -> usize {
        self.dims[v]
    }

    /// Largest local dimension.
    pub fn q(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(1)
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn all_vertices(&self) -> Region {
        Region((0..self.n()).collect())
    }

    /// Maximum number of hyperedges incident to one vertex.
    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Maximum hyperedge cardinality.
    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn check_region(&self, r: &Region) -> Result<()> {
        match r.sites().last() {
            Some(&v) if v >= self.n() => Err(Error::InvalidRegion(format!(
                "vertex {v} outside graph of {} vertices",
                self.n()
            ))),
            _ => Ok(()),
        }
    }

    /// BFS distances from a set of sources; `None` for unreachable vertices.
    pub fn distances_from(&self, sources: &Region) -> Vec<Option<usize>> {
        self.distances_avoiding(sources, &Region::empty())
    }

    fn distances_avoiding(&self, sources: &Region, blocked: &Region) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        for v in sources.iter() {
            if !blocked.contains(v) {
                dist[v] = Some(0);
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.neighbors[u] {
                if dist[w].is_none() && !blocked.contains(w) {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest hyperedge-path length between two regions; `Ok(None)` when
    /// they are disconnected.
    pub fn distance(&self, a: &Region, c: &Region) -> Result<Option<usize>> {
        if a.is_empty() || c.is_empty() {
            return Err(Error::EmptyRegion("graph_distance"));
        }
        self.check_region(a)?;
        self.check_region(c)?;
        let dist = self.distances_from(a);
        Ok(c.iter().filter_map(|v| dist[v]).min())
    }

    /// Sites of `r` that share a hyperedge with a site outside `r`.
    pub fn boundary(&self, r: &Region) -> Region {
        r.iter()
            .filter(|&v| self.neighbors[v].iter().any(|&w| !r.contains(w)))
            .collect()
    }

    /// Sites outside `r` adjacent to some site of `r`.
    pub fn outer_neighborhood(&self, r: &Region) -> Region {
        r.iter()
            .flat_map(|v| self.neighbors[v].iter().copied())
            .filter(|&w| !r.contains(w))
            .collect()
    }

    /// True iff some hyperedge contains a site of `a` and a site of `b`, or
    /// the regions intersect.
    pub fn touches(&self, a: &Region, b: &Region) -> bool {
        a.iter()
            .any(|v| b.contains(v) || self.neighbors[v].iter().any(|&w| b.contains(w)))
    }

    /// True iff the region is connected under hyperedge adjacency.
    pub fn is_connected_region(&self, r: &Region) -> bool {
        let Some(start) = r.sites().first().copied() else {
            return false;
        };
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in &self.neighbors[u] {
                if r.contains(w) && !seen.contains(&w) {
                    seen.push(w);
                    stack.push(w);
                }
            }
        }
        seen.len() == r.len()
    }

    /// Connected components of the subgraph induced by `r`.
    pub fn components(&self, r: &Region) -> Vec<Region> {
        let mut assigned = vec![false; self.n()];
        let mut out = Vec::new();
        for s in r.iter() {
            if assigned[s] {
                continue;
            }
            let mut comp = vec![s];
            assigned[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.neighbors[u] {
                    if r.contains(w) && !assigned[w] {
                        assigned[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            out.push(Region::new(comp));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tripartition {
    pub a: Region,
    pub b: Region,
    pub c: Region,
}

impl Tripartition {
    /// Checks that the three regions partition the vertex set. Separation is
    /// not required here; see [`Tripartition::separating`].
    pub fn new(g: &Hypergraph, a: Region, b: Region, c: Region) -> Result<Self> {
        for r in [&a, &b, &c] {
            g.check_region(r)?;
        }
        if !a.is_disjoint(&b) || !a.is_disjoint(&c) || !b.is_disjoint(&c) {
            return Err(Error::Overlap(
                "tripartition regions must be disjoint".into(),
            ));
        }
        if a.len() + b.len() + c.len() != g.n() {
            return Err(Error::InvalidRegion(
                "tripartition regions must cover every vertex".into(),
            ));
        }
        Ok(Tripartition { a, b, c })
    }

    /// Like [`Tripartition::new`] but also requires that `b` separates `a`
    /// from `c`.
    pub fn separating(g: &Hypergraph, a: Region, b: Region, c: Region) -> Result<Self> {
        let t = Self::new(g, a, b, c)?;
        if !separates(g, &t) {
            return Err(Error::InvalidRegion("B does not separate A from C".into()));
        }
        Ok(t)
    }

    pub fn ac(&self) -> Region {
        self.a.union(&self.c)
    }
}

/// True iff every path from A to C passes through B.
pub fn separates(g: &Hypergraph, t: &Tripartition) -> bool {
    if t.a.is_empty() || t.c.is_empty() {
        return true;
    }
    let dist = g.distances_avoiding(&t.a, &t.b);
    t.c.iter().all(|v| dist[v].is_none())
}

/// A = `center`, B = sites at distance `1..=radius` from A, C = the rest.
pub fn annulus_tripartition(
    g: &Hypergraph,
    center: &Region,
    radius: usize,
) -> Result<Tripartition> {
    if radius < 1 {
        return Err(Error::Precondition(
            "annulus radius must be at least 1".into(),
        ));
    }
    if center.is_empty() {
        return Err(Error::EmptyRegion("annulus_tripartition"));
    }
    g.check_region(center)?;
    let dist = g.distances_from(center);
    let mut b = Vec::new();
    let mut c = Vec::new();
    for (v, d) in dist.iter().enumerate() {
        match d {
            Some(0) => {}
            Some(d) if *d <= radius => b.push(v),
            _ => c.push(v),
        }
    }
    Tripartition::new(g, center.clone(), Region::new(b), Region::new(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_site(cols: usize, r: usize, c: usize) -> usize {
        r * cols + c
    }

    #[test]
    fn degrees() {
        assert_eq!(Hypergraph::path(4, 2).max_degree(), 2);
        let single = Hypergraph::new(3, 2, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(single.max_degree(), 1);
        assert_eq!(single.max_edge_size(), 3);
        let g = Hypergraph::grid(3, 3, 2, false);
        // center vertex of a 3x3 grid has four incident edges
        assert_eq!(g.incident_edges(4).len(), 4);
        assert_eq!(g.max_degree(), 4);
    }

    #[test]
    fn invalid_hyperedges_rejected() {
        assert!(Hypergraph::new(3, 2, vec![vec![]]).is_err());
        assert!(Hypergraph::new(3, 2, vec![vec![0, 0]]).is_err());
        assert!(Hypergraph::new(3, 2, vec![vec![0, 5]]).is_err());
    }

    #[test]
    fn distances() {
        let p = Hypergraph::path(4, 2);
        assert_eq!(p.distance(&[0].into(), &[3].into()).unwrap(), Some(3));
        assert_eq!(p.distance(&[0, 1].into(), &[1, 3].into()).unwrap(), Some(0));
        assert!(matches!(
            p.distance(&Region::empty(), &[1].into()),
            Err(Error::EmptyRegion(_))
        ));
        let g = Hypergraph::grid(4, 4, 2, false);
        let d = g
            .distance(&[grid_site(4, 0, 0)].into(), &[grid_site(4, 3, 3)].into())
            .unwrap();
        assert_eq!(d, Some(6));
        let two = Hypergraph::new(2, 2, vec![]).unwrap();
        assert_eq!(two.distance(&[0].into(), &[1].into()).unwrap(), None);
    }

    #[test]
    fn separation() {
        let p = Hypergraph::path(4, 2);
        let t = Tripartition::new(&p, [0].into(), [1, 2].into(), [3].into()).unwrap();
        assert!(separates(&p, &t));
        let t = Tripartition::new(&p, [0].into(), [2].into(), [1, 3].into()).unwrap();
        assert!(!separates(&p, &t));
        let g = Hypergraph::grid(3, 3, 2, false);
        let ring: Region = (0..9).filter(|&v| v != 4).collect();
        let t = Tripartition::new(&g, [4].into(), ring, Region::empty()).unwrap();
        assert!(separates(&g, &t));
    }

    #[test]
    fn boundaries() {
        let p = Hypergraph::path(4, 2);
        assert!(p.boundary(&p.all_vertices()).is_empty());
        assert_eq!(p.boundary(&[0, 1].into()), Region::from([1]));
        let g = Hypergraph::grid(3, 3, 2, false);
        let left: Region = [0, 3, 6].into();
        assert_eq!(g.boundary(&left), left);
        assert!(g.boundary(&Region::empty()).is_empty());
    }

    #[test]
    fn annuli() {
        let p = Hypergraph::path(7, 2);
        let t = annulus_tripartition(&p, &[3].into(), 1).unwrap();
        assert_eq!(t.b, Region::from([2, 4]));
        assert_eq!(t.c, Region::from([0, 1, 5, 6]));
        let t = annulus_tripartition(&p, &[3].into(), 10).unwrap();
        assert!(t.c.is_empty());
        let g = Hypergraph::grid(5, 5, 2, false);
        let t = annulus_tripartition(&g, &[grid_site(5, 2, 2)].into(), 2).unwrap();
        assert_eq!(t.b.len(), 12);
        assert!(separates(&g, &t));
        assert_eq!(g.distance(&t.a, &t.c).unwrap(), Some(3));
    }
}
