//! Local stochastic channels, layered noise processes, and the pinned models
//! obtained by conditioning a Gibbs state on noisy observations.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::graph::{Hypergraph, Region};
use crate::pinned::{PinnedModel, PinningTerm};
use crate::space::{Budget, StateSpace};

const STOCHASTIC_TOL: f64 = 1e-12;

/// A stochastic map on the joint state of `support`, stored as
/// `matrix[out * size + in] = T(out | in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalChannel {
    support: Vec<usize>,
    dims: Vec<usize>,
    size: usize,
    matrix: Vec<f64>,
    epsilon: f64,
    residual: Vec<f64>,
}

impl LocalChannel {
    pub fn new(support: Vec<usize>, dims: Vec<usize>, matrix: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != dims.len() {
            return Err(Error::InvalidProcess(
                "channel support and dims mismatch".into(),
            ));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidProcess(
                "channel support repeats a site".into(),
            ));
        }
        let size = StateSpace::new(dims.clone()).size();
        if matrix.len() != size * size {
            return Err(Error::InvalidProcess(format!(
                "channel matrix has {} entries, expected {}",
                matrix.len(),
                size * size
            )));
        }
        let (epsilon, residual) = epsilon_decomposition(&matrix, size)?;
        Ok(LocalChannel {
            support,
            dims,
            size,
            matrix,
            epsilon,
            residual,
        })
    }

    pub fn identity(support: Vec<usize>, dims: Vec<usize>) -> Result<Self> {
        Self::replacement(support, dims, 0.0)
    }

    /// Keeps the state with probability `1 − ε`, otherwise moves to one of the
    /// other states uniformly.
    pub fn replacement(support: Vec<usize>, dims: Vec<usize>, eps: f64) -> Result<Self> {
        let size = StateSpace::new(dims.clone()).size();
        let off = if size > 1 {
            eps / (size - 1) as f64
        } else {
            0.0
        };
        let mut m = vec![off; size * size];
        for x in 0..size {
            m[x * size + x] = 1.0 - eps;
        }
        Self::new(support, dims, m)
    }

    /// Keeps the state with probability `1 − p`, otherwise resamples it
    /// uniformly from all states.
    pub fn depolarizing(support: Vec<usize>, dims: Vec<usize>, p: f64) -> Result<Self> {
        let size = StateSpace::new(dims.clone()).size();
        let mut m = vec![p / size as f64; size * size];
        for x in 0..size {
            m[x * size + x] += 1.0 - p;
        }
        Self::new(support, dims, m)
    }

    /// Binary symmetric channel on one bit.
    pub fn bit_flip(site: usize, p: f64) -> Result<Self> {
        Self::replacement(vec![site], vec![2], p)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// `T(out | input)` with both states as local indices.
    pub fn prob(&self, out: usize, input: usize) -> f64 {
        self.matrix[out * self.size + input]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn is_identity(&self) -> bool {
        self.epsilon == 0.0
    }
}

/// Writes `T = (1 − ε)·I + ε·N` with the smallest ε for which `N` is
/// stochastic. `ε = 0` yields `N = I`.
pub fn epsilon_decomposition(matrix: &[f64], size: usize) -> Result<(f64, Vec<f64>)> {
    if matrix.len() != size * size {
        return Err(Error::NotStochastic(format!(
            "expected a {size}x{size} matrix"
        )));
    }
    if let Some(e) = matrix
        .iter()
        .find(|e| !(e.is_finite() && **e >= -STOCHASTIC_TOL))
    {
        return Err(Error::NotStochastic(format!("entry {e}")));
    }
    for col in 0..size {
        let s: f64 = (0..size).map(|r| matrix[r * size + col]).sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic(format!("column {col} sums to {s}")));
        }
    }
    let min_diag = (0..size)
        .map(|x| matrix[x * size + x])
        .fold(f64::INFINITY, f64::min);
    let eps = (1.0 - min_diag).clamp(0.0, 1.0);
    let mut residual = vec![0.0; size * size];
    if eps <= STOCHASTIC_TOL {
        for x in 0..size {
            residual[x * size + x] = 1.0;
        }
        return Ok((0.0, residual));
    }
    for r in 0..size {
        for c in 0..size {
            let id = if r == c { 1.0 - eps } else { 0.0 };
            residual[r * size + c] = ((matrix[r * size + c] - id) / eps).max(0.0);
        }
    }
    for col in 0..size {
        let s: f64 = (0..size).map(|r| residual[r * size + col]).sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::NotStochastic(format!(
                "residual column {col} sums to {s}"
            )));
        }
    }
    Ok((eps, residual))
}

/// A finite-depth process: layers applied in order, channels within a layer
/// acting on pairwise disjoint supports.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredProcess {
    layers: Vec<Vec<LocalChannel>>,
}

impl LayeredProcess {
    pub fn new(layers: Vec<Vec<LocalChannel>>) -> Result<Self> {
        for (t, layer) in layers.iter().enumerate() {
            let mut seen = Vec::new();
            for ch in layer {
                for &v in ch.support() {
                    if seen.contains(&v) {
                        return Err(Error::InvalidProcess(format!(
                            "layer {t} applies two channels to site {v}"
                        )));
                    }
                    seen.push(v);
                }
            }
        }
        Ok(LayeredProcess { layers })
    }

    /// One layer of independent bit flips with probability `p` on `sites`.
    pub fn bit_flips(sites: &Region, p: f64) -> Result<Self> {
        let layer = sites
            .iter()
            .map(|v| LocalChannel::bit_flip(v, p))
            .collect::<Result<_>>()?;
        Self::new(vec![layer])
    }

    pub fn identity() -> Self {
        LayeredProcess { layers: Vec::new() }
    }

    pub fn layers(&self) -> &[Vec<LocalChannel>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn max_epsilon(&self) -> f64 {
        self.layers
            .iter()
            .flatten()
            .map(|c| c.epsilon())
            .fold(0.0, f64::max)
    }

    pub fn channels(&self) -> impl Iterator<Item = &LocalChannel> {
        self.layers.iter().flatten()
    }

    /// The same process with every layer split into one layer per channel.
    pub fn serialized(&self) -> Vec<LocalChannel> {
        self.channels().cloned().collect()
    }
}

/// Applies `ch` to the variables of `p` named by its support.
pub fn apply_channel(p: &DiscreteDistribution, ch: &LocalChannel) -> Result<DiscreteDistribution> {
    let space = p.space();
    let pos: Vec<usize> = ch
        .support()
        .iter()
        .map(|&v| {
            p.variables().iter().position(|&u| u == v).ok_or_else(|| {
                Error::InvalidProcess(format!(
                    "channel acts on variable {v} outside the distribution"
                ))
            })
        })
        .collect::<Result<_>>()?;
    for (k, &ps) in pos.iter().enumerate() {
        if space.dims()[ps] != ch.dims()[k] {
            return Err(Error::InvalidProcess("channel dimension mismatch".into()));
        }
    }
    let local = StateSpace::new(ch.dims().to_vec());
    let offsets: Vec<usize> = (0..local.size())
        .map(|l| {
            let digits = local.decode(l);
            digits
                .iter()
                .zip(&pos)
                .map(|(&d, &ps)| d * space.strides()[ps])
                .sum()
        })
        .collect();
    let local_of = |i: usize| -> usize {
        pos.iter()
            .zip(local.strides())
            .map(|(&ps, &ls)| (i / space.strides()[ps]) % space.dims()[ps] * ls)
            .sum()
    };
    let probs = p.probs();
    let mut out = vec![0.0; probs.len()];
    out.par_chunks_mut(1 << 12)
        .enumerate()
        .for_each(|(chunk, slice)| {
            let base_idx = chunk << 12;
            for (k, o) in slice.iter_mut().enumerate() {
                let j = base_idx + k;
                let lj = local_of(j);
                let base = j - offsets[lj];
                let mut acc = 0.0;
                for (l, &off) in offsets.iter().enumerate() {
                    acc += ch.prob(lj, l) * probs[base + off];
                }
                *o = acc;
            }
        });
    DiscreteDistribution::from_weights(p.variables().to_vec(), space.dims().to_vec(), out)
}

/// Exact action of every layer in order.
pub fn apply_process(
    p: &DiscreteDistribution,
    proc: &LayeredProcess,
    budget: Budget,
) -> Result<DiscreteDistribution> {
    budget.check(p.dims())?;
    let mut cur = p.clone();
    for ch in proc.channels() {
        cur = apply_channel(&cur, ch)?;
    }
    Ok(cur)
}

fn neg_ln(p: f64) -> f64 {
    if p <= 0.0 {
        f64::INFINITY
    } else {
        -p.ln()
    }
}

/// Conditions a Gibbs model on single-site noisy observations `b_prime` of
/// the sites carrying channels. `b_prime` is ordered by site. The pinning
/// field on site `i` is `−ln T_i(b'_i | x_i)`.
pub fn pin_single_site(
    m: &GibbsModel,
    channels: &[LocalChannel],
    b_prime: &[usize],
) -> Result<PinnedModel> {
    let mut by_site: Vec<&LocalChannel> = Vec::with_capacity(channels.len());
    for ch in channels {
        if ch.support().len() != 1 {
            return Err(Error::InvalidProcess(
                "pinning needs single-site channels".into(),
            ));
        }
        let v = ch.support()[0];
        if v >= m.n() || ch.dims()[0] != m.graph().dim(v) {
            return Err(Error::InvalidProcess(format!(
                "channel on site {v} does not fit the model"
            )));
        }
        by_site.push(ch);
    }
    by_site.sort_by_key(|c| c.support()[0]);
    let b = Region::new(by_site.iter().map(|c| c.support()[0]));
    if b.len() != by_site.len() {
        return Err(Error::InvalidProcess("two channels on one site".into()));
    }
    if b_prime.len() != b.len() {
        return Err(Error::ConfigurationLength {
            expected: b.len(),
            got: b_prime.len(),
        });
    }
    let mut pins = Vec::with_capacity(b.len());
    for (ch, &obs) in by_site.iter().zip(b_prime) {
        if obs >= ch.size() {
            return Err(Error::InvalidRegion(format!(
                "observation {obs} out of range"
            )));
        }
        let table: Vec<f64> = (0..ch.size()).map(|x| neg_ln(ch.prob(obs, x))).collect();
        if table.iter().all(|e| e.is_infinite()) {
            return Err(Error::ZeroLikelihood);
        }
        pins.push(PinningTerm {
            vertices: ch.support().to_vec(),
            table,
        });
    }
    PinnedModel::new(m, pins, b, b_prime)
}

/// Origin of a spacetime coupling term.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    /// Layer index, starting at 1.
    pub layer: usize,
    pub sites: Vec<usize>,
    /// True for the hard constraint tying an untouched site to its previous
    /// value.
    pub identity: bool,
}

/// Posterior of the whole noisy history given the final values on B, as a
/// Gibbs model over `(site, time)` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeModel {
    model: GibbsModel,
    n: usize,
    depth: usize,
    site_dims: Vec<usize>,
    b: Region,
    b_final: Vec<usize>,
    index: Vec<Vec<Option<usize>>>,
    site_time: Vec<(usize, usize)>,
    n_clean: usize,
    couplings: Vec<Coupling>,
    epsilon: f64,
}

/// Builds the spacetime model. `b_final` lists the observed final values of
/// B in sorted site order.
pub fn spacetime_model(
    m: &GibbsModel,
    proc: &LayeredProcess,
    b: &Region,
    b_final: &[usize],
) -> Result<SpacetimeModel> {
    let g = m.graph();
    let n = g.n();
    let d = proc.depth();
    if d < 1 {
        return Err(Error::Precondition(
            "spacetime model needs depth at least 1".into(),
        ));
    }
    g.check_region(b)?;
    if b_final.len() != b.len() {
        return Err(Error::ConfigurationLength {
            expected: b.len(),
            got: b_final.len(),
        });
    }
    let mut fixed = vec![None; n];
    for (v, &x) in b.iter().zip(b_final) {
        if x >= g.dim(v) {
            return Err(Error::InvalidRegion(format!(
                "final value {x} out of range at {v}"
            )));
        }
        fixed[v] = Some(x);
    }
    for ch in proc.channels() {
        for (k, &v) in ch.support().iter().enumerate() {
            if v >= n || ch.dims()[k] != g.dim(v) {
                return Err(Error::InvalidProcess(format!(
                    "channel on site {v} does not fit the model"
                )));
            }
        }
    }

    let mut index = vec![vec![None; n]; d + 1];
    let mut site_time = Vec::new();
    let mut dims = Vec::new();
    for (t, row) in index.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate() {
            if t == d && fixed[i].is_some() {
                continue;
            }
            *slot = Some(site_time.len());
            site_time.push((i, t));
            dims.push(g.dim(i));
        }
    }

    let mut edges = Vec::new();
    let mut tables = Vec::new();
    for (edge, table) in g.edges().iter().zip(m.tables()) {
        edges.push(edge.iter().map(|&v| index[0][v].unwrap()).collect());
        tables.push(
            table
                .iter()
                .map(|&e| if e == f64::INFINITY { e } else { m.beta() * e })
                .collect(),
        );
    }
    let n_clean = edges.len();
    let mut couplings = Vec::new();

    for (l, layer) in proc.layers().iter().enumerate() {
        let t = l + 1;
        let mut touched = vec![false; n];
        for ch in layer {
            for &v in ch.support() {
                touched[v] = true;
            }
            let (vars, table) = coupling_table(ch, &index, t, &fixed)?;
            edges.push(vars);
            tables.push(table);
            couplings.push(Coupling {
                layer: t,
                sites: ch.support().to_vec(),
                identity: false,
            });
        }
        for i in (0..n).filter(|&i| !touched[i]) {
            let q = g.dim(i);
            let prev = index[t - 1][i].unwrap();
            let (vars, table) = match index[t][i] {
                Some(next) => {
                    let mut tab = vec![f64::INFINITY; q * q];
                    for x in 0..q {
                        tab[x * q + x] = 0.0;
                    }
                    (vec![prev, next], tab)
                }
                None => {
                    let mut tab = vec![f64::INFINITY; q];
                    tab[fixed[i].unwrap()] = 0.0;
                    (vec![prev], tab)
                }
            };
            edges.push(vars);
            tables.push(table);
            couplings.push(Coupling {
                layer: t,
                sites: vec![i],
                identity: true,
            });
        }
    }
    let graph = Hypergraph::with_dims(dims, edges)?;
    let model = GibbsModel::new(graph, 1.0, tables)?;
    Ok(SpacetimeModel {
        model,
        n,
        depth: d,
        site_dims: g.dims().to_vec(),
        b: b.clone(),
        b_final: b_final.to_vec(),
        index,
        site_time,
        n_clean,
        couplings,
        epsilon: proc.max_epsilon(),
    })
}

/// `−ln T(x_t | x_{t−1})` over the free variables of the channel's support
/// at times `t−1` and `t`.
fn coupling_table(
    ch: &LocalChannel,
    index: &[Vec<Option<usize>>],
    t: usize,
    fixed: &[Option<usize>],
) -> Result<(Vec<usize>, Vec<f64>)> {
    let sup = ch.support();
    let mut vars: Vec<usize> = sup.iter().map(|&v| index[t - 1][v].unwrap()).collect();
    let mut dims: Vec<usize> = ch.dims().to_vec();
    let free_next: Vec<usize> = (0..sup.len())
        .filter(|&k| index[t][sup[k]].is_some())
        .collect();
    for &k in &free_next {
        vars.push(index[t][sup[k]].unwrap());
        dims.push(ch.dims()[k]);
    }
    let local = StateSpace::new(ch.dims().to_vec());
    let term_space = StateSpace::new(dims);
    let mut table = Vec::with_capacity(term_space.size());
    let mut next = vec![0usize; sup.len()];
    for cfg in term_space.configs() {
        let prev = local.encode(&cfg[..sup.len()]);
        for k in 0..sup.len() {
            next[k] = fixed[sup[k]].unwrap_or(0);
        }
        for (j, &k) in free_next.iter().enumerate() {
            next[k] = cfg[sup.len() + j];
        }
        table.push(neg_ln(ch.prob(local.encode(&next), prev)));
    }
    Ok((vars, table))
}

impl SpacetimeModel {
    pub fn model(&self) -> &GibbsModel {
        &self.model
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> &Region {
        &self.b
    }

    pub fn b_final(&self) -> &[usize] {
        &self.b_final
    }

    /// Variable index of `(site, time)`, absent for B sites at the last time.
    pub fn var(&self, site: usize, time: usize) -> Option<usize> {
        self.index.get(time).and_then(|row| row[site])
    }

    pub fn site_time(&self, var: usize) -> (usize, usize) {
        self.site_time[var]
    }

    pub fn n_vars(&self) -> usize {
        self.site_time.len()
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn max_epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `P(history | x_{B,d} = b_final)` over all spacetime variables.
    pub fn posterior(&self, budget: Budget) -> Result<DiscreteDistribution> {
        self.model.exact_distribution(budget).map_err(|e| match e {
            Error::ZeroProbability => Error::ZeroLikelihood,
            other => other,
        })
    }
}

/// The spacetime model regrouped into one super-spin per site, as a pinned
/// model whose favored B configuration is index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedModel {
    pinned: PinnedModel,
    st: SpacetimeModel,
    slices: Vec<usize>,
}

/// Pinning energies of one fully-in-B hyperedge before the favored shift.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub sites: Vec<usize>,
    pub favored: f64,
    pub min_excited: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub epsilon: f64,
    pub depth: usize,
    /// `−d·ln(1 − ε)`, the ceiling on favored pinning energy.
    pub favored_bound: f64,
    /// `−ln ε`, the floor on excited pinning energy.
    pub excited_bound: f64,
    pub rows: Vec<GapRow>,
}

impl GapReport {
    pub fn holds(&self) -> bool {
        const TOL: f64 = 1e-12;
        !self.rows.is_empty()
            && self.rows.iter().all(|r| {
                r.favored <= self.favored_bound + TOL && r.min_excited >= self.excited_bound - TOL
            })
    }

    /// Smallest `min_excited − favored` over the rows.
    pub fn min_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.min_excited - r.favored)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn block_spins(st: &SpacetimeModel) -> Result<BlockedModel> {
    let n = st.n;
    let d = st.depth;
    let slices: Vec<usize> = (0..n)
        .map(|i| if st.b.contains(i) { d } else { d + 1 })
        .collect();
    let super_dims: Vec<usize> = (0..n)
        .map(|i| st.site_dims[i].pow(slices[i] as u32))
        .collect();

    let clean_graph = {
        let edges: Vec<Vec<usize>> = st.model.graph().edges()[..st.n_clean]
            .iter()
            .map(|e| e.iter().map(|&var| st.site_time[var].0).collect())
            .collect();
        Hypergraph::with_dims(super_dims.clone(), edges)?
    };

    let mut scratch = vec![0usize; st.n_vars()];
    let mut clean_tables = Vec::with_capacity(st.n_clean);
    for a in 0..st.n_clean {
        let sites = &clean_graph.edges()[a];
        clean_tables.push(lift_terms(
            st,
            &slices,
            sites,
            &[a],
            &super_dims,
            &mut scratch,
        ));
    }
    let base = GibbsModel::new(clean_graph, 1.0, clean_tables)?;

    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (k, c) in st.couplings.iter().enumerate() {
        let mut sites = c.sites.clone();
        sites.sort_unstable();
        groups.entry(sites).or_default().push(st.n_clean + k);
    }
    let pins: Vec<PinningTerm> = groups
        .into_iter()
        .map(|(sites, terms)| {
            let table = lift_terms(st, &slices, &sites, &terms, &super_dims, &mut scratch);
            PinningTerm {
                vertices: sites,
                table,
            }
        })
        .collect();
    let favored = vec![0; st.b.len()];
    let pinned = PinnedModel::new(&base, pins, st.b.clone(), &favored)?;
    Ok(BlockedModel {
        pinned,
        st: st.clone(),
        slices,
    })
}

/// Time-slice values of super-spin `site` in state `state`. B digits are
/// stored relative to the observed final value, so the favored state is 0.
fn unblock(st: &SpacetimeModel, slices: &[usize], site: usize, state: usize) -> Vec<usize> {
    let q = st.site_dims[site];
    let k = slices[site];
    let offset = st.b.position(site).map_or(0, |p| st.b_final[p]);
    let mut out = vec![0; k];
    let mut s = state;
    for t in (0..k).rev() {
        out[t] = (s % q + offset) % q;
        s /= q;
    }
    out
}

/// Table over super-spin configurations of `sites` summing the given
/// spacetime terms.
fn lift_terms(
    st: &SpacetimeModel,
    slices: &[usize],
    sites: &[usize],
    terms: &[usize],
    super_dims: &[usize],
    scratch: &mut [usize],
) -> Vec<f64> {
    let space = StateSpace::new(sites.iter().map(|&v| super_dims[v]).collect());
    let mut table = Vec::with_capacity(space.size());
    for cfg in space.configs() {
        for (&i, &s) in sites.iter().zip(&cfg) {
            for (t, v) in unblock(st, slices, i, s).into_iter().enumerate() {
                scratch[st.index[t][i].unwrap()] = v;
            }
        }
        table.push(
            terms
                .iter()
                .map(|&a| st.model.term_energy(a, scratch))
                .sum(),
        );
    }
    table
}

impl BlockedModel {
    pub fn pinned(&self) -> &PinnedModel {
        &self.pinned
    }

    pub fn spacetime(&self) -> &SpacetimeModel {
        &self.st
    }

    /// Number of time slices collected into each super-spin.
    pub fn slices(&self) -> &[usize] {
        &self.slices
    }

    pub fn unblock_site(&self, site: usize, state: usize) -> Vec<usize> {
        unblock(&self.st, &self.slices, site, state)
    }

    /// Spacetime configuration corresponding to a blocked configuration.
    pub fn to_spacetime(&self, x: &[usize]) -> Vec<usize> {
        let mut out = vec![0; self.st.n_vars()];
        for (i, &s) in x.iter().enumerate() {
            for (t, v) in self.unblock_site(i, s).into_iter().enumerate() {
                out[self.st.index[t][i].unwrap()] = v;
            }
        }
        out
    }

    /// Blocked posterior written back over the spacetime variables.
    pub fn spacetime_distribution(&self, budget: Budget) -> Result<DiscreteDistribution> {
        let p = self.pinned.exact_distribution(budget)?;
        let st_space = StateSpace::new(self.st.model.graph().dims().to_vec());
        let mut probs = vec![0.0; st_space.size()];
        for (i, &pr) in p.probs().iter().enumerate() {
            let x = p.space().decode(i);
            probs[st_space.encode(&self.to_spacetime(&x))] = pr;
        }
        DiscreteDistribution::from_weights(
            (0..self.st.n_vars()).collect(),
            st_space.dims().to_vec(),
            probs,
        )
    }

    /// Pinning energies of every pinning term fully inside B, compared with
    /// `−d·ln(1−ε)` and `−ln ε` for the process's largest ε.
    pub fn gap_report(&self) -> GapReport {
        let eps = self.st.epsilon;
        let d = self.st.depth;
        let rows = (0..self.pinned.n_pinning())
            .filter(|&k| self.pinned.pinning_fully_in_b(k))
            .map(|k| {
                let shift = self.pinned.pinning_shifts()[k];
                let min_excited = self.pinned.pinning_table(k)[1..]
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                GapRow {
                    sites: self.pinned.pinning_vertices(k).to_vec(),
                    favored: shift,
                    min_excited: shift + min_excited,
                }
            })
            .collect();
        GapReport {
            epsilon: eps,
            depth: d,
            favored_bound: -(d as f64) * (1.0 - eps).ln(),
            excited_bound: neg_ln(eps),
            rows,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ising_chain;
    use approx::assert_abs_diff_eq;

    #[test]
    fn decomposition_examples() {
        let id = LocalChannel::identity(vec![0], vec![2]).unwrap();
        assert_eq!(id.epsilon(), 0.0);
        assert_eq!(id.residual(), &[1.0, 0.0, 0.0, 1.0]);

        let bsc = LocalChannel::bit_flip(0, 0.1).unwrap();
        assert_abs_diff_eq!(bsc.epsilon(), 0.1, epsilon = 1e-15);
        for (a, b) in bsc.residual().iter().zip([0.0, 1.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }

        let uni = LocalChannel::depolarizing(vec![0], vec![2], 1.0).unwrap();
        assert_abs_diff_eq!(uni.epsilon(), 0.5, epsilon = 1e-15);
        for (a, b) in uni.residual().iter().zip([0.0, 1.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_non_stochastic() {
        assert!(matches!(
            LocalChannel::new(vec![0], vec![2], vec![0.9, 0.2, 0.2, 0.8]),
            Err(Error::NotStochastic(_))
        ));
        assert!(matches!(
            epsilon_decomposition(&[1.2, 0.0, -0.2, 1.0], 2),
            Err(Error::NotStochastic(_))
        ));
    }

    #[test]
    fn overlapping_layer_rejected() {
        let a = LocalChannel::identity(vec![0, 1], vec![2, 2]).unwrap();
        let b = LocalChannel::identity(vec![1, 2], vec![2, 2]).unwrap();
        assert!(matches!(
            LayeredProcess::new(vec![vec![a, b]]),
            Err(Error::InvalidProcess(_))
        ));
    }

    #[test]
    fn uniform_is_stationary_under_flips() {
        let p = DiscreteDistribution::uniform(vec![0, 1], vec![2, 2]).unwrap();
        let proc = LayeredProcess::bit_flips(&[0, 1].into(), 0.3).unwrap();
        let q = apply_process(&p, &proc, Budget::default()).unwrap();
        assert!(q.tv_distance(&p).unwrap() < 1e-15);
        let id = LayeredProcess::new(vec![
            vec![LocalChannel::identity(vec![0], vec![2]).unwrap()],
        ])
        .unwrap();
        let w =
            DiscreteDistribution::new(vec![0, 1], vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(apply_process(&w, &id, Budget::default()).unwrap(), w);
    }

    #[test]
    fn flip_matches_joint_enumeration() {
        let m = ising_chain(4, false, 1.0);
        let p = m.exact_distribution(Budget::default()).unwrap();
        let eps = 0.2;
        let proc = LayeredProcess::bit_flips(&(0..4).collect(), eps).unwrap();
        let q = apply_process(&p, &proc, Budget::default()).unwrap();
        let mut oracle = [0.0; 16];
        for x in 0..16usize {
            for (y, o) in oracle.iter_mut().enumerate() {
                let flips = (x ^ y).count_ones() as i32;
                *o += p.probs()[x] * eps.powi(flips) * (1.0 - eps).powi(4 - flips);
            }
        }
        for (a, b) in q.probs().iter().zip(oracle) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn pinning_gap_is_log_odds() {
        let m = ising_chain(3, false, 0.0);
        let ch = LocalChannel::bit_flip(1, 0.1).unwrap();
        let p = pin_single_site(&m, &[ch], &[0]).unwrap();
        assert_abs_diff_eq!(p.p_min(), 9f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn identity_channel_is_a_hard_pin() {
        let m = ising_chain(4, false, 0.8);
        let chans = vec![
            LocalChannel::identity(vec![1], vec![2]).unwrap(),
            LocalChannel::identity(vec![2], vec![2]).unwrap(),
        ];
        let pinned = pin_single_site(&m, &chans, &[1, 0]).unwrap();
        let post = pinned.exact_distribution(Budget::default()).unwrap();
        let clean = m.exact_distribution(Budget::default()).unwrap();
        let oracle = clean.conditional(&[1, 2].into(), &[1, 0]).unwrap();
        let got = post.conditional(&[1, 2].into(), &[1, 0]).unwrap();
        assert!(got.tv_distance(&oracle).unwrap() < 1e-14);
        assert_abs_diff_eq!(
            post.marginal(&[1, 2].into()).unwrap().prob(&[1, 0]),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn identity_process_pins_b_in_spacetime() {
        let m = ising_chain(4, false, 0.6);
        let layer = vec![LocalChannel::identity(vec![1, 2], vec![2, 2]).unwrap()];
        let proc = LayeredProcess::new(vec![layer]).unwrap();
        let st = spacetime_model(&m, &proc, &[1, 2].into(), &[0, 1]).unwrap();
        let post = st.posterior(Budget::default()).unwrap();
        let clean = m.exact_distribution(Budget::default()).unwrap();
        let oracle = clean.conditional(&[1, 2].into(), &[0, 1]).unwrap();
        let t0: Region = (0..4).map(|i| st.var(i, 0).unwrap()).collect();
        let slice = post.marginal(&t0).unwrap();
        let got = slice.conditional(&[1, 2].into(), &[0, 1]).unwrap();
        assert!(got.tv_distance(&oracle).unwrap() < 1e-14);
        let blocked = block_spins(&st).unwrap();
        for k in 0..blocked.pinned().n_pinning() {
            if blocked.pinned().pinning_fully_in_b(k) {
                let t = blocked.pinned().pinning_table(k);
                assert_eq!(t[0], 0.0);
                assert!(t[1..].iter().all(|e| e.is_infinite()));
            }
        }
    }

    #[test]
    fn zero_likelihood_observation() {
        let m = ising_chain(2, false, 1.0);
        let ch = LocalChannel::new(vec![0], vec![2], vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            pin_single_site(&m, &[ch], &[1]),
            Err(Error::ZeroLikelihood)
        ));
    }
}
