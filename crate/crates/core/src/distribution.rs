//! Explicit probability tables and exact information measures.

use crate::error::{Error, Result};
use crate::graph::{Region, Tripartition};
use crate::space::{ordered_sum, StateSpace};

/// Entries below this are treated as exact zeros in entropy sums.
pub const PROB_FLOOR: f64 = 1e-300;

const NORMALIZATION_TOL: f64 = 1e-10;

/// A probability table over the joint configurations of an ordered list of
/// variables, encoded row-major with the first variable most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    variables: Vec<usize>,
    space: StateSpace,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Wraps an already normalized table, checking the normalization.
    pub fn new(variables: Vec<usize>, dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let total = ordered_sum(&probs);
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidModel(format!("probabilities sum to {total}")));
        }
        Self::from_weights(variables, dims, probs)
    }

    /// Normalizes a table of nonnegative weights.
    pub fn from_weights(
        variables: Vec<usize>,
        dims: Vec<usize>,
        mut weights: Vec<f64>,
    ) -> Result<Self> {
        if variables.len() != dims.len() {
            return Err(Error::InvalidModel(format!(
                "{} variables but {} dimensions",
                variables.len(),
                dims.len()
            )));
        }
        let mut sorted = variables.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel("repeated variable".into()));
        }
        let space = StateSpace::new(dims);
        if weights.len() != space.size() {
            return Err(Error::InvalidModel(format!(
                "table has {} entries, expected {}",
                weights.len(),
                space.size()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidModel(format!(
                "invalid probability weight {w}"
            )));
        }
        let total = ordered_sum(&weights);
        if total <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(DiscreteDistribution {
            variables,
            space,
            probs: weights,
        })
    }

    pub fn point_mass(variables: Vec<usize>, dims: Vec<usize>, config: &[usize]) -> Result<Self> {
        let space = StateSpace::new(dims.clone());
        let mut probs = vec![0.0; space.size()];
        probs[space.encode(config)] = 1.0;
        Self::from_weights(variables, dims, probs)
    }

    pub fn uniform(variables: Vec<usize>, dims: Vec<usize>) -> Result<Self> {
        let size = StateSpace::new(dims.clone()).size();
        Self::from_weights(variables, dims, vec![1.0; size])
    }

    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    pub fn dims(&self) -> &[usize] {
        self.space.dims()
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, config: &[usize]) -> f64 {
        self.probs[self.space.encode(config)]
    }

    /// Positions of the region's sites within the variable list, in the
    /// region's sorted order.
    pub fn positions(&self, r: &Region) -> Result<Vec<usize>> {
        r.iter()
            .map(|v| {
                self.variables.iter().position(|&u| u == v).ok_or_else(|| {
                    Error::InvalidRegion(format!("variable {v} is not in the distribution"))
                })
            })
            .collect()
    }

    pub fn variable_region(&self) -> Region {
        Region::new(self.variables.iter().copied())
    }

    /// Marginal table over the concatenation of the given position lists.
    fn project(&self, positions: &[usize]) -> Vec<f64> {
        let dims = self.space.dims();
        let k = dims.len();
        let mut tstride = vec![0usize; k];
        let mut size = 1usize;
        for &p in positions.iter().rev() {
            tstride[p] = size;
            size *= dims[p];
        }
        let mut out = vec![0.0; size];
        if k == 0 {
            out[0] = self.probs[0];
            return out;
        }
        let mut digits = vec![0usize; k];
        let mut t = 0usize;
        for &p in &self.probs {
            out[t] += p;
            let mut pos = k;
            while pos > 0 {
                pos -= 1;
                digits[pos] += 1;
                t += tstride[pos];
                if digits[pos] < dims[pos] {
                    break;
                }
                t -= tstride[pos] * dims[pos];
                digits[pos] = 0;
            }
        }
        out
    }

    fn sub_dims(&self, positions: &[usize]) -> Vec<usize> {
        positions.iter().map(|&p| self.space.dims()[p]).collect()
    }

    /// Sums out every variable not in `r`. The result keeps `r` in sorted
    /// order.
    pub fn marginal(&self, r: &Region) -> Result<Self> {
        let pos = self.positions(r)?;
        let probs = self.project(&pos);
        Self::from_weights(r.sites().to_vec(), self.sub_dims(&pos), probs)
    }

    /// Distribution of the remaining variables given `cond = assignment`,
    /// where `assignment` lists values in the sorted order of `cond`.
    pub fn conditional(&self, cond: &Region, assignment: &[usize]) -> Result<Self> {
        if assignment.len() != cond.len() {
            return Err(Error::ConfigurationLength {
                expected: cond.len(),
                got: assignment.len(),
            });
        }
        let cpos = self.positions(cond)?;
        for (&p, &a) in cpos.iter().zip(assignment) {
            if a >= self.space.dims()[p] {
                return Err(Error::InvalidRegion(format!("value {a} out of range")));
            }
        }
        let rest: Vec<usize> = (0..self.variables.len())
            .filter(|p| !cpos.contains(p))
            .collect();
        let mut order = cpos.clone();
        order.extend(&rest);
        let table = self.project(&order);
        let rest_dims = self.sub_dims(&rest);
        let block: usize = rest_dims.iter().product();
        let cidx = StateSpace::new(self.sub_dims(&cpos)).encode(assignment);
        let slab = table[cidx * block..(cidx + 1) * block].to_vec();
        if ordered_sum(&slab) <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        let vars = rest.iter().map(|&p| self.variables[p]).collect();
        Self::from_weights(vars, rest_dims, slab)
    }

    /// Reorders or renames variables: `variables[k]` becomes `new_names[k]`.
    pub fn rename(&self, new_names: Vec<usize>) -> Result<Self> {
        Self::from_weights(new_names, self.space.dims().to_vec(), self.probs.clone())
    }

    /// Permutes the variable order so that variables appear in `order`.
    pub fn reorder(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.variables.len() {
            return Err(Error::InvalidRegion("reorder needs every variable".into()));
        }
        let pos: Vec<usize> = order
            .iter()
            .map(|v| {
                self.variables
                    .iter()
                    .position(|u| u == v)
                    .ok_or_else(|| Error::InvalidRegion(format!("variable {v} missing")))
            })
            .collect::<Result<_>>()?;
        let probs = self.project(&pos);
        Self::from_weights(order.to_vec(), self.sub_dims(&pos), probs)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    pub fn mutual_information(&self, a: &Region, c: &Region) -> Result<f64> {
        if !a.is_disjoint(c) {
            return Err(Error::Overlap(
                "mutual information regions intersect".into(),
            ));
        }
        self.cmi_regions(a, &Region::empty(), c)
    }

    pub fn cmi(&self, t: &Tripartition) -> Result<f64> {
        self.cmi_regions(&t.a, &t.b, &t.c)
    }

    /// I(A:C|B) = S(AB) + S(BC) − S(B) − S(ABC). Agrees with
    /// [`Self::cmi_regions`] but loses absolute accuracy to cancellation
    /// between large entropies.
    pub fn cmi_entropic(&self, a: &Region, b: &Region, c: &Region) -> Result<f64> {
        let t = self.tripartite(a, b, c)?;
        let hb = entropy_of(&t.sum_over(true, false, true));
        let hab = entropy_of(&t.sum_over(false, false, true));
        let hbc = entropy_of(&t.sum_over(true, false, false));
        let habc = entropy_of(&t.table);
        Ok(hab + hbc - hb - habc)
    }

    /// I(A:C|B) as Σ_b P(b)·I(A:C | B=b), skipping zero-probability
    /// branches. Exactly conditionally independent slabs contribute only
    /// rounding-level terms.
    pub fn cmi_regions(&self, a: &Region, b: &Region, c: &Region) -> Result<f64> {
        let t = self.tripartite(a, b, c)?;
        let block = t.na * t.nc;
        let mut terms = Vec::with_capacity(t.nb);
        for ib in 0..t.nb {
            let slab = &t.table[ib * block..(ib + 1) * block];
            let pb: f64 = slab.iter().sum();
            if pb <= PROB_FLOOR {
                continue;
            }
            terms.push(pb * mi_of_matrix(slab, t.na, t.nc, pb));
        }
        Ok(terms.iter().sum())
    }

    fn tripartite(&self, a: &Region, b: &Region, c: &Region) -> Result<Tripartite> {
        if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
            return Err(Error::Overlap("tripartition regions intersect".into()));
        }
        let pa = self.positions(a)?;
        let pb = self.positions(b)?;
        let pc = self.positions(c)?;
        let mut order = pb.clone();
        order.extend(&pa);
        order.extend(&pc);
        let table = self.project(&order);
        let size = |p: &[usize]| self.sub_dims(p).iter().product::<usize>();
        Ok(Tripartite {
            nb: size(&pb),
            na: size(&pa),
            nc: size(&pc),
            table,
        })
    }

    /// Total variation distance ½Σ|p−q|; both tables must share the layout.
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        if self.variables != other.variables || self.space.dims() != other.space.dims() {
            return Err(Error::InvalidModel(
                "distributions have different variables".into(),
            ));
        }
        Ok(tv(&self.probs, &other.probs))
    }
}

/// ½Σ|p−q|.
pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    let diffs: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a - b).abs()).collect();
    0.5 * ordered_sum(&diffs)
}

pub fn entropy_of(p: &[f64]) -> f64 {
    let terms: Vec<f64> = p
        .iter()
        .map(|&x| if x > PROB_FLOOR { -x * x.ln() } else { 0.0 })
        .collect();
    ordered_sum(&terms)
}

/// Mutual information of a row-major `na × nc` joint table with total mass
/// `total`.
fn mi_of_matrix(m: &[f64], na: usize, nc: usize, total: f64) -> f64 {
    let mut pa = vec![0.0; na];
    let mut pc = vec![0.0; nc];
    for i in 0..na {
        for j in 0..nc {
            let v = m[i * nc + j] / total;
            pa[i] += v;
            pc[j] += v;
        }
    }
    let mut s = 0.0;
    for i in 0..na {
        for j in 0..nc {
            let v = m[i * nc + j] / total;
            if v > PROB_FLOOR {
                s += v * (v / (pa[i] * pc[j])).ln();
            }
        }
    }
    s
}

struct Tripartite {
    nb: usize,
    na: usize,
    nc: usize,
    table: Vec<f64>,
}

impl Tripartite {
    fn sum_over(&self, sum_a: bool, sum_b: bool, sum_c: bool) -> Vec<f64> {
        let (ob, oa, oc) = (
            if sum_b { 1 } else { self.nb },
            if sum_a { 1 } else { self.na },
            if sum_c { 1 } else { self.nc },
        );
        let mut out = vec![0.0; ob * oa * oc];
        for ib in 0..self.nb {
            for ia in 0..self.na {
                for ic in 0..self.nc {
                    let v = self.table[(ib * self.na + ia) * self.nc + ic];
                    let jb = if sum_b { 0 } else { ib };
                    let ja = if sum_a { 0 } else { ia };
                    let jc = if sum_c { 0 } else { ic };
                    out[(jb * oa + ja) * oc + jc] += v;
                }
            }
        }
        out
    }
}
