//! Stabilizer-mixing channels, the induced stochastic process on labels, and
//! the quantum versus classical CMI comparison.

use num_complex::Complex64;

use super::dense::{quantum_cmi, CMatrix, DensityMatrix, QuantumChannel};
use super::hamiltonian::{stabilizer_distribution, StabilizerHamiltonian};
use super::pauli::{phase_value, Monomial};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::graph::{Region, Tripartition};
use crate::noise::{apply_channel, LocalChannel};
use crate::space::{Budget, StateSpace};

const RESIDUAL_TOL: f64 = 1e-10;
const COEFF_TOL: f64 = 1e-12;

/// Fourier bookkeeping between label space `Z_q^m` and the stabilizer group:
/// `Π_s = q^{−m} Σ_j ω^{−j·s} G^j`.
pub struct LabelFourier {
    q: usize,
    m: usize,
    rank: f64,
    group: Vec<Monomial>,
}

impl LabelFourier {
    pub fn new(h: &StabilizerHamiltonian) -> Result<Self> {
        Budget::default().check(&vec![h.q(); h.n() + h.n_generators()])?;
        Ok(LabelFourier {
            q: h.q(),
            m: h.n_generators(),
            rank: h.rank(),
            group: h.group_monomials()?,
        })
    }

    pub fn n_labels(&self) -> usize {
        self.group.len()
    }

    /// `out[j] = Σ_s v[s] ω^{−j·s}`, one axis at a time.
    fn transform(&self, v: &[Complex64]) -> Vec<Complex64> {
        let q = self.q;
        let mut cur = v.to_vec();
        let mut stride = 1;
        for _ in 0..self.m {
            let mut next = vec![Complex64::new(0.0, 0.0); cur.len()];
            for (i, out) in next.iter_mut().enumerate() {
                let digit = (i / stride) % q;
                let base = i - digit * stride;
                for k in 0..q {
                    let w = phase_value(2 * ((q - digit * k % q) % q), q);
                    *out += w * cur[base + k * stride];
                }
            }
            cur = next;
            stride *= q;
        }
        cur
    }

    /// `Tr[M Π_s]` for every label `s`.
    pub fn projector_traces(&self, mat: &CMatrix) -> Vec<Complex64> {
        let t: Vec<Complex64> = self.group.iter().map(|g| g.trace_with(mat)).collect();
        let scale = 1.0 / self.group.len() as f64;
        self.transform(&t).into_iter().map(|c| c * scale).collect()
    }

    /// `Σ_s c_s Π_s`.
    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let v: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let chi = self.transform(&v);
        let d = self.group[0].dim();
        let scale = 1.0 / self.group.len() as f64;
        let mut out = CMatrix::zeros(d, d);
        for (g, &x) in self.group.iter().zip(&chi) {
            if x.norm() < 1e-300 {
                continue;
            }
            for (col, (&row, &c)) in g.perm.iter().zip(&g.coef).enumerate() {
                out[(row, col)] += x * c * scale;
            }
        }
        out
    }

    /// `Π_s` for a full label assignment.
    pub fn projector(&self, s: &[usize]) -> CMatrix {
        let space = StateSpace::new(vec![self.q; self.m]);
        let mut c = vec![0.0; space.size()];
        c[space.encode(s)] = 1.0;
        self.combine(&c)
    }

    /// `Σ_s P(s) Π_s / R`.
    pub fn mixture(&self, p: &DiscreteDistribution) -> Result<CMatrix> {
        if p.len() != self.group.len() {
            return Err(Error::ConfigurationLength {
                expected: self.group.len(),
                got: p.len(),
            });
        }
        let c: Vec<f64> = p.probs().iter().map(|&v| v / self.rank).collect();
        Ok(self.combine(&c))
    }
}

/// Expansion of `E(Π_s)` in the projector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorImage {
    /// `Tr[E(Π_s) Π_{s'}] / R` for every `s'`.
    pub coefficients: Vec<f64>,
    /// Frobenius norm of the part of `E(Π_s)` outside the span.
    pub residual: f64,
}

pub fn projector_image(
    fourier: &LabelFourier,
    h: &StabilizerHamiltonian,
    ch: &QuantumChannel,
    s: &[usize],
) -> ProjectorImage {
    let proj = fourier.projector(s);
    let image = ch.apply_operator(h.n(), &proj);
    let traces = fourier.projector_traces(&image);
    let coefficients: Vec<f64> = traces.iter().map(|t| t.re / fourier.rank).collect();
    let rebuilt = fourier.combine(&coefficients);
    let residual = (image - rebuilt).norm();
    ProjectorImage {
        coefficients,
        residual,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    /// Generators overlapping the channel support.
    pub labels: Vec<usize>,
    pub max_residual: f64,
    pub min_coefficient: f64,
}

impl MixingReport {
    pub fn holds(&self) -> bool {
        self.max_residual < RESIDUAL_TOL && self.min_coefficient >= -COEFF_TOL
    }
}

fn check_channel(ch: &QuantumChannel, h: &StabilizerHamiltonian) -> Result<()> {
    if ch.q() != h.q() || ch.support().iter().any(|&v| v >= h.n()) {
        return Err(Error::InvalidProcess(
            "channel does not act on the Hamiltonian's qudits".into(),
        ));
    }
    Ok(())
}

fn with_labels(m: usize, labels: &[usize], values: &[usize]) -> Vec<usize> {
    let mut s = vec![0; m];
    for (&b, &v) in labels.iter().zip(values) {
        s[b] = v;
    }
    s
}

/// Expands `E(Π_s)` for every assignment of the labels overlapping the
/// support, with all other labels at 0. Labels away from the support factor
/// out of `E(Π_s)` because the channel acts trivially on their qudits.
pub fn stabilizer_mixing_report(
    ch: &QuantumChannel,
    h: &StabilizerHamiltonian,
) -> Result<MixingReport> {
    check_channel(ch, h)?;
    let fourier = LabelFourier::new(h)?;
    let labels = h.generators_touching(ch.support());
    let local = StateSpace::new(vec![h.q(); labels.len()]);
    let mut max_residual = 0.0f64;
    let mut min_coefficient = f64::INFINITY;
    for cfg in local.configs() {
        let s = with_labels(h.n_generators(), &labels, &cfg);
        let img = projector_image(&fourier, h, ch, &s);
        max_residual = max_residual.max(img.residual);
        min_coefficient = img
            .coefficients
            .iter()
            .copied()
            .fold(min_coefficient, f64::min);
    }
    Ok(MixingReport {
        labels,
        max_residual,
        min_coefficient,
    })
}

pub fn is_stabilizer_mixing(ch: &QuantumChannel, h: &StabilizerHamiltonian) -> Result<bool> {
    Ok(stabilizer_mixing_report(ch, h)?.holds())
}

/// `𝒯(s'|s) = Tr[E(Π_s) Π_{s'}] / R` on the labels overlapping the support.
pub fn induced_classical_channel(
    ch: &QuantumChannel,
    h: &StabilizerHamiltonian,
) -> Result<LocalChannel> {
    check_channel(ch, h)?;
    let fourier = LabelFourier::new(h)?;
    let labels = h.generators_touching(ch.support());
    if labels.is_empty() {
        return Err(Error::Precondition(
            "no generator overlaps the channel support".into(),
        ));
    }
    let m = h.n_generators();
    let full = StateSpace::new(vec![h.q(); m]);
    let local = StateSpace::new(vec![h.q(); labels.len()]);
    let size = local.size();
    let mut matrix = vec![0.0; size * size];
    for (input, cfg) in local.configs().enumerate() {
        let s = with_labels(m, &labels, &cfg);
        let img = projector_image(&fourier, h, ch, &s);
        let min = img
            .coefficients
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if img.residual >= RESIDUAL_TOL || min < -COEFF_TOL {
            return Err(Error::NotStabilizerMixing(img.residual.max(-min)));
        }
        let mut stray = 0.0;
        for (idx, &c) in img.coefficients.iter().enumerate() {
            let out_cfg = full.decode(idx);
            let off_support = (0..m).any(|b| !labels.contains(&b) && out_cfg[b] != 0);
            if off_support {
                stray += c.abs();
            } else {
                let local_cfg: Vec<usize> = labels.iter().map(|&b| out_cfg[b]).collect();
                matrix[local.encode(&local_cfg) * size + input] = c.max(0.0);
            }
        }
        if stray > RESIDUAL_TOL {
            return Err(Error::NotStabilizerMixing(stray));
        }
    }
    LocalChannel::new(labels, vec![h.q(); local.dims().len()], matrix)
}

/// `Σ_s P(s) Π_s / R` as a dense matrix.
pub fn reconstruct_state(h: &StabilizerHamiltonian, p: &DiscreteDistribution) -> Result<CMatrix> {
    LabelFourier::new(h)?.mixture(p)
}

/// `Tr[Π_s ρ]` for every label.
pub fn label_probabilities(h: &StabilizerHamiltonian, rho: &DensityMatrix) -> Result<Vec<f64>> {
    let fourier = LabelFourier::new(h)?;
    Ok(fourier
        .projector_traces(rho.matrix())
        .iter()
        .map(|c| c.re)
        .collect())
}

/// Label sets for a qudit tripartition: generators inside A, straddling A
/// and B, inside B, straddling B and C, inside C.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRegions {
    pub a: Region,
    pub boundary_a: Region,
    pub b: Region,
    pub boundary_c: Region,
    pub c: Region,
}

impl LabelRegions {
    pub fn a_side(&self) -> Region {
        self.a.union(&self.boundary_a)
    }

    pub fn c_side(&self) -> Region {
        self.c.union(&self.boundary_c)
    }
}

pub fn label_regions(h: &StabilizerHamiltonian, t: &Tripartition) -> Result<LabelRegions> {
    let mut sets: [Vec<usize>; 5] = Default::default();
    for g in 0..h.n_generators() {
        let sup = h.generator_support(g);
        let in_a = !sup.is_disjoint(&t.a);
        let in_b = !sup.is_disjoint(&t.b);
        let in_c = !sup.is_disjoint(&t.c);
        let slot = match (in_a, in_b, in_c) {
            (true, _, true) => {
                return Err(Error::Precondition(format!(
                    "generator {g} straddles A and C"
                )))
            }
            (true, false, false) => 0,
            (true, true, false) => 1,
            (false, true, false) => 2,
            (false, true, true) => 3,
            (false, false, true) => 4,
            (false, false, false) => {
                return Err(Error::InvalidRegion(format!(
                    "generator {g} lies outside the tripartition"
                )))
            }
        };
        sets[slot].push(g);
    }
    let [a, boundary_a, b, boundary_c, c] = sets.map(Region::new);
    Ok(LabelRegions {
        a,
        boundary_a,
        b,
        boundary_c,
        c,
    })
}

/// `P'(s)`: the stabilizer distribution pushed through the induced channels
/// in order.
pub fn noisy_label_distribution(
    h: &StabilizerHamiltonian,
    beta: f64,
    channels: &[QuantumChannel],
    budget: Budget,
) -> Result<DiscreteDistribution> {
    let mut p = stabilizer_distribution(h, beta)?.exact_distribution(budget)?;
    for ch in channels {
        p = apply_channel(&p, &induced_classical_channel(ch, h)?)?;
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmiEquality {
    /// `I_ρ'(A:C|B)` from dense partial traces.
    pub quantum: f64,
    /// `I_P'(A∂A : C∂C | B)` on the noisy label distribution.
    pub classical: f64,
}

impl CmiEquality {
    pub fn difference(&self) -> f64 {
        (self.quantum - self.classical).abs()
    }
}

pub fn cmi_equality_check(
    h: &StabilizerHamiltonian,
    beta: f64,
    channels: &[QuantumChannel],
    t: &Tripartition,
    budget: Budget,
) -> Result<CmiEquality> {
    let regions = label_regions(h, t)?;
    let mut rho = DensityMatrix::gibbs(h, beta)?;
    for ch in channels {
        rho = rho.apply(ch)?;
    }
    let quantum = quantum_cmi(&rho, t)?;
    let p = noisy_label_distribution(h, beta, channels, budget)?;
    let classical = p.cmi_regions(&regions.a_side(), &regions.b, &regions.c_side())?;
    Ok(CmiEquality { quantum, classical })
}
