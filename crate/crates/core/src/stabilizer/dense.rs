//! Dense density matrices and Kraus channels for small qudit systems. This is
//! a verification path; scalable work goes through the label distribution.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::hamiltonian::StabilizerHamiltonian;
use super::pauli::{phase_value, PauliOperator};
use crate::error::{Error, Result};
use crate::graph::{Region, Tripartition};
use crate::space::StateSpace;

pub type CMatrix = DMatrix<Complex64>;

/// Largest Hilbert-space dimension handled densely (ten qubits).
pub const DENSE_MAX_DIM: usize = 1 << 10;

const TOL: f64 = 1e-10;

fn check_dense(n: usize, q: usize) -> Result<usize> {
    let bits = n as f64 * (q as f64).log2();
    if bits > (DENSE_MAX_DIM as f64).log2() + 1e-9 {
        return Err(Error::BudgetExceeded {
            bits,
            budget: DENSE_MAX_DIM.trailing_zeros(),
        });
    }
    Ok(q.pow(n as u32))
}

/// Hermitian eigenvalues in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `‖M‖_1` for Hermitian `M`.
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// A density matrix on `n` qudits of dimension `q`, basis index row-major
/// with site 0 most significant.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    q: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within 1e−10.
    pub fn new(n: usize, q: usize, mat: CMatrix) -> Result<Self> {
        let d = check_dense(n, q)?;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::InvalidModel(format!(
                "density matrix must be {d}×{d}"
            )));
        }
        let herm = (&mat - mat.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if herm > TOL {
            return Err(Error::InvalidModel(format!(
                "matrix is not Hermitian ({herm:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::InvalidModel(format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&mat)[0];
        if min < -TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityMatrix { n, q, mat })
    }

    fn unchecked(n: usize, q: usize, mat: CMatrix) -> Self {
        DensityMatrix { n, q, mat }
    }

    /// `ρ_β = e^{−βH}/Tr e^{−βH}` from a dense eigendecomposition of `H`.
    pub fn gibbs(h: &StabilizerHamiltonian, beta: f64) -> Result<Self> {
        check_dense(h.n(), h.q())?;
        let hm = dense_hamiltonian(h);
        let eig = SymmetricEigen::new(hm);
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&e| (-beta * (e - min)).exp())
            .collect();
        let z: f64 = w.iter().sum();
        let v = &eig.eigenvectors;
        let mut scaled = v.clone();
        for (j, &wj) in w.iter().enumerate() {
            scaled.column_mut(j).scale_mut(wj / z);
        }
        let mut mat = scaled * v.adjoint();
        symmetrize(&mut mat);
        Ok(Self::unchecked(h.n(), h.q(), mat))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// `S(ρ) = −Tr ρ ln ρ` in nats.
    pub fn entropy(&self) -> Result<f64> {
        von_neumann(&self.mat)
    }

    /// Reduced state on `keep`, relabeled `0..|keep|` in site order.
    pub fn partial_trace(&self, keep: &Region) -> Result<Self> {
        if keep.iter().any(|v| v >= self.n) {
            return Err(Error::InvalidRegion(format!(
                "region {keep:?} exceeds {} sites",
                self.n
            )));
        }
        let traced: Vec<usize> = (0..self.n).filter(|v| !keep.contains(*v)).collect();
        let full = StateSpace::new(vec![self.q; self.n]);
        let offsets = |sites: &[usize]| -> Vec<usize> {
            let sp = StateSpace::new(vec![self.q; sites.len()]);
            sp.configs()
                .map(|cfg| {
                    cfg.iter()
                        .zip(sites)
                        .map(|(&d, &v)| d * full.strides()[v])
                        .sum()
                })
                .collect()
        };
        let ko = offsets(keep.sites());
        let to = offsets(&traced);
        let dk = ko.len();
        let mut out = CMatrix::zeros(dk, dk);
        for j in 0..dk {
            for i in 0..dk {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &to {
                    acc += self.mat[(ko[i] + t, ko[j] + t)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(Self::unchecked(keep.len(), self.q, out))
    }

    pub fn apply(&self, ch: &QuantumChannel) -> Result<Self> {
        if ch.q != self.q || ch.support.iter().any(|&v| v >= self.n) {
            return Err(Error::InvalidProcess(
                "channel does not fit the state".into(),
            ));
        }
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for k in &ch.kraus {
            out += conjugate_local(k, &ch.support, self.n, self.q, &self.mat);
        }
        symmetrize(&mut out);
        Ok(Self::unchecked(self.n, self.q, out))
    }
}

fn symmetrize(m: &mut CMatrix) {
    let h = (&*m + m.adjoint()) * Complex64::new(0.5, 0.0);
    *m = h;
}

pub fn von_neumann(m: &CMatrix) -> Result<f64> {
    let ev = hermitian_eigenvalues(m);
    if let Some(&min) = ev.first() {
        if min < -1e-9 {
            return Err(Error::NotPositive(min));
        }
    }
    Ok(ev
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.ln())
        .sum())
}

/// `I(A:C|B) = S(AB) + S(BC) − S(B) − S(ABC)` in nats.
pub fn quantum_cmi(rho: &DensityMatrix, t: &Tripartition) -> Result<f64> {
    let s = |r: &Region| -> Result<f64> {
        if r.is_empty() {
            return Ok(0.0);
        }
        rho.partial_trace(r)?.entropy()
    };
    let ab = t.a.union(&t.b);
    let bc = t.b.union(&t.c);
    let abc = ab.union(&t.c);
    Ok(s(&ab)? + s(&bc)? - s(&t.b)? - s(&abc)?)
}

/// Index bookkeeping for operators acting on a subset of sites.
struct LocalIndex {
    local: Vec<usize>,
    base: Vec<usize>,
    offsets: Vec<usize>,
}

fn local_index(support: &[usize], n: usize, q: usize) -> LocalIndex {
    let full = StateSpace::new(vec![q; n]);
    let loc = StateSpace::new(vec![q; support.len()]);
    let offsets: Vec<usize> = loc
        .configs()
        .map(|cfg| {
            cfg.iter()
                .zip(support)
                .map(|(&d, &v)| d * full.strides()[v])
                .sum()
        })
        .collect();
    let mut local = Vec::with_capacity(full.size());
    let mut base = Vec::with_capacity(full.size());
    for i in 0..full.size() {
        let l: usize = support
            .iter()
            .zip(loc.strides())
            .map(|(&v, &s)| (i / full.strides()[v]) % q * s)
            .sum();
        local.push(l);
        base.push(i - offsets[l]);
    }
    LocalIndex {
        local,
        base,
        offsets,
    }
}

/// `(K ⊗ I) M`.
fn left_local(k: &CMatrix, idx: &LocalIndex, m: &CMatrix) -> CMatrix {
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, m.ncols());
    for c in 0..m.ncols() {
        let col = m.column(c);
        for i in 0..d {
            let li = idx.local[i];
            let b = idx.base[i];
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, &off) in idx.offsets.iter().enumerate() {
                acc += k[(li, l)] * col[b + off];
            }
            out[(i, c)] = acc;
        }
    }
    out
}

/// `K M K†` with `K` acting on `support`.
pub fn conjugate_local(k: &CMatrix, support: &[usize], n: usize, q: usize, m: &CMatrix) -> CMatrix {
    let idx = local_index(support, n, q);
    let km = left_local(k, &idx, m);
    left_local(k, &idx, &km.adjoint()).adjoint()
}

/// A channel `ρ ↦ Σ_k K_k ρ K_k†` with Kraus operators on `support`.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    support: Vec<usize>,
    q: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(support: Vec<usize>, q: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if support.is_empty() || kraus.is_empty() {
            return Err(Error::InvalidProcess(
                "channel needs a support and Kraus operators".into(),
            ));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidProcess(
                "channel support repeats a site".into(),
            ));
        }
        let d = q.pow(support.len() as u32);
        if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::InvalidProcess(format!(
                "Kraus operators must be {d}×{d}"
            )));
        }
        let mut sum = CMatrix::zeros(d, d);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = (sum - CMatrix::identity(d, d))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if dev > TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(QuantumChannel { support, q, kraus })
    }

    pub fn identity(support: Vec<usize>, q: usize) -> Result<Self> {
        let d = q.pow(support.len() as u32);
        Self::new(support, q, vec![CMatrix::identity(d, d)])
    }

    /// Mixture of Pauli conjugations `ρ ↦ Σ_P w_P·PρP†` on `support`.
    pub fn pauli_mixture(
        support: Vec<usize>,
        q: usize,
        mix: &[(f64, PauliOperator)],
    ) -> Result<Self> {
        let kraus = mix
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, p)| p.dense() * Complex64::new(w.sqrt(), 0.0))
            .collect();
        Self::new(support, q, kraus)
    }

    /// `ρ ↦ (1−p)ρ + p·(I/q ⊗ Tr_site ρ)`.
    pub fn depolarizing(site: usize, q: usize, p: f64) -> Result<Self> {
        let q2 = (q * q) as f64;
        let mut mix = Vec::new();
        for a in 0..q {
            for b in 0..q {
                let w = if a == 0 && b == 0 {
                    1.0 - p + p / q2
                } else {
                    p / q2
                };
                mix.push((w, PauliOperator::new(q, vec![a], vec![b], 0)?));
            }
        }
        Self::pauli_mixture(vec![site], q, &mix)
    }

    /// `ρ ↦ (1−p)ρ + p·ZρZ†` on one site.
    pub fn dephasing(site: usize, q: usize, p: f64) -> Result<Self> {
        let z = PauliOperator::new(q, vec![0], vec![1], 0)?;
        Self::pauli_mixture(
            vec![site],
            q,
            &[(1.0 - p, PauliOperator::identity(1, q)?), (p, z)],
        )
    }

    /// `ρ ↦ (1−p)ρ + p·XρX†` on one site.
    pub fn bit_flip(site: usize, q: usize, p: f64) -> Result<Self> {
        let x = PauliOperator::new(q, vec![1], vec![0], 0)?;
        Self::pauli_mixture(
            vec![site],
            q,
            &[(1.0 - p, PauliOperator::identity(1, q)?), (p, x)],
        )
    }

    /// Qubit amplitude damping toward `|0⟩` with strength `gamma`.
    pub fn amplitude_damping(site: usize, gamma: f64) -> Result<Self> {
        let c = |v: f64| Complex64::new(v, 0.0);
        let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]);
        let k1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
        Self::new(vec![site], 2, vec![k0, k1])
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `E(M)` for an arbitrary operator `M` on `n` sites.
    pub fn apply_operator(&self, n: usize, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        for k in &self.kraus {
            out += conjugate_local(k, &self.support, n, self.q, m);
        }
        out
    }
}

/// Dense `H = Σ_a J_a (P_a + P_a†)/2`.
pub fn dense_hamiltonian(h: &StabilizerHamiltonian) -> CMatrix {
    let d = h.q().pow(h.n() as u32);
    let mut m = CMatrix::zeros(d, d);
    for t in h.terms() {
        let p = t.operator.dense();
        m += (&p + p.adjoint()) * Complex64::new(t.coefficient / 2.0, 0.0);
    }
    m
}

/// `Π_{b,s} = (1/q) Σ_k ω^{−ks} G_b^k`.
pub fn generator_projector(h: &StabilizerHamiltonian, b: usize, s: usize) -> CMatrix {
    let q = h.q();
    let g = &h.generators()[b];
    let d = q.pow(h.n() as u32);
    let mut m = CMatrix::zeros(d, d);
    for k in 0..q {
        let w = phase_value(2 * ((q - k * s % q) % q), q) / q as f64;
        m += g.pow(k).dense() * w;
    }
    m
}

/// `Π_s = Π_b Π_{b,s_b}`, built factor by factor.
pub fn projector(h: &StabilizerHamiltonian, s: &[usize]) -> Result<CMatrix> {
    check_dense(h.n(), h.q())?;
    if s.len() != h.n_generators() {
        return Err(Error::ConfigurationLength {
            expected: h.n_generators(),
            got: s.len(),
        });
    }
    let q = h.q();
    let d = q.pow(h.n() as u32);
    let mut m = CMatrix::identity(d, d);
    for (b, &sb) in s.iter().enumerate() {
        let g = &h.generators()[b];
        let mut next = CMatrix::zeros(d, d);
        for k in 0..q {
            let w = phase_value(2 * ((q - k * sb % q) % q), q) / q as f64;
            next += g.pow(k).monomial().left_mul(&m) * w;
        }
        m = next;
    }
    Ok(m)
}
