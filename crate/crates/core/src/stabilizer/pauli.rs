//! Generalized Pauli operators on `n` qudits of prime dimension `q`.
//!
//! An operator is `e^{iπ·phase/q} · Π_j X_j^{x_j} Z_j^{z_j}` with
//! `X|j⟩ = |j+1 mod q⟩` and `Z|j⟩ = ω^j|j⟩`, `ω = e^{2πi/q}`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn is_prime(q: usize) -> bool {
    q >= 2
        && (2..)
            .take_while(|d| d * d <= q)
            .all(|d| !q.is_multiple_of(d))
}

/// `e^{iπ k / q}`.
pub fn phase_value(k: usize, q: usize) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / q as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    q: usize,
    x: Vec<usize>,
    z: Vec<usize>,
    phase: usize,
}

/// Action of an operator on the computational basis: `P|j⟩ = coef[j]·|perm[j]⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub perm: Vec<usize>,
    pub coef: Vec<Complex64>,
}

impl PauliOperator {
    pub fn new(q: usize, x: Vec<usize>, z: Vec<usize>, phase: usize) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::InvalidPauli(format!(
                "local dimension {q} is not prime"
            )));
        }
        if x.len() != z.len() {
            return Err(Error::InvalidPauli(
                "x and z exponent lengths differ".into(),
            ));
        }
        Ok(PauliOperator {
            x: x.into_iter().map(|e| e % q).collect(),
            z: z.into_iter().map(|e| e % q).collect(),
            phase: phase % (2 * q),
            q,
        })
    }

    pub fn identity(n: usize, q: usize) -> Result<Self> {
        Self::new(q, vec![0; n], vec![0; n], 0)
    }

    /// Product of single-site factors `(site, letter, power)` in the given
    /// order. Letters are `I`, `X`, `Z`, and `Y` (qubits only, `Y = iXZ`).
    pub fn from_letters(n: usize, q: usize, factors: &[(usize, char, usize)]) -> Result<Self> {
        let mut p = Self::identity(n, q)?;
        for &(site, letter, power) in factors {
            if site >= n {
                return Err(Error::InvalidPauli(format!(
                    "site {site} out of range for n = {n}"
                )));
            }
            let mut x = vec![0; n];
            let mut z = vec![0; n];
            let mut phase = 0;
            match letter.to_ascii_uppercase() {
                'I' => {}
                'X' => x[site] = 1,
                'Z' => z[site] = 1,
                'Y' if q == 2 => {
                    x[site] = 1;
                    z[site] = 1;
                    phase = 1;
                }
                'Y' => return Err(Error::InvalidPauli("Y is only defined for qubits".into())),
                other => {
                    return Err(Error::InvalidPauli(format!(
                        "unknown Pauli letter {other:?}"
                    )))
                }
            }
            let f = Self::new(q, x, z, phase)?.pow(power);
            p = p.mul(&f)?;
        }
        Ok(p)
    }

    /// Parses whitespace-separated `site:LETTER` or `site:LETTER^power`
    /// entries, e.g. `"0:X 1:X 4:Z^2"`.
    pub fn parse(n: usize, q: usize, text: &str) -> Result<Self> {
        let mut factors = Vec::new();
        for tok in text.split_whitespace() {
            let bad = || Error::InvalidPauli(format!("cannot parse Pauli factor {tok:?}"));
            let (site, rest) = tok.split_once(':').ok_or_else(bad)?;
            let site: usize = site.trim().parse().map_err(|_| bad())?;
            let (letter, power) = match rest.split_once('^') {
                Some((l, p)) => (l, p.parse::<usize>().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let mut chars = letter.chars();
            let c = chars.next().ok_or_else(bad)?;
            if chars.next().is_some() {
                return Err(bad());
            }
            factors.push((site, c, power));
        }
        Self::from_letters(n, q, &factors)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn z(&self) -> &[usize] {
        &self.z
    }

    /// Phase exponent in units of `π/q`, in `0..2q`.
    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn phase_factor(&self) -> Complex64 {
        phase_value(self.phase, self.q)
    }

    pub fn with_phase(&self, phase: usize) -> Self {
        PauliOperator {
            phase: phase % (2 * self.q),
            ..self.clone()
        }
    }

    /// Sites where the operator acts nontrivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.x[i] != 0 || self.z[i] != 0)
            .collect()
    }

    /// Identity up to a phase.
    pub fn is_scalar(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&e| e == 0)
    }

    /// `(x | z)` as one vector of length `2n`.
    pub fn symplectic_vector(&self) -> Vec<usize> {
        self.x.iter().chain(&self.z).copied().collect()
    }

    /// `⟨P, Q⟩ = Σ z_P·x_Q − x_P·z_Q mod q`, so that `PQ = ω^{⟨P,Q⟩} QP`.
    pub fn symplectic(&self, other: &Self) -> usize {
        let q = self.q;
        let mut s = 0;
        for i in 0..self.n() {
            s += self.z[i] * other.x[i] % q;
            s += q - self.x[i] * other.z[i] % q;
        }
        s % q
    }

    pub fn commutes(&self, other: &Self) -> bool {
        self.symplectic(other) == 0
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.q != other.q || self.n() != other.n() {
            return Err(Error::InvalidPauli(
                "operators act on different systems".into(),
            ));
        }
        Ok(())
    }

    /// `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let q = self.q;
        // Z^b X^c = ω^{bc} X^c Z^b
        let swap: usize = self
            .z
            .iter()
            .zip(&other.x)
            .map(|(b, c)| b * c % q)
            .sum::<usize>()
            % q;
        Ok(PauliOperator {
            x: self
                .x
                .iter()
                .zip(&other.x)
                .map(|(a, b)| (a + b) % q)
                .collect(),
            z: self
                .z
                .iter()
                .zip(&other.z)
                .map(|(a, b)| (a + b) % q)
                .collect(),
            phase: (self.phase + other.phase + 2 * swap) % (2 * q),
            q,
        })
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = PauliOperator {
            x: vec![0; self.n()],
            z: vec![0; self.n()],
            phase: 0,
            q: self.q,
        };
        for _ in 0..k {
            out = out.mul(self).expect("same system");
        }
        out
    }

    /// `P† = P^{-1}`.
    pub fn adjoint(&self) -> Self {
        let p = self.with_phase(0).pow(self.q - 1);
        // P^q = e^{iπ c/q} I for the phase-free part; P^{-1} = P^{q-1}·e^{-iπ c/q}
        let c = self.with_phase(0).pow(self.q).phase;
        let q2 = 2 * self.q;
        p.with_phase((p.phase + q2 - c + q2 - self.phase) % q2)
    }

    /// The same operator with the phase chosen so that `P^q = I`, which makes
    /// its eigenvalues exactly `ω^s`.
    pub fn canonical(&self) -> Self {
        let c = self.with_phase(0).pow(self.q).phase;
        let q2 = 2 * self.q;
        let p = (0..q2)
            .find(|&p| (p * self.q + c).is_multiple_of(q2))
            .expect("prime q admits a root");
        self.with_phase(p)
    }

    pub fn monomial(&self) -> Monomial {
        let n = self.n();
        let q = self.q;
        let dim = q.pow(n as u32);
        let mut perm = Vec::with_capacity(dim);
        let mut coef = Vec::with_capacity(dim);
        let mut digits = vec![0usize; n];
        let base = self.phase_factor();
        for _ in 0..dim {
            let mut target = 0;
            let mut zexp = 0;
            for ((&d, &x), &z) in digits.iter().zip(&self.x).zip(&self.z) {
                target = target * q + (d + x) % q;
                zexp += z * d;
            }
            perm.push(target);
            coef.push(base * phase_value(2 * (zexp % q), q));
            for i in (0..n).rev() {
                digits[i] += 1;
                if digits[i] < q {
                    break;
                }
                digits[i] = 0;
            }
        }
        Monomial { perm, coef }
    }

    pub fn dense(&self) -> nalgebra::DMatrix<Complex64> {
        self.monomial().dense()
    }
}

impl Monomial {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn dense(&self) -> nalgebra::DMatrix<Complex64> {
        let d = self.dim();
        let mut m = nalgebra::DMatrix::zeros(d, d);
        for (j, (&i, &c)) in self.perm.iter().zip(&self.coef).enumerate() {
            m[(i, j)] = c;
        }
        m
    }

    /// `Tr[M · P]`.
    pub fn trace_with(&self, m: &nalgebra::DMatrix<Complex64>) -> Complex64 {
        self.perm
            .iter()
            .zip(&self.coef)
            .enumerate()
            .map(|(j, (&i, &c))| m[(j, i)] * c)
            .sum()
    }

    /// `P · M`.
    pub fn left_mul(&self, m: &nalgebra::DMatrix<Complex64>) -> nalgebra::DMatrix<Complex64> {
        let mut out = nalgebra::DMatrix::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            for (j, (&i, &k)) in self.perm.iter().zip(&self.coef).enumerate() {
                out[(i, c)] = k * m[(j, c)];
            }
        }
        out
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for i in 0..self.n() {
            if self.x[i] != 0 {
                parts.push(format!("{i}:X^{}", self.x[i]));
            }
            if self.z[i] != 0 {
                parts.push(format!("{i}:Z^{}", self.z[i]));
            }
        }
        if parts.is_empty() {
            parts.push("I".into());
        }
        write!(f, "e^(iπ{}/{}) {}", self.phase, self.q, parts.join(" "))
    }
}
