//! Builtin commuting Pauli models.

use super::hamiltonian::{PauliTerm, StabilizerHamiltonian};
use super::pauli::PauliOperator;
use crate::error::{Error, Result};

/// Qubit index of the horizontal edge leaving vertex `(r, c)` of an `l × l`
/// torus; the vertical edge is the next index.
pub fn toric_edge(l: usize, r: usize, c: usize, vertical: bool) -> usize {
    2 * ((r % l) * l + (c % l)) + vertical as usize
}

/// Toric code on an `l × l` torus, `2l²` qubits:
/// `H = −J Σ_v A_v − J Σ_p B_p` with star `A_v = Π X` and plaquette
/// `B_p = Π Z`. Stars come first, then plaquettes.
pub fn toric_patch(l: usize, coupling: f64) -> Result<StabilizerHamiltonian> {
    if l < 2 {
        return Err(Error::InvalidModel("toric patch needs l ≥ 2".into()));
    }
    let n = 2 * l * l;
    let mut terms = Vec::new();
    for r in 0..l {
        for c in 0..l {
            let star = [
                toric_edge(l, r, c, false),
                toric_edge(l, r, c + l - 1, false),
                toric_edge(l, r, c, true),
                toric_edge(l, r + l - 1, c, true),
            ];
            let f: Vec<(usize, char, usize)> = star.iter().map(|&e| (e, 'X', 1)).collect();
            terms.push(PauliTerm::new(
                -coupling,
                PauliOperator::from_letters(n, 2, &f)?,
            ));
        }
    }
    for r in 0..l {
        for c in 0..l {
            let plaq = [
                toric_edge(l, r, c, false),
                toric_edge(l, r + 1, c, false),
                toric_edge(l, r, c, true),
                toric_edge(l, r, c + 1, true),
            ];
            let f: Vec<(usize, char, usize)> = plaq.iter().map(|&e| (e, 'Z', 1)).collect();
            terms.push(PauliTerm::new(
                -coupling,
                PauliOperator::from_letters(n, 2, &f)?,
            ));
        }
    }
    StabilizerHamiltonian::new(n, 2, terms)
}

/// Open cluster chain `H = −J Σ_i Z_{i−1} X_i Z_{i+1}` on `n ≥ 2` qubits.
pub fn cluster_chain(n: usize, coupling: f64) -> Result<StabilizerHamiltonian> {
    if n < 2 {
        return Err(Error::InvalidModel("cluster chain needs n ≥ 2".into()));
    }
    let terms = (0..n)
        .map(|i| {
            let mut f = vec![(i, 'X', 1)];
            if i > 0 {
                f.insert(0, (i - 1, 'Z', 1));
            }
            if i + 1 < n {
                f.push((i + 1, 'Z', 1));
            }
            Ok(PauliTerm::new(
                -coupling,
                PauliOperator::from_letters(n, 2, &f)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    StabilizerHamiltonian::new(n, 2, terms)
}

/// Classical Ising chain `H = −J Σ Z_i Z_{i+1}` with single-site `Z`
/// generators, so labels are the spin values.
pub fn classical_ising_chain(
    n: usize,
    periodic: bool,
    coupling: f64,
) -> Result<StabilizerHamiltonian> {
    let bonds = if periodic && n >= 3 {
        n
    } else {
        n.saturating_sub(1)
    };
    let terms = (0..bonds)
        .map(|i| {
            let f = [(i, 'Z', 1), ((i + 1) % n, 'Z', 1)];
            Ok(PauliTerm::new(
                -coupling,
                PauliOperator::from_letters(n, 2, &f)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let gens = (0..n)
        .map(|i| PauliOperator::from_letters(n, 2, &[(i, 'Z', 1)]))
        .collect::<Result<Vec<_>>>()?;
    StabilizerHamiltonian::with_generators(n, 2, terms, gens)
}
