//! Built-in classical models.

use crate::gibbs::GibbsModel;
use crate::graph::Hypergraph;

/// `−s_i s_j` with `s = 1 − 2x`, indexed by `(x_i, x_j)`.
pub const ISING_BOND: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];

/// Ferromagnetic Ising chain on `n` bits.
pub fn ising_chain(n: usize, periodic: bool, beta: f64) -> GibbsModel {
    let g = if periodic && n >= 3 {
        Hypergraph::cycle(n, 2)
    } else {
        Hypergraph::path(n, 2)
    };
    GibbsModel::uniform_terms(g, beta, ISING_BOND.to_vec()).expect("Ising tables are valid")
}

/// Ferromagnetic Ising model on a `rows × cols` grid, vertex `r * cols + c`.
pub fn ising_grid(rows: usize, cols: usize, periodic: bool, beta: f64) -> GibbsModel {
    let g = Hypergraph::grid(rows, cols, 2, periodic);
    GibbsModel::uniform_terms(g, beta, ISING_BOND.to_vec()).expect("Ising tables are valid")
}
