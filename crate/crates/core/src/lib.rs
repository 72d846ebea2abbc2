//! Exact, enumerable versions of the objects used to bound the Markov length
//! of noisy Gibbs states: conditional mutual information, pinned models,
//! polymer expansions, stabilizer distributions and local recovery maps.

pub mod distribution;
pub mod error;
pub mod gibbs;
pub mod graph;
pub mod models;
pub mod noise;
pub mod pinned;
pub mod polymer;
pub mod recovery;
pub mod space;
pub mod stabilizer;

pub use distribution::DiscreteDistribution;
pub use error::{Error, Result};
pub use gibbs::GibbsModel;
pub use graph::{annulus_tripartition, separates, Hypergraph, Region, Tripartition};
pub use noise::{LayeredProcess, LocalChannel};
pub use pinned::{PinnedModel, PinningTerm};
pub use space::Budget;
