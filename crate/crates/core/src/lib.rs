//! Tree-child phylogenetic networks and cherry-picking sequences.
//!
//! Networks are rooted DAGs with labelled leaves. A tree-child sequence is a
//! list of leaf pairs that reduces a set of networks to a single leaf; its
//! weight equals the reticulation number of the network built from it. The
//! [`solver`] finds a minimum-weight sequence for a set of tree-child
//! networks, which yields a tree-child network displaying all of them with as
//! few reticulations as possible.

pub mod cli;
pub mod enewick;
pub mod generate;
pub mod network;
pub mod oracle;
pub mod sequence;
pub mod solver;
pub mod taxon;

pub use enewick::{parse_document, parse_enewick, write_enewick, ParseError};
pub use network::{Network, NetworkError, NodeId, NodeKind, PairKind, ReduciblePair};
pub use sequence::{PartialTcs, SequenceError, TcSequence};
pub use solver::{solve, Instance, SolveError, SolveResult, SolverOptions};
pub use taxon::{Pair, Taxon};
