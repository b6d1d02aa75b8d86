//! Concurrent systems over trace monoids: normal forms, Möbius matrices,
//! digraphs of states and cliques, the uniform measure and its sampling.

pub mod dot;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod graphs;
pub mod measure;
pub mod monoid;
pub mod oracle;
pub mod petri;
pub mod poly;
pub mod sampling;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
pub use format::{parse_spec, render_spec};
pub use graphs::{
    build_adsc, build_dsc, classify_nodes, count_paths, Condensation, Digraph, GraphKind, Graphs, PathCounter, SCNode,
    StateCliqueGraph,
};
pub use measure::UniformMeasure;
pub use monoid::{Clique, Letter, NormalForm, TraceMonoid, MAX_LETTERS};
pub use petri::{parse_petri, SafePetriNet};
pub use poly::{Poly, SturmChain};
pub use spectral::{characteristic_root, mobius_matrix, CharacteristicRoot, PolyMatrix, RootBound};
pub use system::{ConcurrentSystem, LinkingExecution, State, SystemClassification};
