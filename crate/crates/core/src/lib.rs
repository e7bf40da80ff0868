//! Utility-optimal binary mechanisms under heterogeneous differential privacy.
//!
//! Datasets are vertices of an undirected graph and every edge carries its own
//! privacy budget. Given a binary query and a partial mechanism fixed on (at
//! least) the boundary of the query, this crate decides whether the partial
//! mechanism extends to a private mechanism on the whole graph and, when it
//! does, computes the unique extension that maximizes the probability of
//! answering truthfully at every vertex.
//!
//! The main entry points are [`extend_mechanism`], [`strongest_bounds_from`]
//! and the path closed forms in [`path`].
//!
//! ```
//! use dpgraph::{extend_mechanism, verify_dp, DatasetGraph, ExtendOptions, Label,
//!               PartialMechanism, QueryAssignment};
//!
//! let ln2 = std::f64::consts::LN_2;
//! let g = DatasetGraph::new(["v0", "v1", "v2"], [("v0", "v1", ln2), ("v1", "v2", ln2)])?;
//! let q = QueryAssignment::from_pairs(
//!     &g,
//!     [("v0", Label::One), ("v1", Label::One), ("v2", Label::Two)],
//! )?;
//! let p = PartialMechanism::from_pairs(&g, [("v1", 0.6), ("v2", 0.3)])?;
//!
//! let ext = extend_mechanism(&g, &q, &p, &ExtendOptions::default())?;
//! assert!((ext.mechanism.get(0).get() - 0.8).abs() < 1e-12);
//! assert!(verify_dp(&g, &ext.mechanism, 1e-9).is_ok());
//! # Ok::<(), dpgraph::Error>(())
//! ```

pub mod bounds;
pub mod error;
pub mod extend;
pub mod generate;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod path;
pub mod propagate;

pub use bounds::{Epsilon, EpsilonSeq, Probability};
pub use error::{Error, Result};
pub use extend::{
    extend_mechanism, is_compatible, verify_dp, verify_optimal, ExtendOptions, Extension,
    IncompatibilityWitness, Mechanism, PartialMechanism, Schedule, Violation, ViolationReport,
};
pub use graph::{boundary_set, neighborhood, DatasetGraph, Label, QueryAssignment, VertexSet};
pub use propagate::{strongest_bounds_from, strongest_bounds_multi, BoundMap, MultiBoundMap};

/// Additive slack used by every comparison of probabilities unless overridden.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
