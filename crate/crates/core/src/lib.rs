//! Overlapping community detection in bipartite and M-partite networks by
//! weighted symmetric binary matrix factorization (wSBMF), with a generalized
//! partition density for choosing the number of communities.
//!
//! ```no_run
//! use wsbmf::{detect, ingest, PriorConstraints, SolverConfig};
//!
//! let graph = ingest::women();
//! let result = detect(&graph, &PriorConstraints::empty(), &SolverConfig::with_communities(2)).unwrap();
//! println!("objective {} density {}", result.objective, result.density);
//! ```

pub mod bigraph;
pub mod cover;
pub mod density;
pub mod error;
pub mod experiment;
pub mod factorize;
pub mod ingest;
mod linalg;
pub mod metrics;
pub mod synth;

pub use bigraph::{BipartiteGraph, MultipartiteGraph, Part, PriorConstraints, UnipartiteGraph, WeightMask};
pub use cover::CommunityCover;
pub use error::{Error, Result};
pub use factorize::{detect, DetectionResult, SolverConfig};
