//! Embedding edge-colorings of `K(a^(p); λ, μ)` into Hamiltonian
//! decompositions of `K(a^(p+r); λ, μ)`.
//!
//! The crate decides embeddability from the coloring's color-class
//! statistics and, when the conditions are known to be sufficient, builds the
//! decomposition by amalgamating the `ar` new vertices into a single hub,
//! coloring the hub's edges, and detaching it twice (first into `r` vertices,
//! then each of those into `a`).

pub mod amalgamation;
pub mod conditions;
pub mod detachment;
pub mod family;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod pipeline;

pub use conditions::{ClassStats, ConditionId, Embeddable, Regime, RegimeTag, Verdict};
pub use detachment::{DetachmentPlan, TwoFactorization};
pub use family::{GddParams, ParamError};
pub use graph::{Color, ColoredMultigraph, Edge, VertexId};
pub use pipeline::{embed, verify_embedding, EmbedReport};

