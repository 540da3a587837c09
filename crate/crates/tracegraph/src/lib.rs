//! Exact workbench for trace-invariants of multipartite tensors.
//!
//! Trace-invariants are labeled by D-colored bipartite graphs, encoded here
//! as D-tuples of permutations. The crate computes the combinatorial
//! quantities attached to such graphs (faces, jacket genera, the Gurau and
//! p-complete degrees, the degree of compatibility), generates the named
//! invariant families, evaluates invariants exactly on GHZ-built reference
//! states, decides LU/LO orders and sufficient LOCC relations between
//! those states, computes exact and asymptotic Haar moments, and
//! cross-checks everything against a dense numeric contraction oracle.

pub mod degrees;
pub mod error;
pub mod families;
pub mod graph;
pub mod haar;
pub mod oracle;
pub mod perm;
pub mod refstates;

pub use error::{Error, Result};
