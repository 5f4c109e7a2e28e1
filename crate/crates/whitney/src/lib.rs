//! Whitney-switch distance toolkit.
//!
//! A Whitney switch picks a separating vertex pair {u,v} of a 2-connected
//! graph and re-attaches one side's edges at u to v and vice versa. The
//! crate decides whether two 2-isomorphic graphs can be made φ-isomorphic
//! with at most k switches: it kernelizes the instance along the Tutte
//! decomposition down to O(b) vertices (b = breakpoint number) and then
//! searches the remaining state space exactly. A self-contained engine for
//! sorting partially signed permutations by reversals backs the cycle case
//! and serves as an independent oracle in the test suite.

pub mod acceptance;
pub mod graph;
pub mod instances;
pub mod kernel;
pub mod reversals;
pub mod switching;
pub mod tutte;
pub mod twoiso;
