//! Divide-and-conquer community detection for networks whose communities
//! cluster into groups.
//!
//! The network is first split into groups by greedy modularity
//! agglomeration ([`division`]), communities are then detected inside every
//! group independently ([`detection`], [`selection`]) and the per-group labels
//! are concatenated into a global labeling with a fitted block matrix
//! ([`pipeline`]). Generators for grouped SBM/DCSBM networks and the
//! evaluation metrics used to score recoveries live in [`generators`] and
//! [`evaluation`].
//!
//! The crate is `no_std` and only needs `alloc`. Threading and wall-clock
//! timing are supplied by the caller through [`pipeline::Executor`] and
//! [`pipeline::Clock`].
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod detection;
pub mod division;
pub mod error;
pub mod evaluation;
pub mod generators;
pub mod graph;
pub mod matrix;
pub mod pipeline;
pub mod rng;
pub mod selection;

mod math;

pub use error::{Error, Result};
pub use graph::{Graph, Labeling};
pub use matrix::Matrix;
