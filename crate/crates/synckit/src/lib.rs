//! Pointwise statistical group analysis of synchronized multivariate time
//! series.
//!
//! Each subject contributes a `T x V` signal matrix (time by vertex) and a
//! scalar clinical score. The toolkit aligns subjects temporally with a
//! closed-form orthogonal transform, measures per-vertex distances between
//! the aligned signals on the unit hypersphere, regresses the score on the
//! signal with a Nadaraya-Watson kernel estimator, and produces per-vertex
//! significance maps via permutation testing with Benjamini-Hochberg FDR
//! control.
//!
//! # Examples
//!
//! The `examples/` directory is the front door, one runnable program per
//! capability:
//!
//! ```bash
//! cargo run --release --example align_pair          # orthogonal alignment of two subjects
//! cargo run --release --example geodesic_kernel     # per-vertex distances and kernel weights
//! cargo run --release --example bandwidth_search    # leave-one-out bandwidth selection
//! cargo run --release --example kernel_regression_map   # kernel-regression significance map
//! cargo run --release --example pairwise_correlation_map # pairwise-distance significance map
//! cargo run --release --example simulation_study    # method comparison on injected signal
//! cargo run --release --example bootstrap_stability # p-value stability under resampling
//! ```
//!
//! A thin `synckit` binary exposes the same pipelines as batch subcommands
//! (`sync`, `pairwise`, `kernreg`, `bandwidth`, `simulate`, `bootstrap`);
//! see the README.
//!
//! # Reproducibility
//!
//! Every stochastic step draws from ChaCha8 streams derived from one user
//! seed ([`rng::stream_rng`]), parallel reductions run in a fixed order,
//! and outputs are byte-identical across runs and thread counts.

pub mod cli;
pub mod data;
pub mod error;
pub mod metric;
pub mod regress;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod sync;
mod util;

pub use error::{Error, Result};
