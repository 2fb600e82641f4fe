//! Column subset selection toolkit.
//!
//! Selects a small set of candidate columns whose span captures as much of
//! a target matrix's Frobenius mass as possible. Provides an exhaustive
//! greedy selector with incremental residual updates, a sampled-greedy
//! variant that evaluates only a random candidate subset per iteration, a
//! randomized-partition distributed selector with a multi-epoch mode,
//! Gaussian row projection and signed column sketching for compression, and
//! a brute-force oracle for verifying all of the above at desk scale.

pub mod dist;
mod error;
pub mod io;
pub mod matrix;
pub mod objective;
pub mod oracle;
pub mod rng;
pub mod select;
pub mod sketch;

pub use error::{Error, Result};
pub use io::{detect_format, load_matrix, save_matrix, MatrixFormat};
pub use matrix::{normalized_columns, ColumnMatrix, ColumnSet};
pub use objective::{coverage_naive, coverage_naive_set, init_state, GainReport, SelectionState};
pub use select::{greedy, lazier_greedy, random_baseline, LazierParams, Method, SelectionResult};
