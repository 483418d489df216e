//! Growth accounting and steady-state calibration for a one-sector
//! neoclassical growth model with CRRA preferences.
//!
//! * [`data`]: annual panel ingestion, windowed statistics, steady-state
//!   window selection.
//! * [`accounting`]: Solow residual and growth decomposition tables.
//! * [`model`]: balanced-growth rate, steady-state effective capital and
//!   the great ratios K/Y and I/Y.
//! * [`calibrate`]: moment targets and exhaustive (β, γ) grid search.
//! * [`simulate`]: transition paths by shooting, checked against the closed
//!   form.
//! * [`cli`]: the `growthcal` command line.
//!
//! Batch work (grid search, fixed-point checks over many parameter blocks)
//! runs on rayon with the default `parallel` feature; results do not depend
//! on the execution strategy.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accounting;
pub mod calibrate;
pub mod cli;
pub mod data;
pub mod error;
pub mod model;
mod parallel;
pub mod report;
pub mod simulate;

pub use error::Error;
pub use parallel::{map_ordered, Execution};
