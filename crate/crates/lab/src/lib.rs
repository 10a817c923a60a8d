//! Laboratory layer around `beamslider-core`: signal analysis of simulated
//! trajectories, JSON configuration with shipped presets, CSV/JSON exports,
//! and the five command-line workflows (`ssim`, `simulate`, `pcs-sweep`,
//! `locomotion-report`, `signature-move`).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod formats;
pub mod signal;
pub mod workflows;

pub use config::{load_preset, RunConfig};
pub use error::{LabError, Result};
