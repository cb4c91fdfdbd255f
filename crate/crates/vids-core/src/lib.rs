//! Toolkit for verified imaging datasets: directory and naming validation
//! against a 21-rule catalog under two compliance profiles, annotation
//! provenance sidecars, consensus/Dice quality statistics, deterministic ML
//! splits, 22-dimension compliance scoring, and provenance-preserving export.
//!
//! The `parallel` feature (default) runs voxel statistics and dataset
//! scanning on rayon; disable it for a fully sequential build with identical
//! outputs.

pub mod error;
pub mod exporter;
mod fsutil;
pub mod model;
pub mod naming;
mod par;
pub mod quality;
pub mod scaffold;
pub mod scorer;
pub mod splits;
pub mod validator;
pub mod volume;

pub use error::{Error, Result};
