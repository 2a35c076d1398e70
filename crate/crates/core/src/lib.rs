//! Mixture-of-regressions clustering under must-link group constraints,
//! a Monte-Carlo benchmark for it, and a regression-driven linear program
//! that turns per-cluster models into KPI recommendations.

pub mod data;
pub mod error;
pub mod linalg;
pub mod mmcl;
pub mod moo;
pub mod plot;
pub mod regress;
pub mod simplex;
pub mod synth;

pub use error::{Error, Result};
