//! Interpretable academic-risk prediction.
//!
//! The pipeline turns a grade group's student records into a binary risk
//! classifier and explains it:
//!
//! 1. [`data_model`] ingests the cohort CSV and derives labels from GPA;
//! 2. [`interaction_network`] builds co-membership layers and the partner
//!    centrality features;
//! 3. [`boosted_trees`] trains the gradient-boosted classifier (and a
//!    logistic baseline);
//! 4. [`evaluation`] scores it with ROC/AUC and confusion metrics;
//! 5. [`shapley`] attributes each prediction to features;
//! 6. [`plots`] reshapes attributions into figure data.
//!
//! [`synthetic`] generates cohorts with planted effects for recovery
//! experiments, and [`pipeline`] wires the stages to files.

pub mod boosted_trees;
pub mod data_model;
pub mod error;
pub mod evaluation;
pub mod interaction_network;
pub mod json;
pub mod pipeline;
pub mod plots;
pub mod shapley;
pub mod synthetic;

pub use error::{Error, ErrorCategory, Result};
