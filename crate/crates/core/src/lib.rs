//! Similarity-based random survival forests.
//!
//! A global random survival forest measures how often each training record
//! shares a terminal node with a test record. Those co-occurrence counts,
//! optionally multiplied by inverse probability-of-censoring weights,
//! become the bootstrap sampling distribution of a dedicated forest for
//! that test record. The crate also ships the estimators, time-varying AUC
//! evaluation and the simulation generators used to compare the method
//! with a plain random survival forest.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod forest;
pub mod ipcw;
pub mod sbrsf;
pub mod seed;
pub mod simgen;
pub mod tree;

pub use dataset::{load_csv, split_train_test, CsvSchema, Dataset, FeatureKind, FeatureSpec, SurvivalRecord};
pub use error::{Error, Result};
pub use estimators::{kaplan_meier, nelson_aalen, survival_from_chf, ChfCurve, StepFunction};
pub use evaluation::{compare_auc, time_varying_auc, AucComparison, AucCurve};
pub use forest::{fit_forest, predict_chf, similarity_weights, Forest, ForestConfig, WeightMatrix};
pub use ipcw::{censoring_km, combine_weights, ipcw_weights, IpcwVector};
pub use sbrsf::{rsf_fit_predict, sbrsf_fit_predict, CaseSeeds, SbrsfConfig, SbrsfPrediction};
pub use simgen::{simulate, SimConfig, SimulatedData, SubspaceModel};
pub use tree::{grow_tree, logrank_score, SurvivalTree, TreeConfig, TreeNode};
