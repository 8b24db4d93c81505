//! Document screening for systematic literature reviews.
//!
//! The crate implements three screening models over title+abstract text and
//! the machinery to compare them:
//!
//! * **Model 1** – a Boolean keyword query `FSW AND (HIV OR Violence)` with
//!   wildcard terms ([`boolquery`]).
//! * **Model 2** – a class-balanced random forest over 15 semantic cluster
//!   TF-IDF features ([`vectorize`], [`forest`]).
//! * **Model 3** – Model 2 plus the top-N tokens ranked by a two-sample
//!   t-statistic ([`select`]).
//!
//! Text is normalized by [`textprep`] (tokenize, lemma lookup, Porter stem),
//! folds and subsamples come from [`corpus`], and [`eval`] produces ROC/PR
//! curves, workload figures, sensitivity sweeps and label-disagreement
//! audits. [`pipeline`] ties preprocessing, feature fitting and the forest
//! together so that everything learned from data is fitted on training rows
//! only.

pub mod boolquery;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod forest;
pub mod pipeline;
pub mod provenance;
pub mod seed;
pub mod select;
pub mod synthetic;
pub mod textprep;
pub mod vectorize;

pub use error::{Error, Result};
