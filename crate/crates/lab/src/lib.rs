//! Experiment harness, file formats and CLI for the `vqlip-core` toolkit.
//!
//! This crate owns everything with an IO surface: the TOML study
//! configuration, CSV/JSON writers, the model checkpoint format, and the
//! orchestration of the robustness and generalization studies across seeds
//! and regularization strengths. All numerical work happens in
//! `vqlip-core`; results here are assembled in sorted key order and written
//! with plain `Display` float formatting, so re-running a study with the
//! same configuration reproduces every output byte for byte.

// `!(x >= 0.0)` and friends deliberately treat NaN as out of domain
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod harness;
pub mod io;
