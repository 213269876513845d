//! Runtime and evaluation harness for map-then-act agents.
//!
//! Agents first build a structured cognitive map of an interactive
//! environment through adaptive exploration with a dual-convergence stopping
//! rule, then execute tasks conditioned on that map. The harness provides:
//!
//! - [`envs`]: three deterministic, seedable text worlds (household, craft,
//!   grid maze) with exact observation grammars and ground-truth snapshots;
//! - [`policy`]: scripted oracle policies for every stage plus an optional
//!   remote chat-model backend with transcript record/replay;
//! - [`mapping`]: cross-task global exploration and knowledge distillation,
//!   adaptive task mapping with the dual-convergence stopping rule, and
//!   cognitive-map construction from exploration trajectories;
//! - [`executor`]: knowledge-augmented execution plus the step-interleaved
//!   and map-free baseline loops, with ablation switches;
//! - [`evalkit`]: metrics, map question-answering against ground truth,
//!   perturbation accounting, and filtered dataset export;
//! - [`cli`]: the operator entry point orchestrating all of the above from
//!   declarative configs.

pub mod canon;
pub mod cli;
pub mod envs;
pub mod error;
pub mod evalkit;
pub mod executor;
pub mod mapping;
pub mod obs;
pub mod policy;
pub mod ser;
pub mod types;

pub use error::{Error, Result};
