//! Experiment driver for PAC prediction-interval studies: synthetic data
//! profiles (including a heavily imbalanced visual-acuity scale), seeded
//! multi-trial suites sweeping the miscoverage target, a split-conformal
//! comparison arm, distribution-shift runs, and deterministic CSV/JSON
//! reports. The `pacint` binary wraps [`report::run_suite`] and friends in
//! a CLI.
//!
//! Everything downstream of a seed is reproducible: each trial derives
//! named generator substreams (see [`rng`]) for data, splitting, and
//! training, and report files are byte-identical across reruns regardless
//! of worker-thread count.

pub mod config;
pub mod data;
pub mod error;
pub mod report;
pub mod rng;
pub mod trial;
