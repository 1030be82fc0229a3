//! Experiment harness: reproduces the blow-up table and the figure datasets
//! and writes them as self-describing CSV files.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod output;
