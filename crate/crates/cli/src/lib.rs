//! Experiment runner: configuration, simulation driver, studies and output.

pub mod commands;
pub mod config;
pub mod output;
pub mod runner;
pub mod studies;
