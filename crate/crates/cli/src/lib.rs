//! Command-line harness around the solver.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod verify;
