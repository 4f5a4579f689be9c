//! Library side of the `bddl` command-line tool.

pub mod commands;
pub mod config;
pub mod manifest;
