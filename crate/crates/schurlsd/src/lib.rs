//! Command-line experiments over `schurlsd-core`: configuration files,
//! JSON/CSV outputs with run manifests, a rayon executor, and the Table 2
//! verification suite.

use std::path::PathBuf;

use serde::Serialize;

pub mod commands;
pub mod config;
pub mod exec;
pub mod output;
pub mod table2;

pub use commands::{execute, Command, RunManifest};
pub use config::RunConfig;
pub use exec::RayonExecutor;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config key `{key}` has invalid value `{value}`: {reason}")]
    Config { key: String, value: String, reason: String },
    #[error(transparent)]
    Core(#[from] schurlsd_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One pass/fail verdict, with the numbers behind it when there are any.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// `|value - target| <= tolerance`.
    pub fn within(name: String, value: f64, target: f64, tolerance: f64) -> Self {
        let pass = (value - target).abs() <= tolerance;
        Check { name, value: Some(value), target: Some(target), tolerance: Some(tolerance), pass }
    }

    /// `value <= bound`.
    pub fn at_most(name: String, value: f64, bound: f64) -> Self {
        Check { name, value: Some(value), target: Some(bound), tolerance: None, pass: value <= bound }
    }

    pub fn flag(name: String, pass: bool) -> Self {
        Check { name, value: None, target: None, tolerance: None, pass }
    }
}
