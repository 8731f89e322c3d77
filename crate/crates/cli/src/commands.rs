//! Subcommand bodies shared by the binary and the tests.

use std::path::Path;

use serde::Serialize;

use phdae_core::library::{catalog, ModelInfo};
use phdae_core::models::validate_phdae;
use phdae_core::{Error, Result};

use crate::config::RunConfig;
use crate::output::write_json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Map a library error onto the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::DimensionMismatch { .. } | Error::ModelDefinition(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationRecord {
    pub model: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

pub fn validate_model(cfg: &RunConfig) -> Result<ValidationRecord> {
    let model = cfg.build_model()?;
    let v = &cfg.validation;
    let report = validate_phdae(&model.system, &model.sample_states(v.samples, v.seed), v.tol)?;
    Ok(ValidationRecord {
        model: report.model.clone(),
        passed: report.passed(),
        checks: report
            .checks
            .iter()
            .map(|c| CheckRecord {
                name: c.name.clone(),
                max_violation: c.max_violation,
                tolerance: c.tolerance,
                samples: c.samples,
                passed: c.passed,
            })
            .collect(),
    })
}

pub fn write_validation(dir: &Path, rec: &ValidationRecord) -> Result<()> {
    write_json(&dir.join("validation.json"), rec)
}

pub fn list_models() -> Vec<ModelInfo> {
    catalog()
}
