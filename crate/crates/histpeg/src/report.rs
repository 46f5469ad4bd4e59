//! Machine-readable check reports: canonical JSON (deterministic given the
//! inputs, the seed and the crate version) and an optional CSV flattening.
//!
//! Determinism rules: records are sorted by `(name, digest)`, residual maps
//! are ordered, and wall times are omitted unless explicitly requested;
//! they are the one inherently nondeterministic field.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    /// An asserted check that met its tolerance.
    Pass,
    /// An asserted check that missed its tolerance.
    Fail,
    /// A reported measurement with no assertion attached.
    Diagnostic,
}

/// One check outcome. `residuals` holds every named measurement the check
/// produced; `tolerance` is the assertion threshold where one applies.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub digest: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl CheckRecord {
    pub fn asserted(
        name: impl Into<String>,
        digest: impl Into<String>,
        seed: u64,
        tolerance: f64,
        pass: bool,
    ) -> Self {
        Self {
            name: name.into(),
            digest: digest.into(),
            status: if pass {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            tolerance: Some(tolerance),
            residuals: BTreeMap::new(),
            detail: None,
            seed,
            wall_time_ms: None,
        }
    }

    pub fn diagnostic(name: impl Into<String>, digest: impl Into<String>, seed: u64) -> Self {
        Self {
            name: name.into(),
            digest: digest.into(),
            status: CheckStatus::Diagnostic,
            tolerance: None,
            residuals: BTreeMap::new(),
            detail: None,
            seed,
            wall_time_ms: None,
        }
    }

    pub fn with_residual(mut self, key: impl Into<String>, value: f64) -> Self {
        self.residuals.insert(key.into(), value);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// A full run report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Tool name and version; reports are comparable only within one version.
    pub tool: String,
    pub seed: u64,
    pub order: String,
    pub passes: usize,
    pub failures: usize,
    pub diagnostics: usize,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(seed: u64, order: impl Into<String>) -> Self {
        Self {
            tool: format!("histpeg {}", env!("CARGO_PKG_VERSION")),
            seed,
            order: order.into(),
            passes: 0,
            failures: 0,
            diagnostics: 0,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    /// Sorts records into canonical order and recounts statuses.
    pub fn finalize(&mut self) {
        self.checks
            .sort_by(|a, b| a.name.cmp(&b.name).then(a.digest.cmp(&b.digest)));
        self.passes = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Pass)
            .count();
        self.failures = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .count();
        self.diagnostics = self
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Diagnostic)
            .count();
    }

    pub fn has_failures(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    /// Pretty-printed JSON with a trailing newline; byte-identical across
    /// runs with the same inputs when no wall times were recorded.
    pub fn to_canonical_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }

    /// One CSV row per (check, residual); checks without residuals emit a
    /// single row with empty residual columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record([
                "name",
                "digest",
                "status",
                "tolerance",
                "residual",
                "value",
                "seed",
            ])
            .map_err(csv_error)?;
        for check in &self.checks {
            let status = match check.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "fail",
                CheckStatus::Diagnostic => "diagnostic",
            };
            let tol = check.tolerance.map(|t| t.to_string()).unwrap_or_default();
            if check.residuals.is_empty() {
                writer
                    .write_record([
                        check.name.as_str(),
                        check.digest.as_str(),
                        status,
                        tol.as_str(),
                        "",
                        "",
                        &check.seed.to_string(),
                    ])
                    .map_err(csv_error)?;
            }
            for (key, value) in &check.residuals {
                writer
                    .write_record([
                        check.name.as_str(),
                        check.digest.as_str(),
                        status,
                        tol.as_str(),
                        key.as_str(),
                        &value.to_string(),
                        &check.seed.to_string(),
                    ])
                    .map_err(csv_error)?;
            }
        }
        let bytes = writer.into_inner().map_err(|e| {
            crate::error::Error::Scenario {
                context: "csv".into(),
                message: e.to_string(),
            }
        })?;
        String::from_utf8(bytes).map_err(|e| crate::error::Error::Scenario {
            context: "csv".into(),
            message: e.to_string(),
        })
    }
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Scenario {
        context: "csv".into(),
        message: e.to_string(),
    }
}

/// First 16 hex characters of the SHA-256 over the given parts; used to
/// tie check records to their exact inputs.
pub fn digest_hex(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    let full = hasher.finalize();
    full.iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect::<String>()
}
