//! Versioned JSON reports and their atomic output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::operator::ShiftOperatorSpec;

pub const SCHEMA: &str = "shift-index.report/1";

/// Outcome of a run; decides the process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Conclusive,
    Inconclusive,
    Failed,
    Error,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Conclusive => 0,
            RunStatus::Inconclusive => 2,
            RunStatus::Failed | RunStatus::Error => 1,
        }
    }

    /// The more severe of two statuses.
    pub fn combine(self, other: Self) -> Self {
        self.max(other)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecInfo {
    pub name: Option<String>,
    pub spec_hash: String,
    pub d: usize,
    pub theta: Vec<f64>,
    pub max_shift: usize,
}

impl SpecInfo {
    pub fn of(spec: &ShiftOperatorSpec) -> Self {
        Self {
            name: spec.name.clone(),
            spec_hash: spec.spec_hash(),
            d: spec.d(),
            theta: spec.theta().to_vec(),
            max_shift: spec.max_shift(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub status: RunStatus,
    pub spec: Option<SpecInfo>,
    pub config: Value,
    pub result: Value,
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            schema: SCHEMA.into(),
            command: command.into(),
            status: RunStatus::Conclusive,
            spec: None,
            config,
            result: Value::Null,
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Checks the fields every report must carry.
pub fn validate_report(value: &Value) -> Result<()> {
    let obj = value.as_object().ok_or_else(|| Error::Schema("report is not a JSON object".into()))?;
    match obj.get("schema").and_then(Value::as_str) {
        Some(SCHEMA) => {}
        other => return Err(Error::Schema(format!("unknown report schema {other:?}"))),
    }
    for key in ["command", "status", "config", "result", "error"] {
        if !obj.contains_key(key) {
            return Err(Error::Schema(format!("report lacks `{key}`")));
        }
    }
    serde_json::from_value::<RunStatus>(obj["status"].clone())
        .map_err(|e| Error::Schema(format!("bad status: {e}")))?;
    Ok(())
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Schema(format!("output path {path:?} has no file name")))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}
