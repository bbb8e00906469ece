use std::path::PathBuf;

use record_gof::estimate::FitReport;
use record_gof::gof::TestReport;
use record_gof::mc::TableMeta;
use record_gof::records::Scheme;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub path: PathBuf,
    pub scheme: Scheme,
    pub n: u64,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitSource {
    Mle,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFragment {
    #[serde(flatten)]
    pub fit: FitReport,
    pub source: FitSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFragment {
    #[serde(flatten)]
    pub test: TestReport,
    /// Indices into `fits` of the models the test was computed from.
    pub fits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableProvenance {
    pub path: PathBuf,
    pub meta: TableMeta,
    /// Table row the critical values were read from.
    pub lookup_n: u64,
    pub interpolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub command: String,
    /// Arguments after the program name; re-running them reproduces the report.
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub input: InputDescriptor,
    pub fits: Vec<FitFragment>,
    pub tests: Vec<TestFragment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableProvenance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
}
