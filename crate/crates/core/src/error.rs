//! Crate-wide error type.
//!
//! Library entry points return `Result<T, Error>`; binaries map variants to
//! exit codes. Diagnostics that should not abort a run (skipped locations,
//! malformed report rows, unparseable files) are returned as data instead.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("registry validation failed: {0}")]
    InvalidRegistry(String),

    #[error("registry validation failed for case `{case_id}`: {detail}")]
    InvalidCase { case_id: String, detail: String },

    #[error("unknown cluster `{0}`")]
    UnknownCluster(String),

    #[error("unknown operator `{0}` (expected OP1..OP12)")]
    UnknownOperator(String),

    #[error("unknown case id `{0}`")]
    UnknownCase(String),

    #[error("api model validation failed: {0}")]
    InvalidModel(String),

    #[error("no spec for API `{0}` in the model")]
    ApiNotFound(String),

    #[error("case `{case_id}` targets API `{api}`, which is missing from the model")]
    MissingSpec { case_id: String, api: String },

    #[error("glue form `{form}` is incompatible with `{api}` ({detail})")]
    IncompatibleForm {
        api: String,
        form: String,
        detail: String,
    },

    #[error("operator {operator} is not applicable to case `{case_id}`")]
    InapplicableOperator { case_id: String, operator: String },

    #[error("condition text unavailable for `{method}`: {detail}")]
    ConditionUnavailable { method: String, detail: String },

    #[error("expression outside the supported string fragment: {0}")]
    UnsupportedExpression(String),

    #[error("no source files with a `.java` extension under {0}")]
    NoSourceFiles(PathBuf),

    #[error("no `public static void main(String[])` entry point found under {0}")]
    NoEntryPoint(PathBuf),

    #[error("similarity scope needs a misuse case to search usages for")]
    ScopeNeedsCase,

    #[error("output directory {0} lies inside the project being seeded")]
    OutputInsideProject(PathBuf),

    #[error("empty seeding plan: nothing to do")]
    EmptyPlan,

    #[error("empty record set: refusing to compute a 0/0 kill ratio")]
    EmptyRecords,

    #[error("mutation log {path} line {line}: {detail}")]
    LogRecord {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("report shape error in {path}: {detail}")]
    ReportShape { path: PathBuf, detail: String },

    #[error("column map is missing report column `{0}`")]
    MissingColumn(String),

    #[error("compile command not found: {0}")]
    CommandNotFound(String),

    #[error("compile command timed out after {0} s")]
    CommandTimeout(u64),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
