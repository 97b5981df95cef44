use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid scheme profile: {0}")]
    InvalidProfile(String),

    #[error("index {index} out of range for scheme `{scheme}` ({available} levels defined)")]
    IndexOutOfRange {
        scheme: String,
        index: usize,
        available: usize,
    },

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("containment |e - p| <= p/3 failed at u = {u} (relative deviation {deviation}) after {attempts} attempts")]
    Containment { u: f64, deviation: f64, attempts: u32 },

    #[error("point {t} outside domain [{a}, {b}]")]
    Domain { t: f64, a: f64, b: f64 },

    #[error("invalid interval [{a}, {b}]: expected [0, 1] or 0 < a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("insufficient materialization: level {level} exceeds materialized prefix 0..={n_max}")]
    InsufficientMaterialization { level: usize, n_max: usize },

    #[error("certificate search failed at level {level}: needed {needed} alternating points above {target}, found at most {found} up to u = {u_max}")]
    SearchFailed {
        level: usize,
        needed: usize,
        found: usize,
        target: f64,
        u_max: f64,
    },

    #[error("singular reference system in exchange step")]
    SingularSystem,

    #[error("invalid solver input: {0}")]
    Solver(String),

    #[error("reference alternation broken at reference index {0}")]
    BrokenAlternation(usize),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
