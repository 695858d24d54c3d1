use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial order {k} is not supported here: {reason}")]
    UnsupportedOrder { k: usize, reason: &'static str },

    #[error("BDM element of order {k} is ill-conditioned (condition number {condition:.3e})")]
    SingularElement { k: usize, condition: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("mesh generation failed: {0}")]
    MeshGeneration(String),

    #[error("expected a function on a {expected} dof map, got {found}")]
    MapMismatch { expected: String, found: String },

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("linear solver failed: {0}")]
    BackendFailure(String),

    #[error("advective field is not normal-continuous on facet {facet} (jump {jump:.3e})")]
    NotNormalContinuous { facet: usize, jump: f64 },

    #[error("energy blew up at t = {t}: {energy:.3e} exceeds {limit:.3e}")]
    Blowup { t: f64, energy: f64, limit: f64 },

    #[error("problem dimension {n} exceeds the dense limit {limit}")]
    DimensionLimit { n: usize, limit: usize },

    #[error("no boundary facets carry tag {0}")]
    MissingTag(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
