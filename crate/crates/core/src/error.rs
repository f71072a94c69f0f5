use thiserror::Error;

/// Errors raised by mesh construction, geometry oracles and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ambiguous metric projection at {point:?} (minimizers {separation:.3e} apart)")]
    SingularPoint { point: Vec<f64>, separation: f64 },

    #[error("surface adjacency graph is not connected")]
    DisconnectedSurface,

    #[error("a boundary atlas is required for d = {dim} boundary meshes")]
    AtlasRequired { dim: usize },

    #[error("fill target h = {h} exceeds the boundary diameter {diameter}")]
    InvalidStep { h: f64, diameter: f64 },

    #[error("Vandermonde matrix has numerical rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("sup norm over an empty point set")]
    EmptySet,

    #[error("inner core K_delta is empty for delta = {delta}")]
    EmptyCore { delta: f64 },

    #[error("transported point on level {level} is off its level set by {deviation:.3e}")]
    TransportError { level: usize, deviation: f64 },

    #[error("sampled polynomial {trial} vanishes on the whole mesh")]
    ZeroOnMesh { trial: usize },

    #[error("norming LP is unbounded: mesh does not norm the control set")]
    Unbounded,

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
