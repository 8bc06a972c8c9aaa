use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: String },

    #[error("point lies on the cloaking surface (distance {gap:e})")]
    OnSingularSurface { gap: f64 },

    #[error("invalid coating spec: {0}")]
    InvalidSpec(String),

    #[error("operation unsupported for this coating: {0}")]
    Unsupported(String),

    #[error("singular map: Jacobian determinant is {0:e}")]
    SingularMap(f64),

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("integration failed at x = {at}: {reason}")]
    Integration { at: f64, reason: String },

    #[error("Dirichlet resonance at l = {l}, k = {k}: boundary value vanishes")]
    DirichletResonance { l: usize, k: f64 },

    #[error("cutoff mode: transverse wavenumber vanishes for k = {k}, beta = {beta}")]
    Cutoff { k: f64, beta: f64 },

    #[error("criteria disagree: {0}")]
    Inconsistent(String),

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Export(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(value: f64, domain: impl Into<String>) -> Self {
        Error::Domain { value, domain: domain.into() }
    }
}
