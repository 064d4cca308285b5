use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index out of range: {0}")]
    Index(String),

    #[error("projection is ill-conditioned at k*r = {kr:.6} (radial factor {factor:.3e} for n = {n})")]
    Conditioning { kr: f64, n: usize, factor: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("coefficient table: {0}")]
    Coefficients(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Command(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
