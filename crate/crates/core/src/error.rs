use thiserror::Error;

/// Errors shared by the solver and reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular kernel evaluation: target coincides with source point")]
    Singularity,

    #[error("grid construction: {0}")]
    Grid(String),

    #[error("incident density violates the smallness gate: sup|g| = {norm:.6e} >= delta^2 = {gate:.6e}")]
    Gate { norm: f64, gate: f64 },

    #[error("field left the analyticity disk: sup|z| = {sup:.6e} >= eta = {eta:.6e}")]
    Analyticity { sup: f64, eta: f64 },

    #[error("fixed-point iteration diverged: {0}")]
    Divergence(String),

    #[error("dense factorization failed: {0}")]
    Factorization(String),

    #[error("ill-posed inversion: {0}")]
    IllPosed(String),

    #[error("dataset is missing records for indices: {}", format_indices(.0))]
    MissingRecords(Vec<Vec<usize>>),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

fn format_indices(indices: &[Vec<usize>]) -> String {
    indices
        .iter()
        .map(|ix| {
            let inner: Vec<String> = ix.iter().map(|v| v.to_string()).collect();
            format!("({})", inner.join(","))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
