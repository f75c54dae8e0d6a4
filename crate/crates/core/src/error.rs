use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("aliasing: grid of {grid} points cannot resolve index {max_index} (need at least {})", 2 * max_index + 1)]
    Aliasing { grid: usize, max_index: usize },

    #[error("validation: {0}")]
    Validation(String),

    #[error("infeasible: equality residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Infeasible { residual: f64, tol: f64 },

    #[error("pole: denominator vanishes near {at:?}")]
    Pole { at: Vec<Complex64> },

    #[error("cayley-singular: I + F has reciprocal condition {rcond:.3e}")]
    CayleySingular { rcond: f64 },

    #[error("not Herglotz: real part {value:.6e} at {witness:?}")]
    NotHerglotz { witness: Vec<Complex64>, value: f64 },

    #[error("not matrix Herglotz: real part has eigenvalue {eigenvalue:.6e} at {witness:?}")]
    NotMatrixHerglotz { witness: Complex64, eigenvalue: f64, eigenvector: Vec<Complex64> },

    #[error("not Schur: norm {max_norm:.6e} exceeds 1")]
    NotSchur { max_norm: f64 },

    #[error("unsupported boundary: {0}")]
    UnsupportedBoundary(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("root solver failed: worst residual {residual:.3e}")]
    RootSolver { residual: f64 },

    #[error("series truncation insufficient: tail bound {tail:.3e}")]
    Truncation { tail: f64 },

    #[error("Monte Carlo estimate did not converge: relative standard error {rel_stderr:.3e}")]
    MonteCarlo { rel_stderr: f64 },

    #[error("Gram matrix ill-conditioned (condition {cond:.3e}); use a smaller truncation")]
    IllConditioned { cond: f64 },

    #[error("W-perp dimension {dim} (expected 1); smallest singular values {singular_values:?}")]
    WperpDimension { dim: usize, singular_values: Vec<f64> },

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
