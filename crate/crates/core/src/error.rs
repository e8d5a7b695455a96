use thiserror::Error;

/// Errors raised while building meshes, local spaces or solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell {cell} is degenerate: {reason}")]
    DegenerateCell { cell: usize, reason: String },

    #[error("resolution {n} too small for mesh family {family}")]
    ResolutionTooSmall { family: String, n: usize },

    #[error("unsupported quadrature request: {0}")]
    Quadrature(String),

    #[error("nonphysical material parameters: {0}")]
    Material(String),

    #[error("singular local system on cell {cell}: {what}")]
    SingularLocal { cell: usize, what: String },

    #[error("local stress matrix of cell {cell} is not positive definite (min eigenvalue {min_eig:e})")]
    Indefinite { cell: usize, min_eig: f64 },

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("solve residual {residual:e} exceeds tolerance {tol:e} (condition estimate {condition:e})")]
    Residual {
        residual: f64,
        tol: f64,
        condition: f64,
    },

    #[error("mesh file: {0}")]
    MeshFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
