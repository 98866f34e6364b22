use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unstable boson sector: mode energy {energy} is not positive")]
    UnstableBosonSector { energy: f64 },

    #[error("lattice lowest normal mode is not uniform; use general_saddle_point instead")]
    NonUniformLattice,

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("unstable fluctuation spectrum at k = {k}: eigenvalue {eigenvalue:e}")]
    UnstableFluctuationSpectrum { k: usize, eigenvalue: f64 },

    #[error("transform is not invertible at the zone center (k = {k})")]
    NonInvertible { k: usize },

    #[error("Hilbert-space dimension {dimension} exceeds the budget of {budget}")]
    DimensionBudget { dimension: usize, budget: usize },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
