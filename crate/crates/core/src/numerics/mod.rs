//! Self-contained numerical kernels: dense eigensolvers, matrix square root,
//! simplex minimization and RK4 integration.

mod eigen;
mod matrix;
mod ode;
mod optimize;

pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, jacobi_eigen, matrix_sqrt_spd, symmetric_eigen,
    symmetric_eigenvalues, tridiagonal_eigen, EigenResult, HermitianEigenResult, JACOBI_MAX_DIM,
};
pub use matrix::{CMatrix, Matrix};
pub use ode::rk4_step;
pub use optimize::{nelder_mead_min, NelderMeadResult};
