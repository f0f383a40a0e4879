//! Complex linear algebra: dense and sparse matrices, eigensolvers, and an
//! adaptive integrator for linear ODEs.

pub mod arnoldi;
pub mod dense;
pub mod eig;
pub mod ode;
pub mod sparse;

pub use arnoldi::{eigs_near, EigenPair, ShiftInvertOptions};
pub use dense::{kron, ComplexMatrix, KRON_AXIS_LIMIT};
pub use eig::{
    eig_general, eig_hermitian, eigenvalues_general, null_space, singular_values, solve_dense, EigenDecomposition,
    HermitianEigen, DENSE_EIG_CAP, NEAR_DEFECTIVE_COND,
};
pub use ode::{integrate_ode, OdeOptions};
pub use sparse::{ShiftedLu, SparseMatrix};

pub type C64 = num_complex::Complex64;

/// Anything that maps vectors to vectors linearly.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// Writes `A x` into `y`; both have length `dim()`.
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

impl LinearOperator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let r = self.mat_vec(x);
        y.copy_from_slice(&r);
    }
}
