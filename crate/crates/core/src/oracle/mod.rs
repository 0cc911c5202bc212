//! Brute-force references: eigenfunction-sum kernels, adaptive quadrature and the
//! finite-difference magnetic Hamiltonian.

pub mod fd;
pub mod kernel_sum;
pub mod quad;

pub use fd::{fd_cluster, fd_spectrum, FdCluster, FdEigen, FdProblem};
pub use kernel_sum::kernel_by_sum;
pub use quad::multiplier_by_quadrature;
