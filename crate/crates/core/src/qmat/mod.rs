//! Dense complex linear algebra for multi-factor quantum systems.
//!
//! Matrices are row-major. Tensor factors follow a fixed convention: the
//! first label of a [`DimSig`] is the most significant factor, so
//! `kron(a, b)` acts on `sig = [a, b]`.

mod density;
mod eigen;
mod matrix;
mod sig;

pub use density::{trace_distance, validate_density, DensityMatrix, DENSITY_TOL};
pub use eigen::{
    eig_hermitian, eigvals_hermitian, expm_skew, unitarity_defect, HermitianEigen, HERMITIAN_TOL,
};
pub(crate) use eigen::{eigvals_unchecked, expm_skew_unchecked};
pub use matrix::{kron, kron_vec, ComplexMatrix, ONE, ZERO};
pub use sig::{partial_trace, partial_trace_positions, DimSig};
pub(crate) use sig::default_labels;

pub use num_complex::Complex64;
