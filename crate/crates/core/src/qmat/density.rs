use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::eigen::{eig_hermitian, eigvals_unchecked};
use crate::qmat::{partial_trace, ComplexMatrix, DimSig};

/// Tolerance used when a constructor re-checks its own output.
pub const DENSITY_TOL: f64 = 1e-9;

const NEGATIVE_NOISE: f64 = 1e-12;

/// Positive, unit-trace operator on a labelled composite system.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    sig: DimSig,
}

impl DensityMatrix {
    /// Validates and wraps `matrix` (see [`validate_density`]).
    pub fn new(matrix: ComplexMatrix, sig: DimSig, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != sig.total() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for signature {:?}",
                matrix.rows(),
                matrix.cols(),
                sig.factors()
            )));
        }
        let checked = validate_density(&matrix, tol)?;
        Ok(Self {
            matrix: checked.matrix,
            sig,
        })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, sig: DimSig) -> Self {
        debug_assert_eq!(matrix.rows(), sig.total());
        Self { matrix, sig }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn sig(&self) -> &DimSig {
        &self.sig
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn into_parts(self) -> (ComplexMatrix, DimSig) {
        (self.matrix, self.sig)
    }

    /// Same matrix under a different signature of equal total dimension.
    pub fn with_sig(self, sig: DimSig) -> Result<Self> {
        if sig.total() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "signature {:?} does not fit a {}-dimensional state",
                sig.factors(),
                self.dim()
            )));
        }
        Ok(Self {
            matrix: self.matrix,
            sig,
        })
    }

    /// Reduced state on the factors in `keep`.
    pub fn reduce(&self, keep: &[&str]) -> Result<Self> {
        let (sig, _) = self.sig.restrict(keep)?;
        let m = partial_trace(&self.matrix, &self.sig, keep)?;
        Ok(Self { matrix: m, sig })
    }

    /// Merges contiguous factors `from..to` into one named `label`.
    pub fn merge_factors(self, from: usize, to: usize, label: &str) -> Result<Self> {
        let sig = self.sig.merge(from, to, label)?;
        Ok(Self {
            matrix: self.matrix,
            sig,
        })
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut sig = self.sig.clone();
        for (d, l) in other.sig.factors().iter().zip(other.sig.labels()) {
            sig = sig.append(*d, l)?;
        }
        Ok(Self {
            matrix: crate::qmat::kron(&self.matrix, &other.matrix),
            sig,
        })
    }

    /// `u ρ u^dag` for a unitary `u` on the whole space.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let defect = crate::qmat::unitarity_defect(u);
        if u.rows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} unitary on a {}-dimensional state",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        if defect > 1e-9 {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self {
            matrix: u.conjugate(&self.matrix),
            sig: self.sig.clone(),
        })
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        eigvals_unchecked(&self.matrix)
    }
}

/// Checks Hermiticity, unit trace and positivity, each within `tol`.
///
/// Eigenvalues in `[-tol, -1e-12)` are clamped to zero and the matrix is
/// rebuilt and renormalized; otherwise the entries are returned untouched,
/// so that solver-level negatives never perturb a stored state.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "density matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidTrace(tr.re));
    }
    let eig = if defect > crate::qmat::HERMITIAN_TOL {
        // Tolerances looser than the solver's input contract: symmetrize first.
        let h = &m.scale_real(0.5) + &m.adjoint().scale_real(0.5);
        eig_hermitian(&h)?
    } else {
        eig_hermitian(m)?
    };
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotPositive(min));
    }
    let sig = DimSig::new(vec![m.rows()], vec!["S"])?;
    if min < -NEGATIVE_NOISE {
        let clamped: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let fixed = crate::qmat::eigen::HermitianEigen {
            values: clamped.iter().map(|x| x / total).collect(),
            vectors: eig.vectors,
        }
        .map_spectrum(|x| Complex64::new(x, 0.0));
        return Ok(DensityMatrix::from_parts_unchecked(fixed, sig));
    }
    Ok(DensityMatrix::from_parts_unchecked(m.clone(), sig))
}

/// Half the trace norm of `a - b`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    trace_distance_matrices(a.matrix(), b.matrix())
}

fn trace_distance_matrices(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.rows() || !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let diff = a - b;
    let vals = eigvals_unchecked(&diff);
    Ok((0.5 * vals.iter().map(|x| x.abs()).sum::<f64>()).clamp(0.0, 1.0))
}
