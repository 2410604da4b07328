//! Cyclic Jacobi eigensolver for complex Hermitian matrices and the
//! exponential of skew-Hermitian generators built on top of it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, ZERO};

/// Input Hermiticity tolerance (max entry of `m - m^dag`).
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `m = U diag(values) U^dag`, values ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| Complex64::new(x, 0.0))
    }

    /// `U diag(f(values)) U^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == ZERO {
                continue;
            }
            for i in 0..n {
                let a = u[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += a * u[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(jacobi(m, true))
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(jacobi(m, false).values)
}

/// Unchecked eigenvalues for matrices that are Hermitian by construction.
pub(crate) fn eigvals_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    jacobi(m, false).values
}

fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> HermitianEigen {
    let n = m.rows();
    // Symmetrize so that rounding in the input cannot leak into the spectrum.
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    let mut v = if want_vectors {
        ComplexMatrix::identity(n)
    } else {
        ComplexMatrix::zeros(0, 0)
    };

    let scale = a.frobenius_norm();
    let threshold = (f64::EPSILON * scale).powi(2) * 1e-2;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, want_vectors);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = if want_vectors {
        let mut sorted = ComplexMatrix::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            for i in 0..n {
                sorted[(i, new)] = v[(i, old)];
            }
        }
        sorted
    } else {
        v
    };
    HermitianEigen { values, vectors }
}

/// One Jacobi rotation annihilating `a[p][q]`.
///
/// With `a[p][q] = |b| e`, the 2x2 transform is `J = diag(1, conj(e)) R`
/// where `R = [[c, s], [-s, c]]` is the real symmetric Jacobi rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, want_vectors: bool) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let n = a.rows();
    let e = apq / b;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * b);
    let t = if theta.is_infinite() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -e.conj() * s;
    let jqq = e.conj() * c;

    // Columns: A <- A J.
    for k in 0..n {
        let x = a[(k, p)];
        let y = a[(k, q)];
        a[(k, p)] = x * jpp + y * jqp;
        a[(k, q)] = x * jpq + y * jqq;
    }
    // Rows: A <- J^dag A.
    for k in 0..n {
        let x = a[(p, k)];
        let y = a[(q, k)];
        a[(p, k)] = jpp.conj() * x + jqp.conj() * y;
        a[(q, k)] = jpq.conj() * x + jqq.conj() * y;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    if want_vectors {
        for k in 0..n {
            let x = v[(k, p)];
            let y = v[(k, q)];
            v[(k, p)] = x * jpp + y * jqp;
            v[(k, q)] = x * jpq + y * jqq;
        }
    }
}

/// `exp(g)` for skew-Hermitian `g`, via the spectrum of the Hermitian `i g`.
pub fn expm_skew(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "exponential of a {}x{} matrix",
            g.rows(),
            g.cols()
        )));
    }
    let defect = g.skew_hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotSkewHermitian(defect));
    }
    Ok(expm_skew_unchecked(g))
}

pub(crate) fn expm_skew_unchecked(g: &ComplexMatrix) -> ComplexMatrix {
    let h = g.scale(Complex64::new(0.0, 1.0));
    let eig = jacobi(&h, true);
    // g = -i h, so exp(g) = U diag(exp(-i lambda)) U^dag.
    eig.map_spectrum(|lam| Complex64::from_polar(1.0, -lam))
}

/// max |U^dag U - I| and max |U U^dag - I|.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let i = ComplexMatrix::identity(u.rows());
    let a = u.adjoint().matmul(u).max_abs_diff(&i);
    let b = u.matmul(&u.adjoint()).max_abs_diff(&i);
    a.max(b)
}
