//! Entropic functionals, all in bits.
//!
//! Entropies come from spectra. Eigenvalues below [`EIGEN_CLAMP`] count as
//! exact zeros so that solver noise never reaches the logarithm, and the
//! remaining ones are rescaled to sum to one.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{eigvals_unchecked, partial_trace, ComplexMatrix, DensityMatrix, DimSig};

pub const EIGEN_CLAMP: f64 = 1e-12;

/// Shannon entropy of a spectrum with the clamp rule applied.
pub fn shannon_bits(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > EIGEN_CLAMP)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Entropy of a matrix that is already known to be a density matrix.
pub(crate) fn entropy_of(m: &ComplexMatrix) -> f64 {
    if m.rows() == 1 {
        return 0.0;
    }
    // Renormalize so that trace rounding never shows up in the entropy.
    let vals: Vec<f64> = eigvals_unchecked(m)
        .into_iter()
        .filter(|&p| p > EIGEN_CLAMP)
        .collect();
    let total: f64 = vals.iter().sum();
    let vals: Vec<f64> = vals.iter().map(|p| p / total).collect();
    shannon_bits(&vals).max(0.0)
}

/// Entropy of the marginal of `m` on `keep`.
pub(crate) fn marginal_entropy(m: &ComplexMatrix, sig: &DimSig, keep: &[&str]) -> Result<f64> {
    Ok(entropy_of(&partial_trace(m, sig, keep)?))
}

/// von Neumann entropy `-Tr ρ log2 ρ`.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(rho.matrix())
}

/// Entropy of the reduced state on `parties`.
pub fn subsystem_entropy(rho: &DensityMatrix, parties: &[&str]) -> Result<f64> {
    marginal_entropy(rho.matrix(), rho.sig(), parties)
}

fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for group in groups {
        if group.is_empty() {
            return Err(Error::InvalidParameter("empty party".into()));
        }
        for l in group.iter() {
            if seen.contains(l) {
                return Err(Error::LabelCollision(l.to_string()));
            }
            seen.push(l);
        }
    }
    Ok(())
}

fn union<'a>(groups: &[&[&'a str]]) -> Vec<&'a str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

/// `I(x:y) = S(x) + S(y) - S(xy)`.
pub fn mutual_information(rho: &DensityMatrix, x: &[&str], y: &[&str]) -> Result<f64> {
    check_disjoint(&[x, y])?;
    let m = rho.matrix();
    let sig = rho.sig();
    let sx = marginal_entropy(m, sig, x)?;
    let sy = marginal_entropy(m, sig, y)?;
    let sxy = marginal_entropy(m, sig, &union(&[x, y]))?;
    Ok(sx + sy - sxy)
}

/// `I_c^{from→to} = S(to) - S(from, to)`; may be negative.
pub fn coherent_information(rho: &DensityMatrix, from: &[&str], to: &[&str]) -> Result<f64> {
    check_disjoint(&[from, to])?;
    let m = rho.matrix();
    let sig = rho.sig();
    let s_to = marginal_entropy(m, sig, to)?;
    let s_joint = marginal_entropy(m, sig, &union(&[from, to]))?;
    Ok(s_to - s_joint)
}

/// `I(x:y|z) = S(xz) + S(yz) - S(z) - S(xyz)`.
pub fn conditional_mutual_information(
    rho: &DensityMatrix,
    x: &[&str],
    y: &[&str],
    given: &[&str],
) -> Result<f64> {
    check_disjoint(&[x, y, given])?;
    let m = rho.matrix();
    let sig = rho.sig();
    let sxz = marginal_entropy(m, sig, &union(&[x, given]))?;
    let syz = marginal_entropy(m, sig, &union(&[y, given]))?;
    let sz = marginal_entropy(m, sig, given)?;
    let sxyz = marginal_entropy(m, sig, &union(&[x, y, given]))?;
    Ok(sxz + syz - sz - sxyz)
}

/// Entropy of every single factor plus the joint entropy.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    pub subsystems: BTreeMap<String, f64>,
    pub joint: f64,
}

pub fn entropy_report(rho: &DensityMatrix) -> Result<EntropyReport> {
    let mut subsystems = BTreeMap::new();
    for label in rho.sig().labels() {
        subsystems.insert(label.clone(), subsystem_entropy(rho, &[label.as_str()])?);
    }
    Ok(EntropyReport {
        subsystems,
        joint: entropy(rho),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::Complex64;

    fn bell() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = [h, 0.0, 0.0, h].map(|x| Complex64::new(x, 0.0));
        let m = ComplexMatrix::outer(&v, &v);
        DensityMatrix::new(m, DimSig::new(vec![2, 2], vec!["R", "A"]).unwrap(), 1e-9).unwrap()
    }

    fn diag_state(diag: &[f64], dims: Vec<usize>, labels: Vec<&str>) -> DensityMatrix {
        DensityMatrix::new(
            ComplexMatrix::from_real_diag(diag),
            DimSig::new(dims, labels).unwrap(),
            1e-9,
        )
        .unwrap()
    }

    #[test]
    fn entropy_values() {
        let mixed = diag_state(&[0.5, 0.5], vec![2], vec!["S"]);
        assert!((entropy(&mixed) - 1.0).abs() < 1e-15);
        assert!(entropy(&bell()).abs() < 1e-12);
        // -(1/4) log2(1/4) - (3/4) log2(3/4) = 2 - (3/4) log2 3.
        let oracle = 2.0 - 0.75 * 3f64.log2();
        assert!((oracle - 0.811_278_124_459_132_8).abs() < 1e-15);
        let s = entropy(&diag_state(&[0.25, 0.75], vec![2], vec!["S"]));
        assert!((s - oracle).abs() < 1e-14);
    }

    #[test]
    fn mutual_information_cases() {
        let product = diag_state(
            &[0.25 * 0.6, 0.25 * 0.4, 0.75 * 0.6, 0.75 * 0.4],
            vec![2, 2],
            vec!["R", "A"],
        );
        assert!(mutual_information(&product, &["R"], &["A"]).unwrap().abs() < 1e-12);
        assert!((mutual_information(&bell(), &["R"], &["A"]).unwrap() - 2.0).abs() < 1e-12);
        let cc = diag_state(&[0.5, 0.0, 0.0, 0.5], vec![2, 2], vec!["R", "A"]);
        // Shannon oracle on the diagonal: H(R) + H(A) - H(RA) = 1 + 1 - 1.
        assert!((mutual_information(&cc, &["R"], &["A"]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_information_cases() {
        assert!((coherent_information(&bell(), &["A"], &["R"]).unwrap() - 1.0).abs() < 1e-12);
        let mixed = diag_state(&[0.25; 4], vec![2, 2], vec!["R", "A"]);
        assert!((coherent_information(&mixed, &["A"], &["R"]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn label_errors() {
        assert!(matches!(
            mutual_information(&bell(), &["R"], &["Q"]),
            Err(Error::UnknownLabel(_))
        ));
        assert!(matches!(
            mutual_information(&bell(), &["R"], &["R"]),
            Err(Error::LabelCollision(_))
        ));
    }

    #[test]
    fn ghz_conditional_mutual_information() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[0] = Complex64::new(h, 0.0);
        v[7] = Complex64::new(h, 0.0);
        let ghz = DensityMatrix::new(
            ComplexMatrix::outer(&v, &v),
            DimSig::new(vec![2, 2, 2], vec!["X", "Y", "Z"]).unwrap(),
            1e-9,
        )
        .unwrap();
        // Pure GHZ: S(XZ) = S(YZ) = S(Z) = 1 and S(XYZ) = 0, so I(X:Y|Z) = 1.
        // The dephased (classical) GHZ mixture has S(XYZ) = 1 and I(X:Y|Z) = 0.
        let cmi = conditional_mutual_information(&ghz, &["X"], &["Y"], &["Z"]).unwrap();
        assert!((cmi - 1.0).abs() < 1e-12);
        let dephased = diag_state(
            &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
            vec![2, 2, 2],
            vec!["X", "Y", "Z"],
        );
        let cmi = conditional_mutual_information(&dephased, &["X"], &["Y"], &["Z"]).unwrap();
        assert!(cmi.abs() < 1e-12);
    }

    #[test]
    fn report_lists_every_factor() {
        let r = entropy_report(&bell()).unwrap();
        assert_eq!(r.subsystems.len(), 2);
        assert!((r.subsystems["R"] - 1.0).abs() < 1e-12);
        assert!(r.joint.abs() < 1e-12);
    }
}
