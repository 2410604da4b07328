use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::ComplexMatrix;

/// Ordered tensor-factor dimensions with one label per factor.
///
/// The first factor is the most significant: a basis index of the whole
/// space is `i_0 * (d_1 * d_2 * ...) + i_1 * (d_2 * ...) + ... + i_last`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimSig {
    factors: Vec<usize>,
    labels: Vec<String>,
}

impl DimSig {
    pub fn new<S: Into<String>>(factors: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if factors.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors but {} labels",
                factors.len(),
                labels.len()
            )));
        }
        if factors.is_empty() {
            return Err(Error::DimensionMismatch("empty signature".into()));
        }
        if let Some(pos) = factors.iter().position(|&d| d == 0) {
            return Err(Error::DimensionMismatch(format!(
                "factor `{}` has dimension 0",
                labels[pos]
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::LabelCollision(l.clone()));
            }
        }
        Ok(Self { factors, labels })
    }

    /// Signature with conventional labels `R, A, B, C, ...`.
    pub fn with_default_labels(factors: Vec<usize>) -> Result<Self> {
        let labels = default_labels(factors.len());
        Self::new(factors, labels)
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of all factor dimensions.
    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?])
    }

    /// Signature restricted to `keep`, in the original factor order.
    pub fn restrict(&self, keep: &[&str]) -> Result<(Self, Vec<usize>)> {
        let mut positions = Vec::with_capacity(keep.len());
        for label in keep {
            let p = self.position(label)?;
            if positions.contains(&p) {
                return Err(Error::LabelCollision(label.to_string()));
            }
            positions.push(p);
        }
        positions.sort_unstable();
        let sig = Self {
            factors: positions.iter().map(|&p| self.factors[p]).collect(),
            labels: positions.iter().map(|&p| self.labels[p].clone()).collect(),
        };
        Ok((sig, positions))
    }

    /// Appends a factor at the least significant end.
    pub fn append(&self, dim: usize, label: &str) -> Result<Self> {
        let mut factors = self.factors.clone();
        let mut labels = self.labels.clone();
        factors.push(dim);
        labels.push(label.to_string());
        Self::new(factors, labels)
    }

    /// Prepends a factor at the most significant end.
    pub fn prepend(&self, dim: usize, label: &str) -> Result<Self> {
        let mut factors = vec![dim];
        let mut labels = vec![label.to_string()];
        factors.extend_from_slice(&self.factors);
        labels.extend(self.labels.iter().cloned());
        Self::new(factors, labels)
    }

    /// Merges the contiguous factors `from..to` into a single factor named `label`.
    pub fn merge(&self, from: usize, to: usize, label: &str) -> Result<Self> {
        if from >= to || to > self.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot merge factors {from}..{to} of a {}-factor signature",
                self.len()
            )));
        }
        let mut factors = self.factors[..from].to_vec();
        let mut labels = self.labels[..from].to_vec();
        factors.push(self.factors[from..to].iter().product());
        labels.push(label.to_string());
        factors.extend_from_slice(&self.factors[to..]);
        labels.extend(self.labels[to..].iter().cloned());
        Self::new(factors, labels)
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    const NAMES: [&str; 6] = ["R", "A", "B", "C", "D", "F"];
    if n <= NAMES.len() {
        NAMES[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (0..n).map(|i| format!("X{i}")).collect()
    }
}

/// Reduced matrix on the factors named in `keep`.
///
/// Kept factors appear in the order they have in `sig`, regardless of the
/// order of `keep`.
pub fn partial_trace(m: &ComplexMatrix, sig: &DimSig, keep: &[&str]) -> Result<ComplexMatrix> {
    let (_, positions) = sig.restrict(keep)?;
    partial_trace_positions(m, sig.factors(), &positions)
}

/// Partial trace keeping the factors at the (ascending) `positions`.
pub fn partial_trace_positions(
    m: &ComplexMatrix,
    factors: &[usize],
    positions: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = factors.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix against signature of total dimension {total}",
            m.rows(),
            m.cols()
        )));
    }
    let kept_dim: usize = positions.iter().map(|&p| factors[p]).product();
    let dropped_dim = total / kept_dim;
    if positions.len() == factors.len() {
        return Ok(m.clone());
    }

    // Split every full index into (kept index, dropped index).
    let n = factors.len();
    let mut keep_idx = vec![0usize; total];
    let mut drop_idx = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for full in 0..total {
        let mut rem = full;
        for f in (0..n).rev() {
            digits[f] = rem % factors[f];
            rem /= factors[f];
        }
        let (mut k, mut d) = (0usize, 0usize);
        for f in 0..n {
            if positions.contains(&f) {
                k = k * factors[f] + digits[f];
            } else {
                d = d * factors[f] + digits[f];
            }
        }
        keep_idx[full] = k;
        drop_idx[full] = d;
    }
    // Group full indices by dropped index; only matching groups contribute.
    let mut groups: Vec<Vec<usize>> = vec![Vec::with_capacity(kept_dim); dropped_dim];
    for full in 0..total {
        groups[drop_idx[full]].push(full);
    }
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &r in group {
            for &c in group {
                out[(keep_idx[r], keep_idx[c])] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::kron;

    #[test]
    fn signature_rejects_duplicates_and_zero_dims() {
        assert!(matches!(
            DimSig::new(vec![2, 2], vec!["R", "R"]),
            Err(Error::LabelCollision(_))
        ));
        assert!(DimSig::new(vec![2, 0], vec!["R", "A"]).is_err());
        assert!(DimSig::new(vec![2], vec!["R", "A"]).is_err());
    }

    #[test]
    fn product_state_marginal() {
        let a = ComplexMatrix::from_real_diag(&[0.25, 0.75]);
        let b = ComplexMatrix::from_real_diag(&[0.5, 0.3, 0.2]);
        let sig = DimSig::new(vec![2, 3], vec!["R", "A"]).unwrap();
        let m = kron(&a, &b);
        let r = partial_trace(&m, &sig, &["R"]).unwrap();
        assert!(r.max_abs_diff(&a) <= 1e-15);
        let aa = partial_trace(&m, &sig, &["A"]).unwrap();
        assert!(aa.max_abs_diff(&b) <= 1e-15);
    }

    #[test]
    fn keep_order_follows_signature() {
        let x = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let y = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let z = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        let sig = DimSig::new(vec![2, 2, 2], vec!["X", "Y", "Z"]).unwrap();
        let m = kron(&kron(&x, &y), &z);
        let a = partial_trace(&m, &sig, &["Z", "X"]).unwrap();
        let b = partial_trace(&m, &sig, &["X", "Z"]).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs_diff(&kron(&x, &z)) <= 1e-15);
    }

    #[test]
    fn errors_on_bad_input() {
        let sig = DimSig::new(vec![2, 2], vec!["R", "A"]).unwrap();
        let m = ComplexMatrix::identity(3);
        assert!(matches!(
            partial_trace(&m, &sig, &["R"]),
            Err(Error::DimensionMismatch(_))
        ));
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &sig, &["Q"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn merge_factors() {
        let sig = DimSig::new(vec![2, 2, 4], vec!["R", "A", "T"]).unwrap();
        let merged = sig.merge(1, 3, "AT").unwrap();
        assert_eq!(merged.factors(), &[2, 8]);
        assert_eq!(merged.labels(), &["R".to_string(), "AT".to_string()]);
    }
}
