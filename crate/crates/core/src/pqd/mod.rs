//! Decoupling scores, closed-form bounds, the constrained optimizer and the
//! rates sweep.
//!
//! Bipartite inputs carry two factors: the reference first, then `A`.
//! Applying an isometry yields `[reference, B, E]`.

mod bounds;
mod optimizer;
mod sweep;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::entropics::{entropy_of, mutual_information, shannon_bits};
use crate::error::{Error, Result};
use crate::format::{fmt12, round12};
use crate::isometries::Isometry;
use crate::qmat::{eigvals_unchecked, ComplexMatrix, DensityMatrix, DimSig, ZERO};

pub use bounds::{bounds_report, BoundsReport, HALF_QMI_SLACK, PROP1_SLACK};
pub use optimizer::{
    optimize_xi, povm_search, povm_upper, DecouplingOutcome, OptimizerOptions, PovmOutcome,
    FEASIBILITY_SLACK,
};
pub use sweep::{rates_sweep, SweepPoint, SweepResult, SWEEP_CSV_HEADER};

/// Privacy parameter in bits; `Unbounded` is a sentinel, never a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Epsilon {
    Finite(f64),
    Unbounded,
}

impl Epsilon {
    pub fn finite(x: f64) -> Result<Self> {
        let e = Epsilon::Finite(x);
        e.check()?;
        Ok(e)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Epsilon::Finite(x) => Some(*x),
            Epsilon::Unbounded => None,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Epsilon::Unbounded)
    }

    /// `true` when `x` is within the cap (plus `slack`).
    pub fn admits(&self, x: f64, slack: f64) -> bool {
        match self {
            Epsilon::Finite(e) => x <= e + slack,
            Epsilon::Unbounded => true,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        match self {
            Epsilon::Finite(x) if !(x.is_finite() && *x >= 0.0) => Err(Error::InvalidParameter(
                format!("epsilon must be a nonnegative number or inf, got {x}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Finite(x) => f.write_str(&fmt12(*x)),
            Epsilon::Unbounded => f.write_str("inf"),
        }
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "unbounded" => Ok(Epsilon::Unbounded),
            t => {
                let x: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("cannot parse epsilon `{t}`")))?;
                if x.is_infinite() && x > 0.0 {
                    return Err(Error::InvalidParameter(
                        "write `inf` for an unbounded epsilon".into(),
                    ));
                }
                Epsilon::finite(x)
            }
        }
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Epsilon::Finite(x) => s.serialize_f64(round12(*x)),
            Epsilon::Unbounded => s.serialize_str("inf"),
        }
    }
}

fn check_bipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.sig().len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a bipartite state (reference, A), got factors {:?}",
            rho.sig().labels()
        )));
    }
    Ok(())
}

fn labels(rho: &DensityMatrix) -> (&str, &str) {
    let l = rho.sig().labels();
    (l[0].as_str(), l[1].as_str())
}

/// `(1_R ⊗ V) ρ (1_R ⊗ V)^dag`, labelled `[reference, B, E]`.
pub fn apply_isometry(rho: &DensityMatrix, v: &Isometry) -> Result<DensityMatrix> {
    check_bipartite(rho)?;
    let d_r = rho.sig().factors()[0];
    let d_a = rho.sig().factors()[1];
    if v.d_in() != d_a {
        return Err(Error::DimensionMismatch(format!(
            "isometry on dimension {} applied to a system of dimension {d_a}",
            v.d_in()
        )));
    }
    let reference = labels(rho).0;
    if reference == "B" || reference == "E" {
        return Err(Error::LabelCollision(reference.to_string()));
    }
    let sig = DimSig::new(vec![d_r, v.d_b(), v.d_e()], vec![reference, "B", "E"])?;
    let m = lift(rho.matrix(), v.matrix(), d_r, d_a);
    Ok(DensityMatrix::from_parts_unchecked(m, sig))
}

/// `(1 ⊗ V) ρ (1 ⊗ V)^dag` for an `n x d_a` matrix `V`.
fn lift(rho: &ComplexMatrix, v: &ComplexMatrix, d_r: usize, d_a: usize) -> ComplexMatrix {
    let n = v.rows();
    let cols = d_r * d_a;
    // t = (1 ⊗ V) ρ
    let mut t = ComplexMatrix::zeros(d_r * n, cols);
    for r in 0..d_r {
        for o in 0..n {
            for c in 0..cols {
                let mut acc = ZERO;
                for a in 0..d_a {
                    acc += v[(o, a)] * rho[(r * d_a + a, c)];
                }
                t[(r * n + o, c)] = acc;
            }
        }
    }
    let mut out = ComplexMatrix::zeros(d_r * n, d_r * n);
    for row in 0..d_r * n {
        for r in 0..d_r {
            for o in 0..n {
                let mut acc = ZERO;
                for a in 0..d_a {
                    acc += t[(row, r * d_a + a)] * v[(o, a)].conj();
                }
                out[(row, r * n + o)] = acc;
            }
        }
    }
    out
}

/// `(I(R:B), I(R:E), swapped)` after relabelling so that `I(R:E) <= I(R:B)`.
pub fn decoupling_scores(sigma: &DensityMatrix) -> Result<(f64, f64, bool)> {
    let sig = sigma.sig();
    if sig.len() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "expected three factors (reference, B, E), got {:?}",
            sig.labels()
        )));
    }
    let pb = sig.position("B")?;
    let pe = sig.position("E")?;
    let pr = (0..3).find(|p| *p != pb && *p != pe).expect("three factors");
    let reference = sig.labels()[pr].as_str();
    let rb = mutual_information(sigma, &[reference], &["B"])?;
    let re = mutual_information(sigma, &[reference], &["E"])?;
    Ok(canonical(rb, re))
}

fn canonical(rb: f64, re: f64) -> (f64, f64, bool) {
    if re > rb {
        (re, rb, true)
    } else {
        (rb, re, false)
    }
}

/// `S(R) - S(RA)`.
pub fn coherent_a_to_r(rho: &DensityMatrix) -> Result<f64> {
    check_bipartite(rho)?;
    let (r, _) = labels(rho);
    Ok(crate::entropics::subsystem_entropy(rho, &[r])? - crate::entropics::entropy(rho))
}

pub fn qmi(rho: &DensityMatrix) -> Result<f64> {
    check_bipartite(rho)?;
    let (r, a) = labels(rho);
    mutual_information(rho, &[r], &[a])
}

/// `max{2 I_c - ε, I_c, 0}`, or `max{I_c, 0}` when ε is unbounded.
pub fn prop1_lower(rho: &DensityMatrix, eps: Epsilon) -> Result<f64> {
    eps.check()?;
    let ic = coherent_a_to_r(rho)?;
    Ok(match eps {
        Epsilon::Finite(e) => (2.0 * ic - e).max(ic).max(0.0),
        Epsilon::Unbounded => ic.max(0.0),
    })
}

/// `I(R:A) / 2`.
pub fn half_qmi_upper(rho: &DensityMatrix) -> Result<f64> {
    Ok(qmi(rho)? / 2.0)
}

/// `max{I_c, 0}`.
pub fn xi_infinity(rho: &DensityMatrix) -> Result<f64> {
    Ok(coherent_a_to_r(rho)?.max(0.0))
}

/// Cached pieces of a bipartite input for repeated scoring.
pub(crate) struct Scorer {
    rho: ComplexMatrix,
    d_r: usize,
    d_a: usize,
    s_r: f64,
}

impl Scorer {
    pub(crate) fn new(rho: &DensityMatrix) -> Result<Self> {
        check_bipartite(rho)?;
        let (r, _) = labels(rho);
        Ok(Self {
            rho: rho.matrix().clone(),
            d_r: rho.sig().factors()[0],
            d_a: rho.sig().factors()[1],
            s_r: crate::entropics::subsystem_entropy(rho, &[r])?,
        })
    }

    pub(crate) fn d_a(&self) -> usize {
        self.d_a
    }

    /// Raw `(I(R:B), I(R:E))` for an `(d_b d_e) x d_a` isometry matrix.
    pub(crate) fn raw(&self, v: &ComplexMatrix, d_b: usize, d_e: usize) -> (f64, f64) {
        let d_r = self.d_r;
        let s = lift(&self.rho, v, d_r, self.d_a);
        let n = d_b * d_e;
        let mut rb = ComplexMatrix::zeros(d_r * d_b, d_r * d_b);
        let mut re = ComplexMatrix::zeros(d_r * d_e, d_r * d_e);
        for r in 0..d_r {
            for r2 in 0..d_r {
                for b in 0..d_b {
                    for e in 0..d_e {
                        for x in 0..d_b.max(d_e) {
                            if x < d_b {
                                rb[(r * d_b + b, r2 * d_b + x)] +=
                                    s[(r * n + b * d_e + e, r2 * n + x * d_e + e)];
                            }
                            if x < d_e {
                                re[(r * d_e + e, r2 * d_e + x)] +=
                                    s[(r * n + b * d_e + e, r2 * n + b * d_e + x)];
                            }
                        }
                    }
                }
            }
        }
        let i_rb = self.s_r + entropy_of(&trace_out_first(&rb, d_r, d_b)) - entropy_of(&rb);
        let i_re = self.s_r + entropy_of(&trace_out_first(&re, d_r, d_e)) - entropy_of(&re);
        (i_rb, i_re)
    }

    /// `I(R:B)` for the measurement isometry of the POVM read off the rows
    /// of the `m x d_a` isometry `w`.
    pub(crate) fn povm_rb(&self, w: &ComplexMatrix) -> f64 {
        let (d_r, d_a) = (self.d_r, self.d_a);
        let mut probs = Vec::with_capacity(w.rows());
        let mut joint = Vec::new();
        for k in 0..w.rows() {
            // Unnormalized conditional state of R given outcome k.
            let mut block = ComplexMatrix::zeros(d_r, d_r);
            for r in 0..d_r {
                for r2 in 0..d_r {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..d_a {
                        for a2 in 0..d_a {
                            acc += w[(k, a)] * self.rho[(r * d_a + a, r2 * d_a + a2)] * w[(k, a2)].conj();
                        }
                    }
                    block[(r, r2)] = acc;
                }
            }
            probs.push(block.trace().re);
            joint.extend(eigvals_unchecked(&block));
        }
        self.s_r + shannon_bits(&probs) - shannon_bits(&joint)
    }
}

fn trace_out_first(m: &ComplexMatrix, d_first: usize, d_rest: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d_rest, d_rest);
    for f in 0..d_first {
        for i in 0..d_rest {
            for j in 0..d_rest {
                out[(i, j)] += m[(f * d_rest + i, f * d_rest + j)];
            }
        }
    }
    out
}
