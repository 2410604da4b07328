//! State constructors, seeded samplers, purification and the state file schema.
//!
//! Every sampler owns a fresh ChaCha8 generator seeded from its `seed`
//! argument; composite samplers derive substream seeds by addition.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::Full;
use crate::qmat::{
    default_labels, eig_hermitian, kron, kron_vec, ComplexMatrix, DimSig, ZERO,
};

pub use crate::qmat::{DensityMatrix, DENSITY_TOL};

/// Unit vector under a dimension signature.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: Vec<Complex64>,
    sig: DimSig,
}

pub const NORM_TOL: f64 = 1e-10;

impl PureState {
    pub fn new(vector: Vec<Complex64>, sig: DimSig) -> Result<Self> {
        if vector.len() != sig.total() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for signature {:?}",
                vector.len(),
                sig.factors()
            )));
        }
        let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { vector, sig })
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn sig(&self) -> &DimSig {
        &self.sig
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The projector |ψ><ψ|.
    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_parts_unchecked(
            ComplexMatrix::outer(&self.vector, &self.vector),
            self.sig.clone(),
        )
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

fn bipartite_sig(d_r: usize, d_a: usize) -> DimSig {
    DimSig::new(vec![d_r, d_a], vec!["R", "A"]).expect("positive dimensions")
}

/// `d^{-1/2} Σ_i |ii>` on `R ⊗ A`.
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    let mut v = vec![ZERO; d * d];
    let amp = (1.0 / d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = Complex64::new(amp, 0.0);
    }
    PureState::new(v, bipartite_sig(d, d))
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty".into()));
    }
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidProbabilities(format!("entry {x} is negative")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidProbabilities(format!("sums to {total}")));
    }
    Ok(())
}

/// `Σ_i p_i ρ_R^i ⊗ |i><i|_A` with `d_A = p.len()`.
pub fn classically_correlated(p: &[f64], conditionals: &[DensityMatrix]) -> Result<DensityMatrix> {
    check_probabilities(p)?;
    if conditionals.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities but {} conditional states",
            p.len(),
            conditionals.len()
        )));
    }
    let d_r = conditionals[0].dim();
    if conditionals.iter().any(|c| c.dim() != d_r) {
        return Err(Error::DimensionMismatch(
            "conditional states differ in dimension".into(),
        ));
    }
    let d_a = p.len();
    let mut out = ComplexMatrix::zeros(d_r * d_a, d_r * d_a);
    for (i, (&pi, rho)) in p.iter().zip(conditionals).enumerate() {
        if pi == 0.0 {
            continue;
        }
        let term = kron(
            &rho.matrix().scale_real(pi),
            &ComplexMatrix::basis_projector(d_a, i),
        );
        out = &out + &term;
    }
    DensityMatrix::new(out, bipartite_sig(d_r, d_a), DENSITY_TOL)
}

/// The classically correlated state with orthonormal conditionals `|i><i|_R`.
pub fn classically_correlated_diagonal(p: &[f64]) -> Result<DensityMatrix> {
    let d = p.len();
    let sig = DimSig::new(vec![d], vec!["R"])?;
    let conditionals: Vec<DensityMatrix> = (0..d)
        .map(|i| DensityMatrix::from_parts_unchecked(ComplexMatrix::basis_projector(d, i), sig.clone()))
        .collect();
    classically_correlated(p, &conditionals)
}

/// `ρ ⊗ I_m / m`, with the new factor appended as `label`.
pub fn append_maximally_mixed(rho: &DensityMatrix, m: usize, label: &str) -> Result<DensityMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter("ancilla dimension must be >= 1".into()));
    }
    let sig = rho.sig().append(m, label)?;
    let mixed = ComplexMatrix::identity(m).scale_real(1.0 / m as f64);
    Ok(DensityMatrix::from_parts_unchecked(
        kron(rho.matrix(), &mixed),
        sig,
    ))
}

/// `f Φ⁺ + (1 - f) (I - Φ⁺) / (d² - 1)` on `R ⊗ A`.
pub fn isotropic(d: usize, f: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!("fidelity {f} outside [0, 1]")));
    }
    let phi = max_entangled(d)?.to_density();
    let n = d * d;
    let rest = &ComplexMatrix::identity(n) - phi.matrix();
    let m = &phi.matrix().scale_real(f) + &rest.scale_real((1.0 - f) / (n as f64 - 1.0));
    DensityMatrix::new(m, bipartite_sig(d, d), DENSITY_TOL)
}

fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("shape")
}

/// `G G^dag / Tr(G G^dag)` for a `d x rank` Ginibre matrix `G`.
///
/// The result carries a single factor labelled `S`; use
/// [`DensityMatrix::with_sig`] or [`random_density_on`] to attach a
/// composite signature.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let sig = DimSig::new(vec![d], vec!["S"])?;
    random_density_on(&sig, rank, seed)
}

pub fn random_density_on(sig: &DimSig, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let d = sig.total();
    if rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} outside 1..={d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(d, rank, &mut rng);
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    let mut m = w.scale_real(1.0 / tr);
    // Exact Hermiticity; the product is Hermitian only up to rounding.
    for i in 0..d {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..d {
            let z = m[(i, j)];
            m[(j, i)] = z.conj();
        }
    }
    DensityMatrix::new(m, sig.clone(), DENSITY_TOL)
}

/// Normalized complex Gaussian vector on the given factors, labelled `R, A, B, ...`.
pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    let sig = DimSig::new(dims.to_vec(), default_labels(dims.len()))?;
    random_pure_on(&sig, seed)
}

pub fn random_pure_on(sig: &DimSig, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..sig.total()).map(|_| gaussian(&mut rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    PureState::new(v, sig.clone())
}

/// `Σ_k q_k ρ_R^k ⊗ ρ_A^k` with flat-Dirichlet weights and full-rank random factors.
pub fn random_separable(d_r: usize, d_a: usize, terms: usize, seed: u64) -> Result<DensityMatrix> {
    if terms == 0 {
        return Err(Error::InvalidParameter("need at least one term".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..terms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let n = d_r * d_a;
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, q) in weights.iter().enumerate() {
        let k = k as u64;
        let r = random_density(d_r, d_r, seed.wrapping_add(1 + 2 * k))?;
        let a = random_density(d_a, d_a, seed.wrapping_add(2 + 2 * k))?;
        out = &out + &kron(r.matrix(), a.matrix()).scale_real(*q);
    }
    DensityMatrix::new(out, bipartite_sig(d_r, d_a), DENSITY_TOL)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(d: usize, seed: u64) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(d, d, &mut rng);
    // Modified Gram-Schmidt leaves R with a positive real diagonal, which is
    // the phase convention that makes Q Haar distributed.
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|j| g.column(j)).collect();
    for j in 0..d {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let qk = &done[k];
            let proj: Complex64 = qk.iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, q) in rest[0].iter_mut().zip(qk) {
                *x -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            u[(i, j)] = *z;
        }
    }
    Ok(u)
}

/// Eigenvalues at or below this are dropped from a purification.
pub const PURIFY_RANK_TOL: f64 = 1e-12;

/// Spectral purification `Σ_i √λ_i |i>_S |v_i>` with `dim S = rank ρ`.
///
/// The purifying factor is prepended, so the result lives on `S ⊗ (original)`.
pub fn purify(rho: &DensityMatrix, new_label: &str) -> Result<PureState> {
    let eig = eig_hermitian(rho.matrix())?;
    let kept: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > PURIFY_RANK_TOL)
        .collect();
    let rank = kept.len().max(1);
    let d = rho.dim();
    let sig = rho.sig().prepend(rank, new_label)?;
    let mut v = vec![ZERO; rank * d];
    for (s, &k) in kept.iter().enumerate() {
        let amp = eig.values[k].sqrt();
        for x in 0..d {
            v[s * d + x] = eig.vectors[(x, k)] * amp;
        }
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    PureState::new(v, sig)
}

/// Product of pure states, in order.
pub fn tensor_pure(a: &PureState, b: &PureState) -> Result<PureState> {
    let mut sig = a.sig().clone();
    for (d, l) in b.sig().factors().iter().zip(b.sig().labels()) {
        sig = sig.append(*d, l)?;
    }
    PureState::new(kron_vec(a.vector(), b.vector()), sig)
}

/// On-disk state schema: labels, factor dimensions and the row-major
/// matrix as `[re, im]` pairs.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateFile<T = f64> {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub matrix: Vec<[T; 2]>,
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    let file = StateFile {
        labels: rho.sig().labels().to_vec(),
        dims: rho.sig().factors().to_vec(),
        matrix: rho
            .matrix()
            .as_slice()
            .iter()
            .map(|z| [Full(z.re), Full(z.im)])
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("finite entries")
}

/// Parses and validates a state file (tolerance [`DENSITY_TOL`]).
pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    state_from_json_with_tol(text, DENSITY_TOL)
}

pub fn state_from_json_with_tol(text: &str, tol: f64) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let sig = DimSig::new(file.dims, file.labels)?;
    let n = sig.total();
    let entries = file
        .matrix
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    let m = ComplexMatrix::from_vec(n, n, entries)?;
    DensityMatrix::new(m, sig, tol)
}
