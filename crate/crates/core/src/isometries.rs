//! Stinespring isometries `A -> B ⊗ E`: validation, the fixed constructions,
//! measurement isometries of rank-one POVMs and the generator parameterization
//! searched by the optimizer.
//!
//! Output rows are indexed `b * d_E + e`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::Full;
use crate::qmat::{expm_skew_unchecked, unitarity_defect, ComplexMatrix, DimSig, ONE, ZERO};

pub const ISOMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    matrix: ComplexMatrix,
    out_sig: DimSig,
    in_dim: usize,
}

impl Isometry {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn out_sig(&self) -> &DimSig {
        &self.out_sig
    }

    pub fn d_in(&self) -> usize {
        self.in_dim
    }

    pub fn d_b(&self) -> usize {
        self.out_sig.factors()[0]
    }

    pub fn d_e(&self) -> usize {
        self.out_sig.factors()[1]
    }

    /// Max entry of `V^dag V - I`.
    pub fn defect(&self) -> f64 {
        self.matrix.isometry_defect()
    }

    /// `V σ V^dag` on `B ⊗ E`.
    pub fn apply_to_operator(&self, sigma: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.conjugate(sigma)
    }

    /// The same map with the roles of `B` and `E` exchanged.
    pub fn swap_outputs(&self) -> Isometry {
        let (db, de) = (self.d_b(), self.d_e());
        let mut m = ComplexMatrix::zeros(db * de, self.in_dim);
        for b in 0..db {
            for e in 0..de {
                for a in 0..self.in_dim {
                    m[(e * db + b, a)] = self.matrix[(b * de + e, a)];
                }
            }
        }
        Isometry {
            matrix: m,
            out_sig: be_sig(de, db),
            in_dim: self.in_dim,
        }
    }

    /// Isometry file: `d_in`, `d_B`, `d_E` and the row-major matrix as `[re, im]` pairs.
    pub fn to_file(&self) -> IsometryFile<Full> {
        IsometryFile {
            d_in: self.in_dim,
            d_b: self.d_b(),
            d_e: self.d_e(),
            matrix: self
                .matrix
                .as_slice()
                .iter()
                .map(|z| [Full(z.re), Full(z.im)])
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("finite entries")
    }

    pub fn from_json(text: &str) -> Result<Isometry> {
        let file: IsometryFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let rows = file.d_b * file.d_e;
        let data = file
            .matrix
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let m = ComplexMatrix::from_vec(rows, file.d_in, data)?;
        validate_isometry(&m, file.d_in, file.d_b, file.d_e)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IsometryFile<T = f64> {
    pub d_in: usize,
    #[serde(rename = "d_B")]
    pub d_b: usize,
    #[serde(rename = "d_E")]
    pub d_e: usize,
    pub matrix: Vec<[T; 2]>,
}

fn be_sig(d_b: usize, d_e: usize) -> DimSig {
    DimSig::new(vec![d_b, d_e], vec!["B", "E"]).expect("positive dimensions")
}

fn wrap(matrix: ComplexMatrix, d_b: usize, d_e: usize) -> Isometry {
    let in_dim = matrix.cols();
    debug_assert!(matrix.isometry_defect() <= ISOMETRY_TOL);
    Isometry {
        matrix,
        out_sig: be_sig(d_b, d_e),
        in_dim,
    }
}

pub fn validate_isometry(m: &ComplexMatrix, d_a: usize, d_b: usize, d_e: usize) -> Result<Isometry> {
    if d_a == 0 || d_b == 0 || d_e == 0 || m.rows() != d_b * d_e || m.cols() != d_a {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for an isometry {d_a} -> {d_b}x{d_e}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.isometry_defect();
    if defect > ISOMETRY_TOL {
        return Err(Error::NotIsometry(defect));
    }
    Ok(Isometry {
        matrix: m.clone(),
        out_sig: be_sig(d_b, d_e),
        in_dim: d_a,
    })
}

/// First `d_a` columns of the identity on `B ⊗ E`.
pub fn identity_embedding(d_a: usize, d_b: usize, d_e: usize) -> Result<Isometry> {
    if d_a > d_b * d_e {
        return Err(Error::DimensionMismatch(format!(
            "cannot embed dimension {d_a} into {d_b}x{d_e}"
        )));
    }
    let mut m = ComplexMatrix::zeros(d_b * d_e, d_a);
    for a in 0..d_a {
        m[(a, a)] = ONE;
    }
    validate_isometry(&m, d_a, d_b, d_e)
}

fn require_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// `|ψ>_A -> |Φ⁺>_{B E1} ⊗ |ψ>_{E2}` with `E = E1 E2` of dimension `d²`.
pub fn twirl_isometry(d: usize) -> Result<Isometry> {
    require_d(d)?;
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut m = ComplexMatrix::zeros(d * d * d, d);
    for a in 0..d {
        for b in 0..d {
            m[(b * d * d + b * d + a, a)] = amp;
        }
    }
    Ok(wrap(m, d, d * d))
}

/// `e^k_j = ω^{jk} / √d`.
pub fn fourier_vector(d: usize, k: usize) -> Vec<Complex64> {
    let norm = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|j| Complex64::from_polar(norm, 2.0 * PI * ((j * k) % d) as f64 / d as f64))
        .collect()
}

/// `Σ_k |e^k>_B <e^k|_A ⊗ |e^k>_E` over the Fourier basis.
pub fn mub_shredder(d: usize) -> Result<Isometry> {
    require_d(d)?;
    let basis: Vec<Vec<Complex64>> = (0..d).map(|k| fourier_vector(d, k)).collect();
    let mut m = ComplexMatrix::zeros(d * d, d);
    for e_k in &basis {
        for b in 0..d {
            for e in 0..d {
                let out = e_k[b] * e_k[e];
                for a in 0..d {
                    m[(b * d + e, a)] += out * e_k[a].conj();
                }
            }
        }
    }
    Ok(wrap(m, d, d))
}

/// `I, X, Y, Z`.
pub fn paulis() -> [ComplexMatrix; 4] {
    let i = Complex64::new(0.0, 1.0);
    let mut y = ComplexMatrix::zeros(2, 2);
    y[(0, 1)] = -i;
    y[(1, 0)] = i;
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        y,
        ComplexMatrix::from_real_diag(&[1.0, -1.0]),
    ]
}

/// Controlled Pauli `Σ_t σ^t_A ⊗ |t><t|_Ã` on a qubit `A` and a four-level key `Ã`.
///
/// Input index `a * 4 + t`; outputs `B = A` (2) and `E = Ã` (4).
pub fn pauli_twirl_isometry() -> Isometry {
    let sigma = paulis();
    let mut m = ComplexMatrix::zeros(8, 8);
    for (t, s) in sigma.iter().enumerate() {
        for b in 0..2 {
            for a in 0..2 {
                m[(b * 4 + t, a * 4 + t)] = s[(b, a)];
            }
        }
    }
    wrap(m, 2, 4)
}

/// The four Bell vectors on two qubits, in the order
/// `(00+11), (00-11), (10+01), (10-01)`, each over √2.
pub fn bell_basis() -> [Vec<Complex64>; 4] {
    let h = FRAC_1_SQRT_2;
    let v = |x: [f64; 4]| x.iter().map(|&r| Complex64::new(r * h, 0.0)).collect::<Vec<_>>();
    [
        v([1.0, 0.0, 0.0, 1.0]),
        v([1.0, 0.0, 0.0, -1.0]),
        v([0.0, 1.0, 1.0, 0.0]),
        v([0.0, -1.0, 1.0, 0.0]),
    ]
}

/// Coherent Bell measurement `Σ_i |i>_B <e^i| ⊗ |i>_E` on a two-qubit input.
pub fn bell_shredder() -> Isometry {
    let mut m = ComplexMatrix::zeros(16, 4);
    for (i, e) in bell_basis().iter().enumerate() {
        for x in 0..4 {
            m[(i * 4 + i, x)] = e[x].conj();
        }
    }
    wrap(m, 4, 4)
}

/// Vectors `φ^m` with `Σ_m |φ^m><φ^m| = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOnePovm {
    vectors: Vec<Vec<Complex64>>,
}

impl RankOnePovm {
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = vectors.first().map(Vec::len).unwrap_or(0);
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch(
                "POVM vectors must be non-empty and of equal length".into(),
            ));
        }
        let mut sum = ComplexMatrix::zeros(d, d);
        for v in &vectors {
            sum = &sum + &ComplexMatrix::outer(v, v);
        }
        let defect = (&sum - &ComplexMatrix::identity(d)).max_abs();
        if defect > ISOMETRY_TOL {
            return Err(Error::IncompletePovm(defect));
        }
        Ok(Self { vectors })
    }

    pub fn computational(d: usize) -> Self {
        let vectors = (0..d)
            .map(|m| (0..d).map(|a| if a == m { ONE } else { ZERO }).collect())
            .collect();
        Self { vectors }
    }

    pub fn fourier(d: usize) -> Self {
        Self {
            vectors: (0..d).map(|k| fourier_vector(d, k)).collect(),
        }
    }

    /// POVM read off the rows of an `m x d` isometry `W`: `φ^m_a = conj(W[m, a])`.
    pub fn from_isometry_rows(w: &ComplexMatrix) -> Result<Self> {
        let defect = w.isometry_defect();
        if defect > ISOMETRY_TOL {
            return Err(Error::NotIsometry(defect));
        }
        let vectors = (0..w.rows())
            .map(|m| (0..w.cols()).map(|a| w[(m, a)].conj()).collect())
            .collect();
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }
}

/// `Σ_m (|m>_B ⊗ |m>_E) <φ^m|`, with `d_B = d_E` = number of elements.
pub fn povm_isometry(p: &RankOnePovm) -> Result<Isometry> {
    let n = p.len();
    let d = p.dim();
    let mut m = ComplexMatrix::zeros(n * n, d);
    for (k, phi) in p.vectors().iter().enumerate() {
        for a in 0..d {
            m[(k * n + k, a)] = phi[a].conj();
        }
    }
    validate_isometry(&m, d, n, n)
}

/// Number of real parameters for a generator on `n` dimensions.
pub fn parameter_count(n: usize) -> usize {
    n * n
}

/// Skew-Hermitian generator: `theta[..n]` are the imaginary diagonal parts,
/// then one `(re, im)` pair per strictly upper entry in row-major order.
pub fn generator(theta: &[f64], n: usize) -> Result<ComplexMatrix> {
    if theta.len() != parameter_count(n) {
        return Err(Error::DimensionMismatch(format!(
            "{} parameters for a {n}-dimensional generator (need {})",
            theta.len(),
            parameter_count(n)
        )));
    }
    let mut g = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        g[(k, k)] = Complex64::new(0.0, theta[k]);
    }
    let mut idx = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(theta[idx], theta[idx + 1]);
            g[(i, j)] = z;
            g[(j, i)] = -z.conj();
            idx += 2;
        }
    }
    Ok(g)
}

/// First `d_a` columns of `exp(G(theta))` on `B ⊗ E`.
pub fn from_parameters(theta: &[f64], d_a: usize, d_b: usize, d_e: usize) -> Result<Isometry> {
    let n = d_b * d_e;
    if d_a == 0 || d_a > n {
        return Err(Error::DimensionMismatch(format!(
            "input dimension {d_a} does not fit into {d_b}x{d_e}"
        )));
    }
    let m = parameter_matrix(theta, d_a, n)?;
    validate_isometry(&m, d_a, d_b, d_e)
}

/// The `n x d_a` matrix behind [`from_parameters`], without validation.
pub(crate) fn parameter_matrix(theta: &[f64], d_a: usize, n: usize) -> Result<ComplexMatrix> {
    let u = expm_skew_unchecked(&generator(theta, n)?);
    let mut m = ComplexMatrix::zeros(n, d_a);
    for i in 0..n {
        for a in 0..d_a {
            m[(i, a)] = u[(i, a)];
        }
    }
    Ok(m)
}

/// `W = Σ_i √p_i U_i ⊗ |i>_E`, with `d_B = d` and `d_E` = number of terms.
pub fn random_unitary_channel_dilation(unitaries: &[ComplexMatrix], p: &[f64]) -> Result<Isometry> {
    if unitaries.is_empty() || unitaries.len() != p.len() {
        return Err(Error::InvalidProbabilities(format!(
            "{} unitaries but {} probabilities",
            unitaries.len(),
            p.len()
        )));
    }
    if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("{p:?}")));
    }
    let d = unitaries[0].rows();
    for u in unitaries {
        if !u.is_square() || u.rows() != d {
            return Err(Error::DimensionMismatch("unitaries differ in dimension".into()));
        }
        let defect = unitarity_defect(u);
        if defect > ISOMETRY_TOL {
            return Err(Error::NotUnitary(defect));
        }
    }
    let k = p.len();
    let mut m = ComplexMatrix::zeros(d * k, d);
    for (i, (u, pi)) in unitaries.iter().zip(p).enumerate() {
        let amp = pi.sqrt();
        for b in 0..d {
            for a in 0..d {
                m[(b * k + i, a)] = u[(b, a)] * amp;
            }
        }
    }
    validate_isometry(&m, d, d, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropics::mutual_information;
    use crate::pqd::apply_isometry;
    use crate::qmat::{kron, partial_trace_positions, DensityMatrix};
    use crate::states::{
        classically_correlated_diagonal, max_entangled, random_density, random_density_on,
        random_unitary,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mis(rho: &DensityMatrix, v: &Isometry) -> (f64, f64) {
        let s = apply_isometry(rho, v).unwrap();
        (
            mutual_information(&s, &["R"], &["B"]).unwrap(),
            mutual_information(&s, &["R"], &["E"]).unwrap(),
        )
    }

    fn random_theta(n: usize, seed: u64, scale: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n * n).map(|_| scale * (rng.random::<f64>() * 2.0 - 1.0)).collect()
    }

    #[test]
    fn validation() {
        let id = ComplexMatrix::identity(4);
        let mut cols = ComplexMatrix::zeros(4, 2);
        for i in 0..4 {
            for j in 0..2 {
                cols[(i, j)] = id[(i, j)];
            }
        }
        assert!(validate_isometry(&cols, 2, 2, 2).is_ok());
        cols[(1, 1)] = Complex64::new(2.0, 0.0);
        assert!(matches!(validate_isometry(&cols, 2, 2, 2), Err(Error::NotIsometry(_))));
        assert!(matches!(
            validate_isometry(&cols, 2, 3, 2),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn twirl_channel_outputs() {
        for d in 2..=3 {
            let v = twirl_isometry(d).unwrap();
            let sigma = random_density(d, d, 40 + d as u64).unwrap();
            let out = v.apply_to_operator(sigma.matrix());
            let factors = [d, d, d];
            let b = partial_trace_positions(&out, &factors, &[0]).unwrap();
            let mixed = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
            assert!(b.max_abs_diff(&mixed) <= 1e-12);
            let e = partial_trace_positions(&out, &factors, &[1, 2]).unwrap();
            assert!(e.max_abs_diff(&kron(&mixed, sigma.matrix())) <= 1e-12);
        }
        let (rb, re) = mis(&max_entangled(2).unwrap().to_density(), &twirl_isometry(2).unwrap());
        assert!(rb.abs() <= 1e-9);
        assert!((re - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn fourier_basis_is_unbiased() {
        for d in 2..=5 {
            for k in 0..d {
                for x in fourier_vector(d, k) {
                    assert!((x.norm_sqr() - 1.0 / d as f64).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn mub_shredder_behaviour() {
        for d in 2..=5 {
            let v = mub_shredder(d).unwrap();
            assert!(v.defect() <= 1e-12);
            let p: Vec<f64> = (0..d).map(|i| (i + 1) as f64).collect();
            let total: f64 = p.iter().sum();
            let p: Vec<f64> = p.iter().map(|x| x / total).collect();
            let rho = classically_correlated_diagonal(&p).unwrap();
            let s = apply_isometry(&rho, &v).unwrap();
            let r = rho.reduce(&["R"]).unwrap();
            let mixed = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
            for keep in [["R", "B"], ["R", "E"]] {
                let red = s.reduce(&keep).unwrap();
                assert!(red.matrix().max_abs_diff(&kron(r.matrix(), &mixed)) <= 1e-9);
            }
        }
        let (rb, re) = mis(&max_entangled(2).unwrap().to_density(), &mub_shredder(2).unwrap());
        assert!((rb - 1.0).abs() <= 1e-9 && (re - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn pauli_twirl_is_unitary() {
        let v = pauli_twirl_isometry();
        assert!(unitarity_defect(v.matrix()) <= 1e-12);
    }

    #[test]
    fn bell_shredder_is_isometric() {
        let v = bell_shredder();
        assert!(v.defect() <= 1e-12);
        assert_eq!((v.d_b(), v.d_e(), v.d_in()), (4, 4, 4));
    }

    #[test]
    fn povm_construction() {
        let comp = povm_isometry(&RankOnePovm::computational(2)).unwrap();
        let (rb, re) = mis(&max_entangled(2).unwrap().to_density(), &comp);
        assert!((rb - 1.0).abs() <= 1e-9 && (re - 1.0).abs() <= 1e-9);

        let cc = classically_correlated_diagonal(&[0.5, 0.5]).unwrap();
        let (rb, re) = mis(&cc, &povm_isometry(&RankOnePovm::fourier(2)).unwrap());
        assert!(rb.abs() <= 1e-9 && re.abs() <= 1e-9);

        let bad = vec![vec![ONE, ZERO], vec![ONE, ZERO]];
        assert!(matches!(RankOnePovm::new(bad), Err(Error::IncompletePovm(_))));
    }

    #[test]
    fn povm_outputs_are_symmetric() {
        let sig = DimSig::new(vec![2, 3], vec!["R", "A"]).unwrap();
        for seed in 0..10 {
            let rho = random_density_on(&sig, 3, seed).unwrap();
            let w = from_parameters(&random_theta(4, seed, 2.0), 3, 4, 1).unwrap();
            let p = RankOnePovm::from_isometry_rows(w.matrix()).unwrap();
            assert!(RankOnePovm::new(p.vectors().to_vec()).is_ok());
            let v = povm_isometry(&p).unwrap();
            let (rb, re) = mis(&rho, &v);
            assert!((rb - re).abs() <= 1e-9);
            let (rb2, re2) = mis(&rho, &v.swap_outputs());
            assert!((rb - re2).abs() <= 1e-9 && (re - rb2).abs() <= 1e-9);
        }
    }

    #[test]
    fn parameterization() {
        let v = from_parameters(&vec![0.0; 16], 2, 2, 2).unwrap();
        assert_eq!(v, identity_embedding(2, 2, 2).unwrap());
        for seed in 0..20 {
            let v = from_parameters(&random_theta(6, seed, 3.0), 3, 3, 2).unwrap();
            assert!(v.defect() <= 1e-9);
        }
        assert!(from_parameters(&[0.0; 3], 2, 2, 2).is_err());
        assert!(from_parameters(&vec![0.0; 16], 5, 2, 2).is_err());
    }

    #[test]
    fn parameterization_is_lipschitz_on_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..10 {
            let theta = random_theta(4, seed, 1.0);
            let v0 = from_parameters(&theta, 2, 2, 2).unwrap();
            for step in [1e-3, 1e-5] {
                let delta: Vec<f64> = (0..16).map(|_| step * (rng.random::<f64>() * 2.0 - 1.0)).collect();
                let dnorm = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
                let shifted: Vec<f64> = theta.iter().zip(&delta).map(|(a, b)| a + b).collect();
                let v1 = from_parameters(&shifted, 2, 2, 2).unwrap();
                let diff = (v1.matrix() - v0.matrix()).frobenius_norm();
                assert!(diff <= 4.0 * dnorm, "{diff} vs {dnorm}");
            }
        }
    }

    #[test]
    fn random_unitary_dilations() {
        let rho = random_density_on(&DimSig::new(vec![2, 2], vec!["R", "A"]).unwrap(), 4, 5).unwrap();
        let r = rho.reduce(&["R"]).unwrap();

        let single = random_unitary_channel_dilation(&[random_unitary(2, 1).unwrap()], &[1.0]).unwrap();
        let (_, re) = mis(&rho, &single);
        assert!(re.abs() <= 1e-9);

        let us = [random_unitary(2, 2).unwrap(), random_unitary(2, 3).unwrap()];
        let w = random_unitary_channel_dilation(&us, &[0.5, 0.5]).unwrap();
        assert!(w.defect() <= 1e-12);
        let s = apply_isometry(&rho, &w).unwrap();
        let re_state = s.reduce(&["R", "E"]).unwrap();
        // Diagonal pointer blocks of ς_RE.
        for m in 0..2 {
            let mut block = ComplexMatrix::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    block[(i, j)] = re_state.matrix()[(i * 2 + m, j * 2 + m)];
                }
            }
            let pm = block.trace().re;
            assert!((pm - 0.5).abs() <= 1e-9);
            assert!(block.scale_real(1.0 / pm).max_abs_diff(r.matrix()) <= 1e-9);
        }

        assert!(random_unitary_channel_dilation(&us, &[0.7, 0.7]).is_err());
        let not_unitary = [ComplexMatrix::from_real_diag(&[1.0, 0.5])];
        assert!(matches!(
            random_unitary_channel_dilation(&not_unitary, &[1.0]),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let v = from_parameters(&random_theta(4, 3, 2.0), 2, 2, 2).unwrap();
        let back = Isometry::from_json(&v.to_json()).unwrap();
        assert_eq!(back, v);
        assert!(v.to_json().contains("\"d_B\""));
    }
}
