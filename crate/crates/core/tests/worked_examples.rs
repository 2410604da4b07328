use pqd_core::entropics::subsystem_entropy;
use pqd_core::pqd::{
    optimize_xi, povm_upper, rates_sweep, Epsilon, OptimizerOptions, FEASIBILITY_SLACK,
};
use pqd_core::qmat::{kron, partial_trace, ComplexMatrix, DensityMatrix, DimSig};
use pqd_core::scenarios::{bell_plus_bit, classical_state, run_all, SCENARIOS};
use pqd_core::states::{random_density, random_density_on, random_pure};

#[test]
fn partial_traces_of_three_factors() {
    let sig = DimSig::new(vec![2, 3, 2], vec!["X", "Y", "Z"]).unwrap();
    let rho = random_density_on(&sig, 5, 3).unwrap();
    for keep in [&["X"][..], &["Y"], &["Z"], &["X", "Z"], &["Y", "Z"]] {
        let m = partial_trace(rho.matrix(), &sig, keep).unwrap();
        let tr = m.trace();
        assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
    }
    // Tracing a factor out of a product returns the other factor.
    let a = random_density(2, 2, 4).unwrap();
    let b = random_density(3, 1, 5).unwrap();
    let ab = kron(a.matrix(), b.matrix());
    let sig2 = DimSig::new(vec![2, 3], vec!["P", "Q"]).unwrap();
    let back = partial_trace(&ab, &sig2, &["P"]).unwrap();
    let diff = back
        .as_slice()
        .iter()
        .zip(a.matrix().as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    assert!(diff < 1e-14);
    assert!((ab.trace().re - 1.0).abs() < 1e-14);
}

#[test]
fn bell_with_private_bit_decouples_at_zero_cap() {
    let rho = bell_plus_bit().unwrap();
    let opts = OptimizerOptions { restarts: 2, ..Default::default() };
    let out = optimize_xi(&rho, Epsilon::Finite(0.0), &opts).unwrap();
    assert!(out.feasible);
    assert!(out.i_re <= FEASIBILITY_SLACK);
    assert!(out.i_rb <= 1e-4, "i_rb = {}", out.i_rb);
}

#[test]
fn povm_bound_on_pure_and_product_states() {
    let opts = OptimizerOptions { restarts: 4, ..Default::default() };
    let psi = random_pure(&[2, 2], 21).unwrap().to_density();
    let s_r = subsystem_entropy(&psi, &["R"]).unwrap();
    assert!((povm_upper(&psi, &opts).unwrap() - s_r).abs() <= 0.02);

    let a = random_density(2, 2, 22).unwrap();
    let b = random_density(2, 2, 23).unwrap();
    let sig = DimSig::new(vec![2, 2], vec!["R", "A"]).unwrap();
    let product = DensityMatrix::new(kron(a.matrix(), b.matrix()), sig, 1e-9).unwrap();
    assert!(povm_upper(&product, &opts).unwrap() <= 1e-6);
}

#[test]
fn sweeps_on_uncorrelated_and_classical_states() {
    let opts = OptimizerOptions { restarts: 3, max_iterations: 500, ..Default::default() };
    let sig = DimSig::new(vec![2, 2], vec!["R", "A"]).unwrap();
    let product = DensityMatrix::new(
        ComplexMatrix::from_real_diag(&[0.1, 0.3, 0.15, 0.45]),
        sig,
        1e-9,
    )
    .unwrap();
    for p in rates_sweep(&product, &[0.0, 0.1, 0.3], &opts).unwrap().points {
        assert!(p.xi_raw.abs() <= 1e-6);
    }
    let classical = classical_state(&[0.3, 0.7], 5).unwrap();
    for p in rates_sweep(&classical, &[0.0, 0.1, 0.3], &opts).unwrap().points {
        assert!(p.feasible && p.xi_raw <= 1e-4, "eps {} xi {}", p.eps, p.xi_raw);
    }
}

#[test]
fn every_scenario_passes() {
    let reports = run_all(42).unwrap();
    assert_eq!(reports.len(), SCENARIOS.len());
    for r in &reports {
        assert!(r.passed, "{} failed: {:?}", r.name, r.metrics);
    }
}
