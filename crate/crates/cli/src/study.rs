use rayon::prelude::*;
use serde::Serialize;

use pqd_core::format::fmt12;
use pqd_core::pqd::{
    coherent_a_to_r, half_qmi_upper, optimize_xi, povm_upper, prop1_lower, qmi, xi_infinity,
    Epsilon, OptimizerOptions, FEASIBILITY_SLACK,
};
use pqd_core::qmat::DimSig;
use pqd_core::states::random_density_on;

#[derive(Serialize)]
struct Row {
    sample: usize,
    seed: u64,
    rank: usize,
    qmi: String,
    ic_a_to_r: String,
    prop1_lower: String,
    xi_hat: String,
    half_qmi_upper: String,
    povm_upper: String,
    xi_infinity: String,
    feasible: bool,
    /// Estimate below the lower bound.
    lower_violation: bool,
    /// Estimate above `I(R:A)/2`.
    upper_violation: bool,
    /// `xi_infinity` above `I(R:A)/2`.
    order_violation: bool,
}

/// Sample `k` uses seed `opts.seed + k` for the state and the optimizer.
pub fn run(
    d_r: usize,
    d_a: usize,
    samples: usize,
    rank: Option<usize>,
    eps: Epsilon,
    opts: &OptimizerOptions,
) -> anyhow::Result<String> {
    let sig = DimSig::new(vec![d_r, d_a], vec!["R", "A"])?;
    let rank = rank.unwrap_or(d_r * d_a);
    let rows = (0..samples)
        .into_par_iter()
        .map(|k| sample(&sig, rank, k, eps, opts))
        .collect::<pqd_core::Result<Vec<Row>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn sample(sig: &DimSig, rank: usize, k: usize, eps: Epsilon, opts: &OptimizerOptions) -> pqd_core::Result<Row> {
    let seed = opts.seed.wrapping_add(k as u64);
    let rho = random_density_on(sig, rank, seed)?;
    let point_opts = OptimizerOptions { seed, ..opts.clone() };
    let outcome = match optimize_xi(&rho, eps, &point_opts) {
        Ok(o) => o,
        Err(pqd_core::Error::Infeasible(o)) => *o,
        Err(e) => return Err(e),
    };
    let lower = prop1_lower(&rho, eps)?;
    let half = half_qmi_upper(&rho)?;
    let xi_inf = xi_infinity(&rho)?;
    Ok(Row {
        sample: k,
        seed,
        rank,
        qmi: fmt12(qmi(&rho)?),
        ic_a_to_r: fmt12(coherent_a_to_r(&rho)?),
        prop1_lower: fmt12(lower),
        xi_hat: fmt12(outcome.i_rb),
        half_qmi_upper: fmt12(half),
        povm_upper: fmt12(povm_upper(&rho, &point_opts)?),
        xi_infinity: fmt12(xi_inf),
        feasible: outcome.feasible,
        lower_violation: outcome.feasible && outcome.i_rb < lower - FEASIBILITY_SLACK,
        upper_violation: outcome.feasible && outcome.i_rb > half + FEASIBILITY_SLACK,
        order_violation: xi_inf > half + FEASIBILITY_SLACK,
    })
}
