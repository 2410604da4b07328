use super::{half_qmi_upper, optimize_xi, prop1_lower, Epsilon, OptimizerOptions};
use crate::error::{Error, Result};
use crate::format::fmt12;
use crate::qmat::DensityMatrix;

pub const SWEEP_CSV_HEADER: &str =
    "eps,xi_raw,xi_envelope,i_rb,i_re,prop1_lower,half_qmi_upper,feasible,restarts_used,converged";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub eps: f64,
    /// `NaN` when the optimizer found no feasible point.
    pub xi_raw: f64,
    /// Running minimum of the feasible raw values; `NaN` before the first one.
    pub xi_envelope: f64,
    pub i_rb: f64,
    pub i_re: f64,
    pub prop1_lower: f64,
    pub half_qmi_upper: f64,
    pub feasible: bool,
    pub restarts_used: usize,
    pub converged: bool,
    pub theta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let cells = [
                fmt12(p.eps),
                fmt12(p.xi_raw),
                fmt12(p.xi_envelope),
                fmt12(p.i_rb),
                fmt12(p.i_re),
                fmt12(p.prop1_lower),
                fmt12(p.half_qmi_upper),
                p.feasible.to_string(),
                p.restarts_used.to_string(),
                p.converged.to_string(),
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn envelope(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.xi_envelope).collect()
    }
}

/// Runs the optimizer at every grid point, warm-starting from the previous
/// certificate. A cap at or above `I(R:A)/2` constrains nothing, so such
/// points are optimized with an unbounded ε.
pub fn rates_sweep(rho: &DensityMatrix, grid: &[f64], opts: &OptimizerOptions) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty epsilon grid".into()));
    }
    if grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidParameter("epsilon grid must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("epsilon grid must be strictly ascending".into()));
    }
    let half = half_qmi_upper(rho)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut envelope = f64::NAN;
    let mut warm: Option<Vec<f64>> = opts.warm_start.clone();
    for &eps in grid {
        let effective = if eps >= half { Epsilon::Unbounded } else { Epsilon::Finite(eps) };
        let point_opts = OptimizerOptions {
            warm_start: warm.clone(),
            ..opts.clone()
        };
        let outcome = match optimize_xi(rho, effective, &point_opts) {
            Ok(o) => o,
            Err(Error::Infeasible(o)) => *o,
            Err(e) => return Err(e),
        };
        let xi_raw = if outcome.feasible { outcome.i_rb } else { f64::NAN };
        if outcome.feasible && !(xi_raw >= envelope) {
            envelope = xi_raw;
        }
        warm = Some(outcome.theta.clone());
        points.push(SweepPoint {
            eps,
            xi_raw,
            xi_envelope: envelope,
            i_rb: outcome.i_rb,
            i_re: outcome.i_re,
            prop1_lower: prop1_lower(rho, Epsilon::Finite(eps))?,
            half_qmi_upper: half,
            feasible: outcome.feasible,
            restarts_used: outcome.restarts_used,
            converged: outcome.converged,
            theta: outcome.theta,
        });
    }
    Ok(SweepResult { points })
}
