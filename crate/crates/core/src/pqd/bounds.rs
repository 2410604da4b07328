use serde::Serialize;

use super::{coherent_a_to_r, half_qmi_upper, povm_upper, prop1_lower, qmi, xi_infinity};
use super::{Epsilon, OptimizerOptions, FEASIBILITY_SLACK};
use crate::error::{Error, Result};
use crate::format::ser_round12;
use crate::qmat::DensityMatrix;

/// Allowed excess of `prop1_lower` over `povm_upper`.
pub const PROP1_SLACK: f64 = 1e-6;
/// Allowed excess of `xi_infinity` over `half_qmi_upper`.
pub const HALF_QMI_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub epsilon: Epsilon,
    #[serde(serialize_with = "ser_round12")]
    pub qmi: f64,
    #[serde(serialize_with = "ser_round12")]
    pub ic_a_to_r: f64,
    #[serde(serialize_with = "ser_round12")]
    pub prop1_lower: f64,
    #[serde(serialize_with = "ser_round12")]
    pub half_qmi_upper: f64,
    #[serde(serialize_with = "ser_round12")]
    pub povm_upper: f64,
    #[serde(serialize_with = "ser_round12")]
    pub xi_infinity: f64,
}

pub fn bounds_report(rho: &DensityMatrix, eps: Epsilon, opts: &OptimizerOptions) -> Result<BoundsReport> {
    let report = BoundsReport {
        epsilon: eps,
        qmi: qmi(rho)?,
        ic_a_to_r: coherent_a_to_r(rho)?,
        prop1_lower: prop1_lower(rho, eps)?,
        half_qmi_upper: half_qmi_upper(rho)?,
        povm_upper: povm_upper(rho, opts)?,
        xi_infinity: xi_infinity(rho)?,
    };
    report.check()?;
    Ok(report)
}

impl BoundsReport {
    fn check(&self) -> Result<()> {
        if self.xi_infinity > self.half_qmi_upper + HALF_QMI_SLACK {
            return Err(Error::BoundViolation(format!(
                "xi_infinity {} exceeds half_qmi_upper {}",
                self.xi_infinity, self.half_qmi_upper
            )));
        }
        if self.povm_upper > self.half_qmi_upper + PROP1_SLACK {
            return Err(Error::BoundViolation(format!(
                "povm_upper {} exceeds half_qmi_upper {}",
                self.povm_upper, self.half_qmi_upper
            )));
        }
        // The POVM certificate leaks I(R:E) = I(R:B), so it only bounds
        // the ε-constrained value once ε covers it.
        let comparable = self.epsilon.admits(self.povm_upper, FEASIBILITY_SLACK);
        if comparable && self.prop1_lower > self.povm_upper + PROP1_SLACK {
            return Err(Error::BoundViolation(format!(
                "prop1_lower {} exceeds povm_upper {}",
                self.prop1_lower, self.povm_upper
            )));
        }
        Ok(())
    }

    /// Scalar fields that depend only on the spectrum of the state and its marginals.
    pub fn closed_form(&self) -> [f64; 5] {
        [
            self.qmi,
            self.ic_a_to_r,
            self.prop1_lower,
            self.half_qmi_upper,
            self.xi_infinity,
        ]
    }
}
