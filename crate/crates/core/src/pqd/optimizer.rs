//! Multi-start random-direction descent over generator parameters.
//!
//! Each restart owns a ChaCha8 stream seeded with `seed + index`. The finite
//! ε cap is an exterior quadratic penalty whose weight grows geometrically
//! across stages. Every evaluated point is checked for feasibility, so the
//! returned certificate is the lowest feasible `I(R:B)` seen anywhere in the
//! run, which need not be the final iterate of any stage.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{Epsilon, Scorer};
use crate::error::{Error, Result};
use crate::format::{round12, ser_round12, Full};
use crate::isometries::{
    from_parameters, parameter_count, parameter_matrix, povm_isometry, Isometry, IsometryFile,
    RankOnePovm,
};
use crate::qmat::DensityMatrix;

/// Slack on both constraints when classifying a point as feasible.
pub const FEASIBILITY_SLACK: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct OptimizerOptions {
    /// Output dimensions; `None` means `d_A`.
    pub d_b: Option<usize>,
    pub d_e: Option<usize>,
    pub restarts: usize,
    /// Iteration budget per penalty stage.
    pub max_iterations: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub min_step: f64,
    pub step_grow: f64,
    pub step_shrink: f64,
    pub gradient_polish: bool,
    pub penalty_initial: f64,
    pub penalty_growth: f64,
    pub penalty_stages: usize,
    /// Parameters tried as the second start point.
    pub warm_start: Option<Vec<f64>>,
    /// Number of POVM elements for [`povm_upper`]; `None` means `d_A`.
    pub povm_elements: Option<usize>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            d_b: None,
            d_e: None,
            restarts: 32,
            max_iterations: 2000,
            seed: 0,
            initial_step: 0.5,
            min_step: 1e-9,
            step_grow: 1.2,
            step_shrink: 0.8,
            gradient_polish: false,
            penalty_initial: 100.0,
            penalty_growth: 10.0,
            penalty_stages: 5,
            warm_start: None,
            povm_elements: None,
        }
    }
}

impl OptimizerOptions {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if self.max_iterations == 0 {
            return bad("iteration budget must be positive");
        }
        if self.penalty_stages == 0 {
            return bad("penalty stages must be positive");
        }
        if !(self.initial_step > 0.0 && self.min_step > 0.0) {
            return bad("step sizes must be positive");
        }
        if !(self.step_grow >= 1.0 && self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return bad("step factors must satisfy grow >= 1 and 0 < shrink < 1");
        }
        if !(self.penalty_initial > 0.0 && self.penalty_growth >= 1.0) {
            return bad("penalty weights must be positive and nondecreasing");
        }
        if self.d_b == Some(0) || self.d_e == Some(0) {
            return bad("output dimensions must be positive");
        }
        Ok(())
    }
}

/// Certificate for an upper bound on the ineliminable correlations.
#[derive(Clone, Debug, PartialEq)]
pub struct DecouplingOutcome {
    pub theta: Vec<f64>,
    pub i_rb: f64,
    pub i_re: f64,
    pub epsilon: Epsilon,
    pub feasible: bool,
    pub restarts_used: usize,
    pub converged: bool,
    /// `true` when the certificate's raw `B` and `E` roles were exchanged.
    pub swapped: bool,
    pub d_a: usize,
    pub d_b: usize,
    pub d_e: usize,
}

#[derive(Serialize)]
struct OutcomeFile {
    #[serde(serialize_with = "ser_round12")]
    i_rb: f64,
    #[serde(serialize_with = "ser_round12")]
    i_re: f64,
    epsilon: Epsilon,
    feasible: bool,
    restarts_used: usize,
    converged: bool,
    swapped: bool,
    theta: Vec<Full>,
    isometry: IsometryFile<Full>,
}

impl DecouplingOutcome {
    /// `i_rb` rounded for reporting.
    pub fn xi_hat(&self) -> f64 {
        round12(self.i_rb)
    }

    /// The certificate isometry, oriented so that its `B` output realizes `i_rb`.
    pub fn isometry(&self) -> Result<Isometry> {
        let v = from_parameters(&self.theta, self.d_a, self.d_b, self.d_e)?;
        Ok(if self.swapped { v.swap_outputs() } else { v })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = OutcomeFile {
            i_rb: self.i_rb,
            i_re: self.i_re,
            epsilon: self.epsilon,
            feasible: self.feasible,
            restarts_used: self.restarts_used,
            converged: self.converged,
            swapped: self.swapped,
            theta: self.theta.iter().map(|&x| Full(x)).collect(),
            isometry: self.isometry()?.to_file(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug)]
struct Eval {
    i_rb: f64,
    i_re: f64,
    swapped: bool,
}

trait Landscape: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, theta: &[f64]) -> Eval;
    fn feasible(&self, e: &Eval) -> bool;
    fn violation(&self, e: &Eval) -> f64;
    fn penalized(&self) -> bool;

    fn objective(&self, e: &Eval, weight: f64) -> f64 {
        let v = self.violation(e);
        e.i_rb + weight * v * v
    }
}

struct XiLandscape<'a> {
    scorer: &'a Scorer,
    d_a: usize,
    d_b: usize,
    d_e: usize,
    eps: Epsilon,
    relabel: bool,
}

impl Landscape for XiLandscape<'_> {
    fn dim(&self) -> usize {
        parameter_count(self.d_b * self.d_e)
    }

    fn evaluate(&self, theta: &[f64]) -> Eval {
        let v = parameter_matrix(theta, self.d_a, self.d_b * self.d_e).expect("parameter length");
        let (rb, re) = self.scorer.raw(&v, self.d_b, self.d_e);
        if self.relabel && re > rb {
            Eval { i_rb: re, i_re: rb, swapped: true }
        } else {
            Eval { i_rb: rb, i_re: re, swapped: false }
        }
    }

    fn feasible(&self, e: &Eval) -> bool {
        self.eps.admits(e.i_re, FEASIBILITY_SLACK) && e.i_re <= e.i_rb + FEASIBILITY_SLACK
    }

    fn violation(&self, e: &Eval) -> f64 {
        let cap = match self.eps {
            Epsilon::Finite(x) => (e.i_re - x).max(0.0),
            Epsilon::Unbounded => 0.0,
        };
        // Only reachable without relabelling, i.e. for unequal output dimensions.
        let order = (e.i_re - e.i_rb).max(0.0);
        cap + order
    }

    fn penalized(&self) -> bool {
        !self.eps.is_unbounded() || !self.relabel
    }
}

struct PovmLandscape<'a> {
    scorer: &'a Scorer,
    d_a: usize,
    elements: usize,
}

impl Landscape for PovmLandscape<'_> {
    fn dim(&self) -> usize {
        parameter_count(self.elements)
    }

    fn evaluate(&self, theta: &[f64]) -> Eval {
        let w = parameter_matrix(theta, self.d_a, self.elements).expect("parameter length");
        let rb = self.scorer.povm_rb(&w);
        Eval { i_rb: rb, i_re: rb, swapped: false }
    }

    fn feasible(&self, _: &Eval) -> bool {
        true
    }

    fn violation(&self, _: &Eval) -> f64 {
        0.0
    }

    fn penalized(&self) -> bool {
        false
    }
}

struct Best {
    eval: Eval,
    theta: Vec<f64>,
}

struct Restart {
    best: Option<Best>,
    last: Best,
    converged: bool,
}

struct Walker<'a, L: Landscape> {
    land: &'a L,
    best: Option<Best>,
}

impl<L: Landscape> Walker<'_, L> {
    fn eval(&mut self, theta: &[f64]) -> Eval {
        let e = self.land.evaluate(theta);
        if self.land.feasible(&e) && self.best.as_ref().is_none_or(|b| e.i_rb < b.eval.i_rb) {
            self.best = Some(Best { eval: e, theta: theta.to_vec() });
        }
        e
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return u.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Returns `true` if the step fell below `min_step` within the budget.
fn descend<L: Landscape>(
    walker: &mut Walker<'_, L>,
    x: &mut Vec<f64>,
    e: &mut Eval,
    weight: f64,
    opts: &OptimizerOptions,
    rng: &mut ChaCha8Rng,
) -> bool {
    let land = walker.land;
    let mut fx = land.objective(e, weight);
    let mut step = opts.initial_step;
    let mut trial = vec![0.0; x.len()];
    for _ in 0..opts.max_iterations {
        if step < opts.min_step {
            return true;
        }
        let u = unit_direction(rng, x.len());
        let mut moved = false;
        for sign in [1.0, -1.0] {
            for ((t, xi), ui) in trial.iter_mut().zip(x.iter()).zip(&u) {
                *t = xi + sign * step * ui;
            }
            let et = walker.eval(&trial);
            let ft = land.objective(&et, weight);
            if ft < fx {
                x.copy_from_slice(&trial);
                *e = et;
                fx = ft;
                moved = true;
                break;
            }
        }
        step *= if moved { opts.step_grow } else { opts.step_shrink };
        step = step.min(PI);
    }
    step < opts.min_step
}

/// Central-difference gradient descent with backtracking.
fn polish<L: Landscape>(walker: &mut Walker<'_, L>, x: &mut [f64], e: &mut Eval, weight: f64, budget: usize) {
    const H: f64 = 1e-6;
    let land = walker.land;
    let mut fx = land.objective(e, weight);
    let mut rate = 0.1;
    let mut probe = x.to_vec();
    for _ in 0..budget {
        let mut grad = vec![0.0; x.len()];
        for k in 0..x.len() {
            probe[k] = x[k] + H;
            let fp = land.objective(&land.evaluate(&probe), weight);
            probe[k] = x[k] - H;
            let fm = land.objective(&land.evaluate(&probe), weight);
            probe[k] = x[k];
            grad[k] = (fp - fm) / (2.0 * H);
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-10 {
            return;
        }
        let mut improved = false;
        while rate > 1e-12 {
            let cand: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - rate * g).collect();
            let ec = walker.eval(&cand);
            let fc = land.objective(&ec, weight);
            if fc < fx {
                x.copy_from_slice(&cand);
                *e = ec;
                fx = fc;
                rate *= 2.0;
                improved = true;
                break;
            }
            rate *= 0.5;
        }
        if !improved {
            return;
        }
    }
}

fn run_restart<L: Landscape>(land: &L, index: usize, opts: &OptimizerOptions) -> Restart {
    let n = land.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(index as u64));
    let mut x = match (index, &opts.warm_start) {
        (0, _) => vec![0.0; n],
        (1, Some(w)) if w.len() == n => w.clone(),
        _ => (0..n).map(|_| rng.random_range(-PI..PI)).collect(),
    };
    let mut walker = Walker { land, best: None };
    let mut e = walker.eval(&x);
    let stages = if land.penalized() { opts.penalty_stages } else { 1 };
    let mut converged = false;
    let mut weight = if land.penalized() { opts.penalty_initial } else { 0.0 };
    for _ in 0..stages {
        converged = descend(&mut walker, &mut x, &mut e, weight, opts, &mut rng);
        weight *= opts.penalty_growth;
    }
    if opts.gradient_polish {
        let w = weight / opts.penalty_growth;
        polish(&mut walker, &mut x, &mut e, w, opts.max_iterations / 10 + 1);
    }
    Restart {
        best: walker.best,
        last: Best { eval: e, theta: x },
        converged,
    }
}

fn multistart<L: Landscape>(land: &L, opts: &OptimizerOptions) -> Vec<Restart> {
    (0..opts.restarts)
        .into_par_iter()
        .map(|i| run_restart(land, i, opts))
        .collect()
}

fn output_dims(d_a: usize, opts: &OptimizerOptions) -> Result<(usize, usize)> {
    let d_b = opts.d_b.unwrap_or(d_a);
    let d_e = opts.d_e.unwrap_or(d_a);
    if d_b * d_e < d_a {
        return Err(Error::InvalidParameter(format!(
            "output space {d_b}x{d_e} is smaller than the input dimension {d_a}"
        )));
    }
    Ok((d_b, d_e))
}

/// Lowest feasible `I(R:B)` over all restarts (ties go to the lowest
/// restart index); `Error::Infeasible` carries the least-violating point
/// when no restart found a feasible one.
pub fn optimize_xi(rho: &DensityMatrix, eps: Epsilon, opts: &OptimizerOptions) -> Result<DecouplingOutcome> {
    eps.check()?;
    opts.validate()?;
    let scorer = Scorer::new(rho)?;
    let d_a = scorer.d_a();
    let (d_b, d_e) = output_dims(d_a, opts)?;
    let land = XiLandscape {
        scorer: &scorer,
        d_a,
        d_b,
        d_e,
        eps,
        relabel: d_b == d_e,
    };
    let runs = multistart(&land, opts);
    let outcome = |b: &Best, feasible: bool, converged: bool| DecouplingOutcome {
        theta: b.theta.clone(),
        i_rb: b.eval.i_rb,
        i_re: b.eval.i_re,
        epsilon: eps,
        feasible,
        restarts_used: opts.restarts,
        converged,
        swapped: b.eval.swapped,
        d_a,
        d_b,
        d_e,
    };

    let mut chosen: Option<(&Best, bool)> = None;
    for run in &runs {
        if let Some(b) = &run.best {
            if chosen.is_none_or(|(c, _)| b.eval.i_rb < c.eval.i_rb) {
                chosen = Some((b, run.converged));
            }
        }
    }
    if let Some((b, converged)) = chosen {
        return Ok(outcome(b, true, converged));
    }
    let mut least: Option<(&Restart, f64)> = None;
    for run in &runs {
        let v = land.violation(&run.last.eval);
        if least.is_none_or(|(_, lv)| v < lv) {
            least = Some((run, v));
        }
    }
    let (run, _) = least.expect("at least one restart");
    Err(Error::Infeasible(Box::new(outcome(&run.last, false, run.converged))))
}

/// Minimizer of `I(R:B)` over rank-one POVM measurement isometries.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmOutcome {
    pub value: f64,
    pub theta: Vec<f64>,
    pub elements: usize,
    pub d_a: usize,
}

impl PovmOutcome {
    pub fn povm(&self) -> Result<RankOnePovm> {
        let w = from_parameters(&self.theta, self.d_a, self.elements, 1)?;
        RankOnePovm::from_isometry_rows(w.matrix())
    }

    pub fn isometry(&self) -> Result<Isometry> {
        povm_isometry(&self.povm()?)
    }
}

pub fn povm_search(rho: &DensityMatrix, opts: &OptimizerOptions) -> Result<PovmOutcome> {
    opts.validate()?;
    let scorer = Scorer::new(rho)?;
    let d_a = scorer.d_a();
    let elements = opts.povm_elements.unwrap_or(d_a);
    if elements < d_a {
        return Err(Error::InvalidParameter(format!(
            "a rank-one POVM on dimension {d_a} needs at least {d_a} elements"
        )));
    }
    let land = PovmLandscape { scorer: &scorer, d_a, elements };
    let runs = multistart(&land, opts);
    let mut chosen: Option<&Best> = None;
    for run in &runs {
        let b = run.best.as_ref().expect("every point is feasible");
        if chosen.is_none_or(|c| b.eval.i_rb < c.eval.i_rb) {
            chosen = Some(b);
        }
    }
    let b = chosen.expect("at least one restart");
    Ok(PovmOutcome {
        value: b.eval.i_rb,
        theta: b.theta.clone(),
        elements,
        d_a,
    })
}

pub fn povm_upper(rho: &DensityMatrix, opts: &OptimizerOptions) -> Result<f64> {
    Ok(povm_search(rho, opts)?.value)
}
