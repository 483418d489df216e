//! Moment-matching calibration of the discount factor β and risk aversion γ.
//!
//! Data moments are window averages of I/Y and K/Y. Model moments come from
//! the closed-form steady state in [`crate::model`] with α, δ and g held
//! fixed. The search is exhaustive over a rectangular grid, minimizing
//!
//! ```text
//! w_iy·((iy − iy*)/iy*)² + w_ky·((ky − ky*)/ky*)²
//! ```
//!
//! Relative errors keep the two ratios (≈0.2 and ≈2.6) on the same footing.
//! Ties go to the smaller β, then the smaller γ, so the optimum does not
//! depend on evaluation order.

use serde::Serialize;
use thiserror::Error;

use crate::data::{DataError, MacroPanel, YearRange};
use crate::model::{self, ModelError, ModelParams, SteadyState};
use crate::parallel::{map_ordered, Execution};

/// γ values inside this open interval are skipped (log utility).
pub const GAMMA_SKIP: (f64, f64) = (0.999, 1.001);

const MAX_GRID_POINTS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrateError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("weights must be finite, >= 0 and not both zero (got w_iy = {w_iy}, w_ky = {w_ky})")]
    InvalidWeights { w_iy: f64, w_ky: f64 },
    #[error("targets must satisfy 0 < iy < 1 and ky > 0 (got iy = {iy}, ky = {ky})")]
    InvalidTargets { iy: f64, ky: f64 },
    #[error(
        "all {evaluated} grid points are infeasible: (1+g)^gamma - beta*(1-delta) must be > 0"
    )]
    AllInfeasible { evaluated: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl CalibrateError {
    pub fn code(&self) -> &'static str {
        match self {
            CalibrateError::InvalidGrid(_) => "invalid_grid",
            CalibrateError::InvalidWeights { .. } => "invalid_weights",
            CalibrateError::InvalidTargets { .. } => "invalid_targets",
            CalibrateError::AllInfeasible { .. } => "all_infeasible",
            CalibrateError::Model(e) => e.code(),
            CalibrateError::Data(e) => e.code(),
        }
    }
}

/// Data moments the model is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentTargets {
    pub iy_target: f64,
    pub ky_target: f64,
    /// Window the targets were averaged over, when they came from data.
    pub window: Option<YearRange>,
}

impl MomentTargets {
    pub fn new(iy_target: f64, ky_target: f64) -> Result<Self, CalibrateError> {
        let t = MomentTargets {
            iy_target,
            ky_target,
            window: None,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), CalibrateError> {
        let (iy, ky) = (self.iy_target, self.ky_target);
        if iy > 0.0 && iy < 1.0 && ky > 0.0 && ky.is_finite() {
            Ok(())
        } else {
            Err(CalibrateError::InvalidTargets { iy, ky })
        }
    }
}

/// Window means of I/Y and K/Y.
pub fn moments(panel: &MacroPanel, window: YearRange) -> Result<MomentTargets, CalibrateError> {
    panel.check_range(window)?;
    let s = panel.index_of(window.start).expect("range checked");
    let e = panel.index_of(window.end).expect("range checked");
    let n = (e - s + 1) as f64;
    let y = &panel.output()[s..=e];
    let mean_ratio = |x: &[f64]| x[s..=e].iter().zip(y).map(|(x, y)| x / y).sum::<f64>() / n;
    let t = MomentTargets {
        iy_target: mean_ratio(panel.investment()),
        ky_target: mean_ratio(panel.capital()),
        window: Some(window),
    };
    t.validate()?;
    Ok(t)
}

/// Parameters held fixed during calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedParams {
    pub alpha: f64,
    pub delta: f64,
    pub g: f64,
}

impl FixedParams {
    pub fn params(&self, beta: f64, gamma: f64) -> Result<ModelParams, ModelError> {
        ModelParams::with_rate(self.alpha, beta, gamma, self.delta, self.g)
    }
}

/// Model-implied steady-state ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpliedMoments {
    pub iy: f64,
    pub ky: f64,
}

/// Steady-state I/Y and K/Y at `(beta, gamma)`.
pub fn implied_moments(
    beta: f64,
    gamma: f64,
    fixed: &FixedParams,
) -> Result<ImpliedMoments, ModelError> {
    let p = fixed.params(beta, gamma)?;
    Ok(ImpliedMoments {
        iy: model::investment_output_ratio(&p)?,
        ky: model::capital_output_ratio(&p)?,
    })
}

/// Rectangular (β, γ) grid. Points are `min + i·step` for `i = 0, 1, ...`
/// up to `max`, snapped to 12 decimal places so that e.g. 0.95 lands on the
/// same double as the literal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_step: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            beta_min: 0.80,
            beta_max: 0.999,
            beta_step: 0.001,
            gamma_min: 0.05,
            gamma_max: 5.00,
            gamma_step: 0.05,
        }
    }
}

fn snap(x: f64) -> f64 {
    format!("{x:.12}").parse().expect("formatted float parses")
}

fn axis(name: &str, min: f64, max: f64, step: f64) -> Result<Vec<f64>, CalibrateError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(CalibrateError::InvalidGrid(format!(
            "{name} bounds must be finite"
        )));
    }
    if !(min < max) {
        return Err(CalibrateError::InvalidGrid(format!(
            "{name}_min {min} must be < {name}_max {max}"
        )));
    }
    if !(step > 0.0) {
        return Err(CalibrateError::InvalidGrid(format!(
            "{name}_step must be > 0"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() + 1.0;
    if count > MAX_GRID_POINTS as f64 {
        return Err(CalibrateError::InvalidGrid(format!(
            "{name} axis is too large"
        )));
    }
    Ok((0..count as usize)
        .map(|i| snap(min + i as f64 * step))
        .collect())
}

impl GridSpec {
    pub fn betas(&self) -> Result<Vec<f64>, CalibrateError> {
        let b = axis("beta", self.beta_min, self.beta_max, self.beta_step)?;
        if !(self.beta_min > 0.0 && self.beta_max < 1.0) {
            return Err(CalibrateError::InvalidGrid(
                "beta must stay inside (0, 1)".into(),
            ));
        }
        Ok(b)
    }

    /// γ axis with the log-utility neighbourhood removed.
    pub fn gammas(&self) -> Result<Vec<f64>, CalibrateError> {
        let g = axis("gamma", self.gamma_min, self.gamma_max, self.gamma_step)?;
        if !(self.gamma_min > 0.0) {
            return Err(CalibrateError::InvalidGrid("gamma must be > 0".into()));
        }
        Ok(g.into_iter()
            .filter(|&g| !(g > GAMMA_SKIP.0 && g < GAMMA_SKIP.1))
            .collect())
    }

    pub fn validate(&self) -> Result<(Vec<f64>, Vec<f64>), CalibrateError> {
        let (b, g) = (self.betas()?, self.gammas()?);
        if g.is_empty() {
            return Err(CalibrateError::InvalidGrid("gamma axis is empty".into()));
        }
        if b.len().saturating_mul(g.len()) > MAX_GRID_POINTS {
            return Err(CalibrateError::InvalidGrid("grid is too large".into()));
        }
        Ok((b, g))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub iy: f64,
    pub ky: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { iy: 1.0, ky: 1.0 }
    }
}

impl Weights {
    fn validate(&self) -> Result<(), CalibrateError> {
        let ok = |w: f64| w >= 0.0 && w.is_finite();
        if ok(self.iy) && ok(self.ky) && self.iy + self.ky > 0.0 {
            Ok(())
        } else {
            Err(CalibrateError::InvalidWeights {
                w_iy: self.iy,
                w_ky: self.ky,
            })
        }
    }
}

/// Weighted squared relative moment error.
pub fn objective(implied: &ImpliedMoments, targets: &MomentTargets, weights: &Weights) -> f64 {
    let rel = |m: f64, t: f64| (m - t) / t;
    weights.iy * rel(implied.iy, targets.iy_target).powi(2)
        + weights.ky * rel(implied.ky, targets.ky_target).powi(2)
}

/// Best grid point and its steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub beta: f64,
    pub gamma: f64,
    pub objective: f64,
    pub implied_iy: f64,
    pub implied_ky: f64,
    pub steady_state: SteadyState,
    pub infeasible_count: usize,
    pub evaluated: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    objective: f64,
    bi: usize,
    gi: usize,
    implied: ImpliedMoments,
}

impl Candidate {
    /// Strict total order: objective, then β index, then γ index.
    fn better_than(&self, other: &Candidate) -> bool {
        self.objective
            .total_cmp(&other.objective)
            .then(self.bi.cmp(&other.bi))
            .then(self.gi.cmp(&other.gi))
            .is_lt()
    }
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.better_than(&a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Exhaustive grid search with the default execution strategy.
pub fn grid_search(
    targets: &MomentTargets,
    grid: &GridSpec,
    fixed: &FixedParams,
    weights: &Weights,
) -> Result<CalibrationResult, CalibrateError> {
    grid_search_with(targets, grid, fixed, weights, Execution::default())
}

/// Exhaustive grid search. Infeasible points are skipped and counted. The
/// result is identical under every [`Execution`].
pub fn grid_search_with(
    targets: &MomentTargets,
    grid: &GridSpec,
    fixed: &FixedParams,
    weights: &Weights,
    exec: Execution,
) -> Result<CalibrationResult, CalibrateError> {
    targets.validate()?;
    weights.validate()?;
    let (betas, gammas) = grid.validate()?;
    // Fail early on α, δ or g out of range rather than per point.
    fixed.params(betas[0], gammas[0])?;

    let rows: Vec<(usize, f64)> = betas.iter().copied().enumerate().collect();
    let per_row = map_ordered(&rows, exec, |&(bi, beta)| {
        let mut best: Option<Candidate> = None;
        let mut infeasible = 0usize;
        for (gi, &gamma) in gammas.iter().enumerate() {
            match implied_moments(beta, gamma, fixed) {
                Ok(implied) => {
                    let cand = Candidate {
                        objective: objective(&implied, targets, weights),
                        bi,
                        gi,
                        implied,
                    };
                    best = pick(best, Some(cand));
                }
                Err(_) => infeasible += 1,
            }
        }
        (best, infeasible)
    });

    let infeasible_count = per_row.iter().map(|(_, n)| n).sum();
    let evaluated = betas.len() * gammas.len();
    let best = per_row
        .into_iter()
        .fold(None, |acc, (row_best, _)| pick(acc, row_best))
        .ok_or(CalibrateError::AllInfeasible { evaluated })?;

    let (beta, gamma) = (betas[best.bi], gammas[best.gi]);
    let steady_state = model::steady_state_k(&fixed.params(beta, gamma)?)?;
    Ok(CalibrationResult {
        beta,
        gamma,
        objective: best.objective,
        implied_iy: best.implied.iy,
        implied_ky: best.implied.ky,
        steady_state,
        infeasible_count,
        evaluated,
    })
}

/// One row of a scenario table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioRow {
    pub beta: f64,
    pub gamma: f64,
    pub ky: f64,
    pub iy: f64,
    pub k_bar: f64,
}

/// Closed-form K/Y, I/Y and k̄ for each `(beta, gamma)`, in input order.
/// An infeasible or invalid scenario yields an error in its slot.
pub fn scenario_table(
    scenarios: &[(f64, f64)],
    fixed: &FixedParams,
) -> Vec<Result<ScenarioRow, ModelError>> {
    scenarios
        .iter()
        .map(|&(beta, gamma)| {
            let ss = model::steady_state_k(&fixed.params(beta, gamma)?)?;
            Ok(ScenarioRow {
                beta,
                gamma,
                ky: ss.ky,
                iy: ss.iy,
                k_bar: ss.k_bar,
            })
        })
        .collect()
}
