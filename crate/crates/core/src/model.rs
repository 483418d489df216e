//! Closed-form steady state of the one-sector CRRA planner model in
//! effective labor units.
//!
//! Variables are deflated by `A_t^(1/(1−α)) · L_t`, which grows at the
//! balanced-growth rate `g` with `1 + g = (1 + a)^(1/(1−α)) · (1 + n)`.
//! Capital accumulation in effective units carries that growth factor:
//!
//! ```text
//! (1 + g) · k[t+1] = (1 − δ) · k[t] + i[t]
//! c[t] = k[t]^α + (1 − δ) · k[t] − (1 + g) · k[t+1]
//! ```
//!
//! which makes the effective-unit problem equivalent to the level problem.
//! At the steady state the great ratios are
//!
//! ```text
//! K/Y = αβ / ((1 + g)^γ − β(1 − δ))
//! I/Y = (g + δ) · K/Y
//! k̄   = (K/Y)^(1/(1−α))
//! ```
//!
//! Every operation checks feasibility, `(1 + g)^γ > β(1 − δ)`, up front and
//! errors instead of returning infinities.

use serde::Serialize;
use thiserror::Error;

use crate::accounting::{self, AccountingError};
use crate::data::{MacroPanel, Year};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("capital share alpha = {0} must lie in (0, 1)")]
    Alpha(f64),
    #[error("discount factor beta = {0} must lie in (0, 1)")]
    Beta(f64),
    #[error("risk aversion gamma = {0} must be > 0")]
    Gamma(f64),
    #[error("gamma = 1 (log utility) is excluded; use gamma = 1 ± ε instead")]
    LogUtility,
    #[error("depreciation delta = {0} must lie in (0, 1)")]
    Delta(f64),
    #[error("growth rate {name} = {value} must be > -1")]
    GrowthRate { name: &'static str, value: f64 },
    #[error("no finite steady state: (1+g)^gamma - beta*(1-delta) = {denominator} must be > 0")]
    Infeasible { denominator: f64 },
    #[error("implied consumption {consumption} at date {date} must be > 0")]
    NonPositiveConsumption { date: usize, consumption: f64 },
    #[error("effective capital {0} must be finite and > 0")]
    NonPositiveCapital(f64),
    #[error(transparent)]
    Accounting(#[from] AccountingError),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::Alpha(_) => "alpha_out_of_range",
            ModelError::Beta(_) => "beta_out_of_range",
            ModelError::Gamma(_) => "gamma_out_of_range",
            ModelError::LogUtility => "log_utility",
            ModelError::Delta(_) => "delta_out_of_range",
            ModelError::GrowthRate { .. } => "growth_out_of_range",
            ModelError::Infeasible { .. } => "infeasible",
            ModelError::NonPositiveConsumption { .. } => "non_positive_consumption",
            ModelError::NonPositiveCapital(_) => "non_positive_capital",
            ModelError::Accounting(e) => e.code(),
        }
    }
}

/// Source of the balanced-growth rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Growth {
    /// Productivity growth `a` and labor growth `n`, combined through the
    /// BGP relation.
    Components { a: f64, n: f64 },
    /// The BGP rate `g` itself.
    Rate { g: f64 },
}

/// Parameter block of the planner model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    #[serde(flatten)]
    pub growth: Growth,
}

impl ModelParams {
    /// Validates ranges. Feasibility is checked by each operation.
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        a: f64,
        n: f64,
    ) -> Result<Self, ModelError> {
        Self::build(alpha, beta, gamma, delta, Growth::Components { a, n })
    }

    /// Like [`ModelParams::new`] with the BGP rate given directly.
    pub fn with_rate(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        g: f64,
    ) -> Result<Self, ModelError> {
        Self::build(alpha, beta, gamma, delta, Growth::Rate { g })
    }

    fn build(
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        growth: Growth,
    ) -> Result<Self, ModelError> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(alpha) {
            return Err(ModelError::Alpha(alpha));
        }
        if !unit(beta) {
            return Err(ModelError::Beta(beta));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ModelError::Gamma(gamma));
        }
        if gamma == 1.0 {
            return Err(ModelError::LogUtility);
        }
        if !unit(delta) {
            return Err(ModelError::Delta(delta));
        }
        let check = |name, value: f64| {
            if value > -1.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::GrowthRate { name, value })
            }
        };
        match growth {
            Growth::Components { a, n } => {
                check("a", a)?;
                check("n", n)?;
            }
            Growth::Rate { g } => check("g", g)?,
        }
        Ok(ModelParams {
            alpha,
            beta,
            gamma,
            delta,
            growth,
        })
    }

    /// Balanced-growth rate `g`.
    pub fn g(&self) -> f64 {
        match self.growth {
            Growth::Components { a, n } => bgp_rate(a, n, self.alpha),
            Growth::Rate { g } => g,
        }
    }

    /// `(1+g)^γ − β(1−δ)`; the steady state exists iff this is positive.
    pub fn feasibility_margin(&self) -> f64 {
        growth_factor_pow(self.g(), self.gamma) - self.beta * (1.0 - self.delta)
    }

    pub fn check_feasible(&self) -> Result<(), ModelError> {
        let denominator = self.feasibility_margin();
        if denominator > 0.0 && denominator.is_finite() {
            Ok(())
        } else {
            Err(ModelError::Infeasible { denominator })
        }
    }

    /// Discount factor of the detrended problem, `β(1+g)^(1−γ)`.
    pub fn effective_discount(&self) -> f64 {
        self.beta * growth_factor_pow(self.g(), 1.0 - self.gamma)
    }
}

/// `(1+g)^p` through exp/ln.
fn growth_factor_pow(g: f64, p: f64) -> f64 {
    (p * g.ln_1p()).exp()
}

fn bgp_rate(a: f64, n: f64, alpha: f64) -> f64 {
    (a.ln_1p() / (1.0 - alpha) + n.ln_1p()).exp_m1()
}

/// Balanced-growth rate: `1 + g = (1 + a)^(1/(1−α)) · (1 + n)`.
pub fn bgp_growth(a: f64, n: f64, alpha: f64) -> Result<f64, ModelError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ModelError::Alpha(alpha));
    }
    for (name, value) in [("a", a), ("n", n)] {
        if !(value > -1.0 && value.is_finite()) {
            return Err(ModelError::GrowthRate { name, value });
        }
    }
    Ok(bgp_rate(a, n, alpha))
}

/// Steady-state capital-output ratio `K/Y = αβ / ((1+g)^γ − β(1−δ))`.
pub fn capital_output_ratio(p: &ModelParams) -> Result<f64, ModelError> {
    p.check_feasible()?;
    Ok(p.alpha * p.beta / p.feasibility_margin())
}

/// Investment-output ratio from the accumulation identity,
/// `I/Y = K'/Y − (1−δ)·K/Y` with `K'/Y = (1+g)·K/Y`.
pub fn investment_share(ky: f64, g: f64, delta: f64) -> f64 {
    (1.0 + g) * ky - (1.0 - delta) * ky
}

/// Steady-state investment-output ratio, equal to `(g+δ)·K/Y`.
pub fn investment_output_ratio(p: &ModelParams) -> Result<f64, ModelError> {
    let ky = capital_output_ratio(p)?;
    Ok(investment_share(ky, p.g(), p.delta))
}

/// Steady state implied by a parameter block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub g: f64,
    pub k_bar: f64,
    pub ky: f64,
    pub iy: f64,
}

impl SteadyState {
    /// Effective output `k̄^α`.
    pub fn y_bar(&self, alpha: f64) -> f64 {
        self.k_bar.powf(alpha)
    }
}

/// Steady-state effective capital
/// `k̄ = (αβ / ((1+g)^γ − β(1−δ)))^(1/(1−α))` with the matching ratios.
pub fn steady_state_k(p: &ModelParams) -> Result<SteadyState, ModelError> {
    let ky = capital_output_ratio(p)?;
    let g = p.g();
    Ok(SteadyState {
        g,
        k_bar: (ky.ln() / (1.0 - p.alpha)).exp(),
        ky,
        iy: investment_share(ky, g, p.delta),
    })
}

/// Effective consumption `k^α + (1−δ)k − (1+g)k'` implied by two
/// consecutive capital stocks.
pub fn implied_consumption(k: f64, k_next: f64, p: &ModelParams) -> f64 {
    k.powf(p.alpha) + (1.0 - p.delta) * k - (1.0 + p.g()) * k_next
}

/// Gross return on effective capital, `αk^(α−1) + 1 − δ`.
pub(crate) fn gross_return(k: f64, p: &ModelParams) -> f64 {
    p.alpha * k.powf(p.alpha - 1.0) + 1.0 - p.delta
}

/// Euler gap at date t given `k[t], k[t+1], k[t+2]`:
/// `β (c[t+1]/c[t])^(−γ) (αk[t+1]^(α−1) + 1 − δ) (1+g)^(−γ) − 1`.
/// Zero on an optimal path; negative when capital at t+1 is too high.
pub fn euler_residual(k_t: f64, k_t1: f64, k_t2: f64, p: &ModelParams) -> Result<f64, ModelError> {
    p.check_feasible()?;
    for k in [k_t, k_t1, k_t2] {
        if !(k > 0.0 && k.is_finite()) {
            return Err(ModelError::NonPositiveCapital(k));
        }
    }
    let c0 = implied_consumption(k_t, k_t1, p);
    let c1 = implied_consumption(k_t1, k_t2, p);
    for (date, consumption) in [(0, c0), (1, c1)] {
        if !(consumption > 0.0) {
            return Err(ModelError::NonPositiveConsumption { date, consumption });
        }
    }
    Ok(consumption_euler_gap(c0, c1, k_t1, p))
}

/// Euler gap written in terms of consumption growth.
pub(crate) fn consumption_euler_gap(c0: f64, c1: f64, k1: f64, p: &ModelParams) -> f64 {
    p.beta * (c1 / c0).powf(-p.gamma) * gross_return(k1, p) * growth_factor_pow(p.g(), -p.gamma)
        - 1.0
}

/// Panel quantities per effective labor unit.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePanel {
    pub start: Year,
    pub y: Vec<f64>,
    pub k: Vec<f64>,
    pub c: Vec<f64>,
    pub i: Vec<f64>,
}

/// Divides output, capital, consumption and investment by
/// `A_t^(1/(1−α)) · L_t`. Uses the panel's `tfp` column when present and the
/// Cobb-Douglas residual under `alpha` otherwise.
pub fn to_effective(panel: &MacroPanel, alpha: f64) -> Result<EffectivePanel, ModelError> {
    accounting::check_alpha(alpha).map_err(|_| ModelError::Alpha(alpha))?;
    let tfp = match panel.tfp() {
        Some(a) => a.to_vec(),
        None => accounting::residual_values(panel, alpha),
    };
    let deflator: Vec<f64> = tfp
        .iter()
        .zip(panel.labor())
        .map(|(&a, &l)| (a.ln() / (1.0 - alpha) + l.ln()).exp())
        .collect();
    let deflate = |x: &[f64]| x.iter().zip(&deflator).map(|(v, d)| v / d).collect();
    Ok(EffectivePanel {
        start: panel.span().start,
        y: deflate(panel.output()),
        k: deflate(panel.capital()),
        c: deflate(panel.consumption()),
        i: deflate(panel.investment()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PanelColumns;

    fn baseline_params() -> ModelParams {
        ModelParams::new(0.34, 0.93, 0.4, 0.05, 0.0004, 0.02).unwrap()
    }

    #[test]
    fn bgp_examples() {
        assert_eq!(bgp_growth(0.0, 0.0, 0.3).unwrap(), 0.0);
        let g = bgp_growth(0.0004, 0.02, 0.34).unwrap();
        assert!((1.0205..=1.0207).contains(&(1.0 + g)));
        let g = bgp_growth(0.01, 0.01, 0.5).unwrap();
        assert!((1.0 + g - 1.030301).abs() < 1e-12);
        assert!(matches!(
            bgp_growth(0.01, 0.01, 1.0),
            Err(ModelError::Alpha(_))
        ));
    }

    #[test]
    fn parameter_ranges() {
        assert!(matches!(
            ModelParams::new(0.3, 0.95, 1.0, 0.05, 0.0, 0.0),
            Err(ModelError::LogUtility)
        ));
        assert!(ModelError::LogUtility.to_string().contains("1 ± ε"));
        assert!(matches!(
            ModelParams::new(0.3, 1.0, 2.0, 0.05, 0.0, 0.0),
            Err(ModelError::Beta(_))
        ));
        assert!(matches!(
            ModelParams::new(0.3, 0.9, -2.0, 0.05, 0.0, 0.0),
            Err(ModelError::Gamma(_))
        ));
        assert!(matches!(
            ModelParams::new(0.3, 0.9, 2.0, 0.0, 0.0, 0.0),
            Err(ModelError::Delta(_))
        ));
        assert!(matches!(
            ModelParams::new(0.3, 0.9, 2.0, 0.05, -1.0, 0.0),
            Err(ModelError::GrowthRate { name: "a", .. })
        ));
    }

    #[test]
    fn scenario_one_ratios() {
        let p = ModelParams::with_rate(0.33, 0.97, 1.8, 0.05, 0.02).unwrap();
        let ky = capital_output_ratio(&p).unwrap();
        // Direct evaluation: 0.3201 / (1.02^1.8 − 0.9215).
        let oracle = 0.33 * 0.97 / (1.02f64.powf(1.8) - 0.97 * 0.95);
        assert!((ky - oracle).abs() < 1e-12);
        assert!((ky - 2.788).abs() < 1e-3);
        let iy = investment_output_ratio(&p).unwrap();
        assert!((iy - 0.195).abs() < 1e-3);
    }

    #[test]
    fn scenario_three_ratio() {
        let p = ModelParams::with_rate(0.33, 0.93, 0.4, 0.05, 0.02).unwrap();
        let ky = capital_output_ratio(&p).unwrap();
        assert!((ky - 2.466).abs() < 1e-3);
    }

    #[test]
    fn infeasible_boundary() {
        // Shrinking effective labor pushes (1+g)^gamma below beta(1-delta).
        let p = ModelParams::with_rate(0.3, 0.99, 2.0, 0.001, -0.05).unwrap();
        assert!(matches!(
            capital_output_ratio(&p),
            Err(ModelError::Infeasible { .. })
        ));
        assert!(matches!(
            steady_state_k(&p),
            Err(ModelError::Infeasible { .. })
        ));
        assert!(matches!(
            euler_residual(1.0, 1.0, 1.0, &p),
            Err(ModelError::Infeasible { .. })
        ));
        // Just inside: large but finite.
        let p = ModelParams::with_rate(0.3, 0.985, 1.5, 0.001, -0.01).unwrap();
        assert!(capital_output_ratio(&p).unwrap() > 20.0);
    }

    #[test]
    fn zero_growth_zero_depreciation_invests_nothing() {
        assert_eq!(investment_share(2.5, 0.0, 0.0), 0.0);
    }

    #[test]
    fn steady_state_of_calibrated_block() {
        let ss = steady_state_k(&baseline_params()).unwrap();
        assert!((ss.k_bar - 4.1).abs() < 0.01, "k_bar = {}", ss.k_bar);
        assert!((ss.k_bar.powf(0.66) - ss.ky).abs() < 1e-12);
        assert!((ss.iy - (ss.g + 0.05) * ss.ky).abs() < 1e-12);
        let r = euler_residual(ss.k_bar, ss.k_bar, ss.k_bar, &baseline_params()).unwrap();
        assert!(r.abs() < 1e-10);
    }

    #[test]
    fn euler_sign_above_steady_state() {
        let p = baseline_params();
        let k = steady_state_k(&p).unwrap().k_bar;
        let r = euler_residual(k, 1.01 * k, k, &p).unwrap();
        assert!(r < 0.0);
    }

    #[test]
    fn euler_rejects_non_positive_consumption() {
        let p = baseline_params();
        let k = steady_state_k(&p).unwrap().k_bar;
        assert!(matches!(
            euler_residual(k, 10.0 * k, k, &p),
            Err(ModelError::NonPositiveConsumption { date: 0, .. })
        ));
    }

    #[test]
    fn effective_units() {
        let panel = MacroPanel::new(
            2000,
            PanelColumns {
                output: vec![8.0, 3.0],
                capital: vec![8.0, 2.0],
                labor: vec![2.0, 1.0],
                consumption: vec![6.0, 2.5],
                investment: vec![2.0, 0.5],
                tfp: Some(vec![2.0, 1.0]),
                ..Default::default()
            },
        )
        .unwrap();
        let e = to_effective(&panel, 0.5).unwrap();
        assert!((e.y[0] - 1.0).abs() < 1e-15);
        assert!((e.k[0] - 1.0).abs() < 1e-15);
        // A = L = 1 leaves year 2001 untouched.
        assert_eq!((e.y[1], e.k[1], e.c[1], e.i[1]), (3.0, 2.0, 2.5, 0.5));
    }

    #[test]
    fn residual_tfp_gives_production_function_in_effective_units() {
        let k = [3.0f64, 4.5, 2.0, 7.0];
        let l = [1.0f64, 1.5, 2.5, 0.7];
        let y: Vec<f64> = k
            .iter()
            .zip(&l)
            .enumerate()
            .map(|(t, (k, l))| (1.0 + 0.1 * t as f64) * k.powf(0.3) * l.powf(0.7))
            .collect();
        let panel = MacroPanel::new(
            1990,
            PanelColumns {
                consumption: y.iter().map(|v| 0.8 * v).collect(),
                investment: y.iter().map(|v| 0.2 * v).collect(),
                output: y,
                capital: k.to_vec(),
                labor: l.to_vec(),
                ..Default::default()
            },
        )
        .unwrap();
        let e = to_effective(&panel, 0.3).unwrap();
        for (y, k) in e.y.iter().zip(&e.k) {
            assert!((y - k.powf(0.3)).abs() < 1e-10);
        }
    }
}
