//! Transition dynamics of the detrended planner problem.
//!
//! Paths are found by shooting on initial consumption. For a guess `c0`
//! the path is rolled forward with the resource constraint and the Euler
//! condition:
//!
//! ```text
//! k[t+1] = (k[t]^α + (1−δ)k[t] − c[t]) / (1+g)
//! c[t+1] = c[t] · (β (1+g)^(−γ) (αk[t+1]^(α−1) + 1 − δ))^(1/γ)
//! ```
//!
//! A guess that is too high eventually runs capital down (it turns away
//! from k̄ or crosses it from above); one that is too low overshoots k̄ from
//! below or turns back up. Bisection on that classification brackets the
//! saddle path to machine precision.
//!
//! Forward shooting is unstable, so one bracket only pins the path down for
//! a limited number of periods. The two bracketing paths enclose the
//! solution; the prefix on which they agree is kept and shooting restarts
//! from its last capital stock. The restart points are the only dates where
//! the Euler gap differs from rounding noise, and agreement is required to
//! be tight enough that those gaps stay below the solver tolerance.

use serde::Serialize;
use thiserror::Error;

use crate::model::{self, ModelError, ModelParams};

pub const DEFAULT_HORIZON: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Bisection steps per shooting segment.
const MAX_BISECTIONS: usize = 2_000;
/// Steps simulated past the horizon to classify a guess.
const CLASSIFY_STEPS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "detrended discount factor beta*(1+g)^(1-gamma) = {0} must be < 1 for the transformed problem to converge"
    )]
    DiscountTooHigh(f64),
    #[error("initial capital k0 = {0} admits no positive consumption")]
    InfeasibleInitial(f64),
    #[error("horizon {0} must be at least 2")]
    HorizonTooShort(usize),
    #[error("tolerance {0} must be finite and > 0")]
    BadTolerance(f64),
    #[error("consumption must be > 0, got {0}")]
    NonPositiveConsumption(f64),
    #[error(
        "shooting stalled at date {date}: initial consumption bracket [{lo}, {hi}] cannot be narrowed further"
    )]
    NoConvergence { date: usize, lo: f64, hi: f64 },
}

impl SimulateError {
    pub fn code(&self) -> &'static str {
        match self {
            SimulateError::Model(e) => e.code(),
            SimulateError::DiscountTooHigh(_) => "discount_too_high",
            SimulateError::InfeasibleInitial(_) => "infeasible_initial",
            SimulateError::HorizonTooShort(_) => "horizon_too_short",
            SimulateError::BadTolerance(_) => "bad_tolerance",
            SimulateError::NonPositiveConsumption(_) => "non_positive_consumption",
            SimulateError::NoConvergence { .. } => "no_convergence",
        }
    }
}

/// CRRA period utility `c^(1−γ) / (1−γ)`.
pub fn utility(c: f64, gamma: f64) -> Result<f64, SimulateError> {
    if !(c > 0.0) {
        return Err(SimulateError::NonPositiveConsumption(c));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(ModelError::Gamma(gamma).into());
    }
    if gamma == 1.0 {
        return Err(ModelError::LogUtility.into());
    }
    Ok(c.powf(1.0 - gamma) / (1.0 - gamma))
}

/// Solved transition path in effective units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionPath {
    pub horizon: usize,
    /// `k[0..=T]`.
    pub k: Vec<f64>,
    /// `c[0..T]`.
    pub c: Vec<f64>,
    /// Output `k[t]^α` for `t < T`.
    pub y: Vec<f64>,
    /// Gross investment `y[t] − c[t]` for `t < T`.
    pub i: Vec<f64>,
    /// Euler gaps at dates `0..T−1`.
    pub euler_gaps: Vec<f64>,
    pub converged: bool,
    /// `|k[T] − k̄| / k̄`.
    pub terminal_error: f64,
    pub k_bar: f64,
}

impl TransitionPath {
    pub fn max_euler_gap(&self) -> f64 {
        self.euler_gaps.iter().fold(0.0, |m, g| m.max(g.abs()))
    }

    /// Discounted utility of the path plus the value of holding `k[T]`
    /// forever, with discount factor `β(1+g)^(1−γ)`.
    pub fn welfare(&self, p: &ModelParams) -> Result<f64, SimulateError> {
        path_welfare(&self.c, *self.k.last().expect("non-empty path"), p)
    }
}

/// Welfare of consuming `c` and then staying at `k_terminal` forever.
pub fn path_welfare(c: &[f64], k_terminal: f64, p: &ModelParams) -> Result<f64, SimulateError> {
    let disc = p.effective_discount();
    let mut total = 0.0;
    let mut weight = 1.0;
    for &ct in c {
        total += weight * utility(ct, p.gamma)?;
        weight *= disc;
    }
    let stay = model::implied_consumption(k_terminal, k_terminal, p);
    Ok(total + weight * utility(stay, p.gamma)? / (1.0 - disc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    TooHigh,
    TooLow,
    Settled,
}

struct Shot {
    verdict: Verdict,
    k: Vec<f64>,
    c: Vec<f64>,
}

struct Dynamics {
    alpha: f64,
    keep: f64,
    growth: f64,
    euler_factor: f64,
    inv_gamma: f64,
    k_bar: f64,
}

impl Dynamics {
    fn new(p: &ModelParams, k_bar: f64) -> Self {
        let g = p.g();
        Dynamics {
            alpha: p.alpha,
            keep: 1.0 - p.delta,
            growth: 1.0 + g,
            euler_factor: p.beta * (-p.gamma * g.ln_1p()).exp(),
            inv_gamma: 1.0 / p.gamma,
            k_bar,
        }
    }

    fn resources(&self, k: f64) -> f64 {
        k.powf(self.alpha) + self.keep * k
    }

    fn next_c(&self, c: f64, k_next: f64) -> f64 {
        let ret = self.alpha * k_next.powf(self.alpha - 1.0) + self.keep;
        c * (self.euler_factor * ret).powf(self.inv_gamma)
    }

    /// Rolls the path from `(k0, c0)`, recording `record` steps, and keeps
    /// going (unrecorded) until the guess can be classified.
    fn shoot(&self, k0: f64, c0: f64, record: usize) -> Shot {
        let mut k = Vec::with_capacity(record + 1);
        let mut c = Vec::with_capacity(record);
        k.push(k0);
        let (mut kt, mut ct) = (k0, c0);
        let kb = self.k_bar;
        for step in 0..record + CLASSIFY_STEPS {
            let kn = (self.resources(kt) - ct) / self.growth;
            if step < record {
                c.push(ct);
                k.push(kn);
            }
            let verdict = if !(kn > 0.0 && kn.is_finite()) {
                Some(Verdict::TooHigh)
            } else if kt < kb {
                if kn > kb {
                    Some(Verdict::TooLow)
                } else if kn < kt {
                    Some(Verdict::TooHigh)
                } else {
                    None
                }
            } else if kt > kb {
                if kn < kb {
                    Some(Verdict::TooHigh)
                } else if kn > kt {
                    Some(Verdict::TooLow)
                } else {
                    None
                }
            } else if kn < kb {
                Some(Verdict::TooHigh)
            } else if kn > kb {
                Some(Verdict::TooLow)
            } else {
                None
            };
            if let Some(verdict) = verdict {
                return Shot { verdict, k, c };
            }
            let cn = self.next_c(ct, kn);
            kt = kn;
            ct = cn;
        }
        Shot {
            verdict: Verdict::Settled,
            k,
            c,
        }
    }
}

fn validate(
    p: &ModelParams,
    horizon: usize,
    tol: f64,
) -> Result<model::SteadyState, SimulateError> {
    let ss = model::steady_state_k(p)?;
    let disc = p.effective_discount();
    if !(disc < 1.0) {
        return Err(SimulateError::DiscountTooHigh(disc));
    }
    if horizon < 2 {
        return Err(SimulateError::HorizonTooShort(horizon));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SimulateError::BadTolerance(tol));
    }
    Ok(ss)
}

/// Solves the transition from effective capital `k0` over `horizon`
/// periods. Euler gaps stay within `tol` at every date; `converged` reports
/// whether `k[T]` is within `10·tol` of k̄ (relative).
pub fn simulate_transition(
    k0: f64,
    p: &ModelParams,
    horizon: usize,
    tol: f64,
) -> Result<TransitionPath, SimulateError> {
    let ss = validate(p, horizon, tol)?;
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(SimulateError::InfeasibleInitial(k0));
    }
    let dynamics = Dynamics::new(p, ss.k_bar);
    // Two bracketing paths must agree this closely (relative) before their
    // common prefix is accepted; the gap at a restart is about γ times the
    // consumption mismatch.
    let agree = 0.1 * tol / p.gamma.max(1.0);

    let mut k = vec![k0];
    let mut c: Vec<f64> = Vec::with_capacity(horizon);
    while c.len() < horizon {
        let date = c.len();
        let kt = *k.last().expect("non-empty");
        let remaining = horizon - date;
        let (seg_k, seg_c) = solve_segment(&dynamics, kt, remaining, agree, date)?;
        c.extend_from_slice(&seg_c);
        k.extend_from_slice(&seg_k[1..]);
    }

    let y: Vec<f64> = k[..horizon].iter().map(|kt| kt.powf(p.alpha)).collect();
    let i: Vec<f64> = y.iter().zip(&c).map(|(y, c)| y - c).collect();
    let euler_gaps = (0..horizon - 1)
        .map(|t| model::consumption_euler_gap(c[t], c[t + 1], k[t + 1], p))
        .collect();
    let terminal_error = (k[horizon] - ss.k_bar).abs() / ss.k_bar;
    Ok(TransitionPath {
        horizon,
        k,
        c,
        y,
        i,
        euler_gaps,
        converged: terminal_error < 10.0 * tol,
        terminal_error,
        k_bar: ss.k_bar,
    })
}

/// One shooting segment from `k0`. Returns the accepted prefix (capital
/// including `k0`, and consumption), which has at least one step.
fn solve_segment(
    dynamics: &Dynamics,
    k0: f64,
    remaining: usize,
    agree: f64,
    date: usize,
) -> Result<(Vec<f64>, Vec<f64>), SimulateError> {
    let resources = dynamics.resources(k0);
    if !(resources > 0.0 && resources.is_finite()) {
        return Err(SimulateError::InfeasibleInitial(k0));
    }
    let (mut lo, mut hi) = (resources * 1e-12, resources);
    let mut lo_shot = dynamics.shoot(k0, lo, remaining);
    if lo_shot.verdict != Verdict::TooLow {
        // Even near-zero consumption does not overshoot: the path settles or
        // the bracket is degenerate.
        if lo_shot.verdict == Verdict::Settled {
            return Ok((lo_shot.k, lo_shot.c));
        }
        return Err(SimulateError::NoConvergence { date, lo, hi });
    }
    let mut hi_shot = dynamics.shoot(k0, hi, remaining);

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let shot = dynamics.shoot(k0, mid, remaining);
        match shot.verdict {
            Verdict::TooLow => {
                lo = mid;
                lo_shot = shot;
            }
            Verdict::TooHigh => {
                hi = mid;
                hi_shot = shot;
            }
            Verdict::Settled => return Ok((shot.k, shot.c)),
        }
    }

    // Longest prefix on which the bracketing paths agree.
    let steps = lo_shot.c.len().min(hi_shot.c.len());
    let mut accepted = 0;
    for t in 0..steps {
        let dc = (lo_shot.c[t] - hi_shot.c[t]).abs() / lo_shot.c[t];
        let dk = (lo_shot.k[t + 1] - hi_shot.k[t + 1]).abs() / dynamics.k_bar;
        if dc > agree || dk > agree {
            break;
        }
        accepted = t + 1;
    }
    if accepted == 0 {
        return Err(SimulateError::NoConvergence { date, lo, hi });
    }
    lo_shot.k.truncate(accepted + 1);
    lo_shot.c.truncate(accepted);
    Ok((lo_shot.k, lo_shot.c))
}

/// Outcome of checking the closed-form k̄ against simulated dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub k_bar: f64,
    /// Terminal error of the path started at `0.9·k̄`.
    pub from_below: f64,
    /// Terminal error of the path started at `1.1·k̄`.
    pub from_above: f64,
    pub max_terminal_error: f64,
    pub max_euler_gap: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Simulates from `0.9·k̄` and `1.1·k̄` over the default horizon and passes
/// when both paths end within `tol` (relative) of k̄. `tol = 0` never passes.
pub fn verify_fixed_point(p: &ModelParams, tol: f64) -> Result<FixedPointReport, SimulateError> {
    let ss = model::steady_state_k(p)?;
    let below = simulate_transition(0.9 * ss.k_bar, p, DEFAULT_HORIZON, DEFAULT_TOL)?;
    let above = simulate_transition(1.1 * ss.k_bar, p, DEFAULT_HORIZON, DEFAULT_TOL)?;
    let max_terminal_error = below.terminal_error.max(above.terminal_error);
    Ok(FixedPointReport {
        k_bar: ss.k_bar,
        from_below: below.terminal_error,
        from_above: above.terminal_error,
        max_terminal_error,
        max_euler_gap: below.max_euler_gap().max(above.max_euler_gap()),
        tol,
        pass: max_terminal_error < tol,
    })
}

/// [`verify_fixed_point`] over many parameter blocks, in input order.
pub fn verify_many(
    params: &[ModelParams],
    tol: f64,
    exec: crate::Execution,
) -> Vec<Result<FixedPointReport, SimulateError>> {
    crate::parallel::map_ordered(params, exec, |p| verify_fixed_point(p, tol))
}
