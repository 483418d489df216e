#![allow(dead_code)]

use growthcal::data::{MacroPanel, PanelColumns};
use growthcal::model::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Panel with `Y = A K^α L^(1−α)` built from the given series.
pub fn cobb_douglas_panel(start: i32, a: &[f64], k: &[f64], l: &[f64], alpha: f64) -> MacroPanel {
    let y: Vec<f64> = a
        .iter()
        .zip(k)
        .zip(l)
        .map(|((a, k), l)| a * k.powf(alpha) * l.powf(1.0 - alpha))
        .collect();
    MacroPanel::new(
        start,
        PanelColumns {
            consumption: y.iter().map(|v| 0.75 * v).collect(),
            investment: y.iter().map(|v| 0.25 * v).collect(),
            output: y,
            capital: k.to_vec(),
            labor: l.to_vec(),
            tfp: Some(a.to_vec()),
            labor_share: None,
        },
    )
    .expect("valid synthetic panel")
}

/// Feasible parameter blocks in a plausible annual-calibration box, with
/// the detrended discount factor below one. Deterministic for a seed.
pub fn random_params(seed: u64, count: usize) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let gamma: f64 = rng.gen_range(0.3..3.0);
        if (gamma - 1.0).abs() < 0.01 {
            continue;
        }
        let p = ModelParams::new(
            rng.gen_range(0.25..0.45),
            rng.gen_range(0.90..0.99),
            gamma,
            rng.gen_range(0.03..0.12),
            rng.gen_range(0.0..0.02),
            rng.gen_range(0.0..0.03),
        )
        .expect("box lies inside parameter ranges");
        if p.check_feasible().is_ok() && p.effective_discount() < 1.0 {
            out.push(p);
        }
    }
    out
}

/// Random positive series of length `n` (a log random walk).
pub fn random_walk(rng: &mut ChaCha8Rng, n: usize, start: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut x: f64 = start;
    for _ in 0..n {
        v.push(x);
        x *= (rng.gen_range(-0.1..0.12f64)).exp();
    }
    v
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
