//! Solow growth accounting.
//!
//! Output is Cobb-Douglas, `Y = A K^α L^(1-α)`, so log growth splits
//! additively into `α·Δln K`, `(1-α)·Δln L` and a TFP residual. Growth over a
//! period is the cumulative log ratio `ln(Y_end / Y_start)`, which keeps the
//! decomposition exact and additive across adjacent periods. Use
//! [`AccountingRow::percent_growth`] for the compounded percentage.

use serde::Serialize;
use thiserror::Error;

use crate::data::{DataError, MacroPanel, YearRange, YearSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AccountingError {
    #[error("capital share {0} must lie in (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("panel has no labor_share column; pass the capital share explicitly")]
    NoLaborShare,
    #[error("series needs at least 2 values, got {0}")]
    SeriesTooShort(usize),
    #[error("series value {value} in year {year} must be finite and > 0")]
    NonPositive { year: i32, value: f64 },
    #[error("range {0} must span at least 2 years")]
    RangeTooShort(YearRange),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl AccountingError {
    pub fn code(&self) -> &'static str {
        match self {
            AccountingError::AlphaOutOfRange(_) => "alpha_out_of_range",
            AccountingError::NoLaborShare => "no_labor_share",
            AccountingError::SeriesTooShort(_) => "series_too_short",
            AccountingError::NonPositive { .. } => "non_positive",
            AccountingError::RangeTooShort(_) => "range_too_short",
            AccountingError::Data(e) => e.code(),
        }
    }
}

/// How the capital share is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    Fixed(f64),
    /// `α = 1 − mean(labor_share)` over the range, or the full panel for `None`.
    FromLaborShare(Option<YearRange>),
}

impl AlphaSpec {
    pub fn resolve(&self, panel: &MacroPanel) -> Result<f64, AccountingError> {
        let alpha = match *self {
            AlphaSpec::Fixed(a) => a,
            AlphaSpec::FromLaborShare(range) => {
                let shares = panel
                    .series(crate::data::Column::LaborShare)
                    .ok_or(AccountingError::NoLaborShare)?;
                let range = range.unwrap_or_else(|| panel.span());
                let window = shares.window(range)?;
                1.0 - window.iter().sum::<f64>() / window.len() as f64
            }
        };
        check_alpha(alpha)?;
        Ok(alpha)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), AccountingError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(AccountingError::AlphaOutOfRange(alpha))
    }
}

/// One period of the decomposition. All fields are in log points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccountingRow {
    pub range: YearRange,
    pub growth: f64,
    pub contrib_capital: f64,
    pub contrib_labor: f64,
    pub contrib_tfp: f64,
}

impl AccountingRow {
    /// Compounded growth `exp(growth) − 1`.
    pub fn percent_growth(&self) -> f64 {
        self.growth.exp_m1()
    }

    /// `growth − (capital + labor + tfp)`; zero up to rounding.
    pub fn residual(&self) -> f64 {
        self.growth - (self.contrib_capital + self.contrib_labor + self.contrib_tfp)
    }
}

/// Annual log growth `ln(x[t+1] / x[t])`, indexed by the earlier year.
pub fn log_growth(series: &YearSeries) -> Result<YearSeries, AccountingError> {
    if series.len() < 2 {
        return Err(AccountingError::SeriesTooShort(series.len()));
    }
    if let Some((year, value)) = series.iter().find(|&(_, v)| !(v.is_finite() && v > 0.0)) {
        return Err(AccountingError::NonPositive { year, value });
    }
    let v = series.values();
    Ok(YearSeries::new(
        series.start(),
        v.windows(2).map(|w| (w[1] / w[0]).ln()).collect(),
    ))
}

/// TFP as the Cobb-Douglas residual `A = Y / (K^α L^(1−α))`.
pub fn tfp_residual(panel: &MacroPanel, alpha: AlphaSpec) -> Result<YearSeries, AccountingError> {
    let alpha = alpha.resolve(panel)?;
    Ok(YearSeries::new(
        panel.span().start,
        residual_values(panel, alpha),
    ))
}

pub(crate) fn residual_values(panel: &MacroPanel, alpha: f64) -> Vec<f64> {
    panel
        .output()
        .iter()
        .zip(panel.capital())
        .zip(panel.labor())
        .map(|((&y, &k), &l)| (y.ln() - alpha * k.ln() - (1.0 - alpha) * l.ln()).exp())
        .collect()
}

/// Decomposes cumulative log output growth over `range`.
pub fn decompose_growth(
    panel: &MacroPanel,
    alpha: AlphaSpec,
    range: YearRange,
) -> Result<AccountingRow, AccountingError> {
    let alpha = alpha.resolve(panel)?;
    decompose_with(panel, alpha, range)
}

fn decompose_with(
    panel: &MacroPanel,
    alpha: f64,
    range: YearRange,
) -> Result<AccountingRow, AccountingError> {
    if range.len() < 2 {
        return Err(AccountingError::RangeTooShort(range));
    }
    panel.check_range(range)?;
    let (s, e) = (
        panel.index_of(range.start).expect("range checked"),
        panel.index_of(range.end).expect("range checked"),
    );
    let log_ratio = |x: &[f64]| (x[e] / x[s]).ln();
    let growth = log_ratio(panel.output());
    let contrib_capital = alpha * log_ratio(panel.capital());
    let contrib_labor = (1.0 - alpha) * log_ratio(panel.labor());
    Ok(AccountingRow {
        range,
        growth,
        contrib_capital,
        contrib_labor,
        contrib_tfp: growth - contrib_capital - contrib_labor,
    })
}

/// [`decompose_growth`] over each range with one shared α. Row order
/// follows `ranges`.
pub fn accounting_table(
    panel: &MacroPanel,
    alpha: AlphaSpec,
    ranges: &[YearRange],
) -> Result<Vec<AccountingRow>, AccountingError> {
    let alpha = alpha.resolve(panel)?;
    ranges
        .iter()
        .map(|&r| decompose_with(panel, alpha, r))
        .collect()
}

/// Calendar decades over the panel span (1960–1969, 1970–1979, ...), with
/// the first and last clipped to the data. Single-year pieces are dropped.
///
/// With `chained`, each decade instead runs to the first year of the next
/// (1960–1970, 1970–1980, ...), so every annual change is counted exactly
/// once and the rows telescope to the full span.
pub fn decade_ranges(span: YearRange, chained: bool) -> Vec<YearRange> {
    let mut out = Vec::new();
    let mut start = span.start;
    while start < span.end {
        let next_decade = (start.div_euclid(10) + 1) * 10;
        let end = if chained {
            next_decade
        } else {
            next_decade - 1
        }
        .min(span.end);
        if end > start {
            out.push(YearRange { start, end });
        }
        start = if chained { end } else { end + 1 };
    }
    out
}
