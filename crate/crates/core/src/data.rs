//! Annual macroeconomic panels: parsing, windowed statistics and
//! steady-state window selection.
//!
//! Units are never checked beyond positivity. Everything downstream is a
//! ratio or a log difference, so the currency unit of the panel does not
//! matter as long as it is shared by output, capital, consumption and
//! investment.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Calendar year.
pub type Year = i32;

pub const DEFAULT_STEADY_TOL: f64 = 0.01;
pub const DEFAULT_STEADY_MIN_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("missing mandatory column `{0}`")]
    MissingColumn(String),
    #[error("line {line}, column `{column}`: `{value}` is not a number")]
    NonNumeric {
        line: usize,
        column: String,
        value: String,
    },
    #[error("line {line}, column `{column}`: value {value} must be finite and > 0")]
    NonPositive {
        line: usize,
        column: String,
        value: f64,
    },
    #[error("line {line}, column `labor_share`: value {value} must lie in (0, 1)")]
    ShareOutOfRange { line: usize, value: f64 },
    #[error("line {line}: year {year} appears twice")]
    DuplicateYear { line: usize, year: Year },
    #[error("line {line}: year {found} follows {previous}, year {missing} is missing")]
    GappedYear {
        line: usize,
        previous: Year,
        found: Year,
        missing: Year,
    },
    #[error("line {line}: year {found} is out of order after {previous}")]
    YearOutOfOrder {
        line: usize,
        previous: Year,
        found: Year,
    },
    #[error("panel needs at least 2 years, got {0}")]
    TooShort(usize),
    #[error("series `{name}` has {got} values, expected {expected}")]
    LengthMismatch {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("invalid year range `{0}`, expected START:END with START <= END")]
    BadRange(String),
    #[error("window {range} is outside the span {span}")]
    OutOfSpan { range: YearRange, span: YearRange },
    #[error("malformed CSV: {0}")]
    Csv(String),
}

impl DataError {
    pub fn code(&self) -> &'static str {
        match self {
            DataError::MissingColumn(_) => "missing_column",
            DataError::NonNumeric { .. } => "non_numeric",
            DataError::NonPositive { .. } => "non_positive",
            DataError::ShareOutOfRange { .. } => "share_out_of_range",
            DataError::DuplicateYear { .. } => "duplicate_year",
            DataError::GappedYear { .. } => "gapped_year",
            DataError::YearOutOfOrder { .. } => "year_out_of_order",
            DataError::TooShort(_) => "too_short",
            DataError::LengthMismatch { .. } => "length_mismatch",
            DataError::BadRange(_) => "bad_range",
            DataError::OutOfSpan { .. } => "out_of_span",
            DataError::Csv(_) => "csv",
        }
    }

    /// Row/column location of the offending cell, when there is one.
    pub fn location(&self) -> Option<String> {
        match self {
            DataError::NonNumeric { line, column, .. }
            | DataError::NonPositive { line, column, .. } => {
                Some(format!("line {line}, column {column}"))
            }
            DataError::ShareOutOfRange { line, .. } => {
                Some(format!("line {line}, column labor_share"))
            }
            DataError::DuplicateYear { line, .. }
            | DataError::GappedYear { line, .. }
            | DataError::YearOutOfOrder { line, .. } => Some(format!("line {line}, column year")),
            _ => None,
        }
    }
}

/// Inclusive range of calendar years.
#[allow(clippy::len_without_is_empty)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct YearRange {
    pub start: Year,
    pub end: Year,
}

impl YearRange {
    pub fn new(start: Year, end: Year) -> Result<Self, DataError> {
        if start > end {
            return Err(DataError::BadRange(format!("{start}:{end}")));
        }
        Ok(YearRange { start, end })
    }

    /// Number of years covered.
    pub fn len(&self) -> usize {
        (self.end - self.start) as usize + 1
    }

    pub fn contains(&self, other: &YearRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Parses a comma-separated list of `START:END` ranges.
    pub fn parse_list(text: &str) -> Result<Vec<YearRange>, DataError> {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for YearRange {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DataError::BadRange(s.to_string());
        let (a, b) = s.trim().split_once(':').ok_or_else(bad)?;
        let start = a.trim().parse().map_err(|_| bad())?;
        let end = b.trim().parse().map_err(|_| bad())?;
        YearRange::new(start, end).map_err(|_| bad())
    }
}

/// Annual series indexed by consecutive years starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct YearSeries {
    start: Year,
    values: Vec<f64>,
}

impl YearSeries {
    pub fn new(start: Year, values: Vec<f64>) -> Self {
        YearSeries { start, values }
    }

    pub fn start(&self) -> Year {
        self.start
    }

    /// Last year covered. Meaningless for an empty series.
    pub fn end(&self) -> Year {
        self.start + self.values.len() as Year - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn span(&self) -> Option<YearRange> {
        (!self.values.is_empty()).then(|| YearRange {
            start: self.start,
            end: self.end(),
        })
    }

    pub fn get(&self, year: Year) -> Option<f64> {
        let idx = year.checked_sub(self.start)?;
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Year, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start + i as Year, v))
    }

    /// Values inside `range`, or an error when the range leaves the span.
    pub fn window(&self, range: YearRange) -> Result<&[f64], DataError> {
        let span = self.span().unwrap_or(YearRange {
            start: self.start,
            end: self.start - 1,
        });
        if self.values.is_empty() || !span.contains(&range) {
            return Err(DataError::OutOfSpan { range, span });
        }
        let lo = (range.start - self.start) as usize;
        Ok(&self.values[lo..lo + range.len()])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> YearSeries {
        YearSeries::new(self.start, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Columns of a [`MacroPanel`], in CSV header spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Column {
    Output,
    Capital,
    Labor,
    Consumption,
    Investment,
    Tfp,
    LaborShare,
}

impl Column {
    pub const MANDATORY: [Column; 5] = [
        Column::Output,
        Column::Capital,
        Column::Labor,
        Column::Consumption,
        Column::Investment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::Output => "output",
            Column::Capital => "capital",
            Column::Labor => "labor",
            Column::Consumption => "consumption",
            Column::Investment => "investment",
            Column::Tfp => "tfp",
            Column::LaborShare => "labor_share",
        }
    }
}

/// Validated annual panel of output, capital, labor, consumption and
/// investment, with optional TFP and labor-share columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroPanel {
    start: Year,
    output: Vec<f64>,
    capital: Vec<f64>,
    labor: Vec<f64>,
    consumption: Vec<f64>,
    investment: Vec<f64>,
    tfp: Option<Vec<f64>>,
    labor_share: Option<Vec<f64>>,
}

/// Raw columns used to assemble a [`MacroPanel`].
#[derive(Debug, Clone, Default)]
pub struct PanelColumns {
    pub output: Vec<f64>,
    pub capital: Vec<f64>,
    pub labor: Vec<f64>,
    pub consumption: Vec<f64>,
    pub investment: Vec<f64>,
    pub tfp: Option<Vec<f64>>,
    pub labor_share: Option<Vec<f64>>,
}

impl MacroPanel {
    /// Builds a panel from columns starting at `start`. Line numbers in
    /// errors assume a header line followed by one line per year.
    pub fn new(start: Year, cols: PanelColumns) -> Result<Self, DataError> {
        let n = cols.output.len();
        if n < 2 {
            return Err(DataError::TooShort(n));
        }
        let mut named: Vec<(Column, &Vec<f64>)> = vec![
            (Column::Output, &cols.output),
            (Column::Capital, &cols.capital),
            (Column::Labor, &cols.labor),
            (Column::Consumption, &cols.consumption),
            (Column::Investment, &cols.investment),
        ];
        if let Some(t) = &cols.tfp {
            named.push((Column::Tfp, t));
        }
        if let Some(s) = &cols.labor_share {
            named.push((Column::LaborShare, s));
        }
        for (col, values) in named {
            if values.len() != n {
                return Err(DataError::LengthMismatch {
                    name: col.name().to_string(),
                    got: values.len(),
                    expected: n,
                });
            }
            for (i, &v) in values.iter().enumerate() {
                check_cell(col, v, i + 2)?;
            }
        }
        Ok(MacroPanel {
            start,
            output: cols.output,
            capital: cols.capital,
            labor: cols.labor,
            consumption: cols.consumption,
            investment: cols.investment,
            tfp: cols.tfp,
            labor_share: cols.labor_share,
        })
    }

    pub fn len(&self) -> usize {
        self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output.is_empty()
    }

    pub fn span(&self) -> YearRange {
        YearRange {
            start: self.start,
            end: self.start + self.len() as Year - 1,
        }
    }

    pub fn years(&self) -> impl Iterator<Item = Year> {
        let span = self.span();
        span.start..=span.end
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn capital(&self) -> &[f64] {
        &self.capital
    }

    pub fn labor(&self) -> &[f64] {
        &self.labor
    }

    pub fn consumption(&self) -> &[f64] {
        &self.consumption
    }

    pub fn investment(&self) -> &[f64] {
        &self.investment
    }

    pub fn tfp(&self) -> Option<&[f64]> {
        self.tfp.as_deref()
    }

    pub fn labor_share(&self) -> Option<&[f64]> {
        self.labor_share.as_deref()
    }

    /// The named column as a year-indexed series, `None` for an absent
    /// optional column.
    pub fn series(&self, col: Column) -> Option<YearSeries> {
        let values = match col {
            Column::Output => &self.output,
            Column::Capital => &self.capital,
            Column::Labor => &self.labor,
            Column::Consumption => &self.consumption,
            Column::Investment => &self.investment,
            Column::Tfp => self.tfp.as_ref()?,
            Column::LaborShare => self.labor_share.as_ref()?,
        };
        Some(YearSeries::new(self.start, values.clone()))
    }

    /// Index of `year` inside the panel.
    pub fn index_of(&self, year: Year) -> Option<usize> {
        let span = self.span();
        (span.start..=span.end)
            .contains(&year)
            .then(|| (year - span.start) as usize)
    }

    pub fn check_range(&self, range: YearRange) -> Result<(), DataError> {
        let span = self.span();
        if span.contains(&range) {
            Ok(())
        } else {
            Err(DataError::OutOfSpan { range, span })
        }
    }

    /// Writes the panel back to CSV in the canonical column order.
    pub fn to_csv(&self) -> String {
        let mut header = vec![
            "year",
            "output",
            "capital",
            "labor",
            "consumption",
            "investment",
        ];
        if self.tfp.is_some() {
            header.push("tfp");
        }
        if self.labor_share.is_some() {
            header.push("labor_share");
        }
        let mut out = header.join(",");
        out.push('\n');
        for (i, year) in self.years().enumerate() {
            let mut cells = vec![
                year.to_string(),
                self.output[i].to_string(),
                self.capital[i].to_string(),
                self.labor[i].to_string(),
                self.consumption[i].to_string(),
                self.investment[i].to_string(),
            ];
            if let Some(t) = &self.tfp {
                cells.push(t[i].to_string());
            }
            if let Some(s) = &self.labor_share {
                cells.push(s[i].to_string());
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn check_cell(col: Column, v: f64, line: usize) -> Result<(), DataError> {
    if col == Column::LaborShare {
        if !(v > 0.0 && v < 1.0) {
            return Err(DataError::ShareOutOfRange { line, value: v });
        }
    } else if !(v.is_finite() && v > 0.0) {
        return Err(DataError::NonPositive {
            line,
            column: col.name().to_string(),
            value: v,
        });
    }
    Ok(())
}

/// Parses a panel from CSV text with a header row naming at least
/// `year,output,capital,labor,consumption,investment`. Optional `tfp` and
/// `labor_share` columns are picked up when present; any other column is
/// ignored. Line numbers in errors count the header as line 1.
pub fn parse_panel(csv_text: &str) -> Result<MacroPanel, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| DataError::Csv(e.to_string()))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let year_idx = find("year").ok_or_else(|| DataError::MissingColumn("year".into()))?;
    let mut mandatory = Vec::with_capacity(Column::MANDATORY.len());
    for col in Column::MANDATORY {
        let idx = find(col.name()).ok_or_else(|| DataError::MissingColumn(col.name().into()))?;
        mandatory.push((col, idx));
    }
    let tfp_idx = find(Column::Tfp.name());
    let share_idx = find(Column::LaborShare.name());

    let mut cols = PanelColumns {
        tfp: tfp_idx.map(|_| Vec::new()),
        labor_share: share_idx.map(|_| Vec::new()),
        ..Default::default()
    };
    let mut start: Option<Year> = None;
    let mut previous: Option<Year> = None;

    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        let year_cell = record.get(year_idx).unwrap_or("");
        let year: Year = year_cell.parse().map_err(|_| DataError::NonNumeric {
            line,
            column: "year".into(),
            value: year_cell.to_string(),
        })?;
        if let Some(prev) = previous {
            if year == prev {
                return Err(DataError::DuplicateYear { line, year });
            }
            if year < prev {
                return Err(DataError::YearOutOfOrder {
                    line,
                    previous: prev,
                    found: year,
                });
            }
            if year > prev + 1 {
                return Err(DataError::GappedYear {
                    line,
                    previous: prev,
                    found: year,
                    missing: prev + 1,
                });
            }
        }
        start.get_or_insert(year);
        previous = Some(year);

        let cell = |col: Column, idx: usize| -> Result<f64, DataError> {
            let raw = record.get(idx).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| DataError::NonNumeric {
                line,
                column: col.name().to_string(),
                value: raw.to_string(),
            })?;
            check_cell(col, v, line)?;
            Ok(v)
        };
        for &(col, idx) in &mandatory {
            let v = cell(col, idx)?;
            match col {
                Column::Output => cols.output.push(v),
                Column::Capital => cols.capital.push(v),
                Column::Labor => cols.labor.push(v),
                Column::Consumption => cols.consumption.push(v),
                Column::Investment => cols.investment.push(v),
                _ => unreachable!("optional column in mandatory list"),
            }
        }
        if let (Some(idx), Some(t)) = (tfp_idx, cols.tfp.as_mut()) {
            t.push(cell(Column::Tfp, idx)?);
        }
        if let (Some(idx), Some(s)) = (share_idx, cols.labor_share.as_mut()) {
            s.push(cell(Column::LaborShare, idx)?);
        }
    }

    MacroPanel::new(start.unwrap_or_default(), cols)
}

/// Mean and population standard deviation of a series over one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats {
    pub range: YearRange,
    pub mean: f64,
    pub std: f64,
}

/// Per-window arithmetic mean and population (divide-by-n) standard
/// deviation. Output order follows `windows`.
pub fn window_stats(
    series: &YearSeries,
    windows: &[YearRange],
) -> Result<Vec<WindowStats>, DataError> {
    windows
        .iter()
        .map(|&range| {
            let values = series.window(range)?;
            let (mean, std) = mean_std(values);
            Ok(WindowStats { range, mean, std })
        })
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    // Exact zero for constant windows, where two-pass rounding could leave dust.
    if values.iter().all(|&v| v == values[0]) {
        return (values[0], 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// A candidate steady-state window with its mean absolute gap between
/// consumption and output log growth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyWindow {
    pub range: YearRange,
    pub mean_gap: f64,
}

/// All maximal windows of at least `min_len` years over which the mean
/// absolute difference between annual log growth of consumption and of
/// output is at most `tol`. A window is maximal when no strictly larger
/// qualifying window contains it. Sorted by gap ascending, then length
/// descending, then start year.
pub fn rank_steady_windows(panel: &MacroPanel, min_len: usize, tol: f64) -> Vec<SteadyWindow> {
    let n = panel.len();
    let min_len = min_len.max(2);
    if n < min_len || tol.is_nan() {
        return Vec::new();
    }
    let (c, y) = (panel.consumption(), panel.output());
    let gaps: Vec<f64> = (0..n - 1)
        .map(|t| ((c[t + 1] / c[t]).ln() - (y[t + 1] / y[t]).ln()).abs())
        .collect();
    // Mean gap of window [s, e] (indices into years) is over gaps[s..e].
    let mean_gap = |s: usize, e: usize| -> f64 { gaps[s..e].iter().sum::<f64>() / (e - s) as f64 };

    let mut qualifies = vec![vec![false; n]; n];
    for (s, row) in qualifies.iter_mut().enumerate() {
        for (e, q) in row.iter_mut().enumerate().skip(s + min_len - 1) {
            *q = mean_gap(s, e) <= tol;
        }
    }
    // covered[s][e]: some qualifying window [s', e'] with s' <= s and e' >= e.
    let mut covered = vec![vec![false; n]; n];
    for s in 0..n {
        for e in (s..n).rev() {
            covered[s][e] =
                qualifies[s][e] || (s > 0 && covered[s - 1][e]) || (e + 1 < n && covered[s][e + 1]);
        }
    }

    let mut found = Vec::new();
    for s in 0..n {
        for e in s..n {
            if !qualifies[s][e] {
                continue;
            }
            let dominated = (s > 0 && covered[s - 1][e]) || (e + 1 < n && covered[s][e + 1]);
            if !dominated {
                found.push(SteadyWindow {
                    range: YearRange {
                        start: panel.start + s as Year,
                        end: panel.start + e as Year,
                    },
                    mean_gap: mean_gap(s, e),
                });
            }
        }
    }
    found.sort_by(|a, b| {
        a.mean_gap
            .total_cmp(&b.mean_gap)
            .then(b.range.len().cmp(&a.range.len()))
            .then(a.range.start.cmp(&b.range.start))
    });
    found
}

/// Year ranges from [`rank_steady_windows`], in the same order.
pub fn select_steady_window(panel: &MacroPanel, min_len: usize, tol: f64) -> Vec<YearRange> {
    rank_steady_windows(panel, min_len, tol)
        .into_iter()
        .map(|w| w.range)
        .collect()
}
