use super::config::{ExperimentConfig, ExperimentKind};
use super::pipeline::TrialRecord;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
/// Allowed deviation of fitted log-log slopes from their predicted values.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// Aggregates at one `n` (and one rate `R` for overflow rows).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub kind: String,
    pub n: Option<u64>,
    pub rate: Option<f64>,
    pub trials: u64,
    pub successes: u64,
    pub failure_fraction: Option<f64>,
    pub failure_se: Option<f64>,
    pub infeasible: u64,
    /// Mean `||rho - rho_tilde||_1` over declared successes.
    pub mean_trace_norm_error: Option<f64>,
    pub trace_norm_error_se: Option<f64>,
    /// Successful trials exceeding `d^{5/2} epsilon`.
    pub bound_violations: u64,
    pub mean_expected_rate: Option<f64>,
    /// Payload bits per copy.
    pub mean_rate: Option<f64>,
    pub rate_se: Option<f64>,
    /// Whole-blob bits per copy.
    pub mean_total_rate: Option<f64>,
    pub total_rate_se: Option<f64>,
    pub rate_gap: Option<f64>,
    pub total_rate_gap: Option<f64>,
    /// Mean of `1 - fidelity proxy`.
    pub mean_disturbance: Option<f64>,
    pub overflow_probability: Option<f64>,
    pub overflow_se: Option<f64>,
    pub overflow_upper_bound: Option<bool>,
    pub overflow_exponent: Option<f64>,
    pub exponent_certified: Option<bool>,
}

pub const CSV_COLUMNS: [&str; 25] = [
    "kind",
    "n",
    "R",
    "trials",
    "successes",
    "failure_fraction",
    "failure_se",
    "infeasible",
    "mean_trace_norm_error",
    "trace_norm_error_se",
    "bound_violations",
    "mean_expected_rate",
    "mean_rate",
    "rate_se",
    "mean_total_rate",
    "total_rate_se",
    "rate_gap",
    "total_rate_gap",
    "mean_disturbance",
    "overflow_probability",
    "overflow_se",
    "overflow_upper_bound",
    "overflow_exponent",
    "exponent_certified",
    "slope_tolerance",
];

/// Debug formatting keeps floats exact and switches to exponent form for tiny values.
fn cell<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl PointSummary {
    fn csv_row(&self) -> Vec<String> {
        vec![
            self.kind.clone(),
            cell(self.n),
            cell(self.rate),
            self.trials.to_string(),
            self.successes.to_string(),
            cell(self.failure_fraction),
            cell(self.failure_se),
            self.infeasible.to_string(),
            cell(self.mean_trace_norm_error),
            cell(self.trace_norm_error_se),
            self.bound_violations.to_string(),
            cell(self.mean_expected_rate),
            cell(self.mean_rate),
            cell(self.rate_se),
            cell(self.mean_total_rate),
            cell(self.total_rate_se),
            cell(self.rate_gap),
            cell(self.total_rate_gap),
            cell(self.mean_disturbance),
            cell(self.overflow_probability),
            cell(self.overflow_se),
            cell(self.overflow_upper_bound),
            cell(self.overflow_exponent),
            cell(self.exponent_certified),
            format!("{SLOPE_TOLERANCE:?}"),
        ]
    }
}

/// Mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Some((mean, (var / k).sqrt()))
}

/// Aggregates trial records at one `n`.
pub fn summarize(kind: ExperimentKind, n: u64, source_entropy: f64, records: &[TrialRecord]) -> PointSummary {
    let trials = records.len() as u64;
    let successes = records.iter().filter(|r| r.declared_success).count() as u64;
    let p = if trials > 0 { Some(1.0 - successes as f64 / trials as f64) } else { None };
    let errors: Vec<f64> = records.iter().filter(|r| r.declared_success).filter_map(|r| r.trace_norm_error).collect();
    let te = mean_se(&errors);
    let codec: Vec<_> = records.iter().filter_map(|r| r.codec.as_ref()).collect();
    let rates: Vec<f64> = codec.iter().map(|c| c.payload_bits as f64 / n as f64).collect();
    let totals: Vec<f64> = codec.iter().map(|c| c.total_bits as f64 / n as f64).collect();
    let expected: Vec<f64> = codec.iter().map(|c| c.expected_rate).collect();
    let disturbance: Vec<f64> = records.iter().map(|r| 1.0 - r.fidelity_proxy).collect();
    let rate = mean_se(&rates);
    let total = mean_se(&totals);
    PointSummary {
        kind: kind.as_str().into(),
        n: Some(n),
        trials,
        successes,
        failure_fraction: p,
        failure_se: p.map(|p| (p * (1.0 - p) / trials as f64).sqrt()),
        infeasible: records.iter().filter(|r| r.infeasible).count() as u64,
        mean_trace_norm_error: te.map(|t| t.0),
        trace_norm_error_se: te.map(|t| t.1),
        bound_violations: records.iter().filter(|r| r.declared_success && r.within_bound() == Some(false)).count()
            as u64,
        mean_expected_rate: mean_se(&expected).map(|t| t.0),
        mean_rate: rate.map(|t| t.0),
        rate_se: rate.map(|t| t.1),
        mean_total_rate: total.map(|t| t.0),
        total_rate_se: total.map(|t| t.1),
        rate_gap: rate.map(|t| t.0 - source_entropy),
        total_rate_gap: total.map(|t| t.0 - source_entropy),
        mean_disturbance: mean_se(&disturbance).map(|t| t.0),
        ..Default::default()
    }
}

/// Least-squares line through `(x, y)` with the slope's standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub quantity: String,
    pub x: String,
    pub y: String,
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Absent with fewer than three points.
    pub std_error: Option<f64>,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    pub within_tolerance: Option<bool>,
}

/// Ordinary least squares. Needs two distinct `x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, Option<f64>)> {
    let k = xs.len();
    if k < 2 || ys.len() != k {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / k as f64;
    let my = ys.iter().sum::<f64>() / k as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = (k > 2).then(|| {
        let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (k - 2) as f64 / sxx).sqrt()
    });
    Some((slope, intercept, se))
}

impl SlopeFit {
    /// Fits `ln y` against `ln x`, skipping nonpositive `y`.
    pub fn log_log(quantity: &str, pairs: &[(f64, f64)], expected: Option<f64>) -> Option<Self> {
        let kept: Vec<(f64, f64)> = pairs.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
        let xs: Vec<f64> = kept.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = kept.iter().map(|p| p.1).collect();
        let (slope, intercept, std_error) = fit_line(&xs, &ys)?;
        Some(Self::finish(quantity, "ln n", "ln y", kept.len(), slope, intercept, std_error, expected))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        quantity: &str,
        x: &str,
        y: &str,
        points: usize,
        slope: f64,
        intercept: f64,
        std_error: Option<f64>,
        expected: Option<f64>,
    ) -> Self {
        let tolerance = expected.map(|_| SLOPE_TOLERANCE);
        Self {
            quantity: quantity.into(),
            x: x.into(),
            y: y.into(),
            points,
            slope,
            intercept,
            std_error,
            expected,
            tolerance,
            within_tolerance: expected.map(|e| (slope - e).abs() <= SLOPE_TOLERANCE),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub source_bloch: Vec<f64>,
    pub source_entropy: f64,
    pub slope_tolerance: f64,
    pub points: Vec<PointSummary>,
    pub fits: Vec<SlopeFit>,
    pub disclosures: Vec<String>,
    pub records: Vec<TrialRecord>,
}

impl Report {
    /// Largest declared-failure fraction over all points.
    pub fn max_failure_fraction(&self) -> Option<f64> {
        self.points.iter().filter_map(|p| p.failure_fraction).reduce(f64::max)
    }

    /// Whether any point breaches the configured failure threshold.
    pub fn exceeds_failure_threshold(&self) -> bool {
        match (self.config.max_failure_fraction, self.max_failure_fraction()) {
            (Some(limit), Some(worst)) => worst > limit,
            _ => false,
        }
    }

    pub fn fit(&self, quantity: &str) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

/// Serializes a report. CSV carries one row per point; JSON carries everything.
pub fn emit_report(report: &Report, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
            w.write_record(CSV_COLUMNS).map_err(io)?;
            for p in &report.points {
                w.write_record(p.csv_row()).map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
        }
    }
}

pub fn parse_json_report(bytes: &[u8]) -> Result<Report> {
    let report: Report = serde_json::from_slice(bytes)?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported report schema {}", report.schema_version)));
    }
    Ok(report)
}
