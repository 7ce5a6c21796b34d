//! Report rows, convergence rates and the CSV layout of the result tables.

use serde::{Deserialize, Serialize};

use crate::problems::ErrorMetrics;

/// Errors at or below this are treated as round-off.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub steps: usize,
    pub total: usize,
    pub max: usize,
    pub max_residual: f64,
}

impl IterationSummary {
    pub fn record(&mut self, iterations: usize, residual: f64) {
        self.steps += 1;
        self.total += iterations;
        self.max = self.max.max(iterations);
        self.max_residual = self.max_residual.max(residual);
    }

    pub fn mean(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.total as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub method: String,
    pub k: usize,
    pub s: usize,
    pub n_modes: usize,
    pub n_steps: usize,
    pub h: f64,
    pub e_u: f64,
    pub e_h: f64,
    pub e_m: f64,
    pub e_0: f64,
    pub wall_time_seconds: f64,
    pub iterations: IterationSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_k: Option<usize>,
    /// Set when the integration stopped early.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl RunReport {
    pub fn metrics(&self) -> ErrorMetrics {
        ErrorMetrics { e_u: self.e_u, e_h: self.e_h, e_m: self.e_m, e_0: self.e_0 }
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Observed order between two consecutive rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    /// The later error sits at round-off (or did not change), so the value
    /// carries no order information.
    pub saturated: bool,
}

/// `log(e_prev/e_cur) / log(n_cur/n_prev)`.
pub fn convergence_rate(e_prev: f64, e_cur: f64, n_prev: usize, n_cur: usize) -> Rate {
    if e_prev == e_cur {
        return Rate { value: 0.0, saturated: true };
    }
    let value = (e_prev / e_cur).ln() / (n_cur as f64 / n_prev as f64).ln();
    Rate { value, saturated: e_cur <= 5.0 * ROUNDOFF_FLOOR }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub report: RunReport,
    pub rate_u: Option<Rate>,
    pub rate_h: Option<Rate>,
    pub rate_m: Option<Rate>,
}

pub const CSV_HEADER: &str = "method,k,s,N,n,time_s,e_u,rate_u,e_H,rate_H,e_M,rate_M";

/// Three significant digits with a two-digit exponent, `3.87e-06`.
pub fn sci3(v: f64) -> String {
    let s = format!("{v:.2e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ("-", d),
                None => ("+", exp),
            };
            format!("{mant}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

fn rate_cell(rate: Option<Rate>, full: bool) -> String {
    match rate {
        None => "---".into(),
        Some(r) if r.saturated => "**".into(),
        Some(r) if full => format!("{:e}", r.value),
        Some(r) => format!("{:.1}", r.value),
    }
}

fn csv_line(row: &SweepRow, full: bool, timing: bool) -> String {
    let r = &row.report;
    let num = |v: f64| if full { format!("{v:e}") } else { sci3(v) };
    let time = if !timing {
        "-".to_string()
    } else if full {
        format!("{:e}", r.wall_time_seconds)
    } else {
        format!("{:.1}", r.wall_time_seconds)
    };
    let (eu, eh, em) = if r.failed() {
        ("failed".to_string(), "failed".to_string(), "failed".to_string())
    } else {
        (num(r.e_u), num(r.e_h), num(r.e_m))
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.method,
        r.k,
        r.s,
        r.n_modes,
        r.n_steps,
        time,
        eu,
        rate_cell(row.rate_u, full),
        eh,
        rate_cell(row.rate_h, full),
        em,
        rate_cell(row.rate_m, full),
    )
}

/// CSV table; `full` selects round-trip precision instead of 3 digits.
pub fn to_csv(rows: &[SweepRow], full: bool, timing: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_line(row, full, timing));
        out.push('\n');
    }
    out
}

/// Attaches rates to consecutive successful rows.
pub fn with_rates(reports: Vec<RunReport>) -> Vec<SweepRow> {
    let mut rows: Vec<SweepRow> = Vec::with_capacity(reports.len());
    for report in reports {
        let prev = rows.last().map(|r| &r.report).filter(|p| !p.failed());
        let (rate_u, rate_h, rate_m) = match prev {
            Some(p) if !report.failed() => (
                Some(convergence_rate(p.e_u, report.e_u, p.n_steps, report.n_steps)),
                Some(convergence_rate(p.e_h, report.e_h, p.n_steps, report.n_steps)),
                Some(convergence_rate(p.e_m, report.e_m, p.n_steps, report.n_steps)),
            ),
            _ => (None, None, None),
        };
        rows.push(SweepRow { report, rate_u, rate_h, rate_m });
    }
    rows
}
