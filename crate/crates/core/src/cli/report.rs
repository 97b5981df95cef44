use std::fmt::Write as _;

use serde::Serialize;

use crate::certifier::AlternationCertificate;
use crate::envelope::{ContainmentRecord, EnvelopeMode};
use crate::function::LethargyFunction;

/// Slack allowed when comparing a certificate floor with the solver error.
pub const CONSISTENCY_SLACK: f64 = 1e-10;

/// First level included in the geometric-rate summary.
pub const RATE_FROM: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub m_n: usize,
    pub eps_n: f64,
    /// Certified lower bound; absent when the search failed.
    pub floor: Option<f64>,
    /// `floor^(1/n)`, for `n >= 1`.
    pub floor_root: Option<f64>,
    pub minimax_error: Option<f64>,
    pub bracket_lower: Option<f64>,
    pub converged: Option<bool>,
    pub verdict_floor: bool,
    pub verdict_grid: Option<bool>,
    /// `floor <= minimax_error + 1e-10`.
    pub consistent: Option<bool>,
    pub failure: Option<String>,
}

impl ReportRow {
    pub fn passes(&self) -> bool {
        self.verdict_floor && self.verdict_grid.unwrap_or(true) && self.consistent.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub eps: String,
    pub scheme: String,
    pub interval: [f64; 2],
    pub envelope: EnvelopeMode,
    pub containment: ContainmentRecord,
    pub solver_grid_points: Option<usize>,
    pub rows: Vec<ReportRow>,
    pub min_floor_root_from_5: Option<f64>,
    pub all_pass: bool,
}

impl Report {
    pub fn failing_levels(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| !r.passes()).map(|r| r.n).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,m_n,eps_n,floor,floor_root,minimax_error,bracket_lower,converged,verdict_floor,verdict_grid,consistent\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.m_n,
                fmt17(r.eps_n),
                opt(r.floor.map(fmt17)),
                opt(r.floor_root.map(fmt17)),
                opt(r.minimax_error.map(fmt17)),
                opt(r.bracket_lower.map(fmt17)),
                opt(r.converged),
                r.verdict_floor,
                opt(r.verdict_grid),
                opt(r.consistent),
            );
        }
        out
    }
}

/// Decimal with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `(t, f(t), is_certificate_point)` on `count` uniform points of the
/// interval merged with every certificate point, strictly increasing.
pub fn samples(f: &LethargyFunction, certificates: &[AlternationCertificate], count: usize) -> Vec<(f64, f64, bool)> {
    let mut marked: Vec<f64> = certificates.iter().flat_map(|c| c.points.iter().copied()).collect();
    marked.sort_by(f64::total_cmp);
    marked.dedup();
    let mut ts: Vec<f64> = f.interval().uniform(count);
    ts.extend_from_slice(&marked);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.into_iter()
        .map(|t| (t, f.value(t), marked.binary_search_by(|m| m.total_cmp(&t)).is_ok()))
        .collect()
}

pub fn samples_csv(rows: &[(f64, f64, bool)]) -> String {
    let mut out = String::from("t,f,certificate\n");
    for (t, v, marked) in rows {
        let _ = writeln!(out, "{},{},{}", fmt17(*t), fmt17(*v), u8::from(*marked));
    }
    out
}

/// Two-column dump `(u, value(u))` on `count` points of `[0, L]`.
pub fn envelope_csv(header: &str, upper: f64, count: usize, value: impl Fn(f64) -> f64) -> String {
    let mut out = format!("u,{header}\n");
    let last = (count - 1) as f64;
    for i in 0..count {
        let u = if i == count - 1 { upper } else { upper * i as f64 / last };
        let _ = writeln!(out, "{},{}", fmt17(u), fmt17(value(u)));
    }
    out
}
