//! Alternation certificates: finite witnesses of `E(f, A_n) >= eps`.
//!
//! If `f` takes alternating signs at `m_n + 1` ordered points and every
//! magnitude there exceeds `eps`, no element of a scheme with the alternation
//! property at level `n` can approximate `f` within `eps`. [`check`] verifies
//! such a witness from scratch; [`search`] finds one for a lethargy function.

use std::fmt;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::function::LethargyFunction;

/// Relative slack tolerated between stored and re-evaluated magnitudes.
const MAGNITUDE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternationCertificate {
    pub n: usize,
    pub m_n: usize,
    pub target: f64,
    pub points: Vec<f64>,
    pub signs: Vec<i8>,
    pub magnitudes: Vec<f64>,
    pub floor: f64,
}

impl AlternationCertificate {
    /// The certified lower bound on the best-approximation error.
    pub fn bound(&self) -> f64 {
        self.floor
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    PointCount { expected: usize, found: usize },
    NotIncreasing(usize),
    OutsideDomain(f64),
    NonFinite(f64),
    NoSignChange(usize),
    SignMismatch(usize),
    MagnitudeMismatch(usize),
    FloorMismatch { stored: f64, recomputed: f64 },
    FloorNotAboveTarget { floor: f64, target: f64 },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::PointCount { expected, found } => {
                write!(f, "wrong point count: expected {expected}, found {found}")
            }
            Failure::NotIncreasing(i) => write!(f, "points not strictly increasing at index {i}"),
            Failure::OutsideDomain(t) => write!(f, "point {t} outside domain"),
            Failure::NonFinite(t) => write!(f, "non-finite value at {t}"),
            Failure::NoSignChange(i) => write!(f, "no sign change between points {i} and {}", i + 1),
            Failure::SignMismatch(i) => write!(f, "stored sign disagrees with f at point {i}"),
            Failure::MagnitudeMismatch(i) => write!(f, "stored magnitude disagrees with |f| at point {i}"),
            Failure::FloorMismatch { stored, recomputed } => {
                write!(f, "stored floor {stored} disagrees with recomputed {recomputed}")
            }
            Failure::FloorNotAboveTarget { floor, target } => {
                write!(f, "floor not > target ({floor} <= {target})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Valid,
    Invalid(Failure),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Re-evaluates `f` at every certificate point and checks ordering,
/// alternation and the strict floor. Independent of how `cert` was found.
pub fn check<F>(f: F, domain: Interval, cert: &AlternationCertificate) -> Verdict
where
    F: Fn(f64) -> f64,
{
    match check_inner(f, domain, cert) {
        Ok(()) => Verdict::Valid,
        Err(failure) => Verdict::Invalid(failure),
    }
}

fn check_inner<F: Fn(f64) -> f64>(f: F, domain: Interval, cert: &AlternationCertificate) -> Result<(), Failure> {
    let expected = cert.m_n + 1;
    for found in [cert.points.len(), cert.signs.len(), cert.magnitudes.len()] {
        if found != expected {
            return Err(Failure::PointCount { expected, found });
        }
    }
    if let Some(i) = cert.points.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Failure::NotIncreasing(i));
    }
    if let Some(&t) = cert.points.iter().find(|t| !domain.contains(**t)) {
        return Err(Failure::OutsideDomain(t));
    }
    let values: Vec<f64> = cert.points.iter().map(|&t| f(t)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Failure::NonFinite(cert.points[i]));
    }
    if let Some(i) = values.windows(2).position(|w| !(w[0] * w[1] < 0.0)) {
        return Err(Failure::NoSignChange(i));
    }
    for (i, (v, (&sign, &stored))) in values.iter().zip(cert.signs.iter().zip(&cert.magnitudes)).enumerate() {
        if v.signum() != sign as f64 {
            return Err(Failure::SignMismatch(i));
        }
        if (stored - v.abs()).abs() > MAGNITUDE_SLACK * v.abs() {
            return Err(Failure::MagnitudeMismatch(i));
        }
    }
    let floor = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if (cert.floor - floor).abs() > MAGNITUDE_SLACK * floor {
        return Err(Failure::FloorMismatch { stored: cert.floor, recomputed: floor });
    }
    if !(floor > cert.target) {
        return Err(Failure::FloorNotAboveTarget { floor, target: cert.target });
    }
    Ok(())
}

/// Finds `m_n + 1` consecutive half-period points with `|f| > eps_n`,
/// scanning `u = k/2` upward from `u = 1` to the last envelope knot.
pub fn search(f: &LethargyFunction, n: usize) -> Result<AlternationCertificate> {
    if n > f.n_max() {
        return Err(Error::InsufficientMaterialization { level: n, n_max: f.n_max() });
    }
    let m_n = f.profile().phi(n)?;
    let target = f.eps()[n];
    let needed = m_n + 1;
    let u_max = f.u_max().max(1.0);
    let k_max = (2.0 * u_max).floor() as u64;

    let mut run: Vec<(u64, f64)> = Vec::with_capacity(needed);
    let mut longest = 0;
    for k in 2..=k_max {
        let value = f.value(f.candidate_t(k));
        // ties with the target are rejected: the premise is strict
        if value.abs() > target {
            run.push((k, value));
            longest = longest.max(run.len());
            if run.len() == needed {
                break;
            }
        } else {
            run.clear();
        }
    }
    if run.len() < needed {
        return Err(Error::SearchFailed { level: n, needed, found: longest, target, u_max });
    }

    run.reverse();
    let cert = AlternationCertificate {
        n,
        m_n,
        target,
        points: run.iter().map(|&(k, _)| f.candidate_t(k)).collect(),
        signs: run.iter().map(|&(_, v)| v.signum() as i8).collect(),
        magnitudes: run.iter().map(|&(_, v)| v.abs()).collect(),
        floor: run.iter().map(|&(_, v)| v.abs()).fold(f64::INFINITY, f64::min),
    };
    match check(|t| f.value(t), f.interval(), &cert) {
        Verdict::Valid => Ok(cert),
        Verdict::Invalid(reason) => unreachable!("search emitted an invalid certificate at level {n}: {reason}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCertificate {
    pub n: usize,
    pub bound: f64,
    pub certificate: AlternationCertificate,
}

/// One certificate per level, in level order. Levels are searched in
/// parallel; the first failing level (in order) is reported.
pub fn certify_range(f: &LethargyFunction, levels: RangeInclusive<usize>) -> Result<Vec<LevelCertificate>> {
    if levels.is_empty() {
        return Ok(Vec::new());
    }
    if *levels.end() > f.n_max() {
        return Err(Error::InsufficientMaterialization { level: *levels.end(), n_max: f.n_max() });
    }
    let results: Vec<Result<LevelCertificate>> = levels
        .into_par_iter()
        .map(|n| {
            search(f, n).map(|certificate| LevelCertificate { n, bound: certificate.bound(), certificate })
        })
        .collect();
    results.into_iter().collect()
}
