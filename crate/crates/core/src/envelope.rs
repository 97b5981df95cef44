//! The even polygonal envelope `p` and its corner-rounded surrogate `e`.
//!
//! `p` has integer knots. Block `n` covers the integers
//! `N_{n-1} ..= N_n - 1` (with `N_{-1} = 0`, `N_n = m_0 + ... + m_n`) and `p`
//! equals `3 eps_n` there. Between integers `p` is the chord; past the last
//! knot it stays at the last height.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::SchemeProfile;

/// Relative containment the surrogate must satisfy: `|e - p| <= p / 3`.
pub const CONTAINMENT: f64 = 1.0 / 3.0;

pub const DEFAULT_DELTA: f64 = 0.25;

const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonalEnvelope {
    block_ends: Vec<u64>,
    heights: Vec<f64>,
}

impl PolygonalEnvelope {
    /// Builds `p` from the first `n_max + 1` targets and alternation counts.
    pub fn build(eps: &[f64], profile: &SchemeProfile, n_max: usize) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidEnvelope("empty target sequence".into()));
        }
        if eps.len() < n_max + 1 {
            return Err(Error::InsufficientMaterialization { level: n_max, n_max: eps.len() - 1 });
        }
        let eps = &eps[..=n_max];
        if let Some(i) = eps.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidEnvelope(format!("eps_{i} = {} is not positive", eps[i])));
        }
        if let Some(i) = eps.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidEnvelope(format!("targets increase at index {}", i + 1)));
        }
        let mut block_ends = Vec::with_capacity(eps.len());
        let mut end = 0u64;
        for n in 0..=n_max {
            let m = profile.phi(n)?;
            if m == 0 {
                return Err(Error::InvalidEnvelope(format!("degenerate block: m_{n} = 0")));
            }
            end = end
                .checked_add(m as u64)
                .ok_or_else(|| Error::InvalidEnvelope("block ends overflow".into()))?;
            block_ends.push(end);
        }
        let heights = eps.iter().map(|e| 3.0 * e).collect();
        Ok(PolygonalEnvelope { block_ends, heights })
    }

    /// Prefix sums `N_0, N_1, ...` of the alternation counts.
    pub fn block_ends(&self) -> &[u64] {
        &self.block_ends
    }

    /// `3 eps_n` per block.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn n_max(&self) -> usize {
        self.heights.len() - 1
    }

    /// Largest integer carrying a prescribed block value, `N_{n_max} - 1`.
    pub fn last_knot(&self) -> u64 {
        self.block_ends[self.block_ends.len() - 1] - 1
    }

    /// Block index owning integer `k`; integers past the last knot belong to
    /// the last block.
    pub fn block_of(&self, k: u64) -> usize {
        self.block_ends.partition_point(|&end| end <= k).min(self.heights.len() - 1)
    }

    /// `p(k)` at a non-negative integer.
    pub fn at_knot(&self, k: u64) -> f64 {
        self.heights[self.block_of(k)]
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u = u.abs();
        let last = self.last_knot() as f64;
        if u >= last {
            return self.heights[self.heights.len() - 1];
        }
        let k = u.floor();
        let frac = u - k;
        let left = self.at_knot(k as u64);
        if frac == 0.0 {
            return left;
        }
        let right = self.at_knot(k as u64 + 1);
        left + frac * (right - left)
    }

    /// Slopes of `p` immediately left and right of the knot `k >= 0`.
    fn slopes_at(&self, k: u64) -> (f64, f64) {
        let here = self.at_knot(k);
        let right = self.at_knot(k + 1) - here;
        let left = if k == 0 { -right } else { here - self.at_knot(k - 1) };
        (left, right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EnvelopeMode {
    Identity,
    /// Corners rounded by a quadratic Bézier blend within `delta` of each knot.
    Mollified { delta: f64 },
}

/// Outcome of the containment verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentRecord {
    /// `max |e(u) - p(u)| / p(u)` over the verification grid.
    pub max_relative_deviation: f64,
    /// Worst analytic bound `delta |slope jump| / 4 / min p` over all corners.
    pub analytic_bound: f64,
    pub grid_points: usize,
    /// Blend radius after any halvings; `None` in identity mode.
    pub delta: Option<f64>,
}

/// The smooth surrogate `e` with its verified containment record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothEnvelope {
    base: PolygonalEnvelope,
    mode: EnvelopeMode,
    record: ContainmentRecord,
}

impl SmoothEnvelope {
    pub fn identity(base: PolygonalEnvelope) -> Self {
        SmoothEnvelope {
            base,
            mode: EnvelopeMode::Identity,
            record: ContainmentRecord {
                max_relative_deviation: 0.0,
                analytic_bound: 0.0,
                grid_points: 0,
                delta: None,
            },
        }
    }

    /// Rounds every corner of `base` and verifies `|e - p| <= p/3` on a
    /// uniform grid of `grid_points` samples over `[-L, L]`, `L` the last
    /// knot. On failure the radius is halved, up to 20 times.
    pub fn mollify(base: PolygonalEnvelope, delta: f64, grid_points: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidEnvelope(format!("blend radius must lie in (0, 1/2), got {delta}")));
        }
        if grid_points < 1000 {
            return Err(Error::InvalidEnvelope(format!(
                "verification grid needs at least 1000 points, got {grid_points}"
            )));
        }
        let mut delta = delta;
        let mut worst = (0.0, 0.0);
        for attempt in 0..=MAX_HALVINGS {
            let analytic_bound = analytic_bound(&base, delta);
            let (max_dev, at) = verify_grid(&base, delta, grid_points);
            if max_dev <= CONTAINMENT && analytic_bound <= CONTAINMENT {
                return Ok(SmoothEnvelope {
                    base,
                    mode: EnvelopeMode::Mollified { delta },
                    record: ContainmentRecord {
                        max_relative_deviation: max_dev,
                        analytic_bound,
                        grid_points,
                        delta: Some(delta),
                    },
                });
            }
            worst = (at, max_dev);
            if attempt < MAX_HALVINGS {
                delta /= 2.0;
            }
        }
        Err(Error::Containment { u: worst.0, deviation: worst.1, attempts: MAX_HALVINGS + 1 })
    }

    pub fn build(base: PolygonalEnvelope, mode: EnvelopeMode, grid_points: usize) -> Result<Self> {
        match mode {
            EnvelopeMode::Identity => Ok(Self::identity(base)),
            EnvelopeMode::Mollified { delta } => Self::mollify(base, delta, grid_points),
        }
    }

    pub fn base(&self) -> &PolygonalEnvelope {
        &self.base
    }

    pub fn mode(&self) -> EnvelopeMode {
        self.mode
    }

    pub fn record(&self) -> &ContainmentRecord {
        &self.record
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.mode {
            EnvelopeMode::Identity => self.base.eval(u),
            EnvelopeMode::Mollified { delta } => blend(&self.base, delta, u),
        }
    }
}

fn blend(base: &PolygonalEnvelope, delta: f64, u: f64) -> f64 {
    let u = u.abs();
    let k = u.round();
    let d = u - k;
    if d.abs() >= delta || k > base.last_knot() as f64 {
        return base.eval(u);
    }
    let (left, right) = base.slopes_at(k as u64);
    if left == right {
        return base.eval(u);
    }
    let y1 = base.at_knot(k as u64);
    let y0 = y1 - delta * left;
    let y2 = y1 + delta * right;
    let s = (d + delta) / (2.0 * delta);
    let r = 1.0 - s;
    r * r * y0 + 2.0 * s * r * y1 + s * s * y2
}

// The blend departs from the corner by at most delta * |jump| / 4 (at the knot).
fn analytic_bound(base: &PolygonalEnvelope, delta: f64) -> f64 {
    (0..=base.last_knot())
        .map(|k| {
            let (left, right) = base.slopes_at(k);
            let y1 = base.at_knot(k);
            let floor = (y1 - delta * left).min(y1).min(y1 + delta * right);
            delta * (right - left).abs() / 4.0 / floor
        })
        .fold(0.0, f64::max)
}

fn verify_grid(base: &PolygonalEnvelope, delta: f64, grid_points: usize) -> (f64, f64) {
    let half = (base.last_knot() as f64).max(1.0);
    let step = 2.0 * half / (grid_points - 1) as f64;
    let mut worst = (0.0, 0.0);
    for i in 0..grid_points {
        let u = if i == grid_points - 1 { half } else { -half + step * i as f64 };
        let p = base.eval(u);
        let dev = (blend(base, delta, u) - p).abs() / p;
        if dev > worst.0 {
            worst = (dev, u);
        }
    }
    (worst.0, worst.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PolygonalEnvelope {
        PolygonalEnvelope::build(&[1.0, 0.5, 1.0 / 3.0], &SchemeProfile::polynomial(), 2).unwrap()
    }

    #[test]
    fn blocks_and_heights() {
        let env = sample();
        assert_eq!(env.block_ends(), &[1, 3, 6]);
        assert_eq!(env.heights(), &[3.0, 1.5, 1.0]);
        assert_eq!(env.last_knot(), 5);
    }

    #[test]
    fn polygonal_values() {
        let env = sample();
        assert_eq!(env.eval(0.0), 3.0);
        assert_eq!(env.eval(1.0), 1.5);
        assert_eq!(env.eval(2.0), 1.5);
        assert_eq!(env.eval(0.5), 2.25);
        assert_eq!(env.eval(-2.0), env.eval(2.0));
        assert_eq!(env.eval(3.0), 1.0);
        assert_eq!(env.eval(2.5), 1.25);
        assert_eq!(env.eval(1e6), 1.0);
    }

    #[test]
    fn build_errors() {
        let poly = SchemeProfile::polynomial();
        assert!(PolygonalEnvelope::build(&[], &poly, 0).is_err());
        assert!(PolygonalEnvelope::build(&[1.0], &poly, 2).is_err());
        assert!(PolygonalEnvelope::build(&[1.0, 2.0], &poly, 1).is_err());
        let zero = SchemeProfile::rational(vec![(0, 0)]).unwrap().with_alternation(vec![1]).unwrap();
        assert!(PolygonalEnvelope::build(&[1.0], &zero, 0).is_ok());
    }

    #[test]
    fn identity_record_is_zero() {
        let smooth = SmoothEnvelope::identity(sample());
        assert_eq!(smooth.record().max_relative_deviation, 0.0);
        assert_eq!(smooth.eval(0.5), 2.25);
    }

    #[test]
    fn flat_envelope_is_unchanged() {
        let eps = [0.4; 4];
        let env = PolygonalEnvelope::build(&eps, &SchemeProfile::polynomial(), 3).unwrap();
        let smooth = SmoothEnvelope::mollify(env.clone(), 0.25, 1000).unwrap();
        assert_eq!(smooth.record().max_relative_deviation, 0.0);
        for i in 0..200 {
            let u = -12.0 + 0.123 * i as f64;
            assert_eq!(smooth.eval(u), env.eval(u));
        }
    }

    #[test]
    fn mollified_containment_and_smoothness() {
        let smooth = SmoothEnvelope::mollify(sample(), 0.25, 100_000).unwrap();
        let rec = *smooth.record();
        assert!(rec.max_relative_deviation <= CONTAINMENT);
        assert!(rec.max_relative_deviation > 0.0);
        assert_eq!(rec.delta, Some(0.25));
        // corner at 0: jump 3, deviation 0.25 * 3 / 4 = 0.1875 over p(0) = 3
        assert!((smooth.eval(0.0) - (3.0 - 0.1875)).abs() < 1e-15);
        // half-integers sit outside every blend window
        assert_eq!(smooth.eval(1.5), 1.5);
        assert_eq!(smooth.eval(0.5), 2.25);
        // C^1 across the window edges
        let h = 1e-7;
        for edge in [0.75, 1.25, 2.75, 3.25] {
            let left = (smooth.eval(edge) - smooth.eval(edge - h)) / h;
            let right = (smooth.eval(edge + h) - smooth.eval(edge)) / h;
            assert!((left - right).abs() < 1e-5, "slope mismatch at {edge}");
        }
    }

    #[test]
    fn mollify_rejects_bad_parameters() {
        assert!(SmoothEnvelope::mollify(sample(), 0.5, 1000).is_err());
        assert!(SmoothEnvelope::mollify(sample(), 0.0, 1000).is_err());
        assert!(SmoothEnvelope::mollify(sample(), 0.25, 999).is_err());
    }

    #[test]
    fn steep_drop_forces_halving() {
        // a drop from 3 to 3e-3 in one step violates containment at delta 0.25
        let eps = [1.0, 1e-3];
        let env = PolygonalEnvelope::build(&eps, &SchemeProfile::polynomial(), 1).unwrap();
        let smooth = SmoothEnvelope::mollify(env, 0.25, 10_000).unwrap();
        let delta = smooth.record().delta.unwrap();
        assert!(delta < 0.25);
        assert!(smooth.record().max_relative_deviation <= CONTAINMENT);
    }
}
