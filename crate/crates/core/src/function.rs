//! The lethargy function `f(t) = e(1/t) cos(2π/t)`, `f(0) = 0`, its affine
//! transport to `[a, b]`, and the radial lift to the unit ball.

use serde::{Deserialize, Serialize};

use crate::envelope::{EnvelopeMode, PolygonalEnvelope, SmoothEnvelope};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scheme::SchemeProfile;

/// Below this unit-chart argument the phase `1/t` is too large for the
/// general evaluation path to be trusted; values there are never certified.
pub const CERTIFIED_FLOOR: f64 = 1e-6;

/// A half-period point `t = 2/k` (unit chart), where `cos(2π/t) = (-1)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub t: f64,
    pub k: u64,
    pub sign: i8,
}

impl Candidate {
    /// Envelope argument `u = 1/t = k/2`, exact in binary.
    pub fn u(&self) -> f64 {
        self.k as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LethargyFunction {
    envelope: SmoothEnvelope,
    interval: Interval,
    eps: Vec<f64>,
    profile: SchemeProfile,
}

impl LethargyFunction {
    /// Builds the function for the materialized targets `eps` (levels
    /// `0..eps.len()`), verifying the envelope containment if mollified.
    pub fn build(
        eps: Vec<f64>,
        profile: SchemeProfile,
        interval: Interval,
        mode: EnvelopeMode,
        verification_grid: usize,
    ) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidEnvelope("empty target sequence".into()));
        }
        let n_max = eps.len() - 1;
        let base = PolygonalEnvelope::build(&eps, &profile, n_max)?;
        let envelope = SmoothEnvelope::build(base, mode, verification_grid)?;
        Ok(LethargyFunction { envelope, interval, eps, profile })
    }

    pub fn envelope(&self) -> &SmoothEnvelope {
        &self.envelope
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn profile(&self) -> &SchemeProfile {
        &self.profile
    }

    pub fn n_max(&self) -> usize {
        self.eps.len() - 1
    }

    /// Largest envelope argument with a prescribed block value.
    pub fn u_max(&self) -> f64 {
        self.envelope.base().last_knot() as f64
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.interval.check(t)?;
        Ok(self.value(t))
    }

    /// Unchecked evaluation; `NaN` outside the interval.
    pub fn value(&self, t: f64) -> f64 {
        if !self.interval.contains(t) {
            return f64::NAN;
        }
        let s = self.interval.to_unit(t);
        if s <= 0.0 {
            return 0.0;
        }
        // candidates evaluate by parity so certificates never hinge on cos rounding
        let k = (2.0 / s).round();
        if (2.0..=9.0e15).contains(&k) && self.candidate_t(k as u64) == t {
            let k = k as u64;
            let magnitude = self.envelope.eval(k as f64 / 2.0);
            return if k % 2 == 0 { magnitude } else { -magnitude };
        }
        let (hi, lo) = reciprocal(s);
        self.envelope.eval(hi) * cos_two_pi(hi, lo)
    }

    /// The transported position of the unit-chart candidate `2/k`.
    pub fn candidate_t(&self, k: u64) -> f64 {
        self.interval.from_unit(2.0 / k as f64)
    }

    /// `|f|` at candidate `k`, i.e. `e(k/2)`.
    pub fn candidate_magnitude(&self, k: u64) -> f64 {
        self.envelope.eval(k as f64 / 2.0)
    }

    /// Half-period points with `k/2 <= u_max`, in increasing `t`.
    pub fn candidate_points(&self, u_max: f64) -> Vec<Candidate> {
        let k_max = (2.0 * u_max).floor().max(1.0) as u64;
        (2..=k_max)
            .rev()
            .map(|k| Candidate {
                t: self.candidate_t(k),
                k,
                sign: if k % 2 == 0 { 1 } else { -1 },
            })
            .collect()
    }

    /// `f(x_1^2 + ... + x_s^2)` on the closed unit ball. On an axis this is
    /// `h(x) = f(x^2)`.
    pub fn lift(&self, x: &[f64]) -> Result<f64> {
        if !self.interval.is_unit() {
            return Err(Error::InvalidInterval { a: self.interval.a(), b: self.interval.b() });
        }
        if x.is_empty() {
            return Err(Error::Config("lift needs at least one coordinate".into()));
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if x.iter().any(|v| !(v.abs() <= 1.0)) || !(r2 <= 1.0) {
            return Err(Error::Domain { t: r2, a: 0.0, b: 1.0 });
        }
        Ok(self.value(r2))
    }
}

/// `1/s` as an unevaluated sum `hi + lo`.
fn reciprocal(s: f64) -> (f64, f64) {
    let hi = 1.0 / s;
    let residual = (-hi).mul_add(s, 1.0);
    (hi, residual / s)
}

/// `cos(2π (hi + lo))`, reducing the phase modulo one before scaling.
fn cos_two_pi(hi: f64, lo: f64) -> f64 {
    let frac = (hi - hi.round()) + lo;
    let frac = frac - frac.round();
    (std::f64::consts::TAU * frac).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(interval: Interval) -> LethargyFunction {
        LethargyFunction::build(
            vec![1.0, 0.5, 1.0 / 3.0],
            SchemeProfile::polynomial(),
            interval,
            EnvelopeMode::Identity,
            0,
        )
        .unwrap()
    }

    #[test]
    fn values_on_unit_chart() {
        let f = sample(Interval::UNIT);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert_eq!(f.eval(1.0).unwrap(), 1.5);
        assert_eq!(f.eval(2.0 / 3.0).unwrap(), -1.5);
        assert!(f.eval(1.5).is_err());
        assert!(f.eval(-0.1).is_err());
    }

    #[test]
    fn general_path_matches_cos() {
        let f = sample(Interval::UNIT);
        for t in [0.3, 0.77, 0.123_456, 0.9] {
            let expect = f.envelope().eval(1.0 / t) * (std::f64::consts::TAU / t).cos();
            assert!((f.value(t) - expect).abs() < 1e-12, "{t}");
        }
        // near a candidate but not on it
        let t = 0.5 + 1e-9;
        let expect = f.envelope().eval(1.0 / t) * (std::f64::consts::TAU / t).cos();
        assert!((f.value(t) - expect).abs() < 1e-12);
    }

    #[test]
    fn reduced_phase_is_accurate_near_zero() {
        // 1/t = 10^7 + 1/4 exactly representable in the double-double split
        let t = 1.0 / (1.0e7 + 0.25);
        let (hi, lo) = reciprocal(t);
        let c = cos_two_pi(hi, lo);
        let frac = (hi - 1.0e7 - 0.25) + lo;
        assert!(c.abs() <= (std::f64::consts::TAU * frac).abs() + 1e-10);
    }

    #[test]
    fn candidates_unit_chart() {
        let f = sample(Interval::UNIT);
        let c = f.candidate_points(2.0);
        let got: Vec<(f64, i8)> = c.iter().map(|c| (c.t, c.sign)).collect();
        assert_eq!(got, vec![(0.5, 1), (2.0 / 3.0, -1), (1.0, 1)]);
        let c = f.candidate_points(1.0);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].t, c[0].sign), (1.0, 1));
    }

    #[test]
    fn candidates_transported() {
        let f = sample(Interval::new(1.0, 3.0).unwrap());
        let c = f.candidate_points(1.0);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].t, c[0].sign), (3.0, 1));
        for c in f.candidate_points(3.0) {
            assert_eq!(f.eval(c.t).unwrap(), c.sign as f64 * f.candidate_magnitude(c.k));
        }
        assert_eq!(f.eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn lift_values() {
        let f = sample(Interval::UNIT);
        assert_eq!(f.lift(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(f.lift(&[1.0, 0.0]).unwrap(), f.eval(1.0).unwrap());
        let g = 2.0 / 3.0 / 3f64.sqrt();
        let lifted = f.lift(&[g, g, g]).unwrap();
        let direct = f.eval(3.0 * g * g).unwrap();
        assert!((lifted - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        assert!((3.0 * g * g - 4.0 / 9.0).abs() < 1e-15);
        assert!(f.lift(&[0.8, 0.8]).is_err());
        assert!(f.lift(&[]).is_err());
        let moved = sample(Interval::new(1.0, 2.0).unwrap());
        assert!(moved.lift(&[0.1]).is_err());
    }
}
