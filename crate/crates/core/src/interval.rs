use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[a, b]` on which a lethargy function lives.
///
/// Only the unit interval or intervals with `0 < a < b` are admitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { a: 0.0, b: 1.0 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        let unit = a == 0.0 && b == 1.0;
        let positive = a.is_finite() && b.is_finite() && 0.0 < a && a < b;
        if unit || positive {
            Ok(Interval { a, b })
        } else {
            Err(Error::InvalidInterval { a, b })
        }
    }

    /// Any finite `a < b`; used by the solver, which has no positivity constraint.
    pub fn general(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Interval { a, b })
        } else {
            Err(Error::InvalidInterval { a, b })
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_unit(&self) -> bool {
        self.a == 0.0 && self.b == 1.0
    }

    pub fn contains(&self, t: f64) -> bool {
        self.a <= t && t <= self.b
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain { t, a: self.a, b: self.b })
        }
    }

    /// Maps `s` in `[0, 1]` to `a + (b - a) s`.
    pub fn from_unit(&self, s: f64) -> f64 {
        if self.is_unit() {
            s
        } else if s == 1.0 {
            self.b
        } else {
            self.a + self.width() * s
        }
    }

    /// Maps `t` in `[a, b]` to `(t - a) / (b - a)`.
    pub fn to_unit(&self, t: f64) -> f64 {
        if self.is_unit() {
            t
        } else {
            (t - self.a) / self.width()
        }
    }

    /// `n` equispaced points from `a` to `b` inclusive, with exact endpoints.
    pub fn uniform(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![self.a],
            _ => {
                let last = (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            self.b
                        } else {
                            self.a + self.width() * (i as f64 / last)
                        }
                    })
                    .collect()
            }
        }
    }
}
