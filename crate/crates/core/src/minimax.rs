//! Discrete best uniform polynomial approximation by Remez exchange.
//!
//! The solver works on a finite grid, so its error is the discrete minimax
//! error `E_grid`, which never exceeds the continuous `E(f, Π_n)`. Each
//! iterate carries a de La Vallée-Poussin bracket: the smallest residual on
//! the alternating reference is a lower bound, the largest grid residual an
//! upper bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub const MAX_ITERATIONS: usize = 100;

/// Highest degree the solver accepts.
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxResult {
    #[serde(rename = "n")]
    pub degree: usize,
    /// Chebyshev coefficients on the interval, `c_0 .. c_n`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coefficients: Option<Vec<f64>>,
    pub error: f64,
    pub lower_bracket: f64,
    pub converged: bool,
    pub iterations: usize,
    pub reference: Vec<f64>,
    #[serde(skip)]
    pub interval: Option<Interval>,
}

impl MinimaxResult {
    pub fn coefficients(&self) -> &[f64] {
        self.coefficients.as_deref().unwrap_or(&[])
    }

    /// JSON without the coefficient dump.
    pub fn summary(&self) -> MinimaxResult {
        MinimaxResult { coefficients: None, ..self.clone() }
    }

    /// Evaluates the approximant.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let interval = self.interval.ok_or_else(|| Error::Solver("result carries no interval".into()))?;
        cheb_eval(self.coefficients(), t, interval)
    }

    /// Brackets an arbitrary polynomial `q` (Chebyshev coefficients) against
    /// `f` on `grid`, using `reference` as the alternation set.
    pub fn assess<F>(f: F, coefficients: Vec<f64>, interval: Interval, grid: &[f64], reference: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if coefficients.is_empty() {
            return Err(Error::Solver("empty coefficient list".into()));
        }
        let residual = |t: f64| f(t) - clenshaw(&coefficients, interval.to_chebyshev(t));
        let error = grid.iter().map(|&t| residual(t).abs()).fold(0.0, f64::max);
        let lower_bracket = reference.iter().map(|&t| residual(t).abs()).fold(f64::INFINITY, f64::min);
        Ok(MinimaxResult {
            degree: coefficients.len() - 1,
            coefficients: Some(coefficients),
            error,
            lower_bracket,
            converged: false,
            iterations: 0,
            reference,
            interval: Some(interval),
        })
    }
}

impl Interval {
    /// Affine map of `[a, b]` onto `[-1, 1]`.
    pub fn to_chebyshev(&self, t: f64) -> f64 {
        (2.0 * t - self.a() - self.b()) / self.width()
    }
}

/// `Σ c_j T_j(x)` by Clenshaw's backward recurrence, `x` in `[-1, 1]`.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Evaluates a Chebyshev series mapped to `interval` at `t`.
pub fn cheb_eval(coeffs: &[f64], t: f64, interval: Interval) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(Error::Solver("empty coefficient list".into()));
    }
    interval.check(t)?;
    Ok(clenshaw(coeffs, interval.to_chebyshev(t)))
}

/// Discrete minimax approximation of `f` from polynomials of degree `n` on
/// `grid`, by multiple-point exchange.
pub fn remez<F>(f: F, n: usize, interval: Interval, grid: &[f64], tol: f64) -> Result<MinimaxResult>
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    remez_values(&values, n, interval, grid, tol)
}

/// [`remez`] on precomputed samples `values[i] = f(grid[i])`.
pub fn remez_values(values: &[f64], n: usize, interval: Interval, grid: &[f64], tol: f64) -> Result<MinimaxResult> {
    let size = n + 2;
    if n > MAX_DEGREE {
        return Err(Error::Solver(format!("degree {n} exceeds supported maximum {MAX_DEGREE}")));
    }
    if grid.len() < size {
        return Err(Error::Solver(format!("grid has {} points, degree {n} needs at least {size}", grid.len())));
    }
    if values.len() != grid.len() {
        return Err(Error::Solver("sample count differs from grid size".into()));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::Solver(format!("grid not strictly increasing at index {i}")));
    }
    if let Some(&t) = grid.iter().find(|&&t| !interval.contains(t)) {
        return Err(Error::Domain { t, a: interval.a(), b: interval.b() });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Solver(format!("f is not finite at grid point {}", grid[i])));
    }
    if !(tol > 0.0) {
        return Err(Error::Solver(format!("tolerance must be positive, got {tol}")));
    }

    let xs: Vec<f64> = grid.iter().map(|&t| interval.to_chebyshev(t)).collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let negligible = 8.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut reference = initial_reference(&xs, size);
    let mut residual = vec![0.0; grid.len()];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let levelled = Levelled::solve(&xs, values, &reference)?;
        for (i, r) in residual.iter_mut().enumerate() {
            *r = values[i] - levelled.eval(xs[i]);
        }
        let error = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let lower = reference.iter().map(|&i| residual[i].abs()).fold(f64::INFINITY, f64::min);
        let converged = error <= negligible || error - lower <= tol * error;

        let next = if converged || iterations >= MAX_ITERATIONS {
            None
        } else {
            Some(exchange(&residual, levelled.level.abs(), size).unwrap_or_else(|| single_exchange(&residual, &reference)))
        };
        match next {
            Some(next) if next != reference => reference = next,
            _ => {
                // report against the Chebyshev form actually returned
                let coeffs = levelled.chebyshev(n);
                let error = xs
                    .iter()
                    .zip(values)
                    .map(|(&x, &v)| (v - clenshaw(&coeffs, x)).abs())
                    .fold(0.0f64, f64::max);
                let lower = reference
                    .iter()
                    .map(|&i| (values[i] - clenshaw(&coeffs, xs[i])).abs())
                    .fold(f64::INFINITY, f64::min)
                    .min(error);
                return Ok(MinimaxResult {
                    degree: n,
                    coefficients: Some(coeffs),
                    error,
                    lower_bracket: lower,
                    converged: error <= negligible || error - lower <= tol * error,
                    iterations,
                    reference: reference.iter().map(|&i| grid[i]).collect(),
                    interval: Some(interval),
                });
            }
        }
    }
}

/// Two-sided bracket `(lower, upper)` around the discrete minimax error:
/// the smallest residual on the reference and the largest on the grid.
pub fn dvp_bracket<F>(f: F, result: &MinimaxResult) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let interval = result.interval.ok_or_else(|| Error::Solver("result carries no interval".into()))?;
    let coeffs = result.coefficients();
    if coeffs.is_empty() || result.reference.len() < 2 {
        return Err(Error::Solver("result carries no approximant or reference".into()));
    }
    if let Some(i) = result.reference.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::BrokenAlternation(i));
    }
    let residuals: Vec<f64> = result
        .reference
        .iter()
        .map(|&t| f(t) - clenshaw(coeffs, interval.to_chebyshev(t)))
        .collect();
    // residuals at rounding level carry no sign information
    let noise = result
        .reference
        .iter()
        .map(|&t| f(t).abs())
        .fold(0.0, f64::max)
        * 8.0
        * f64::EPSILON;
    let sign = |r: f64| if r.abs() <= noise { 0.0 } else { r.signum() };
    if let Some(i) = residuals.windows(2).position(|w| sign(w[0]) * sign(w[1]) > 0.0) {
        return Err(Error::BrokenAlternation(i));
    }
    let lower = residuals.iter().map(|r| r.abs()).fold(f64::INFINITY, f64::min);
    Ok((lower, result.error))
}

fn initial_reference(xs: &[f64], size: usize) -> Vec<usize> {
    let last = xs.len() - 1;
    let mut idx: Vec<usize> = (0..size)
        .map(|j| {
            let target = -(std::f64::consts::PI * j as f64 / (size - 1) as f64).cos();
            let i = xs.partition_point(|&x| x < target).min(last);
            if i > 0 && (target - xs[i - 1]).abs() <= (xs[i] - target).abs() {
                i - 1
            } else {
                i
            }
        })
        .collect();
    for j in 1..size {
        idx[j] = idx[j].max(idx[j - 1] + 1);
    }
    let mut cap = last;
    for j in (0..size).rev() {
        idx[j] = idx[j].min(cap);
        cap = idx[j].saturating_sub(1);
    }
    idx
}

/// The levelled approximant on a reference: the degree-`n` polynomial `q`
/// with `f(x_i) - q(x_i) = (-1)^i h` at the `n + 2` reference nodes.
///
/// Solved in barycentric form. The weights `w_i = 1 / Π_{j≠i} (x_i - x_j)`
/// annihilate every polynomial of degree `n`, so
/// `h = Σ w_i f_i / Σ (-1)^i w_i`, and the denominator never cancels because
/// the weights alternate in sign.
struct Levelled {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    targets: Vec<f64>,
    level: f64,
    scale: f64,
}

impl Levelled {
    fn solve(xs: &[f64], values: &[f64], reference: &[usize]) -> Result<Self> {
        let nodes: Vec<f64> = reference.iter().map(|&i| xs[i]).collect();
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::SingularSystem);
        }
        // log-magnitudes keep the products representable for clustered nodes
        let logs: Vec<(f64, f64)> = nodes
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                nodes.iter().enumerate().filter(|&(j, _)| j != i).fold((0.0, 1.0), |(log, sign), (_, &xj)| {
                    let d = 2.0 * (xi - xj);
                    (log - d.abs().ln(), sign * d.signum())
                })
            })
            .collect();
        let top = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|&(log, sign)| sign * (log - top).exp()).collect();

        let alternating = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
        let numerator: f64 = reference.iter().zip(&weights).map(|(&i, w)| w * values[i]).sum();
        let denominator: f64 = weights.iter().enumerate().map(|(i, w)| w * alternating(i)).sum();
        if !(denominator.abs() > 0.0) || !numerator.is_finite() {
            return Err(Error::SingularSystem);
        }
        let level = numerator / denominator;
        let targets = reference.iter().enumerate().map(|(k, &i)| values[i] - alternating(k) * level).collect();
        Ok(Levelled { nodes, weights, targets, level, scale: top.exp() })
    }

    // modified Lagrange form, backward stable even where the interpolant
    // is large compared with its values at the nodes
    fn eval(&self, x: f64) -> f64 {
        let mut node_product = 1.0;
        let mut sum = 0.0;
        for ((&node, &w), &y) in self.nodes.iter().zip(&self.weights).zip(&self.targets) {
            let d = 2.0 * (x - node);
            if d == 0.0 {
                return y;
            }
            node_product *= d;
            sum += w * y / d;
        }
        node_product * sum * self.scale
    }

    /// Chebyshev coefficients, exact for degree `n` up to rounding: samples
    /// at the `n + 1` first-kind Chebyshev points and applies the discrete
    /// cosine transform.
    fn chebyshev(&self, n: usize) -> Vec<f64> {
        let count = n + 1;
        let angles: Vec<f64> = (0..count)
            .map(|k| std::f64::consts::PI * (k as f64 + 0.5) / count as f64)
            .collect();
        let samples: Vec<f64> = angles.iter().map(|a| self.eval(a.cos())).collect();
        (0..count)
            .map(|j| {
                let sum: f64 = angles.iter().zip(&samples).map(|(a, y)| y * (j as f64 * a).cos()).sum();
                let scale = if j == 0 { 1.0 } else { 2.0 };
                scale * sum / count as f64
            })
            .collect()
    }
}

#[derive(PartialEq)]
struct Smallest(f64, usize);

impl Eq for Smallest {}

impl PartialOrd for Smallest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Smallest {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Multiple exchange: one extremum per residual sign run, keeping those at
/// least as large as the current level, then thinned to `size` alternating
/// points without dropping the global maximum.
fn exchange(residual: &[f64], level: f64, size: usize) -> Option<Vec<usize>> {
    let threshold = level * (1.0 - 1e-9);
    let mut extrema: Vec<usize> = Vec::new();
    let mut run_sign = 0.0;
    for (i, &r) in residual.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let sign = r.signum();
        if sign != run_sign {
            extrema.push(i);
            run_sign = sign;
        } else {
            let last = extrema.last_mut().unwrap();
            if r.abs() > residual[*last].abs() {
                *last = i;
            }
        }
    }

    let mut kept: Vec<usize> = Vec::with_capacity(extrema.len());
    for i in extrema.into_iter().filter(|&i| residual[i].abs() >= threshold) {
        match kept.last_mut() {
            Some(last) if residual[*last].signum() == residual[i].signum() => {
                if residual[i].abs() > residual[*last].abs() {
                    *last = i;
                }
            }
            _ => kept.push(i),
        }
    }
    if kept.len() < size {
        return None;
    }

    let mut chain = Chain::new(kept.len());
    let mut heap: BinaryHeap<Smallest> = kept.iter().enumerate().map(|(p, &i)| Smallest(residual[i].abs(), p)).collect();
    let magnitude = |p: usize| residual[kept[p]].abs();
    while chain.count > size {
        if chain.count - size == 1 {
            let drop = if magnitude(chain.head) <= magnitude(chain.tail) { chain.head } else { chain.tail };
            chain.unlink(drop);
            continue;
        }
        let Some(Smallest(_, p)) = heap.pop() else { break };
        if !chain.alive[p] {
            continue;
        }
        // dropping an interior point leaves two same-signed neighbours; drop the smaller too
        if let (Some(l), Some(r)) = (chain.prev[p], chain.next[p]) {
            let partner = if magnitude(l) <= magnitude(r) { l } else { r };
            chain.unlink(partner);
        }
        chain.unlink(p);
    }
    Some(chain.iter().map(|p| kept[p]).collect())
}

struct Chain {
    prev: Vec<Option<usize>>,
    next: Vec<Option<usize>>,
    alive: Vec<bool>,
    head: usize,
    tail: usize,
    count: usize,
}

impl Chain {
    fn new(len: usize) -> Self {
        Chain {
            prev: (0..len).map(|p| p.checked_sub(1)).collect(),
            next: (0..len).map(|p| Some(p + 1).filter(|&q| q < len)).collect(),
            alive: vec![true; len],
            head: 0,
            tail: len - 1,
            count: len,
        }
    }

    fn unlink(&mut self, p: usize) {
        self.alive[p] = false;
        self.count -= 1;
        match self.prev[p] {
            Some(q) => self.next[q] = self.next[p],
            None => self.head = self.next[p].unwrap_or(self.head),
        }
        match self.next[p] {
            Some(q) => self.prev[q] = self.prev[p],
            None => self.tail = self.prev[p].unwrap_or(self.tail),
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(self.head), |&p| self.next[p])
    }
}

/// Classical single-point exchange of the global residual maximum.
fn single_exchange(residual: &[f64], reference: &[usize]) -> Vec<usize> {
    let (star, _) = residual
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, r)| if r.abs() > best.1 { (i, r.abs()) } else { best });
    let mut out = reference.to_vec();
    if out.contains(&star) {
        return out;
    }
    let same = |i: usize| residual[i].signum() == residual[star].signum();
    let pos = out.partition_point(|&i| i < star);
    if pos == 0 {
        if same(out[0]) {
            out[0] = star;
        } else {
            out.pop();
            out.insert(0, star);
        }
    } else if pos == out.len() {
        let last = out.len() - 1;
        if same(out[last]) {
            out[last] = star;
        } else {
            out.remove(0);
            out.push(star);
        }
    } else if same(out[pos - 1]) {
        out[pos - 1] = star;
    } else {
        out[pos] = star;
    }
    out
}
