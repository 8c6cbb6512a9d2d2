//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

use super::factor::{IterRecord, SolveTrace, Termination};
use crate::error::{Error, Result};
use crate::grid::dot;

/// A smooth function of a flat vector.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Value at `x`; writes the gradient into `grad`.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Cumulative transform count, reported in the trace.
    fn transform_calls(&self) -> u64 {
        0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsParams {
    pub memory: usize,
    pub max_iters: usize,
    pub tol_rel_step: f64,
    /// Stop as soon as the objective is at or below this value.
    pub f_floor: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_evals: usize,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iters: 10_000,
            tol_rel_step: 1e-7,
            f_floor: 0.0,
            c1: 1e-4,
            c2: 0.9,
            max_line_evals: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub trace: SolveTrace,
}

struct Point {
    alpha: f64,
    f: f64,
    d: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

struct LineSearch<'a, O: Objective> {
    obj: &'a O,
    x0: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    d0: f64,
    c1: f64,
    c2: f64,
    evals: usize,
    max_evals: usize,
    iteration: usize,
    /// Lowest sufficient-decrease point seen, used if the search runs out of evaluations.
    best: Option<Point>,
}

impl<O: Objective> LineSearch<'_, O> {
    fn eval(&mut self, alpha: f64) -> Result<Point> {
        self.evals += 1;
        let x: Vec<f64> = self.x0.iter().zip(self.dir).map(|(x, d)| x + alpha * d).collect();
        let mut g = vec![0.0; x.len()];
        let f = self.obj.eval(&x, &mut g);
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: self.iteration });
        }
        let d = dot(&g, self.dir);
        let p = Point { alpha, f, d, x, g };
        if self.armijo(&p) && self.best.as_ref().is_none_or(|b| p.f < b.f) {
            self.best = Some(Point { x: p.x.clone(), g: p.g.clone(), ..p });
        }
        Ok(p)
    }

    fn armijo(&self, p: &Point) -> bool {
        p.f <= self.f0 + self.c1 * p.alpha * self.d0 && p.f < self.f0
    }

    fn curvature(&self, p: &Point) -> bool {
        p.d.abs() <= -self.c2 * self.d0
    }

    fn fallback(&mut self) -> Option<Point> {
        self.best.take()
    }

    /// Returns a point satisfying the strong Wolfe conditions, or the best
    /// sufficient-decrease point found, or `None`.
    fn run(&mut self, alpha0: f64) -> Result<Option<Point>> {
        let mut prev = Point { alpha: 0.0, f: self.f0, d: self.d0, x: Vec::new(), g: Vec::new() };
        let mut alpha = alpha0;
        loop {
            if self.evals >= self.max_evals {
                return Ok(self.fallback());
            }
            let cur = self.eval(alpha)?;
            if !self.armijo(&cur) || (prev.alpha > 0.0 && cur.f >= prev.f) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Ok(Some(cur));
            }
            if cur.d >= 0.0 {
                return self.zoom(cur, prev);
            }
            alpha = extrapolate(&prev, &cur);
            prev = cur;
        }
    }

    fn zoom(&mut self, mut lo: Point, mut hi: Point) -> Result<Option<Point>> {
        loop {
            if self.evals >= self.max_evals {
                return Ok(self.fallback());
            }
            let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
            if b - a <= 1e-16 * b.max(1e-300) {
                return Ok(self.fallback());
            }
            let guard = 0.1 * (b - a);
            let alpha = cubic_min(&lo, &hi)
                .filter(|t| *t >= a + guard && *t <= b - guard)
                .unwrap_or(0.5 * (a + b));
            let cur = self.eval(alpha)?;
            if !self.armijo(&cur) || cur.f >= lo.f {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return Ok(Some(cur));
                }
                if cur.d * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
    }
}

/// Minimizer of the cubic interpolating values and slopes at two points.
fn cubic_min(p: &Point, q: &Point) -> Option<f64> {
    let d1 = p.d + q.d - 3.0 * (p.f - q.f) / (p.alpha - q.alpha);
    let disc = d1 * d1 - p.d * q.d;
    if disc < 0.0 {
        return None;
    }
    let d2 = (q.alpha - p.alpha).signum() * disc.sqrt();
    let t = q.alpha - (q.alpha - p.alpha) * (q.d + d2 - d1) / (q.d - p.d + 2.0 * d2);
    t.is_finite().then_some(t)
}

/// Next trial step while the slope is still negative: cubic extrapolation
/// clamped to `[2α, 10α]`.
fn extrapolate(prev: &Point, cur: &Point) -> f64 {
    let lo = 2.0 * cur.alpha;
    let hi = 10.0 * cur.alpha;
    cubic_min(prev, cur).filter(|t| *t > cur.alpha).map_or(lo, |t| t.clamp(lo, hi))
}

/// Every entry moved by less than `tol` relative to its magnitude (or not at all).
fn small_relative_step(old: &[f64], new: &[f64], tol: f64) -> bool {
    old.iter().zip(new).all(|(a, b)| {
        let dx = (b - a).abs();
        dx == 0.0 || dx < tol * 0.5 * (a.abs() + b.abs())
    })
}

/// Minimizes `obj` from `x0`.
pub fn minimize<O: Objective>(obj: &O, x0: Vec<f64>, params: &LbfgsParams) -> Result<LbfgsOutcome> {
    let n = obj.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, &mut g);
    if !f.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut records = vec![IterRecord {
        iteration: 0,
        objective: f,
        grad_norm: dot(&g, &g).sqrt(),
        step: 0.0,
        transform_calls: obj.transform_calls(),
    }];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(params.memory);
    let mut iteration = 0;

    let termination = loop {
        if f <= params.f_floor {
            break Termination::ObjectiveFloor;
        }
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            break Termination::ZeroGradient;
        }
        if iteration >= params.max_iters {
            break Termination::MaxIterations;
        }

        let mut dir = two_loop(&g, &history);
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 || !slope.is_finite() {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        // Unit step for quasi-Newton directions; the first steepest-descent
        // step moves a unit distance.
        let alpha0 = if history.is_empty() { 1.0 / gnorm } else { 1.0 };

        let mut ls = LineSearch {
            obj,
            x0: &x,
            dir: &dir,
            f0: f,
            d0: slope,
            c1: params.c1,
            c2: params.c2,
            evals: 0,
            max_evals: params.max_line_evals,
            iteration: iteration + 1,
            best: None,
        };
        let res = ls.run(alpha0)?;
        let Some(pt) = res else {
            break Termination::LineSearchFailed;
        };
        iteration += 1;

        let s: Vec<f64> = pt.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = pt.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == params.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let stalled = pt.f >= f;
        let small_step = small_relative_step(&x, &pt.x, params.tol_rel_step);
        let step = pt.alpha * dot(&dir, &dir).sqrt();
        x = pt.x;
        g = pt.g;
        f = pt.f;
        records.push(IterRecord {
            iteration,
            objective: f,
            grad_norm: dot(&g, &g).sqrt(),
            step,
            transform_calls: obj.transform_calls(),
        });
        if f <= params.f_floor {
            break Termination::ObjectiveFloor;
        }
        if small_step {
            break Termination::StepTolerance;
        }
        if stalled {
            break Termination::Stalled;
        }
    };

    Ok(LbfgsOutcome { x, f, grad: g, trace: SolveTrace { records, termination } })
}

/// `-H g` with `H` the limited-memory inverse-Hessian approximation.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}
