//! Nonnegativity on a union of intervals via `p = Σ_i a_i q_i` with fixed
//! weights `a_i` and sums of squares `q_i = Σ_j u_ij²`.
//!
//! Polynomials here are ordinary univariate polynomials in `x` with
//! ascending coefficients. The objective `‖Σ_i a_i σ(u_i) - p‖²` uses the
//! Euclidean norm of the coefficient vector and is evaluated densely.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::dot;
use crate::poly::rational::f64poly;
use crate::solver::lbfgs::{self, Objective};
use crate::solver::{SolveTrace, SolverConfig};

/// Largest degree of `p` accepted by the dense path.
pub const MAX_INTERVAL_DEGREE: usize = 500;
/// Oversampling factor of the multiplier nonnegativity check.
const CHECK_OVERSAMPLE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    /// `(alpha, beta)` pairs with `alpha < beta`.
    pub intervals: Vec<(f64, f64)>,
    /// Weights `a_i`; `None` selects `{1, (x - α)(β - x)}` for a single interval.
    #[serde(default)]
    pub multipliers: Option<Vec<Vec<f64>>>,
}

impl IntervalSpec {
    pub fn single(alpha: f64, beta: f64) -> Self {
        Self { intervals: vec![(alpha, beta)], multipliers: None }
    }

    pub fn with_multipliers(mut self, multipliers: Vec<Vec<f64>>) -> Self {
        self.multipliers = Some(multipliers);
        self
    }

    /// Checks the intervals and that every multiplier is nonnegative on
    /// their union (by dense sampling).
    pub fn validate(&self) -> Result<()> {
        if self.intervals.is_empty() {
            return Err(Error::Invalid("at least one interval is required".into()));
        }
        for &(a, b) in &self.intervals {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Invalid(format!("invalid interval [{a}, {b}]")));
            }
        }
        let Some(ms) = &self.multipliers else {
            return Ok(());
        };
        if ms.is_empty() {
            return Err(Error::Invalid("multiplier list is empty".into()));
        }
        for a in ms {
            if a.is_empty() || a.iter().any(|c| !c.is_finite()) {
                return Err(Error::Invalid("multiplier coefficients must be finite and nonempty".into()));
            }
            let scale = f64poly::norm_inf(a);
            let samples = CHECK_OVERSAMPLE * a.len();
            for &(lo, hi) in &self.intervals {
                for k in 0..=samples {
                    let x = lo + (hi - lo) * k as f64 / samples as f64;
                    let v = f64poly::eval(a, x);
                    if v < -1e-12 * scale {
                        return Err(Error::Invalid(format!("multiplier is negative at x = {x}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The weights used for a target of degree `degree`.
    pub fn resolved_multipliers(&self, degree: usize) -> Result<Vec<Vec<f64>>> {
        if let Some(ms) = &self.multipliers {
            return Ok(ms.iter().map(|a| trim(a)).collect());
        }
        if self.intervals.len() != 1 {
            return Err(Error::Invalid("unions of intervals need explicit multipliers".into()));
        }
        if degree % 2 == 1 {
            return Err(Error::DegreeIncompatible(format!(
                "the built-in multipliers need an even degree, got {degree}"
            )));
        }
        let (a, b) = self.intervals[0];
        // (x - a)(b - x) = -ab + (a + b)x - x²
        Ok(vec![vec![1.0], vec![-a * b, a + b, -1.0]])
    }
}

fn trim(a: &[f64]) -> Vec<f64> {
    let mut v = a.to_vec();
    while v.len() > 1 && v.last() == Some(&0.0) {
        v.pop();
    }
    v
}

/// `f(u) = ‖Σ_i a_i Σ_j u_ij² - p‖²` over the packed blocks `u_ij`.
#[derive(Clone, Debug)]
pub struct IntervalObjective {
    p: Vec<f64>,
    multipliers: Vec<Vec<f64>>,
    halves: Vec<usize>,
    rank: usize,
}

impl IntervalObjective {
    /// `p` has the declared degree `p.len() - 1`; block `i` has half-degree
    /// `(deg p - deg a_i) / 2`.
    pub fn new(p: &[f64], multipliers: &[Vec<f64>], rank: usize) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Invalid("empty target".into()));
        }
        if rank == 0 {
            return Err(Error::Invalid("rank must be at least 1".into()));
        }
        let d = p.len() - 1;
        if d > MAX_INTERVAL_DEGREE {
            return Err(Error::Invalid(format!("degree {d} exceeds the dense limit {MAX_INTERVAL_DEGREE}")));
        }
        let mut halves = Vec::with_capacity(multipliers.len());
        for a in multipliers {
            let k = a.len() - 1;
            if k > d || (d - k) % 2 == 1 {
                return Err(Error::DegreeIncompatible(format!(
                    "multiplier of degree {k} cannot reach degree {d} with a square"
                )));
            }
            halves.push((d - k) / 2);
        }
        Ok(Self { p: p.to_vec(), multipliers: multipliers.to_vec(), halves, rank })
    }

    pub fn halves(&self) -> &[usize] {
        &self.halves
    }

    fn block_ranges(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.halves
            .iter()
            .map(|&h| {
                let len = self.rank * (h + 1);
                let r = (start, len);
                start += len;
                r
            })
            .collect()
    }

    /// `q_i = Σ_j u_ij²` for block `i`.
    pub fn block_sos(&self, x: &[f64], i: usize) -> Vec<f64> {
        let (start, len) = self.block_ranges()[i];
        let h = self.halves[i];
        let mut q = vec![0.0; 2 * h + 1];
        for col in x[start..start + len].chunks(h + 1) {
            for (acc, v) in q.iter_mut().zip(f64poly::mul(col, col)) {
                *acc += v;
            }
        }
        q
    }

    /// `Σ_i a_i q_i`.
    pub fn combination(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.p.len()];
        for (i, a) in self.multipliers.iter().enumerate() {
            for (acc, v) in s.iter_mut().zip(f64poly::mul(a, &self.block_sos(x, i))) {
                *acc += v;
            }
        }
        s
    }

    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut e = self.combination(x);
        for (ek, pk) in e.iter_mut().zip(&self.p) {
            *ek -= pk;
        }
        for ((start, len), (a, &h)) in self.block_ranges().into_iter().zip(self.multipliers.iter().zip(&self.halves)) {
            let cols = x[start..start + len].chunks(h + 1);
            let gcols = grad[start..start + len].chunks_mut(h + 1);
            for (col, g) in cols.zip(gcols) {
                // ∂f/∂u[l] = 4 Σ_k e[k + l]·(a·u)[k]
                let au = f64poly::mul(a, col);
                for (l, gl) in g.iter_mut().enumerate() {
                    *gl = 4.0 * au.iter().zip(&e[l..]).map(|(x, y)| x * y).sum::<f64>();
                }
            }
        }
        dot(&e, &e)
    }
}

impl Objective for IntervalObjective {
    fn dim(&self) -> usize {
        self.rank * self.halves.iter().map(|h| h + 1).sum::<usize>()
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.value_and_gradient(x, grad)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalBlock {
    pub multiplier: Vec<f64>,
    /// Coefficients of each `u_ij`, ascending.
    pub squares: Vec<Vec<f64>>,
    /// `q_i = Σ_j u_ij²`.
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalCertificate {
    pub blocks: Vec<IntervalBlock>,
    /// `‖Σ_i a_i q_i - p‖²` over coefficients.
    pub residual: f64,
    /// `residual ≤ tol·max(‖p‖², 1)`.
    pub success: bool,
    pub trace: SolveTrace,
}

/// Searches for `p = Σ_i a_i q_i` on the intervals of `spec`.
pub fn interval_certify(p: &[f64], spec: &IntervalSpec, cfg: &SolverConfig, tol: f64) -> Result<IntervalCertificate> {
    cfg.validate()?;
    spec.validate()?;
    if p.is_empty() {
        return Err(Error::Invalid("empty target".into()));
    }
    let multipliers = spec.resolved_multipliers(p.len() - 1)?;
    let obj = IntervalObjective::new(p, &multipliers, cfg.rank)?;
    let norm_sq = dot(p, p);
    let scale = cfg.init_scale.unwrap_or_else(|| {
        let mag = f64poly::norm_inf(p).max(1e-8);
        (mag / obj.dim() as f64).sqrt()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x0: Vec<f64> = (0..obj.dim()).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    let out = lbfgs::minimize(&obj, x0, &cfg.lbfgs_params(norm_sq))?;

    let mut blocks = Vec::with_capacity(multipliers.len());
    for ((i, (start, len)), a) in obj.block_ranges().into_iter().enumerate().zip(&multipliers) {
        let h = obj.halves[i];
        blocks.push(IntervalBlock {
            multiplier: a.clone(),
            squares: out.x[start..start + len].chunks(h + 1).map(<[f64]>::to_vec).collect(),
            q: obj.block_sos(&out.x, i),
        });
    }
    let residual = out.f;
    Ok(IntervalCertificate { blocks, residual, success: residual <= tol * norm_sq.max(1.0), trace: out.trace })
}
