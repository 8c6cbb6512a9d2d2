//! The least-squares objective `f(U) = (1/m) Σ_k (Σ_i u_i(x_k)² − p(x_k))²`
//! and its derivatives, all evaluated through grid transforms.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::factor::FactorMatrix;
use super::lbfgs::Objective;
use crate::error::{Error, Result};
use crate::grid::{dot, Grid, GridVector};
use crate::poly::TrigPoly;

/// Below this many samples per evaluation (`m·r`) columns are processed serially.
const PAR_THRESHOLD: usize = 1 << 15;

/// A fixed target `p` sampled on a grid, together with the factor shape.
///
/// Counts every forward or adjoint transform it performs.
#[derive(Debug)]
pub struct SosProblem {
    grid: Grid,
    half_degree: usize,
    rank: usize,
    target: Vec<f64>,
    transforms: AtomicU64,
}

impl SosProblem {
    /// Target `p` of even degree `n`; factors have `rank` columns of degree `n/2`.
    pub fn new(p: &TrigPoly, rank: usize) -> Result<Self> {
        p.require_even()?;
        Self::on_grid(p, rank, Grid::fast_for_degree(p.degree()))
    }

    /// Same as [`SosProblem::new`] on an explicit grid with `m ≥ 2n + 1`.
    pub fn on_grid(p: &TrigPoly, rank: usize, grid: Grid) -> Result<Self> {
        p.require_even()?;
        let samples = grid.to_grid(p)?;
        Self::from_samples(grid, samples, p.degree() / 2, rank)
    }

    /// Target given by its samples on `grid`.
    pub fn from_samples(
        grid: Grid,
        samples: GridVector,
        half_degree: usize,
        rank: usize,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Invalid("rank must be at least 1".into()));
        }
        if samples.len() != grid.m() {
            return Err(Error::DimensionMismatch { expected: grid.m(), got: samples.len() });
        }
        if 4 * half_degree + 1 > grid.m() {
            return Err(Error::GridTooSmall { m: grid.m(), degree: 2 * half_degree });
        }
        Ok(Self { grid, half_degree, rank, target: samples.values, transforms: AtomicU64::new(0) })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn half_degree(&self) -> usize {
        self.half_degree
    }

    pub fn degree(&self) -> usize {
        2 * self.half_degree
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of free variables, `r·(n + 1)`.
    pub fn num_vars(&self) -> usize {
        self.rank * (2 * self.half_degree + 1)
    }

    pub fn target_samples(&self) -> &[f64] {
        &self.target
    }

    /// Sampled `‖p‖²`.
    pub fn target_norm_sq(&self) -> f64 {
        dot(&self.target, &self.target) / self.grid.m() as f64
    }

    /// Sampled mean of `p`, i.e. its constant coefficient.
    pub fn target_mean(&self) -> f64 {
        self.target.iter().sum::<f64>() / self.grid.m() as f64
    }

    pub fn transform_calls(&self) -> u64 {
        self.transforms.load(Ordering::Relaxed)
    }

    fn check(&self, u: &FactorMatrix) -> Result<()> {
        if u.rank() != self.rank || u.half_degree() != self.half_degree {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                got: u.data().len(),
            });
        }
        Ok(())
    }

    fn parallel(&self) -> bool {
        self.grid.m() * self.rank >= PAR_THRESHOLD && rayon::current_num_threads() > 1
    }

    fn col_len(&self) -> usize {
        2 * self.half_degree + 1
    }

    /// Samples of every column of the packed factor `x`.
    fn column_samples(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let (m, h, l) = (self.grid.m(), self.half_degree, self.col_len());
        let one = |col: &[f64]| {
            let mut out = vec![0.0; m];
            self.grid.synthesize(h, col, &mut out, &mut self.grid.scratch());
            out
        };
        self.transforms.fetch_add(self.rank as u64, Ordering::Relaxed);
        if self.parallel() {
            x.par_chunks(l).map(one).collect()
        } else {
            x.chunks(l).map(one).collect()
        }
    }

    /// `Σ_i u_i(x_k)²` at every node.
    fn sigma_samples(&self, cols: &[Vec<f64>]) -> Vec<f64> {
        let mut s = vec![0.0; self.grid.m()];
        for c in cols {
            for (acc, v) in s.iter_mut().zip(c) {
                *acc += v * v;
            }
        }
        s
    }

    /// `e_k = σ(x_k) − p(x_k)`.
    fn residual(&self, cols: &[Vec<f64>]) -> Vec<f64> {
        let mut e = self.sigma_samples(cols);
        for (ek, pk) in e.iter_mut().zip(&self.target) {
            *ek -= pk;
        }
        e
    }

    /// Writes `scale · B(w_i)` for every column weight `w_i` into `out`.
    fn adjoint_columns<F>(&self, weights: F, scale: f64, out: &mut [f64])
    where
        F: Fn(usize) -> Vec<f64> + Sync,
    {
        let (h, l) = (self.half_degree, self.col_len());
        let one = |(i, g): (usize, &mut [f64])| {
            let mut w = weights(i);
            self.grid.analyze(&mut w, h, g, &mut self.grid.scratch());
            for v in g.iter_mut() {
                *v *= scale;
            }
        };
        self.transforms.fetch_add(self.rank as u64, Ordering::Relaxed);
        if self.parallel() {
            out.par_chunks_mut(l).enumerate().for_each(one);
        } else {
            out.chunks_mut(l).enumerate().for_each(one);
        }
    }

    /// Objective at the packed factor `x`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let cols = self.column_samples(x);
        let e = self.residual(&cols);
        dot(&e, &e) / self.grid.m() as f64
    }

    /// Objective and gradient at the packed factor `x`; `grad` is overwritten.
    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let m = self.grid.m();
        let cols = self.column_samples(x);
        let e = self.residual(&cols);
        let f = dot(&e, &e) / m as f64;
        let weights = |i: usize| cols[i].iter().zip(&e).map(|(u, e)| u * e).collect();
        self.adjoint_columns(weights, 4.0 / m as f64, grad);
        f
    }

    pub fn objective(&self, u: &FactorMatrix) -> Result<f64> {
        self.check(u)?;
        Ok(self.value(u.data()))
    }

    pub fn gradient(&self, u: &FactorMatrix) -> Result<FactorMatrix> {
        self.check(u)?;
        let mut g = FactorMatrix::zeros(self.rank, self.half_degree);
        self.value_and_gradient(u.data(), g.data_mut());
        Ok(g)
    }

    /// Second directional derivative `d²/dε² f(U + εV)` at `ε = 0`:
    /// `4⟨σ(V), σ(U) − p⟩ + 8‖Σ_i u_i v_i‖²`.
    pub fn hess_quadform(&self, u: &FactorMatrix, v: &FactorMatrix) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        let ucols = self.column_samples(u.data());
        let vcols = self.column_samples(v.data());
        let e = self.residual(&ucols);
        let sv = self.sigma_samples(&vcols);
        let a = cross_samples(&ucols, &vcols);
        Ok((4.0 * dot(&sv, &e) + 8.0 * dot(&a, &a)) / self.grid.m() as f64)
    }

    /// Hessian-vector product on packed vectors; `out` is overwritten.
    pub fn hess_vec_packed(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let m = self.grid.m();
        let ucols = self.column_samples(x);
        let vcols = self.column_samples(v);
        let e = self.residual(&ucols);
        let a = cross_samples(&ucols, &vcols);
        let weights = |i: usize| {
            (0..m)
                .map(|k| vcols[i][k] * e[k] + 2.0 * ucols[i][k] * a[k])
                .collect()
        };
        self.adjoint_columns(weights, 4.0 / m as f64, out);
    }

    pub fn hess_vec(&self, u: &FactorMatrix, v: &FactorMatrix) -> Result<FactorMatrix> {
        self.check(u)?;
        self.check(v)?;
        let mut out = FactorMatrix::zeros(self.rank, self.half_degree);
        self.hess_vec_packed(u.data(), v.data(), out.data_mut());
        Ok(out)
    }

    /// Coefficients of `Σ_i u_i²` (degree `n`).
    pub fn sigma(&self, u: &FactorMatrix) -> Result<TrigPoly> {
        self.check(u)?;
        let cols = self.column_samples(u.data());
        let s = self.sigma_samples(&cols);
        self.transforms.fetch_add(1, Ordering::Relaxed);
        TrigPoly::from_packed(self.degree(), &self.grid.from_grid_packed(&s, self.degree()))
    }
}

/// `Σ_i u_i(x_k) v_i(x_k)` at every node.
fn cross_samples(u: &[Vec<f64>], v: &[Vec<f64>]) -> Vec<f64> {
    let mut a = vec![0.0; u[0].len()];
    for (uc, vc) in u.iter().zip(v) {
        for ((acc, x), y) in a.iter_mut().zip(uc).zip(vc) {
            *acc += x * y;
        }
    }
    a
}

impl Objective for SosProblem {
    fn dim(&self) -> usize {
        self.num_vars()
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.value_and_gradient(x, grad)
    }

    fn transform_calls(&self) -> u64 {
        SosProblem::transform_calls(self)
    }
}

/// `f(U)` for a target given by samples on a grid of size `m ≥ 2n + 1`.
pub fn objective(u: &FactorMatrix, p_grid: &GridVector) -> Result<f64> {
    sampled_problem(u, p_grid)?.objective(u)
}

/// `∇f(U)` for a target given by samples.
pub fn gradient(u: &FactorMatrix, p_grid: &GridVector) -> Result<FactorMatrix> {
    sampled_problem(u, p_grid)?.gradient(u)
}

/// `d²/dε² f(U + εV)` for a target given by samples.
pub fn hess_quadform(u: &FactorMatrix, v: &FactorMatrix, p_grid: &GridVector) -> Result<f64> {
    sampled_problem(u, p_grid)?.hess_quadform(u, v)
}

fn sampled_problem(u: &FactorMatrix, p_grid: &GridVector) -> Result<SosProblem> {
    let m = p_grid.len();
    let need = 4 * u.half_degree() + 1;
    if m < need || m % 2 == 0 {
        return Err(Error::DimensionMismatch { expected: need, got: m });
    }
    SosProblem::from_samples(Grid::new(m)?, p_grid.clone(), u.half_degree(), u.rank())
}
