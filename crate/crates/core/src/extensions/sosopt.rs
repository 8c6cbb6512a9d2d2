//! Feasibility of `𝓑(σ(u)) = b` over sums of squares.
//!
//! `𝓑` acts on packed trig coefficients `[a0, a_1..a_n, b_1..b_n]`, and the
//! penalty is the Euclidean norm `‖𝓑(σ(u)) - b‖²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, Grid};
use crate::poly::TrigPoly;
use crate::solver::lbfgs::{self, Objective};
use crate::solver::{default_init_scale, FactorMatrix, SolveTrace, SolverConfig};

/// Relative feasibility threshold: `residual ≤ FEASIBILITY_TOL·max(‖b‖², 1)`.
pub const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearCoeffMap {
    /// Trigonometric degree of `σ(u)`; must be even.
    pub degree: usize,
    /// Output dimension.
    pub m: usize,
    /// Row `j` is `Σ (idx, w)` over packed coefficient indices.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
}

impl LinearCoeffMap {
    /// The identity on all `2·degree + 1` coefficients with `b = p`.
    pub fn identity(p: &TrigPoly) -> Self {
        let len = 2 * p.degree() + 1;
        Self {
            degree: p.degree(),
            m: len,
            rows: (0..len).map(|i| vec![(i, 1.0)]).collect(),
            b: p.packed(),
        }
    }

    /// The single constraint `a0 = value`.
    pub fn mean(degree: usize, value: f64) -> Self {
        Self { degree, m: 1, rows: vec![vec![(0, 1.0)]], b: vec![value] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree % 2 == 1 {
            return Err(Error::OddDegree(self.degree));
        }
        if self.rows.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: self.rows.len() });
        }
        if self.b.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: self.b.len() });
        }
        let len = 2 * self.degree + 1;
        for row in &self.rows {
            for &(i, w) in row {
                if i >= len {
                    return Err(Error::DimensionMismatch { expected: len, got: i + 1 });
                }
                if !w.is_finite() {
                    return Err(Error::Invalid("non-finite map weight".into()));
                }
            }
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite target".into()));
        }
        Ok(())
    }

    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(i, w)| w * c[i]).sum()).collect()
    }

    /// `𝓑ᵀ r`.
    pub fn adjoint(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.degree + 1];
        for (row, rj) in self.rows.iter().zip(r) {
            for &(i, w) in row {
                out[i] += w * rj;
            }
        }
        out
    }
}

/// `f(u) = ‖𝓑(σ(u)) - b‖²` on packed factors.
pub struct SosOptProblem {
    map: LinearCoeffMap,
    grid: Grid,
    rank: usize,
}

impl SosOptProblem {
    pub fn new(map: LinearCoeffMap, rank: usize) -> Result<Self> {
        map.validate()?;
        if rank == 0 {
            return Err(Error::Invalid("rank must be at least 1".into()));
        }
        let grid = Grid::fast_for_degree(map.degree);
        Ok(Self { map, grid, rank })
    }

    fn half(&self) -> usize {
        self.map.degree / 2
    }

    fn columns(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let h = self.half();
        let mut s = self.grid.scratch();
        x.chunks(2 * h + 1)
            .map(|col| {
                let mut out = vec![0.0; self.grid.m()];
                self.grid.synthesize(h, col, &mut out, &mut s);
                out
            })
            .collect()
    }

    fn coefficients(&self, cols: &[Vec<f64>]) -> Vec<f64> {
        let mut s = vec![0.0; self.grid.m()];
        for c in cols {
            for (a, v) in s.iter_mut().zip(c) {
                *a += v * v;
            }
        }
        self.grid.from_grid_packed(&s, self.map.degree)
    }

    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (n, h, m) = (self.map.degree, self.half(), self.grid.m());
        let cols = self.columns(x);
        let c = self.coefficients(&cols);
        let mut r = self.map.apply(&c);
        for (rj, bj) in r.iter_mut().zip(&self.map.b) {
            *rj -= bj;
        }
        // ∂f/∂c = 2𝓑ᵀr, pulled back through c = from_grid_packed(σ).
        let gamma = self.map.adjoint(&r);
        let mut packed: Vec<f64> = gamma.iter().map(|g| 2.0 * g).collect();
        packed[0] = gamma[0];
        let mut w = vec![0.0; m];
        let mut s = self.grid.scratch();
        self.grid.synthesize(n, &packed, &mut w, &mut s);
        for (col, g) in cols.iter().zip(grad.chunks_mut(2 * h + 1)) {
            let mut v: Vec<f64> = col.iter().zip(&w).map(|(u, w)| 4.0 * u * w / m as f64).collect();
            self.grid.analyze(&mut v, h, g, &mut s);
        }
        dot(&r, &r)
    }
}

impl Objective for SosOptProblem {
    fn dim(&self) -> usize {
        self.rank * (self.map.degree + 1)
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.value_and_gradient(x, grad)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosOptResult {
    pub factor: FactorMatrix,
    pub sigma: TrigPoly,
    /// `‖𝓑(σ(u)) - b‖²`.
    pub residual: f64,
    pub feasible: bool,
    pub trace: SolveTrace,
}

pub fn sosopt_feasible(map: &LinearCoeffMap, cfg: &SolverConfig) -> Result<SosOptResult> {
    cfg.validate()?;
    let prob = SosOptProblem::new(map.clone(), cfg.rank)?;
    let h = prob.half();
    let scale = cfg.init_scale.unwrap_or_else(|| default_init_scale(1.0, 1.0, cfg.rank, map.degree));
    let u0 = FactorMatrix::random(cfg.rank, h, scale, cfg.seed);
    let b_sq = dot(&map.b, &map.b);
    let out = lbfgs::minimize(&prob, u0.into_data(), &cfg.lbfgs_params(b_sq))?;
    let factor = FactorMatrix::from_data(cfg.rank, h, out.x)?;
    let sigma = TrigPoly::from_packed(map.degree, &prob.coefficients(&prob.columns(factor.data())))?;
    Ok(SosOptResult {
        factor,
        sigma,
        residual: out.f,
        feasible: out.f <= FEASIBILITY_TOL * b_sq.max(1.0),
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_map_on_sos_target() {
        let p = TrigPoly::new(3.0, vec![1.0, 0.5], vec![-0.5, 0.25]).unwrap();
        let out = sosopt_feasible(&LinearCoeffMap::identity(&p), &SolverConfig::default().with_seed(2)).unwrap();
        assert!(out.residual <= 1e-12, "{}", out.residual);
        assert!(out.feasible);
    }

    #[test]
    fn mean_one_is_feasible() {
        let out = sosopt_feasible(&LinearCoeffMap::mean(4, 1.0), &SolverConfig::default().with_seed(1)).unwrap();
        assert!(out.residual <= 1e-12, "{}", out.residual);
        assert!((out.sigma.a0() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn negative_mean_is_infeasible() {
        let out = sosopt_feasible(&LinearCoeffMap::mean(4, -1.0), &SolverConfig::default().with_seed(1)).unwrap();
        assert!(out.residual >= 1.0 - 1e-12, "{}", out.residual);
        assert!(!out.feasible);
    }

    #[test]
    fn invalid_maps() {
        let mut map = LinearCoeffMap::mean(4, 1.0);
        map.rows[0].push((9, 1.0));
        assert!(matches!(map.validate(), Err(Error::DimensionMismatch { .. })));
        let mut map = LinearCoeffMap::mean(4, 1.0);
        map.b.push(0.0);
        assert!(matches!(map.validate(), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(LinearCoeffMap::mean(3, 1.0).validate(), Err(Error::OddDegree(3))));
    }

    #[test]
    fn gradient_matches_differences() {
        let map = LinearCoeffMap {
            degree: 4,
            m: 3,
            rows: vec![vec![(0, 1.0), (2, -0.5)], vec![(3, 2.0)], vec![(7, 1.0), (8, 0.3)]],
            b: vec![0.5, -1.0, 0.2],
        };
        let prob = SosOptProblem::new(map, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..prob.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut g = vec![0.0; x.len()];
        prob.value_and_gradient(&x, &mut g);
        let mut scratch = vec![0.0; x.len()];
        for i in 0..x.len() {
            let h = 1e-6;
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            let fd = (prob.value_and_gradient(&xp, &mut scratch) - prob.value_and_gradient(&xm, &mut scratch)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "{i}: {fd} vs {}", g[i]);
        }
    }
}
