//! Projection onto the cone of sums of squares.
//!
//! Minimizing `f_p` for a `p` that is not a sum of squares converges to the
//! nearest sum of squares in the sampled norm. A candidate `σ = σ(u)` is
//! that projection iff `⟨σ - q, σ - p⟩ ≤ 0` for every SOS `q`; the report
//! checks this on random `q`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{dot, Grid};
use crate::poly::TrigPoly;
use crate::solver::{lbfgs_minimize, FactorMatrix, SolveTrace, SolverConfig};

/// Number of random SOS directions in the variational check.
pub const VARIATIONAL_SAMPLES: usize = 100;
/// Relative tolerance of the variational check.
pub const VARIATIONAL_TOL: f64 = 1e-8;
/// Squares per random SOS direction.
const SQUARES_PER_SAMPLE: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub samples: usize,
    pub tol: f64,
    /// Largest `⟨σ - q, σ - p⟩ / (‖q‖·‖σ - p‖)` over the samples; zero when
    /// `σ = p` to the solver floor.
    pub max_violation: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub factor: FactorMatrix,
    /// `σ(u)`, the projection of `p`.
    pub sigma: TrigPoly,
    /// `‖σ(u) - p‖²`.
    pub residual: f64,
    pub trace: SolveTrace,
    pub report: VariationalReport,
}

pub fn project_sos(p: &TrigPoly, cfg: &SolverConfig) -> Result<Projection> {
    project_sos_with(p, cfg, VARIATIONAL_SAMPLES, VARIATIONAL_TOL)
}

pub fn project_sos_with(p: &TrigPoly, cfg: &SolverConfig, samples: usize, tol: f64) -> Result<Projection> {
    let (factor, trace) = lbfgs_minimize(p, cfg)?;
    let n = p.degree();
    let grid = Grid::fast_for_degree(n);
    let sigma = sigma_of(&grid, &factor);
    let sig_grid = grid.to_grid(&sigma)?.values;
    let p_grid = grid.to_grid(p)?.values;
    let m = grid.m() as f64;
    let diff: Vec<f64> = sig_grid.iter().zip(&p_grid).map(|(s, p)| s - p).collect();
    let residual = dot(&diff, &diff) / m;
    let floor = cfg.tol_objective.unwrap_or(1e-14 * dot(&p_grid, &p_grid) / m);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut max_violation = f64::NEG_INFINITY;
    for _ in 0..samples {
        let q = random_sos_samples(&grid, n / 2, &mut rng);
        let v = if residual <= floor {
            0.0
        } else {
            let num: f64 = sig_grid.iter().zip(&q).zip(&diff).map(|((s, q), d)| (s - q) * d).sum::<f64>() / m;
            num / (residual.sqrt() * (dot(&q, &q) / m).sqrt())
        };
        max_violation = max_violation.max(v);
    }
    if samples == 0 {
        max_violation = 0.0;
    }
    let report = VariationalReport { samples, tol, max_violation, holds: max_violation <= tol };
    Ok(Projection { factor, sigma, residual, trace, report })
}

/// `Σ_i u_i²` recovered from samples on `grid`.
pub(crate) fn sigma_of(grid: &Grid, u: &FactorMatrix) -> TrigPoly {
    let h = u.half_degree();
    let mut s = vec![0.0; grid.m()];
    let mut col = vec![0.0; grid.m()];
    let mut scratch = grid.scratch();
    for i in 0..u.rank() {
        grid.synthesize(h, u.column(i), &mut col, &mut scratch);
        for (a, v) in s.iter_mut().zip(&col) {
            *a += v * v;
        }
    }
    TrigPoly::from_packed(2 * h, &grid.from_grid_packed(&s, 2 * h)).expect("packed length")
}

/// Samples of a random SOS `Σ_{i<3} c_i²` with standard normal coefficients
/// of degree `h`, normalized to unit sampled norm.
pub fn random_sos_samples<R: rand::Rng>(grid: &Grid, h: usize, rng: &mut R) -> Vec<f64> {
    let u = FactorMatrix::random_with(SQUARES_PER_SAMPLE, h, 1.0, rng);
    let mut s = vec![0.0; grid.m()];
    let mut col = vec![0.0; grid.m()];
    let mut scratch = grid.scratch();
    for i in 0..u.rank() {
        grid.synthesize(h, u.column(i), &mut col, &mut scratch);
        for (a, v) in s.iter_mut().zip(&col) {
            *a += v * v;
        }
    }
    let norm = (dot(&s, &s) / grid.m() as f64).sqrt();
    s.iter_mut().for_each(|v| *v /= norm);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sos_target_is_fixed_point() {
        let p = TrigPoly::new(2.0, vec![2.0], vec![0.0]).unwrap().padded(2).unwrap();
        let out = project_sos(&p, &SolverConfig::default().with_seed(1)).unwrap();
        assert!(out.residual <= 1e-12, "{}", out.residual);
        for (a, b) in out.sigma.packed().iter().zip(p.packed()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(out.report.holds);
    }

    #[test]
    fn negative_constant_projects_to_zero() {
        let p = TrigPoly::constant(-2.0, 2);
        let out = project_sos(&p, &SolverConfig::default().with_seed(4)).unwrap();
        assert!((out.residual - 4.0).abs() < 1e-8, "{}", out.residual);
        assert!(out.sigma.max_abs_coeff() < 1e-4);
        assert!(out.report.holds, "{:?}", out.report);
    }
}
