//! Low-rank factorization `p = Σ_i u_i²` by unconstrained minimization.

mod factor;
pub mod lbfgs;
mod objective;
mod socp;

pub use factor::{FactorMatrix, IterRecord, SolveTrace, SolverConfig, Termination};
pub use objective::{gradient, hess_quadform, objective, SosProblem};
pub use socp::{dense_hessian, socp_check, socp_check_with, EigenMode, SocpReport, DENSE_LIMIT};

use crate::error::Result;
use crate::poly::TrigPoly;
use lbfgs::LbfgsParams;

/// Default standard deviation of the initial factor entries:
/// `sqrt(max(mean p, ε) / (r·(n+1)))`, so `Σ u_i²` starts near the mean of `p`.
pub fn default_init_scale(mean: f64, norm: f64, rank: usize, degree: usize) -> f64 {
    let eps = 1e-8 * norm.max(f64::MIN_POSITIVE);
    (mean.max(eps) / (rank * (degree + 1)) as f64).sqrt()
}

impl SolverConfig {
    pub(crate) fn lbfgs_params(&self, target_norm_sq: f64) -> LbfgsParams {
        LbfgsParams {
            memory: self.memory,
            max_iters: self.max_iters,
            tol_rel_step: self.tol_rel_step,
            f_floor: self.tol_objective.unwrap_or(1e-14 * target_norm_sq),
            ..LbfgsParams::default()
        }
    }
}

/// Minimizes `f_p` from a seeded random start.
pub fn lbfgs_minimize(p: &TrigPoly, cfg: &SolverConfig) -> Result<(FactorMatrix, SolveTrace)> {
    cfg.validate()?;
    let prob = SosProblem::new(p, cfg.rank)?;
    let scale = cfg.init_scale.unwrap_or_else(|| {
        default_init_scale(prob.target_mean(), prob.target_norm_sq().sqrt(), cfg.rank, p.degree())
    });
    let u0 = FactorMatrix::random(cfg.rank, p.degree() / 2, scale, cfg.seed);
    minimize_from(&prob, u0, cfg)
}

/// Result of [`decompose`].
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Decomposition {
    pub factor: FactorMatrix,
    /// `Σ_i u_i²`.
    pub sigma: TrigPoly,
    /// Final `f_p(U)`.
    pub residual: f64,
    /// `f_p(U) / ‖p‖²`.
    pub rel_residual: f64,
    /// `‖Σ_i u_i² - p‖∞` over coefficients.
    pub coeff_error: f64,
    pub trace: SolveTrace,
}

/// [`lbfgs_minimize`] followed by reconstruction of `Σ_i u_i²`.
pub fn decompose(p: &TrigPoly, cfg: &SolverConfig) -> Result<Decomposition> {
    let (factor, trace) = lbfgs_minimize(p, cfg)?;
    let prob = SosProblem::new(p, cfg.rank)?;
    let sigma = prob.sigma(&factor)?;
    let residual = prob.objective(&factor)?;
    let norm = prob.target_norm_sq();
    let coeff_error = sigma
        .packed()
        .iter()
        .zip(p.packed())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Decomposition {
        factor,
        sigma,
        residual,
        rel_residual: if norm > 0.0 { residual / norm } else { residual },
        coeff_error,
        trace,
    })
}

/// Minimizes from a given starting factor.
pub fn minimize_from(
    prob: &SosProblem,
    u0: FactorMatrix,
    cfg: &SolverConfig,
) -> Result<(FactorMatrix, SolveTrace)> {
    cfg.validate()?;
    let (rank, h) = (u0.rank(), u0.half_degree());
    if rank != prob.rank() || h != prob.half_degree() {
        return Err(crate::Error::DimensionMismatch {
            expected: prob.num_vars(),
            got: u0.data().len(),
        });
    }
    let out = lbfgs::minimize(prob, u0.into_data(), &cfg.lbfgs_params(prob.target_norm_sq()))?;
    Ok((FactorMatrix::from_data(rank, h, out.x)?, out.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn constant_target_rank_two() {
        let p = TrigPoly::constant(1.0, 2);
        let cfg = SolverConfig::default().with_rank(2).with_seed(3);
        let (u, trace) = lbfgs_minimize(&p, &cfg).unwrap();
        assert!(trace.final_objective() <= 1e-14, "{:?}", trace.termination);
        assert!(trace.iterations() < 100, "{} {:?}", trace.iterations(), trace.termination);
        let prob = SosProblem::new(&p, 2).unwrap();
        assert!(prob.objective(&u).unwrap() <= 1e-14);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = TrigPoly::new(3.0, vec![1.0, 0.5], vec![-0.5, 0.25]).unwrap();
        let cfg = SolverConfig::default().with_seed(11);
        let a = lbfgs_minimize(&p, &cfg).unwrap();
        let b = lbfgs_minimize(&p, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn odd_degree_rejected() {
        let p = TrigPoly::constant(1.0, 3);
        assert_eq!(lbfgs_minimize(&p, &SolverConfig::default()).unwrap_err(), Error::OddDegree(3));
    }

    #[test]
    fn trace_is_monotone() {
        let p = TrigPoly::new(5.0, vec![1.0, -2.0, 0.5, 0.3], vec![0.4, 1.0, -0.7, 0.2]).unwrap();
        let (_, trace) = lbfgs_minimize(&p, &SolverConfig::default().with_seed(2)).unwrap();
        let r = &trace.records;
        assert!(r.windows(2).all(|w| w[1].objective <= w[0].objective));
        assert!(r.windows(2).all(|w| w[1].transform_calls >= w[0].transform_calls));
    }
}
