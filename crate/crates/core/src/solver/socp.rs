//! Second-order criticality test: zero gradient and positive semidefinite Hessian.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::factor::FactorMatrix;
use super::objective::SosProblem;
use crate::error::{Error, Result};
use crate::grid::dot;
use crate::poly::TrigPoly;

/// Largest variable count for which the Hessian is assembled densely.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMode {
    /// Assemble the full Hessian and diagonalize it; errors above [`DENSE_LIMIT`].
    Dense,
    /// Lanczos estimate of the smallest eigenvalue.
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SocpReport {
    pub grad_norm: f64,
    pub min_hessian_eig_estimate: f64,
    pub is_socp: bool,
}

/// Dense check.
pub fn socp_check(u: &FactorMatrix, p: &TrigPoly, tol: f64) -> Result<SocpReport> {
    socp_check_with(u, p, tol, EigenMode::Dense)
}

pub fn socp_check_with(
    u: &FactorMatrix,
    p: &TrigPoly,
    tol: f64,
    mode: EigenMode,
) -> Result<SocpReport> {
    let prob = SosProblem::new(p, u.rank())?;
    let grad_norm = prob.gradient(u)?.norm();
    let min_eig = match mode {
        EigenMode::Dense => dense_min_eig(&prob, u)?,
        EigenMode::Iterative => lanczos_min_eig(&prob, u, 120)?,
    };
    Ok(SocpReport {
        grad_norm,
        min_hessian_eig_estimate: min_eig,
        is_socp: grad_norm <= tol && min_eig >= -tol,
    })
}

/// Full Hessian at `u`, column `j` being the Hessian applied to the `j`-th unit vector.
pub fn dense_hessian(prob: &SosProblem, u: &FactorMatrix) -> Result<DMatrix<f64>> {
    let n = prob.num_vars();
    if n > DENSE_LIMIT {
        return Err(Error::TooLargeForDense { vars: n, limit: DENSE_LIMIT });
    }
    if u.data().len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.data().len() });
    }
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        prob.hess_vec_packed(u.data(), &e, &mut col);
        h.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    Ok((&h + h.transpose()) * 0.5)
}

fn dense_min_eig(prob: &SosProblem, u: &FactorMatrix) -> Result<f64> {
    let h = dense_hessian(prob, u)?;
    Ok(SymmetricEigen::new(h).eigenvalues.min())
}

/// Smallest Ritz value after `steps` Lanczos iterations with full reorthogonalization.
fn lanczos_min_eig(prob: &SosProblem, u: &FactorMatrix, steps: usize) -> Result<f64> {
    let n = prob.num_vars();
    if u.data().len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.data().len() });
    }
    let k = steps.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut alpha = Vec::with_capacity(k);
    let mut beta: Vec<f64> = Vec::with_capacity(k);
    let mut w = vec![0.0; n];
    for _ in 0..k {
        prob.hess_vec_packed(u.data(), &q, &mut w);
        let a = dot(&w, &q);
        alpha.push(a);
        basis.push(q.clone());
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nb = dot(&w, &w).sqrt();
        if nb <= 1e-12 * a.abs().max(1.0) || basis.len() == k {
            break;
        }
        beta.push(nb);
        q = w.iter().map(|v| v / nb).collect();
    }
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    Ok(SymmetricEigen::new(t).eigenvalues.min())
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    for x in v {
        *x /= n;
    }
}
