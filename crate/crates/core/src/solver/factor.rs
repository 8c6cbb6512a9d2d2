use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::TrigPoly;

/// The low-rank factor `U`: `rank` columns, each the packed coefficients of a
/// trigonometric polynomial of degree `half_degree` (`2·half_degree + 1`
/// entries). Stored column-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FactorRepr", into = "FactorRepr")]
pub struct FactorMatrix {
    rank: usize,
    half_degree: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FactorRepr {
    rank: usize,
    half_degree: usize,
    columns: Vec<TrigPoly>,
}

impl From<FactorMatrix> for FactorRepr {
    fn from(u: FactorMatrix) -> Self {
        FactorRepr { rank: u.rank, half_degree: u.half_degree, columns: u.columns() }
    }
}

impl TryFrom<FactorRepr> for FactorMatrix {
    type Error = Error;
    fn try_from(r: FactorRepr) -> Result<Self> {
        if r.columns.len() != r.rank {
            return Err(Error::DimensionMismatch { expected: r.rank, got: r.columns.len() });
        }
        FactorMatrix::from_columns(r.half_degree, &r.columns)
    }
}

impl FactorMatrix {
    pub fn zeros(rank: usize, half_degree: usize) -> Self {
        Self { rank, half_degree, data: vec![0.0; rank * (2 * half_degree + 1)] }
    }

    pub fn from_data(rank: usize, half_degree: usize, data: Vec<f64>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Invalid("rank must be at least 1".into()));
        }
        let expected = rank * (2 * half_degree + 1);
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: data.len() });
        }
        Ok(Self { rank, half_degree, data })
    }

    pub fn from_columns(half_degree: usize, columns: &[TrigPoly]) -> Result<Self> {
        let mut data = Vec::with_capacity(columns.len() * (2 * half_degree + 1));
        for c in columns {
            data.extend(c.padded(half_degree)?.packed());
        }
        Self::from_data(columns.len(), half_degree, data)
    }

    /// Entries i.i.d. `N(0, scale²)` from a ChaCha8 stream seeded with `seed`.
    pub fn random(rank: usize, half_degree: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(rank, half_degree, scale, &mut rng)
    }

    pub fn random_with<R: Rng>(rank: usize, half_degree: usize, scale: f64, rng: &mut R) -> Self {
        let len = rank * (2 * half_degree + 1);
        let data = (0..len).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        Self { rank, half_degree, data }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn half_degree(&self) -> usize {
        self.half_degree
    }

    /// Entries per column.
    pub fn col_len(&self) -> usize {
        2 * self.half_degree + 1
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, i: usize) -> &[f64] {
        let l = self.col_len();
        &self.data[i * l..(i + 1) * l]
    }

    pub fn column_poly(&self, i: usize) -> TrigPoly {
        TrigPoly::from_packed(self.half_degree, self.column(i)).expect("column length")
    }

    pub fn columns(&self) -> Vec<TrigPoly> {
        (0..self.rank).map(|i| self.column_poly(i)).collect()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rank == other.rank && self.half_degree == other.half_degree
    }
}

/// Settings for the low-rank quasi-Newton solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rank: usize,
    /// Number of stored correction pairs.
    pub memory: usize,
    pub max_iters: usize,
    /// Stop when every entry of `U` moves by less than this fraction of its magnitude.
    pub tol_rel_step: f64,
    /// Stop once `f ≤ tol_objective`; `None` means `1e-14·‖p‖²`.
    pub tol_objective: Option<f64>,
    /// Standard deviation of the initial entries; `None` selects
    /// `sqrt(max(mean p, ε) / (r·(n+1)))`.
    pub init_scale: Option<f64>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rank: 4,
            memory: 10,
            max_iters: 20_000,
            tol_rel_step: 1e-7,
            tol_objective: None,
            init_scale: None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = rank;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_tol_rel_step(mut self, tol: f64) -> Self {
        self.tol_rel_step = tol;
        self
    }

    pub fn with_tol_objective(mut self, tol: f64) -> Self {
        self.tol_objective = Some(tol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::Invalid("rank must be at least 1".into()));
        }
        if self.memory == 0 {
            return Err(Error::Invalid("memory must be at least 1".into()));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.tol_rel_step)
            || self.tol_objective.is_some_and(|t| !positive(t))
            || self.init_scale.is_some_and(|t| !positive(t))
        {
            return Err(Error::Invalid("tolerances and scales must be positive".into()));
        }
        Ok(())
    }
}

/// Why the quasi-Newton loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Every entry changed by less than the relative step tolerance.
    StepTolerance,
    /// Objective reached the absolute floor.
    ObjectiveFloor,
    MaxIterations,
    /// Gradient is exactly zero.
    ZeroGradient,
    /// An accepted step left the objective unchanged in floating point.
    Stalled,
    /// No step satisfying the sufficient-decrease condition was found.
    LineSearchFailed,
}

/// One accepted iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
    /// Cumulative transform calls up to and including this iterate.
    pub transform_calls: u64,
}

/// Per-iteration history of a solve. Row 0 is the initial point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<IterRecord>,
    pub termination: Termination,
}

impl SolveTrace {
    /// Number of accepted steps (rows minus the initial point).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }

    pub fn transform_calls(&self) -> u64 {
        self.records.last().map_or(0, |r| r.transform_calls)
    }

    /// CSV with columns `iteration,objective,grad_norm,fft_calls`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,objective,grad_norm,fft_calls\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{:e},{:e},{}\n",
                r.iteration, r.objective, r.grad_norm, r.transform_calls
            ));
        }
        s
    }
}
