//! Seeded random nonnegative trigonometric polynomials.
//!
//! Coefficients are drawn from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`
//! seeded with `seed_from_u64`), which is platform independent, in the order
//! `a0, cos_1..cos_n, sin_1..sin_n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{smooth_odd_size, Grid};
use crate::poly::TrigPoly;

/// Oversampling factor of the grid used to locate the minimum.
const OVERSAMPLE: usize = 16;
/// Local minima of the sampled values refined by Newton's method.
const CANDIDATES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub degree: usize,
    pub seed: u64,
    /// Minimum value of the generated polynomial; `None` means `0.1·std(p)`.
    #[serde(default)]
    pub min_offset: Option<f64>,
}

impl InstanceSpec {
    pub fn new(degree: usize, seed: u64) -> Self {
        Self { degree, seed, min_offset: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 2 || self.degree % 2 == 1 {
            return Err(Error::Invalid(format!(
                "instance degree must be even and at least 2, got {}",
                self.degree
            )));
        }
        if self.min_offset.is_some_and(|m| !(m.is_finite() && m > 0.0)) {
            return Err(Error::Invalid("min_offset must be positive".into()));
        }
        Ok(())
    }
}

/// Random polynomial with standard normal coefficients whose constant term is
/// shifted so that its minimum over the circle equals the requested offset.
pub fn gen_instance(spec: &InstanceSpec) -> Result<TrigPoly> {
    spec.validate()?;
    let n = spec.degree;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = || rng.sample::<f64, _>(StandardNormal);
    let _a0 = draw();
    let cos: Vec<f64> = (0..n).map(|_| draw()).collect();
    let sin: Vec<f64> = (0..n).map(|_| draw()).collect();
    let centered = TrigPoly::new(0.0, cos, sin)?;
    // Standard deviation of the non-constant part over the circle.
    let std = centered.norm_sq().sqrt();
    let offset = spec.min_offset.unwrap_or(0.1 * std);
    let (_, min) = minimize_on_circle(&centered);
    TrigPoly::new(offset - min, centered.cos_coeffs().to_vec(), centered.sin_coeffs().to_vec())
}

/// Global minimizer and minimum of `p` on the circle: dense sampling followed
/// by Newton refinement of the lowest local minima.
pub fn minimize_on_circle(p: &TrigPoly) -> (f64, f64) {
    let n = p.degree();
    if n == 0 {
        return (0.0, p.a0());
    }
    let grid = Grid::new(smooth_odd_size(OVERSAMPLE * (2 * n + 1))).expect("odd size");
    let v = grid.to_grid(p).expect("grid is large enough").values;
    let m = v.len();
    let mut local: Vec<usize> = (0..m)
        .filter(|&k| v[k] <= v[(k + m - 1) % m] && v[k] <= v[(k + 1) % m])
        .collect();
    local.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    local.truncate(CANDIDATES);

    let h = grid.node(1);
    let mut best = (grid.node(local[0]), v[local[0]]);
    for &k in &local {
        let mut t = grid.node(k);
        for _ in 0..20 {
            let (_, d1, d2) = p.eval_d2(t);
            if d2 <= 0.0 {
                break;
            }
            let step = (d1 / d2).clamp(-h, h);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let val = p.eval(t);
        if val < best.1 {
            best = (t, val);
        }
    }
    best
}
