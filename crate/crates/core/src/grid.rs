//! Equispaced sampling of trigonometric polynomials on the circle.
//!
//! A [`Grid`] of `m` points has nodes `x_k = 2πk/m`, `k = 0..m`. Evaluation of a
//! degree-`n` polynomial at all nodes is a real inverse DFT, and the adjoint of
//! that evaluation map (`B w` in matrix terms) is a real forward DFT, so both
//! run in `O(m log m)`.
//!
//! Packed coefficient layout is `[a0, cos_1..cos_n, sin_1..sin_n]`. With the
//! complex spectrum `c_0 = a0`, `c_j = (a_j - i·b_j)/2`, the samples are
//! `v_k = Σ_j c_j e^{2πijk/m}` over the Hermitian-extended spectrum.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::poly::TrigPoly;

struct Plans {
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

fn plans_for(m: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("plan cache poisoned");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut planner = RealFftPlanner::<f64>::new();
            Arc::new(Plans { forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) })
        })
        .clone()
}

/// Sampling grid with `m` equispaced nodes (`m` odd, `m >= 3`).
#[derive(Clone)]
pub struct Grid {
    m: usize,
    plans: Arc<Plans>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("m", &self.m).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

/// Reusable transform buffers for one grid size.
pub struct Scratch {
    spectrum: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Grid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 3 || m % 2 == 0 {
            return Err(Error::InvalidGrid(m));
        }
        Ok(Self { m, plans: plans_for(m) })
    }

    /// The minimal grid `m = 2n + 1` on which degree-`n` polynomials are
    /// determined by their samples and the sampled inner product of two of
    /// them is exact. Degree 0 uses three points.
    pub fn for_degree(n: usize) -> Self {
        Self::new((2 * n + 1).max(3)).expect("2n+1 is odd")
    }

    /// Smallest grid with `m ≥ 2n + 1` whose size factors into 3, 5 and 7.
    ///
    /// The sampled inner product is exact on any grid with at least `2n + 1`
    /// points, so this grid defines the same objective as the minimal one
    /// while avoiding prime-length transforms.
    pub fn fast_for_degree(n: usize) -> Self {
        Self::new(smooth_odd_size(2 * n + 1)).expect("smooth size is odd and at least 3")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Largest degree representable on this grid.
    pub fn max_degree(&self) -> usize {
        (self.m - 1) / 2
    }

    pub fn node(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.m as f64
    }

    pub fn scratch(&self) -> Scratch {
        let len = self.m / 2 + 1;
        let work = self
            .plans
            .forward
            .get_scratch_len()
            .max(self.plans.inverse.get_scratch_len());
        Scratch {
            spectrum: vec![Complex64::new(0.0, 0.0); len],
            work: vec![Complex64::new(0.0, 0.0); work],
        }
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if 2 * degree + 1 > self.m {
            return Err(Error::GridTooSmall { m: self.m, degree });
        }
        Ok(())
    }

    /// Samples of the packed degree-`degree` polynomial at every node.
    ///
    /// Panics on mismatched slice lengths; callers validate shapes once.
    pub fn synthesize(&self, degree: usize, packed: &[f64], out: &mut [f64], s: &mut Scratch) {
        assert!(2 * degree < self.m);
        assert_eq!(packed.len(), 2 * degree + 1);
        assert_eq!(out.len(), self.m);
        let spec = &mut s.spectrum;
        spec.fill(Complex64::new(0.0, 0.0));
        spec[0] = Complex64::new(packed[0], 0.0);
        for j in 1..=degree {
            spec[j] = Complex64::new(0.5 * packed[j], -0.5 * packed[degree + j]);
        }
        self.plans
            .inverse
            .process_with_scratch(spec, out, &mut s.work)
            .expect("valid c2r input");
    }

    /// Adjoint of [`Grid::synthesize`]: `out_j = Σ_k values_k B_{j,k}` with
    /// basis rows `1, cos(l x_k), sin(l x_k)`. `values` is used as scratch.
    pub fn analyze(&self, values: &mut [f64], degree: usize, out: &mut [f64], s: &mut Scratch) {
        assert!(2 * degree < self.m);
        assert_eq!(values.len(), self.m);
        assert_eq!(out.len(), 2 * degree + 1);
        let spec = &mut s.spectrum;
        self.plans
            .forward
            .process_with_scratch(values, spec, &mut s.work)
            .expect("valid r2c input");
        out[0] = spec[0].re;
        for j in 1..=degree {
            out[j] = spec[j].re;
            out[degree + j] = -spec[j].im;
        }
    }

    /// Evaluates `p` at every node.
    pub fn to_grid(&self, p: &TrigPoly) -> Result<GridVector> {
        self.check_degree(p.degree())?;
        let mut values = vec![0.0; self.m];
        self.synthesize(p.degree(), &p.packed(), &mut values, &mut self.scratch());
        Ok(GridVector { values })
    }

    /// Unique degree-`degree` polynomial whose samples best match `v`; exact
    /// inverse of [`Grid::to_grid`] on polynomials of degree at most `degree`.
    ///
    /// Grids larger than `2·degree + 1` are accepted and project onto the
    /// lower modes.
    pub fn from_grid(&self, v: &GridVector, degree: usize) -> Result<TrigPoly> {
        if v.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: v.len() });
        }
        if 2 * degree + 1 > self.m {
            return Err(Error::DimensionMismatch { expected: 2 * degree + 1, got: self.m });
        }
        let packed = self.from_grid_packed(&v.values, degree);
        TrigPoly::from_packed(degree, &packed)
    }

    /// Packed coefficients of the projection of samples onto degree `degree`.
    pub fn from_grid_packed(&self, values: &[f64], degree: usize) -> Vec<f64> {
        let mut work = values.to_vec();
        let mut out = vec![0.0; 2 * degree + 1];
        self.analyze(&mut work, degree, &mut out, &mut self.scratch());
        let m = self.m as f64;
        out[0] /= m;
        for c in &mut out[1..] {
            *c *= 2.0 / m;
        }
        out
    }

    /// Sampled inner product `(1/m) Σ p_k q_k`.
    pub fn inner(&self, p: &GridVector, q: &GridVector) -> Result<f64> {
        for v in [p, q] {
            if v.len() != self.m {
                return Err(Error::DimensionMismatch { expected: self.m, got: v.len() });
            }
        }
        Ok(inner(p, q)?)
    }
}

/// Smallest odd `m ≥ max(min, 3)` with no prime factors other than 3, 5, 7.
pub fn smooth_odd_size(min: usize) -> usize {
    let mut m = min.max(3) | 1;
    loop {
        let mut r = m;
        for p in [3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 2;
    }
}

/// Samples of a polynomial on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridVector {
    pub values: Vec<f64>,
}

impl GridVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sampled inner product `(1/m) Σ p_k q_k` of two equal-length sample vectors.
pub fn inner(p: &GridVector, q: &GridVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    if p.is_empty() {
        return Ok(0.0);
    }
    Ok(dot(&p.values, &q.values) / p.len() as f64)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos1() -> TrigPoly {
        TrigPoly::new(0.0, vec![1.0], vec![0.0]).unwrap()
    }

    fn sin1() -> TrigPoly {
        TrigPoly::new(0.0, vec![0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn grid_size_validation() {
        assert_eq!(Grid::new(4).unwrap_err(), Error::InvalidGrid(4));
        assert_eq!(Grid::new(1).unwrap_err(), Error::InvalidGrid(1));
        let g = Grid::new(5).unwrap();
        assert!((g.node(1) - 2.0 * PI / 5.0).abs() < 1e-16);
    }

    #[test]
    fn constant_and_cosine_samples() {
        let g = Grid::new(5).unwrap();
        let v = g.to_grid(&TrigPoly::constant(1.0, 0)).unwrap();
        for x in &v.values {
            assert!((x - 1.0).abs() < 1e-15);
        }
        let v = g.to_grid(&cos1()).unwrap();
        for (k, x) in v.values.iter().enumerate() {
            assert!((x - (2.0 * PI * k as f64 / 5.0).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn too_small_grid() {
        let g = Grid::new(5).unwrap();
        let p = TrigPoly::constant(1.0, 3);
        assert_eq!(g.to_grid(&p).unwrap_err(), Error::GridTooSmall { m: 5, degree: 3 });
    }

    #[test]
    fn single_mode_recovered() {
        let g = Grid::for_degree(4);
        let p = TrigPoly::new(0.0, vec![0.0; 4], vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let q = g.from_grid(&g.to_grid(&p).unwrap(), 4).unwrap();
        for (i, c) in q.packed().iter().enumerate() {
            let want = if i == 4 + 3 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-14, "coefficient {i}: {c}");
        }
        let ones = GridVector::new(vec![1.0; 9]);
        let c = g.from_grid(&ones, 4).unwrap();
        assert!((c.a0() - 1.0).abs() < 1e-15 && c.max_abs_coeff() - 1.0 < 1e-15);
    }

    #[test]
    fn from_grid_dimension_checks() {
        let g = Grid::for_degree(4);
        let v = GridVector::new(vec![0.0; 7]);
        assert!(matches!(g.from_grid(&v, 3), Err(Error::DimensionMismatch { .. })));
        let v = GridVector::new(vec![0.0; 9]);
        assert!(matches!(g.from_grid(&v, 5), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn orthogonality_under_quadrature() {
        let g = Grid::new(3).unwrap();
        let c = g.to_grid(&cos1()).unwrap();
        let s = g.to_grid(&sin1()).unwrap();
        assert!(g.inner(&c, &s).unwrap().abs() < 1e-14);
        assert!((g.inner(&c, &c).unwrap() - 0.5).abs() < 1e-14);
        let one = GridVector::new(vec![1.0; 3]);
        assert_eq!(g.inner(&one, &one).unwrap(), 1.0);
        assert!(inner(&one, &GridVector::new(vec![1.0; 5])).is_err());
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_odd_size(1), 3);
        assert_eq!(smooth_odd_size(11), 15);
        assert_eq!(smooth_odd_size(16385), 16807);
        assert_eq!(Grid::fast_for_degree(2).m(), 5);
        assert!(Grid::fast_for_degree(1000).m() >= 2001);
    }

    #[test]
    fn analyze_is_adjoint_of_synthesize() {
        let g = Grid::new(11).unwrap();
        let n = 4;
        let c: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let w: Vec<f64> = (0..11).map(|i| (i as f64 * 1.3).cos()).collect();
        let mut s = g.scratch();
        let mut bc = vec![0.0; 11];
        g.synthesize(n, &c, &mut bc, &mut s);
        let mut bw = vec![0.0; 9];
        let mut wcopy = w.clone();
        g.analyze(&mut wcopy, n, &mut bw, &mut s);
        assert!((dot(&bc, &w) - dot(&c, &bw)).abs() < 1e-12);
    }
}
