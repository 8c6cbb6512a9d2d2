//! Real trigonometric polynomials `a0 + Σ_k (a_k cos kt + a_{-k} sin kt)`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrigRepr", into = "TrigRepr")]
pub struct TrigPoly {
    degree: usize,
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TrigRepr {
    degree: usize,
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl From<TrigPoly> for TrigRepr {
    fn from(p: TrigPoly) -> Self {
        TrigRepr { degree: p.degree, a0: p.a0, cos: p.cos, sin: p.sin }
    }
}

impl TryFrom<TrigRepr> for TrigPoly {
    type Error = Error;
    fn try_from(r: TrigRepr) -> Result<Self> {
        if r.cos.len() != r.degree || r.sin.len() != r.degree {
            return Err(Error::DimensionMismatch {
                expected: r.degree,
                got: r.cos.len().max(r.sin.len()),
            });
        }
        TrigPoly::new(r.a0, r.cos, r.sin)
    }
}

impl TrigPoly {
    /// Degree is `cos.len()`; `sin` must have the same length.
    pub fn new(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.len() != sin.len() {
            return Err(Error::DimensionMismatch { expected: cos.len(), got: sin.len() });
        }
        if !a0.is_finite() || cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        Ok(Self { degree: cos.len(), a0, cos, sin })
    }

    pub fn zero(degree: usize) -> Self {
        Self::constant(0.0, degree)
    }

    /// Constant `c` viewed as a polynomial of the given degree.
    pub fn constant(c: f64, degree: usize) -> Self {
        Self { degree, a0: c, cos: vec![0.0; degree], sin: vec![0.0; degree] }
    }

    /// Unpacks `[a0, cos_1..cos_n, sin_1..sin_n]`.
    pub fn from_packed(degree: usize, packed: &[f64]) -> Result<Self> {
        if packed.len() != 2 * degree + 1 {
            return Err(Error::DimensionMismatch { expected: 2 * degree + 1, got: packed.len() });
        }
        Self::new(
            packed[0],
            packed[1..=degree].to_vec(),
            packed[degree + 1..].to_vec(),
        )
    }

    /// `[a0, cos_1..cos_n, sin_1..sin_n]`, the ordering used everywhere a
    /// trigonometric polynomial is flattened into a coefficient vector.
    pub fn packed(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.degree + 1);
        v.push(self.a0);
        v.extend_from_slice(&self.cos);
        v.extend_from_slice(&self.sin);
        v
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Rejects odd degree; targets of the low-rank solver must have even degree
    /// so that each factor column has integer degree `n / 2`.
    pub fn require_even(&self) -> Result<()> {
        if self.degree % 2 == 1 {
            Err(Error::OddDegree(self.degree))
        } else {
            Ok(())
        }
    }

    /// Same polynomial viewed at a higher degree.
    pub fn padded(&self, degree: usize) -> Result<Self> {
        if degree < self.degree {
            return Err(Error::DegreeMismatch(format!(
                "cannot pad degree {} down to {degree}",
                self.degree
            )));
        }
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        cos.resize(degree, 0.0);
        sin.resize(degree, 0.0);
        Ok(Self { degree, a0: self.a0, cos, sin })
    }

    /// Naive O(n) pointwise evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = self.a0;
        for k in 0..self.degree {
            let (s, c) = ((k + 1) as f64 * t).sin_cos();
            acc += self.cos[k] * c + self.sin[k] * s;
        }
        acc
    }

    /// Value and first two derivatives at `t`.
    pub fn eval_d2(&self, t: f64) -> (f64, f64, f64) {
        let (mut v, mut d1, mut d2) = (self.a0, 0.0, 0.0);
        for k in 0..self.degree {
            let kf = (k + 1) as f64;
            let (s, c) = (kf * t).sin_cos();
            let (a, b) = (self.cos[k], self.sin[k]);
            v += a * c + b * s;
            d1 += kf * (b * c - a * s);
            d2 -= kf * kf * (a * c + b * s);
        }
        (v, d1, d2)
    }

    /// Continuous mean square `(1/2π)∫ p²`, equal to the sampled norm on any
    /// grid with at least `2n + 1` points.
    pub fn norm_sq(&self) -> f64 {
        self.a0 * self.a0
            + 0.5 * self.cos.iter().chain(&self.sin).map(|c| c * c).sum::<f64>()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        std::iter::once(&self.a0)
            .chain(&self.cos)
            .chain(&self.sin)
            .fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Numerator of `p(t(x))` under `cos t = (1-x²)/(1+x²)`, `sin t = 2x/(1+x²)`.
    ///
    /// Returns ascending coefficients of the degree-`2n` polynomial `N` with
    /// `p(t(x)) · (1+x²)^n = N(x)`. The map `x = tan(t/2)` covers the circle
    /// except `t = π`, which corresponds to `x → ∞`; there `p(π)` equals the
    /// leading coefficient of `N`. Nonnegativity of `p` on the circle is thus
    /// equivalent to nonnegativity of `N` on the real line together with a
    /// nonnegative leading coefficient.
    pub fn to_rational(&self) -> Vec<f64> {
        // e^{ikt} (1+x²)^n = (1+ix)^{n+k} (1-ix)^{n-k}; coefficients are
        // Gaussian integers, computed exactly and rounded once.
        let n = self.degree;
        let plus = gauss_binomial_powers(2 * n, 1);
        let minus = gauss_binomial_powers(2 * n, -1);
        let mut out = vec![0.0; 2 * n + 1];
        for k in 0..=n {
            let prod = gauss_mul(&plus[n + k], &minus[n - k]);
            for (j, (re, im)) in prod.iter().enumerate() {
                let re = re.to_f64().unwrap_or(f64::NAN);
                let im = im.to_f64().unwrap_or(f64::NAN);
                if k == 0 {
                    out[j] += self.a0 * re;
                } else {
                    out[j] += self.cos[k - 1] * re + self.sin[k - 1] * im;
                }
            }
        }
        out
    }
}

type Gauss = Vec<(BigInt, BigInt)>;

/// `(1 + s·i·x)^e` for `e = 0..=max`, as Gaussian-integer coefficient lists.
fn gauss_binomial_powers(max: usize, s: i64) -> Vec<Gauss> {
    let base: Gauss = vec![(BigInt::from(1), BigInt::zero()), (BigInt::zero(), BigInt::from(s))];
    let mut out = vec![vec![(BigInt::from(1), BigInt::zero())]];
    for e in 1..=max {
        let next = gauss_mul(&out[e - 1], &base);
        out.push(next);
    }
    out
}

fn gauss_mul(a: &Gauss, b: &Gauss) -> Gauss {
    let mut out = vec![(BigInt::zero(), BigInt::zero()); a.len() + b.len() - 1];
    for (i, (ar, ai)) in a.iter().enumerate() {
        for (j, (br, bi)) in b.iter().enumerate() {
            out[i + j].0 += ar * br - ai * bi;
            out[i + j].1 += ar * bi + ai * br;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational::f64poly;
    use std::f64::consts::PI;

    #[test]
    fn eval_examples() {
        assert_eq!(TrigPoly::constant(1.0, 2).eval(0.7), 1.0);
        let p = TrigPoly::new(2.0, vec![2.0], vec![0.0]).unwrap();
        assert!(p.eval(PI).abs() < 1e-15);
        let s = TrigPoly::new(0.0, vec![0.0], vec![1.0]).unwrap();
        assert!((s.eval(PI / 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rational_numerator_examples() {
        // 1 -> (1+x²)^2 at n = 2
        let one = TrigPoly::constant(1.0, 2);
        assert_eq!(one.to_rational(), vec![1.0, 0.0, 2.0, 0.0, 1.0]);
        // cos t at n = 2 -> (1-x²)(1+x²) = 1 - x⁴
        let c = TrigPoly::new(0.0, vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(c.to_rational(), vec![1.0, 0.0, 0.0, 0.0, -1.0]);
        // 2 + 2cos t at n = 2 -> 4(1+x²)
        let p = TrigPoly::new(2.0, vec![2.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(p.to_rational(), vec![4.0, 0.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn boundary_point_is_leading_coefficient() {
        let p = TrigPoly::new(0.3, vec![1.0, -0.5], vec![0.25, 2.0]).unwrap();
        let num = p.to_rational();
        assert!((num[4] - p.eval(PI)).abs() < 1e-12);
        let x: f64 = 0.37;
        let t = 2.0 * x.atan();
        let lhs = p.eval(t) * (1.0 + x * x).powi(2);
        assert!((lhs - f64poly::eval(&num, x)).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let p = TrigPoly::new(1.5, vec![0.5, -1.0], vec![0.0, 2.0]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"degree":2,"a0":1.5,"cos":[0.5,-1.0],"sin":[0.0,2.0]}"#);
        let q: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<TrigPoly>(r#"{"degree":3,"a0":1,"cos":[1],"sin":[1]}"#)
            .is_err());
    }

    #[test]
    fn odd_degree_rejected() {
        let p = TrigPoly::constant(1.0, 3);
        assert_eq!(p.require_even(), Err(Error::OddDegree(3)));
    }
}
