//! Square roots modulo a polynomial.
//!
//! For `a` coprime to `g` and positive at the real roots of `g`, there is a
//! real `t` with `t² ≡ a (mod g)`. We build it by Hermite interpolation: at
//! each root `z` of multiplicity `μ` the Taylor series of `√a` is matched to
//! order `μ - 1`, with conjugate roots given conjugate branches so the
//! interpolant is real.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::rational::rat_to_f64;
use crate::poly::roots::{complex_roots, is_real_root};
use crate::poly::RatPoly;

/// Taylor coefficients of `a` at `z` up to order `n - 1`.
fn taylor(a: &[f64], z: Complex64, n: usize) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if c.is_empty() {
            out.push(Complex64::zero());
            continue;
        }
        // synthetic division by (x - z): remainder is the next coefficient
        let mut q = vec![Complex64::zero(); c.len() - 1];
        let mut acc = Complex64::zero();
        for i in (0..c.len()).rev() {
            acc = acc * z + c[i];
            if i > 0 {
                q[i - 1] = acc;
            }
        }
        out.push(acc);
        c = q;
    }
    out
}

/// Series of `√a` from the series of `a` with a chosen `b0 = √a0`.
fn sqrt_series(a: &[Complex64], b0: Complex64) -> Vec<Complex64> {
    let mut b = vec![b0];
    for n in 1..a.len() {
        let mut acc = a[n];
        for k in 1..n {
            acc -= b[k] * b[n - k];
        }
        b.push(acc / (2.0 * b0));
    }
    b
}

/// Float square root of `a` modulo `g`; coefficients are exact binary
/// values of the computed floats. `deg t < deg g`, and for constant `g` the
/// result is `√a(0)` (or one if that is not positive).
pub fn sqrt_mod(a: &RatPoly, g: &RatPoly) -> Result<RatPoly> {
    let n = match g.degree() {
        None => return Err(Error::Invalid("modulus is zero".into())),
        Some(0) => {
            let a0 = rat_to_f64(&a.coeff(0));
            return Ok(if a0 > 0.0 { RatPoly::from_f64(&[a0.sqrt()]) } else { RatPoly::one() });
        }
        Some(n) => n,
    };
    if g.gcd(a).degree() != Some(0) {
        return Err(Error::NotCoprime);
    }
    let af = a.rem(g).to_f64();

    let mut rows: Vec<(Complex64, usize, Complex64)> = Vec::with_capacity(n);
    for (factor, mult) in g.squarefree() {
        for z in complex_roots(&factor.to_f64()) {
            let (z, series) = if is_real_root(z) {
                let z = Complex64::new(z.re, 0.0);
                let at = taylor(&af, z, mult);
                if at[0].re <= 0.0 {
                    return Err(Error::NegativeAtRealRoot { root: z.re });
                }
                (z, sqrt_series(&at, Complex64::new(at[0].re.sqrt(), 0.0)))
            } else {
                // Conjugate roots get conjugate branches.
                let upper = if z.im > 0.0 { z } else { z.conj() };
                let at = taylor(&af, upper, mult);
                let s = sqrt_series(&at, at[0].sqrt());
                if z.im > 0.0 {
                    (z, s)
                } else {
                    (z, s.into_iter().map(|c| c.conj()).collect())
                }
            };
            for (k, b) in series.into_iter().enumerate() {
                rows.push((z, k, b));
            }
        }
    }
    debug_assert_eq!(rows.len(), n);

    // Row (z, k): Σ_j binom(j, k) z^(j-k) t_j = b_k.
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = DVector::<Complex64>::zeros(n);
    for (i, &(z, k, b)) in rows.iter().enumerate() {
        rhs[i] = b;
        let mut binom = 1.0;
        let mut zp = Complex64::new(1.0, 0.0);
        for j in k..n {
            m[(i, j)] = zp * binom;
            zp *= z;
            binom = binom * (j + 1) as f64 / (j + 1 - k) as f64;
        }
    }
    let t = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Invalid("singular interpolation system".into()))?;
    let t = RatPoly::from_f64(&t.iter().map(|c| c.re).collect::<Vec<_>>());
    // Iterative refinement: one exact Newton step, rounded back to doubles.
    let polished = refine_sqrt_mod(&t, a, g, 1)?;
    Ok(RatPoly::from_f64(&polished.to_f64()))
}

/// Exact Newton steps `t ← (t + a·t⁻¹)/2 mod g`. Each step squares the
/// error `t² - a mod g`, at the cost of growing denominators.
pub fn refine_sqrt_mod(t: &RatPoly, a: &RatPoly, g: &RatPoly, steps: usize) -> Result<RatPoly> {
    let half = BigRational::new(1.into(), 2.into());
    let mut t = t.clone();
    for _ in 0..steps {
        let inv = t.inv_mod(g).ok_or(Error::NotCoprime)?;
        t = (&t + &(a * &inv).rem(g)).rem(g).scale(&half);
    }
    Ok(t)
}

/// Rounds coefficients to the nearest multiple of `10^-digits`.
pub fn round_digits(t: &RatPoly, digits: u32) -> RatPoly {
    let scale = BigInt::from(10).pow(digits);
    let s = BigRational::from_integer(scale.clone());
    RatPoly::new(
        t.coeffs()
            .iter()
            .map(|c| BigRational::new((c * &s).round().to_integer(), scale.clone()))
            .collect(),
    )
}

/// `max |(a - t²) mod g|` relative to `max |a|`.
pub fn sqrt_residual(a: &RatPoly, t: &RatPoly, g: &RatPoly) -> f64 {
    let r = (a - &(t * t)).rem(g);
    let scale = a.max_abs();
    if scale.is_zero() {
        return rat_to_f64(&r.max_abs());
    }
    rat_to_f64(&(r.max_abs() / scale).abs())
}
