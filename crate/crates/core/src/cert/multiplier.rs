//! Sum-of-squares multipliers: given `p = Σ p_l²` and `q` coprime to `g`,
//! find `s = Σ s_l²` with `p ≡ s·q (mod g)`.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::sqrt::{refine_sqrt_mod, round_digits, sqrt_mod};
use crate::error::{Error, Result};
use crate::poly::{BinaryForm, RatPoly};

/// Precision controls for the floating-point square root.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqrtOptions {
    /// Round the float square root to this many decimal digits.
    pub digits: Option<u32>,
    /// Exact Newton steps applied after rounding.
    pub newton_steps: usize,
}

pub fn sos_multiplier(p_squares: &[BinaryForm], q: &BinaryForm, g: &BinaryForm) -> Result<Vec<BinaryForm>> {
    sos_multiplier_with(p_squares, q, g, &SqrtOptions::default())
}

/// Returns `s_l = t·p_l mod g` with `t² ≡ q⁻¹ (mod g)`, each of degree
/// `deg g`. When `g` has an `x2` factor the computation runs in sheared
/// coordinates.
pub fn sos_multiplier_with(
    p_squares: &[BinaryForm],
    q: &BinaryForm,
    g: &BinaryForm,
    opts: &SqrtOptions,
) -> Result<Vec<BinaryForm>> {
    if let Some(first) = p_squares.first() {
        if p_squares.iter().any(|p| p.degree() != first.degree()) {
            return Err(Error::DegreeMismatch("squares of p differ in degree".into()));
        }
    }
    if g.is_zero() {
        return Err(Error::Invalid("modulus is zero".into()));
    }
    let m = g.degree();
    if m == 0 {
        // Everything is congruent modulo a constant; s = p when q = 1.
        return Ok(if *q == BinaryForm::one() { p_squares.to_vec() } else { Vec::new() });
    }
    if let Some(first) = p_squares.first() {
        if 2 * first.degree() != 2 * m + q.degree() {
            return Err(Error::DegreeMismatch(format!(
                "p of degree {} cannot equal s·q with deg g = {m}, deg q = {}",
                2 * first.degree(),
                q.degree()
            )));
        }
    }
    if !q.is_coprime(g)? {
        return Err(Error::NotCoprime);
    }
    let c = if g.coeffs()[m].is_zero() { g.shear_to_x1_lead() } else { BigRational::zero() };
    let gs = g.shear(&c).dehomogenize_poly();
    let qs = q.shear(&c).dehomogenize_poly();
    let a = qs.inv_mod(&gs).ok_or(Error::NotCoprime)?;
    let mut t = sqrt_mod(&a, &gs)?;
    if let Some(d) = opts.digits {
        t = round_digits(&t, d);
    }
    t = refine_sqrt_mod(&t, &a, &gs, opts.newton_steps)?;
    let back = -c.clone();
    Ok(p_squares
        .iter()
        .map(|pl| {
            let s: RatPoly = (&t * &pl.shear(&c).dehomogenize_poly()).rem(&gs);
            BinaryForm::homogenize(&s, m).shear(&back)
        })
        .collect())
}

/// `Σ s_l²` as a form.
pub fn sum_of_squares(squares: &[BinaryForm], degree: usize) -> Result<BinaryForm> {
    squares.iter().try_fold(BinaryForm::zero(degree), |acc, s| acc.add(&s.square()))
}
