//! Splitting the common factor of a pair of forms as `gcd(u1, u2) = g·h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{BinaryForm, FormPair, RatPoly};

/// `u = u'·g·h` where `u'` is a coprime pair, `h` collects the factors of
/// the gcd whose roots are roots of `σ(u')`, and `g` is coprime to `σ(u')`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcdSplit {
    pub u1p: BinaryForm,
    pub u2p: BinaryForm,
    pub g: BinaryForm,
    pub h: BinaryForm,
}

impl GcdSplit {
    pub fn u_prime(&self) -> FormPair {
        FormPair { u1: self.u1p.clone(), u2: self.u2p.clone() }
    }

    /// `g·h`.
    pub fn common(&self) -> BinaryForm {
        self.g.mul(&self.h)
    }
}

/// `base^e mod m` for a nonconstant modulus.
fn pow_mod(base: &RatPoly, e: usize, m: &RatPoly) -> RatPoly {
    let mut acc = RatPoly::one().rem(m);
    let mut b = base.rem(m);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = (&acc * &b).rem(m);
        }
        b = (&b * &b).rem(m);
        e >>= 1;
    }
    acc
}

/// Computes the split exactly. The gcd is normalized to integer coefficients
/// with unit content and a positive leading `x1` coefficient, and so is `h`.
pub fn split_gcd(u: &FormPair) -> Result<GcdSplit> {
    let gc = u.u1.gcd(&u.u2)?.primitive();
    let u1p = u.u1.divexact(&gc)?;
    let u2p = u.u2.divexact(&gc)?;
    let s = u1p.square().add(&u2p.square())?;

    // σ(u') has no real roots, in particular no x2 factor, so only the
    // x2-free part of gc can share roots with it.
    let gc_poly = gc.dehomogenize().poly;
    let h_poly = if gc_poly.degree().unwrap_or(0) == 0 {
        RatPoly::one()
    } else {
        let sp = pow_mod(&s.dehomogenize_poly(), gc.degree(), &gc_poly);
        gc_poly.gcd(&sp)
    };
    let h = BinaryForm::homogenize(&h_poly, h_poly.degree().unwrap_or(0)).primitive();
    let g = gc.divexact(&h)?;
    Ok(GcdSplit { u1p, u2p, g, h })
}

/// Checks every defining property of a split with exact arithmetic.
pub fn check_split(u: &FormPair, split: &GcdSplit) -> Result<()> {
    let gh = split.common();
    if split.u1p.mul(&gh) != u.u1 || split.u2p.mul(&gh) != u.u2 {
        return Err(Error::Invalid("u is not u'·g·h".into()));
    }
    if !split.u1p.is_coprime(&split.u2p)? {
        return Err(Error::NotCoprime);
    }
    let s = split.u_prime().sigma();
    if !s.is_coprime(&split.g)? {
        return Err(Error::Invalid("g shares a root with σ(u')".into()));
    }
    if split.h.degree() % 2 == 1 {
        return Err(Error::Invalid("h has odd degree".into()));
    }
    // Every root of h is a root of σ(u'): h divides σ(u')^deg h.
    if split.h.degree() > 0 && s.pow(split.h.degree()).divexact(&split.h).is_err() {
        return Err(Error::Invalid("h has a root outside σ(u')".into()));
    }
    Ok(())
}
