//! Exact binary forms of a fixed degree.
//!
//! A form of degree `d` is stored as `d + 1` rational coefficients where entry
//! `j` multiplies `x1^j x2^(d-j)`. The degree is an explicit tag: a form whose
//! top coefficients vanish is still a form of degree `d` (it carries powers of
//! `x2`), and the zero form of degree `d` is distinct from the zero form of
//! degree `d + 1`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{rat, rat_from_f64, rat_to_f64, RatPoly};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct BinaryForm {
    degree: usize,
    coeffs: Vec<BigRational>,
}

/// Result of setting `x2 = 1`: `form = x2^x2_power · homogenize(poly)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dehomogenized {
    pub poly: RatPoly,
    pub x2_power: usize,
}

impl BinaryForm {
    pub fn new(degree: usize, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != degree + 1 {
            return Err(Error::DimensionMismatch { expected: degree + 1, got: coeffs.len() });
        }
        Ok(Self { degree, coeffs })
    }

    pub fn from_ints(degree: usize, coeffs: &[i64]) -> Result<Self> {
        Self::new(degree, coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero(degree: usize) -> Self {
        Self { degree, coeffs: vec![BigRational::zero(); degree + 1] }
    }

    pub fn constant(c: BigRational) -> Self {
        Self { degree: 0, coeffs: vec![c] }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// `x1^j x2^(degree - j)`.
    pub fn monomial(j: usize, degree: usize) -> Self {
        assert!(j <= degree);
        let mut f = Self::zero(degree);
        f.coeffs[j] = BigRational::one();
        f
    }

    pub fn x1() -> Self {
        Self::monomial(1, 1)
    }

    pub fn x2() -> Self {
        Self::monomial(0, 1)
    }

    pub fn x1_pow(k: usize) -> Self {
        Self::monomial(k, k)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_degree(other)?;
        Ok(Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_degree(other)?;
        Ok(Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    fn same_degree(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!(
                "forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![BigRational::zero(); self.degree + other.degree + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self { degree: self.degree + other.degree, coeffs: out }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact quotient `self / divisor`.
    pub fn divexact(&self, divisor: &Self) -> Result<Self> {
        if divisor.degree > self.degree || divisor.is_zero() {
            return Err(Error::NotDivisible);
        }
        let qdeg = self.degree - divisor.degree;
        if self.is_zero() {
            return Ok(Self::zero(qdeg));
        }
        let (q, r) = self.dehomogenize_poly().div_rem(&divisor.dehomogenize_poly());
        if !r.is_zero() || q.degree().unwrap_or(0) > qdeg {
            return Err(Error::NotDivisible);
        }
        // x2-multiplicity must also divide; the degree check above covers it
        // since a nonzero quotient of degree <= qdeg homogenizes to degree qdeg.
        Ok(Self::homogenize(&q, qdeg))
    }

    /// Quotient and remainder of the dehomogenized polynomials, re-homogenized.
    ///
    /// Requires `divisor` to have nonzero `x1^deg` coefficient so that
    /// dehomogenization is degree preserving. The remainder has the degree of
    /// `self` and the quotient has degree `deg self - deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.degree > self.degree {
            return Err(Error::DegreeMismatch("divisor degree exceeds dividend".into()));
        }
        if divisor.coeffs[divisor.degree].is_zero() {
            return Err(Error::Invalid("divisor must not vanish at (1, 0)".into()));
        }
        let (q, r) = self.dehomogenize_poly().div_rem(&divisor.dehomogenize_poly());
        Ok((
            Self::homogenize(&q, self.degree - divisor.degree),
            Self::homogenize(&r, self.degree),
        ))
    }

    /// Remainder of `self` modulo `g` as a form of degree `self.degree`.
    pub fn rem(&self, g: &Self) -> Result<Self> {
        Ok(self.div_rem(g)?.1)
    }

    /// `p(x) = self(x, 1)` (trimmed).
    pub fn dehomogenize_poly(&self) -> RatPoly {
        RatPoly::new(self.coeffs.clone())
    }

    pub fn dehomogenize(&self) -> Dehomogenized {
        let poly = self.dehomogenize_poly();
        let x2_power = match poly.degree() {
            None => 0,
            Some(m) => self.degree - m,
        };
        Dehomogenized { poly, x2_power }
    }

    /// `x2^degree · p(x1 / x2)`. Panics if `deg p > degree`.
    pub fn homogenize(p: &RatPoly, degree: usize) -> Self {
        let pd = p.degree().unwrap_or(0);
        assert!(pd <= degree || p.is_zero(), "polynomial degree {pd} exceeds form degree {degree}");
        let mut coeffs = vec![BigRational::zero(); degree + 1];
        for (j, c) in p.coeffs().iter().enumerate() {
            coeffs[j] = c.clone();
        }
        Self { degree, coeffs }
    }

    /// Number of `x2` factors (zero for the zero form).
    pub fn x2_multiplicity(&self) -> usize {
        self.dehomogenize().x2_power
    }

    /// Scales so the highest nonzero `x1` coefficient equals one.
    pub fn normalize(&self) -> Self {
        match self.coeffs.iter().rev().find(|c| !c.is_zero()) {
            None => self.clone(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    /// Scales to integer coefficients with unit content and a positive
    /// highest nonzero `x1` coefficient.
    pub fn primitive(&self) -> Self {
        let Some(lead) = self.coeffs.iter().rev().find(|c| !c.is_zero()) else {
            return self.clone();
        };
        let den = self.coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let nums: Vec<BigInt> = self.coeffs.iter().map(|c| (c * &den).to_integer()).collect();
        let content = nums.iter().fold(BigInt::zero(), |g, n| g.gcd(n));
        let sign = if lead.is_negative() { -BigInt::one() } else { BigInt::one() };
        let coeffs = nums
            .into_iter()
            .map(|n| BigRational::from_integer(&sign * n / &content))
            .collect();
        Self { degree: self.degree, coeffs }
    }

    /// Exact binary values of float coefficients.
    pub fn from_f64(degree: usize, coeffs: &[f64]) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        Self::new(degree, coeffs.iter().map(|&c| rat_from_f64(c)).collect())
    }

    /// Quotient and remainder for any nonzero divisor: if the divisor has an
    /// `x2` factor the division runs in sheared coordinates `x2 → x2 + c·x1`
    /// and both results are mapped back, so `self = q·divisor + r` exactly.
    pub fn div_rem_any(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(Error::Invalid("division by the zero form".into()));
        }
        if !divisor.coeffs[divisor.degree].is_zero() {
            return self.div_rem(divisor);
        }
        let c = divisor.shear_to_x1_lead();
        let (q, r) = self.shear(&c).div_rem(&divisor.shear(&c))?;
        let back = -c;
        Ok((q.shear(&back), r.shear(&back)))
    }

    /// Smallest positive integer `c` for which `self.shear(c)` has a nonzero
    /// `x1^deg` coefficient. The form must be nonzero.
    pub fn shear_to_x1_lead(&self) -> BigRational {
        // self.shear(c) has x1^d coefficient self(1, c), a nonzero polynomial in c
        // of degree at most d, so one of 1..=d+1 works.
        (1..=self.degree as i64 + 1)
            .map(rat)
            .find(|c| !self.eval(&BigRational::one(), c).is_zero())
            .expect("nonzero form has a non-root among d+1 points")
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Err(Error::BothZero),
            (true, false) => return Ok(other.normalize()),
            (false, true) => return Ok(self.normalize()),
            _ => {}
        }
        let a = self.dehomogenize();
        let b = other.dehomogenize();
        let g = a.poly.gcd(&b.poly);
        let k = a.x2_power.min(b.x2_power);
        let gd = g.degree().unwrap_or(0);
        Ok(Self::homogenize(&g, gd + k))
    }

    pub fn is_coprime(&self, other: &Self) -> Result<bool> {
        Ok(self.gcd(other)?.degree == 0)
    }

    pub fn eval(&self, x1: &BigRational, x2: &BigRational) -> BigRational {
        // Horner in x1 from the top coefficient; x2 exponent d - j grows as j falls.
        let mut acc = BigRational::zero();
        let mut x2pow = BigRational::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * x1 + c * &x2pow;
            x2pow = &x2pow * x2;
        }
        acc
    }

    pub fn eval_f64(&self, x1: f64, x2: f64) -> f64 {
        let mut acc = 0.0;
        let mut x2pow = 1.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x1 + rat_to_f64(c) * x2pow;
            x2pow *= x2;
        }
        acc
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rat_to_f64).collect()
    }

    /// Largest absolute coefficient as a float.
    pub fn norm_inf(&self) -> f64 {
        self.to_f64().iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Substitution `x2 -> x2 + c·x1`.
    pub fn shear(&self, c: &BigRational) -> Self {
        // x1^j (x2 + c x1)^(d-j) = Σ_i binom(d-j, i) c^i x1^(j+i) x2^(d-j-i)
        let d = self.degree;
        let mut out = vec![BigRational::zero(); d + 1];
        let mut cpow = vec![BigRational::one(); d + 1];
        for i in 1..=d {
            cpow[i] = &cpow[i - 1] * c;
        }
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let n = d - j;
            let mut binom = BigInt::one();
            for i in 0..=n {
                out[j + i] += a * &cpow[i] * BigRational::from_integer(binom.clone());
                binom = binom * BigInt::from(n - i) / BigInt::from(i + 1);
            }
        }
        Self { degree: d, coeffs: out }
    }
}

impl fmt::Debug for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree;
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| format!("({c})x1^{j}x2^{}", d - j))
            .collect();
        if terms.is_empty() {
            write!(f, "0[deg {d}]")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    degree: usize,
    coeffs: Vec<String>,
}

impl From<BinaryForm> for FormRepr {
    fn from(f: BinaryForm) -> Self {
        FormRepr {
            degree: f.degree,
            coeffs: f.coeffs.iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect(),
        }
    }
}

impl TryFrom<FormRepr> for BinaryForm {
    type Error = Error;
    fn try_from(r: FormRepr) -> Result<Self> {
        let coeffs = r
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        BinaryForm::new(r.degree, coeffs)
    }
}

/// Parses `"num/den"` or `"num"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Invalid(format!("malformed rational '{s}'"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// A pair of forms of equal degree, e.g. `u = (u1, u2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PairRepr")]
pub struct FormPair {
    pub u1: BinaryForm,
    pub u2: BinaryForm,
}

#[derive(Deserialize)]
struct PairRepr {
    u1: BinaryForm,
    u2: BinaryForm,
}

impl TryFrom<PairRepr> for FormPair {
    type Error = Error;
    fn try_from(r: PairRepr) -> Result<Self> {
        FormPair::new(r.u1, r.u2)
    }
}

impl FormPair {
    pub fn new(u1: BinaryForm, u2: BinaryForm) -> Result<Self> {
        if u1.degree() != u2.degree() {
            return Err(Error::DegreeMismatch(format!(
                "pair components of degree {} and {}",
                u1.degree(),
                u2.degree()
            )));
        }
        Ok(Self { u1, u2 })
    }

    pub fn degree(&self) -> usize {
        self.u1.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.u1.is_zero() && self.u2.is_zero()
    }

    /// `σ(u) = u1² + u2²`.
    pub fn sigma(&self) -> BinaryForm {
        self.u1.square().add(&self.u2.square()).expect("equal degrees")
    }

    /// `A_u(v) = u1·v1 + u2·v2`.
    pub fn apply(&self, v: &FormPair) -> BinaryForm {
        self.u1.mul(&v.u1).add(&self.u2.mul(&v.u2)).expect("equal degrees")
    }

    /// `(a1, a2) -> (a2, -a1)`.
    pub fn rotate(&self) -> FormPair {
        FormPair { u1: self.u2.clone(), u2: self.u1.neg() }
    }

    pub fn scale_by_form(&self, w: &BinaryForm) -> FormPair {
        FormPair { u1: self.u1.mul(w), u2: self.u2.mul(w) }
    }

    pub fn scale(&self, c: &BigRational) -> FormPair {
        FormPair { u1: self.u1.scale(c), u2: self.u2.scale(c) }
    }
}
