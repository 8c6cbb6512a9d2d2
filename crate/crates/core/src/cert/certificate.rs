//! The multiplier certificate `(λ, Q, η)` and its verification.
//!
//! Gradient and Hessian terms are normalized so that
//! `∇f(u)(λ) = ⟨A_u(λ), e⟩` and `⟨vvᵀ, ∇²f(u)⟩ = ⟨σ(v), e⟩ + 2‖A_u(v)‖²`
//! with `e = σ(u) - p`; the true derivatives are four times these. With
//! `η_j = η^(3^j)` the certificate satisfies
//!
//! `∇f(u)(λ) + ⟨Q, ∇²f(u)⟩ = -‖e‖² + Σ_j (⟨σ(b^j), e⟩ + 2‖A_u(b̄^j)‖²)/(η·η_j)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::bezout::{bezout_solve, solve_exact};
use super::multiplier::{sos_multiplier_with, sum_of_squares, SqrtOptions};
use super::split::split_gcd;
use crate::error::{Error, Result};
use crate::poly::rational::{rat, rat_approx, rat_from_f64, rat_to_f64};
use crate::poly::roots::{complex_roots, is_real_root};
use crate::poly::{BinaryForm, FormPair, RatPoly};

/// Largest `deg u` accepted by the exact construction.
pub const MAX_CERT_DEGREE: usize = 16;

/// Largest denominator tried when rationalizing quadratic factors of `h`.
const FACTOR_DENOMINATOR: i64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub eta: f64,
    /// Coprime part of `u`; `Q` is built from `ū' = (u2', -u1')`.
    pub u_prime: FormPair,
    pub lambda: FormPair,
    /// `s = Σ s_l²`.
    pub s_factors: Vec<BinaryForm>,
    /// `b^0, …, b^(k/2)`.
    pub b_forms: Vec<FormPair>,
    /// Unscaled `w^j = η_j²·P_j·ū' + b̄^j`; the rank-one vectors of `Q` are
    /// `v^j = η_j^(-1/2)·w^j`, so these stay rational.
    pub v_forms: Vec<FormPair>,
    /// Real quadratic factors with `h = Π r_i`.
    pub r_factors: Vec<BinaryForm>,
    /// Bound terms `(⟨σ(b^j), e⟩ + 2‖A_u(b̄^j)‖²)/(η·η_j)` at build time.
    pub residual_terms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub identity_residual: f64,
    pub bound_terms: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `‖σ(u) - p‖²`.
    pub error_norm_sq: f64,
    /// `∇f(u)(λ)`.
    pub grad_term: f64,
    /// `⟨v vᵀ, ∇²f(u)⟩` for each rank-one term of `Q`, `s` terms first.
    pub hessian_terms: Vec<f64>,
}

pub fn certificate_build(u: &FormPair, p_squares: &[BinaryForm], eta: f64) -> Result<Certificate> {
    certificate_build_with(u, p_squares, eta, &SqrtOptions::default())
}

pub fn certificate_build_with(
    u: &FormPair,
    p_squares: &[BinaryForm],
    eta: f64,
    opts: &SqrtOptions,
) -> Result<Certificate> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Invalid(format!("eta must be positive, got {eta}")));
    }
    let d = u.degree();
    if d > MAX_CERT_DEGREE {
        return Err(Error::Invalid(format!("deg u = {d} exceeds the limit {MAX_CERT_DEGREE}")));
    }
    if p_squares.iter().any(|p| p.degree() != d) {
        return Err(Error::DegreeMismatch(format!("squares of p must have degree {d}")));
    }
    let split = split_gcd(u)?;
    let up = split.u_prime();
    let q = up.sigma();
    let gh = split.common();
    let (g, m, k) = (&split.g, split.g.degree(), split.h.degree());
    let r = factor_h(&split.h)?;
    let q_over_r = r
        .iter()
        .map(|rj| q.divexact(rj).map_err(|_| Error::HFactorFailure))
        .collect::<Result<Vec<_>>>()?;

    let modulus = g.mul(&BinaryForm::x1_pow(k));
    let s = sos_multiplier_with(p_squares, &q, &modulus, opts)?;
    let p = sum_of_squares(p_squares, 2 * d)?;
    let sq = sum_of_squares(&s, 2 * (m + k))?.mul(&q);
    let (quot, _) = p.sub(&sq)?.div_rem_any(&modulus)?;
    let half = BigRational::new(1.into(), 2.into());

    let mut b = vec![bezout_reduced(&up, &gh, &quot.scale(&half), d)?];
    let mut prefix = BinaryForm::one();
    for j in 1..=k / 2 {
        let target = g
            .mul(&BinaryForm::x1_pow(k + 4 - 2 * j))
            .mul(&q_over_r[j - 1])
            .mul(&prefix)
            .scale(&-half.clone());
        b.push(bezout_reduced(&up, &gh, &target, d)?);
        prefix = prefix.mul(&r[j - 1]);
    }

    let eta_q = rat_from_f64(eta);
    let etas = eta_powers(&eta_q, k / 2 + 1);
    let ubar = up.rotate();
    let mut prefix = BinaryForm::one();
    let mut w = Vec::with_capacity(b.len());
    for (j, bj) in b.iter().enumerate() {
        if j > 0 {
            prefix = prefix.mul(&r[j - 1]);
        }
        let pj = g.mul(&BinaryForm::x1_pow(k - 2 * j)).mul(&prefix);
        let lead = ubar.scale_by_form(&pj).scale(&(&etas[j] * &etas[j]));
        let bbar = bj.rotate();
        w.push(FormPair::new(lead.u1.add(&bbar.u1)?, lead.u2.add(&bbar.u2)?)?);
    }
    let lambda = u.scale(&-(BigRational::one() + &etas[k / 2 + 1] / &eta_q));

    let mut cert = Certificate {
        eta,
        u_prime: up,
        lambda,
        s_factors: s,
        b_forms: b,
        v_forms: w,
        r_factors: r,
        residual_terms: Vec::new(),
    };
    cert.residual_terms = certificate_verify(&cert, u, &p)?.bound_terms;
    Ok(cert)
}

/// `η^(3^j)` for `j = 0..=last`.
fn eta_powers(eta: &BigRational, last: usize) -> Vec<BigRational> {
    let mut out = vec![eta.clone()];
    for j in 1..=last {
        let prev = &out[j - 1];
        out.push(prev * prev * prev);
    }
    out
}

/// Bézout solution of `A_{u'}(b) = target` whose kernel component `C·ū'`
/// minimizes the coefficient norm of `A_u(b̄) = gh·A_{u'}(b̄)`.
fn bezout_reduced(up: &FormPair, gh: &BinaryForm, target: &BinaryForm, v_degree: usize) -> Result<FormPair> {
    let b = bezout_solve(&up.u1, &up.u2, target, v_degree)?;
    let dp = up.degree();
    if v_degree < dp {
        return Ok(b);
    }
    // A_{u'}(overline(C·ū')) = -C·σ(u'), so minimize ‖gh·(A_{u'}(b̄) - C·σ(u'))‖.
    let kdeg = v_degree - dp;
    let y = gh.mul(&up.apply(&b.rotate()));
    let base = gh.mul(&up.sigma());
    let cols: Vec<BinaryForm> = (0..=kdeg).map(|i| base.mul(&BinaryForm::monomial(i, kdeg))).collect();
    let dot = |a: &BinaryForm, b: &BinaryForm| -> BigRational {
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y).sum()
    };
    let gram: Vec<Vec<BigRational>> = cols.iter().map(|a| cols.iter().map(|b| dot(a, b)).collect()).collect();
    let rhs: Vec<BigRational> = cols.iter().map(|a| dot(a, &y)).collect();
    let c = solve_exact(gram, rhs).ok_or_else(|| Error::Invalid("singular kernel system".into()))?;
    let cform = BinaryForm::new(kdeg, c)?;
    let shift = up.rotate().scale_by_form(&cform);
    FormPair::new(b.u1.add(&shift.u1)?, b.u2.add(&shift.u2)?)
}

/// Factors `h` (no real roots) into real quadratics with rational
/// coefficients, leading constant folded into the first factor.
pub fn factor_h(h: &BinaryForm) -> Result<Vec<BinaryForm>> {
    if h.degree() == 0 {
        return Ok(Vec::new());
    }
    let dh = h.dehomogenize();
    if dh.x2_power > 0 || h.degree() % 2 == 1 {
        return Err(Error::HFactorFailure);
    }
    let mut out: Vec<RatPoly> = Vec::new();
    for (factor, mult) in dh.poly.squarefree() {
        let quads = if factor.degree() == Some(2) {
            vec![factor.clone()]
        } else {
            let mut quads = Vec::new();
            for z in complex_roots(&factor.to_f64()) {
                if is_real_root(z) {
                    return Err(Error::HFactorFailure);
                }
                if z.im > 0.0 {
                    quads.push(RatPoly::new(vec![
                        rat_approx(z.norm_sqr(), FACTOR_DENOMINATOR),
                        rat_approx(-2.0 * z.re, FACTOR_DENOMINATOR),
                        rat(1),
                    ]));
                }
            }
            let prod = quads.iter().fold(RatPoly::one(), |acc, r| &acc * r);
            if prod != factor {
                return Err(Error::HFactorFailure);
            }
            quads
        };
        for _ in 0..mult {
            out.extend(quads.iter().cloned());
        }
    }
    let lead = dh.poly.lead().cloned().unwrap_or_else(BigRational::one);
    let mut forms: Vec<BinaryForm> = out.iter().map(|r| BinaryForm::homogenize(r, 2)).collect();
    if let Some(first) = forms.first_mut() {
        *first = first.scale(&lead);
    }
    Ok(forms)
}

/// Sample points for the inner product on forms of degree `2d`: `2d + 1`
/// distinct rational points `((1-τ²)/(1+τ²), 2τ/(1+τ²))` of the unit circle.
fn sample_points(d: usize) -> Vec<(BigRational, BigRational)> {
    let n = 2 * d + 1;
    (0..n)
        .map(|k| {
            let tau = BigRational::new(BigInt::from(k), BigInt::from(n));
            let t2 = &tau * &tau;
            let den = BigRational::one() + &t2;
            ((BigRational::one() - &t2) / &den, (rat(2) * &tau) / &den)
        })
        .collect()
}

struct Sampler {
    points: Vec<(BigRational, BigRational)>,
    u: Vec<(BigRational, BigRational)>,
    e: Vec<BigRational>,
}

impl Sampler {
    fn new(u: &FormPair, p: &BinaryForm) -> Self {
        let points = sample_points(u.degree());
        let uv: Vec<_> = points.iter().map(|(a, b)| (u.u1.eval(a, b), u.u2.eval(a, b))).collect();
        let e = points
            .iter()
            .zip(&uv)
            .map(|((a, b), (u1, u2))| u1 * u1 + u2 * u2 - p.eval(a, b))
            .collect();
        Self { points, u: uv, e }
    }

    fn mean(&self, vals: impl Iterator<Item = BigRational>) -> BigRational {
        vals.sum::<BigRational>() / rat(self.points.len() as i64)
    }

    fn values(&self, v: &FormPair) -> Vec<(BigRational, BigRational)> {
        self.points.iter().map(|(a, b)| (v.u1.eval(a, b), v.u2.eval(a, b))).collect()
    }

    /// `⟨A_u(v), e⟩`.
    fn grad(&self, v: &FormPair) -> BigRational {
        let vals = self.values(v);
        self.mean(vals.iter().zip(&self.u).zip(&self.e).map(|(((v1, v2), (u1, u2)), e)| (u1 * v1 + u2 * v2) * e))
    }

    /// `⟨σ(v), e⟩` and `‖A_u(v)‖²`.
    fn quad_parts(&self, v: &FormPair) -> (BigRational, BigRational) {
        let vals = self.values(v);
        let s = self.mean(vals.iter().zip(&self.e).map(|((v1, v2), e)| (v1 * v1 + v2 * v2) * e));
        let a = self.mean(vals.iter().zip(&self.u).map(|((v1, v2), (u1, u2))| {
            let x = u1 * v1 + u2 * v2;
            &x * &x
        }));
        (s, a)
    }

    fn hess(&self, v: &FormPair) -> BigRational {
        let (s, a) = self.quad_parts(v);
        s + rat(2) * a
    }
}

/// `‖p‖²` under the sampled inner product used by [`certificate_verify`].
pub fn sampled_norm_sq(p: &BinaryForm) -> f64 {
    let pts = sample_points(p.degree() / 2);
    let sum: f64 = pts.iter().map(|(a, b)| rat_to_f64(&p.eval(a, b)).powi(2)).sum();
    sum / pts.len() as f64
}

/// Evaluates both sides of the certificate identity exactly under the
/// sampled inner product and reports their difference as a float.
pub fn certificate_verify(cert: &Certificate, u: &FormPair, p: &BinaryForm) -> Result<CertificateCheck> {
    let d = u.degree();
    let shape = |msg: String| Err(Error::ShapeMismatch(msg));
    if p.degree() != 2 * d {
        return shape(format!("p has degree {}, expected {}", p.degree(), 2 * d));
    }
    if cert.lambda.degree() != d {
        return shape("lambda degree differs from deg u".into());
    }
    if cert.s_factors.iter().any(|s| s.degree() + cert.u_prime.degree() != d) {
        return shape("s factors do not match u'".into());
    }
    if cert.b_forms.is_empty()
        || cert.b_forms.len() != cert.v_forms.len()
        || cert.b_forms.iter().chain(&cert.v_forms).any(|b| b.degree() != d)
    {
        return shape("b and v forms must be nonempty, equal in number and of degree deg u".into());
    }
    if !(cert.eta.is_finite() && cert.eta > 0.0) {
        return Err(Error::Invalid("eta must be positive".into()));
    }

    let sampler = Sampler::new(u, p);
    let eta = rat_from_f64(cert.eta);
    let etas = eta_powers(&eta, cert.b_forms.len() - 1);
    let ubar = cert.u_prime.rotate();

    let grad = sampler.grad(&cert.lambda);
    let mut hessian = Vec::new();
    for s in &cert.s_factors {
        hessian.push(sampler.hess(&ubar.scale_by_form(s)));
    }
    let mut bounds = Vec::new();
    for ((w, b), ej) in cert.v_forms.iter().zip(&cert.b_forms).zip(&etas) {
        let weight = (&eta * ej).recip();
        hessian.push(sampler.hess(w) * &weight);
        let (sb, _) = sampler.quad_parts(b);
        let (_, ab) = sampler.quad_parts(&b.rotate());
        bounds.push((sb + rat(2) * ab) * &weight);
    }
    let err = sampler.mean(sampler.e.iter().map(|e| e * e));
    let lhs = &grad + hessian.iter().sum::<BigRational>();
    let rhs = -&err + bounds.iter().sum::<BigRational>();
    Ok(CertificateCheck {
        identity_residual: rat_to_f64(&(&lhs - &rhs).abs()),
        bound_terms: bounds.iter().map(rat_to_f64).collect(),
        lhs: rat_to_f64(&lhs),
        rhs: rat_to_f64(&rhs),
        error_norm_sq: rat_to_f64(&err),
        grad_term: rat_to_f64(&grad),
        hessian_terms: hessian.iter().map(rat_to_f64).collect(),
    })
}

impl CertificateCheck {
    /// Sum of absolute bound terms.
    pub fn bound_total(&self) -> f64 {
        self.bound_terms.iter().map(|b| b.abs()).sum()
    }
}

/// `Σ_l p_l²`, the form a square list represents.
pub fn form_from_squares(squares: &[BinaryForm]) -> Result<BinaryForm> {
    let d = squares.first().map_or(0, BinaryForm::degree);
    sum_of_squares(squares, 2 * d)
}
