#![allow(dead_code)]

use std::f64::consts::PI;

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use trigsos::poly::{BinaryForm, FormPair, TrigPoly};
use trigsos::solver::FactorMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_trig(rng: &mut ChaCha8Rng, degree: usize) -> TrigPoly {
    let a0: f64 = rng.sample(StandardNormal);
    TrigPoly::new(a0, normal_vec(rng, degree), normal_vec(rng, degree)).unwrap()
}

pub fn form(degree: usize, coeffs: &[i64]) -> BinaryForm {
    BinaryForm::from_ints(degree, coeffs).unwrap()
}

/// Form with integer coefficients in `[-range, range]` and a nonzero `x1^d` term.
pub fn random_form(rng: &mut ChaCha8Rng, degree: usize, range: i64) -> BinaryForm {
    let mut c: Vec<i64> = (0..=degree).map(|_| rng.random_range(-range..=range)).collect();
    if c[degree] == 0 {
        c[degree] = 1;
    }
    form(degree, &c)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Positive definite quadratic `(x1 + t·x2)² + s²·x2²`.
pub fn random_circle(rng: &mut ChaCha8Rng) -> BinaryForm {
    let t = rng.random_range(-2..=2i64);
    let s = rng.random_range(1..=2i64);
    form(2, &[t * t + s * s, 2 * t, 1])
}

/// Desk-scale input for the certificate: `u = gc·u'` where `u' = (ac - bd, ad + bc)`
/// so that `σ(u') = (a² + b²)(c² + d²)` shares the quadratic `c² + d²` with `gc`.
pub struct CertInstance {
    pub u: FormPair,
    pub squares: Vec<BinaryForm>,
    pub p: BinaryForm,
}

pub fn cert_instance(rng: &mut ChaCha8Rng, max_degree: usize) -> CertInstance {
    loop {
        let da = rng.random_range(0..=2usize);
        let shared = rng.random_range(0..=2usize);
        let dg = rng.random_range(0..=2usize);
        // deg u = da + 1 + 2·shared + dg
        let d = da + 1 + 2 * shared + dg;
        if d > max_degree {
            continue;
        }
        let a = random_form(rng, da, 3);
        let b = random_form(rng, da, 3);
        let t = rng.random_range(-2..=2i64);
        let s = rng.random_range(1..=2i64);
        let c = form(1, &[t, 1]);
        let dd = form(1, &[s, 0]);
        let u1p = a.mul(&c).sub(&b.mul(&dd)).unwrap();
        let u2p = a.mul(&dd).add(&b.mul(&c)).unwrap();
        let r = c.square().add(&dd.square()).unwrap();
        let mut gc = r.pow(shared);
        for _ in 0..dg {
            // real-rooted factors, coprime to every positive definite form
            let root = rng.random_range(-3..=3i64);
            gc = gc.mul(&form(1, &[-root, 1]));
        }
        let u = FormPair::new(gc.mul(&u1p), gc.mul(&u2p)).unwrap();
        if u.u1.is_zero() || u.u2.is_zero() {
            continue;
        }
        let squares: Vec<BinaryForm> = (0..2).map(|_| random_form(rng, d, 3)).collect();
        let p = squares.iter().fold(BinaryForm::zero(2 * d), |acc, q| acc.add(&q.square()).unwrap());
        return CertInstance { u, squares, p };
    }
}

/// Rows `[1, cos(x), …, cos(hx), sin(x), …, sin(hx)]` at `x_k = 2πk/m`.
pub fn explicit_basis(h: usize, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| {
            let x = 2.0 * PI * k as f64 / m as f64;
            let mut row = vec![1.0];
            row.extend((1..=h).map(|j| (j as f64 * x).cos()));
            row.extend((1..=h).map(|j| (j as f64 * x).sin()));
            row
        })
        .collect()
}

/// `(4/m) Σ_k e_k (B_k·u_i) B_k` with a dense basis.
pub fn dense_gradient(u: &FactorMatrix, p: &TrigPoly) -> Vec<f64> {
    let h = u.half_degree();
    let m = 2 * p.degree() + 1;
    let basis = explicit_basis(h, m);
    let dotp = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut grad = vec![0.0; u.data().len()];
    for (k, row) in basis.iter().enumerate() {
        let x = 2.0 * PI * k as f64 / m as f64;
        let vals: Vec<f64> = (0..u.rank()).map(|i| dotp(row, u.column(i))).collect();
        let e = vals.iter().map(|v| v * v).sum::<f64>() - p.eval(x);
        for (i, v) in vals.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                grad[i * (2 * h + 1) + j] += 4.0 / m as f64 * e * v * b;
            }
        }
    }
    grad
}
