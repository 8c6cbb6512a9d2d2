//! Numerical complex roots of small real polynomials.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::rational::RatPoly;

/// Roots of the polynomial with ascending float coefficients (trailing zeros
/// ignored), via companion-matrix eigenvalues followed by Newton polishing.
pub fn complex_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c = coeffs.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex64::new(-c[0] / c[1], 0.0)];
    }
    // Unshifted QR can stall on highly symmetric companion matrices such as
    // that of x^4 + 1; retry on p(x + δ) with a few shifts.
    for shift in [0.0, 0.37, -0.61, 1.13] {
        if let Some(ev) = companion_eigenvalues(&taylor_shift(&c, shift)) {
            return ev.iter().map(|&z| polish(&c, z + shift)).collect();
        }
    }
    panic!("companion eigenvalues did not converge");
}

const SCHUR_MAX_ITER: usize = 10_000;

fn companion_eigenvalues(c: &[f64]) -> Option<Vec<Complex64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -c[i] / lead;
    }
    let schur = nalgebra::linalg::Schur::try_new(comp, f64::EPSILON, SCHUR_MAX_ITER)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

/// Coefficients of `p(x + s)`.
fn taylor_shift(c: &[f64], s: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    if s == 0.0 {
        return out;
    }
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += s * out[j + 1];
        }
    }
    out
}

fn eval_with_derivative(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn polish(c: &[f64], mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        // Stop once Newton stops reducing the residual.
        if eval_with_derivative(c, next).0.norm() >= p.norm() {
            break;
        }
        z = next;
    }
    z
}

/// Roots with multiplicities. The exact square-free decomposition separates
/// repeated roots before any floating point is involved, so each numerical
/// root-finding call only sees simple roots.
pub fn roots_with_multiplicity(p: &RatPoly) -> Vec<(Complex64, usize)> {
    let mut out = Vec::new();
    for (factor, mult) in p.squarefree() {
        for z in complex_roots(&factor.to_f64()) {
            out.push((z, mult));
        }
    }
    out
}

/// Imaginary parts below this (relative to the root magnitude) count as real.
pub const REAL_ROOT_TOL: f64 = 1e-9;

pub fn is_real_root(z: Complex64) -> bool {
    z.im.abs() <= REAL_ROOT_TOL * (1.0 + z.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots() {
        let mut r = complex_roots(&[1.0, 0.0, 1.0]);
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn symmetric_companion() {
        let r = complex_roots(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(r.len(), 4);
        for z in r {
            assert!((z.powu(4) + 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_identity() {
        // (x + 2)² = x² + 4x + 4
        assert_eq!(taylor_shift(&[0.0, 0.0, 1.0], 2.0), vec![4.0, 4.0, 1.0]);
    }

    #[test]
    fn multiplicities_from_squarefree() {
        // x² (x² + 1)^2
        let p = &RatPoly::from_ints(&[0, 0, 1]) * &RatPoly::from_ints(&[1, 0, 1]).pow(2);
        let roots = roots_with_multiplicity(&p);
        let total: usize = roots.iter().map(|(_, m)| m).sum();
        assert_eq!(total, 6);
        assert!(roots.iter().any(|(z, m)| z.norm() < 1e-14 && *m == 2));
        assert!(roots
            .iter()
            .any(|(z, m)| (z - Complex64::new(0.0, 1.0)).norm() < 1e-12 && *m == 2));
    }
}
