//! Exact solutions of `u1·v1 + u2·v2 = target`.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::{BinaryForm, FormPair};

/// Solves `a x = b` exactly by Gauss-Jordan elimination. Free variables are
/// set to zero. Returns `None` when the system is inconsistent.
pub fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].recip();
        for x in &mut a[r][c..] {
            *x *= &inv;
        }
        b[r] *= &inv;
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..cols {
                let t = &f * &a[r][j];
                a[i][j] -= t;
            }
            let t = &f * &b[r];
            b[i] -= t;
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

/// Finds `(v1, v2)` of degree `v_degree` with `u1·v1 + u2·v2 = target`.
///
/// The linear system has the Sylvester structure: column `j` of the `u1`
/// block is `u1·x1^j x2^(v_degree - j)`. When `v_degree ≥ deg u`, the
/// solution is the one with free coordinates set to zero.
pub fn bezout_solve(
    u1: &BinaryForm,
    u2: &BinaryForm,
    target: &BinaryForm,
    v_degree: usize,
) -> Result<FormPair> {
    let d = u1.degree();
    if u2.degree() != d {
        return Err(Error::DegreeMismatch(format!(
            "u1 has degree {d}, u2 has degree {}",
            u2.degree()
        )));
    }
    if v_degree + 1 < d {
        return Err(Error::DegreeMismatch(format!(
            "v degree {v_degree} is below deg u - 1 = {}",
            d - 1
        )));
    }
    if target.degree() != d + v_degree {
        return Err(Error::DegreeMismatch(format!(
            "target degree {} differs from deg u + v degree = {}",
            target.degree(),
            d + v_degree
        )));
    }
    if u1.is_zero() && u2.is_zero() {
        return Err(Error::NotCoprime);
    }
    if !u1.is_coprime(u2)? {
        return Err(Error::NotCoprime);
    }
    let n = v_degree + 1;
    let rows = d + v_degree + 1;
    let mut a = vec![vec![BigRational::zero(); 2 * n]; rows];
    for (block, u) in [u1, u2].into_iter().enumerate() {
        for j in 0..n {
            for (i, c) in u.coeffs().iter().enumerate() {
                a[i + j][block * n + j] = c.clone();
            }
        }
    }
    let x = solve_exact(a, target.coeffs().to_vec()).ok_or(Error::NotCoprime)?;
    let v1 = BinaryForm::new(v_degree, x[..n].to_vec())?;
    let v2 = BinaryForm::new(v_degree, x[n..].to_vec())?;
    FormPair::new(v1, v2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational::rat;

    fn form(d: usize, c: &[i64]) -> BinaryForm {
        BinaryForm::from_ints(d, c).unwrap()
    }

    #[test]
    fn affine_pair() {
        // x and x - 1 after setting x2 = 1
        let u1 = form(1, &[0, 1]);
        let u2 = form(1, &[-1, 1]);
        let target = form(2, &[1, 0, 0]);
        let v = bezout_solve(&u1, &u2, &target, 1).unwrap();
        let lhs = u1.mul(&v.u1).add(&u2.mul(&v.u2)).unwrap();
        assert_eq!(lhs, target);
    }

    #[test]
    fn target_equal_to_u1() {
        let u1 = form(2, &[1, 0, 1]);
        let u2 = form(2, &[0, 1, 3]);
        // v_degree must be at least deg u - 1, so pad the target by x2.
        let target = u1.mul(&BinaryForm::x2());
        let v = bezout_solve(&u1, &u2, &target, 1).unwrap();
        assert_eq!(v.u1, BinaryForm::x2());
        assert!(v.u2.is_zero());
    }

    #[test]
    fn not_coprime() {
        let u1 = form(1, &[0, 1]);
        let u2 = form(1, &[0, 2]);
        let target = form(2, &[1, 1, 1]);
        assert_eq!(bezout_solve(&u1, &u2, &target, 1).unwrap_err(), Error::NotCoprime);
    }

    #[test]
    fn degree_checks() {
        let u1 = form(3, &[1, 0, 0, 1]);
        let u2 = form(3, &[0, 1, 0, 0]);
        assert!(matches!(
            bezout_solve(&u1, &u2, &form(4, &[1, 0, 0, 0, 0]), 1),
            Err(Error::DegreeMismatch(_))
        ));
        assert!(matches!(
            bezout_solve(&u1, &u2, &form(5, &[1, 0, 0, 0, 0, 0]), 1),
            Err(Error::DegreeMismatch(_))
        ));
    }

    #[test]
    fn inconsistent_system() {
        let a = vec![vec![rat(1), rat(1)], vec![rat(2), rat(2)]];
        assert!(solve_exact(a.clone(), vec![rat(1), rat(3)]).is_none());
        let x = solve_exact(a, vec![rat(1), rat(2)]).unwrap();
        assert_eq!(x, vec![rat(1), rat(0)]);
    }
}
