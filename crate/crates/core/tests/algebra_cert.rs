mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{cert_instance, form, random_circle, random_form, rng};
use trigsos::cert::{
    bezout_solve, certificate_build, certificate_build_with, certificate_verify, check_split, form_from_squares,
    sampled_norm_sq, split_gcd, sqrt_mod, sqrt_residual, SqrtOptions,
};
use trigsos::poly::{BinaryForm, FormPair, RatPoly, TrigPoly};
use trigsos::solver::{lbfgs_minimize, SolverConfig};

fn int_form(degree: usize) -> impl Strategy<Value = BinaryForm> {
    prop::collection::vec(-5i64..=5, degree + 1).prop_map(move |c| form(degree, &c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bezout_back_substitution_is_exact(
        (u1, u2, target) in (1usize..=5).prop_flat_map(|d| (int_form(d), int_form(d), int_form(2 * d - 1)))
    ) {
        prop_assume!(!u1.is_zero() && !u2.is_zero());
        prop_assume!(u1.is_coprime(&u2).unwrap());
        let d = u1.degree();
        let v = bezout_solve(&u1, &u2, &target, d - 1).unwrap();
        prop_assert_eq!(u1.mul(&v.u1).add(&u2.mul(&v.u2)).unwrap(), target);
    }

    #[test]
    fn split_reconstructs_exactly(
        (a, b, w) in (0usize..=3, 0usize..=3).prop_flat_map(|(d, k)| (int_form(d), int_form(d), int_form(k)))
    ) {
        prop_assume!(!w.is_zero() && !(a.is_zero() && b.is_zero()));
        let u = FormPair::new(w.mul(&a), w.mul(&b)).unwrap();
        let s = split_gcd(&u).unwrap();
        prop_assert!(check_split(&u, &s).is_ok());
        prop_assert_eq!(s.u1p.mul(&s.g).mul(&s.h), u.u1.clone());
        prop_assert!(s.u_prime().sigma().is_coprime(&s.g).unwrap());
        prop_assert!(u.u1.gcd(&u.u2).unwrap().divexact(&s.h).is_ok());
    }
}

/// 200 seeded instances with a shared positive definite factor, exercising
/// nontrivial `h`.
#[test]
fn split_with_shared_circle_factors() {
    let mut r = rng(21);
    for _ in 0..200 {
        let inst = cert_instance(&mut r, 8);
        let s = split_gcd(&inst.u).unwrap();
        check_split(&inst.u, &s).unwrap();
        assert_eq!(s.u1p.mul(&s.g).mul(&s.h), inst.u.u1);
        assert_eq!(s.u2p.mul(&s.g).mul(&s.h), inst.u.u2);
    }
}

#[test]
fn worked_example_split() {
    // u = (x1^2 (x1^2+x2^2)^2 (x1^2+2x2^2), x1 x2 (x1^2+x2^2)^2 (x1^2+2x2^2))
    let circle = form(2, &[1, 0, 1]);
    let common = circle.square().mul(&form(2, &[2, 0, 1]));
    let x1 = BinaryForm::x1();
    let u = FormPair::new(common.mul(&x1.square()), common.mul(&x1.mul(&BinaryForm::x2()))).unwrap();
    let s = split_gcd(&u).unwrap();
    assert_eq!(s.u1p, x1);
    assert_eq!(s.u2p, BinaryForm::x2());
    assert_eq!(s.h, circle.square());
    assert_eq!(s.g, x1.mul(&form(2, &[2, 0, 1])));
}

/// Monic `g` of degree ≤ 8 mixing real roots, complex pairs and repeats.
fn random_modulus(r: &mut rand_chacha::ChaCha8Rng) -> BinaryForm {
    loop {
        let mut g = BinaryForm::one();
        while g.degree() < 8 {
            let piece = match r.random_range(0..3) {
                0 => form(1, &[-r.random_range(-4..=4i64), 1]),
                1 => random_circle(r),
                _ => form(2, &[r.random_range(-6..=2i64), r.random_range(-2..=2i64), 1]),
            };
            if g.degree() + piece.degree() > 8 {
                break;
            }
            g = g.mul(&piece);
            if r.random_bool(0.3) {
                break;
            }
        }
        if g.degree() > 0 {
            return g;
        }
    }
}

#[test]
fn sqrt_mod_residual_on_random_moduli() {
    let mut r = rng(5);
    let mut done = 0;
    while done < 100 {
        let g = random_modulus(&mut r).dehomogenize_poly();
        // strictly positive on the real line
        let s1 = random_form(&mut r, 3, 4).dehomogenize_poly();
        let s2 = random_form(&mut r, 2, 4).dehomogenize_poly();
        let a = &(&(&s1 * &s1) + &(&s2 * &s2)) + &RatPoly::from_ints(&[1]);
        if g.gcd(&a).degree() != Some(0) {
            continue;
        }
        let t = sqrt_mod(&a, &g).unwrap();
        let res = sqrt_residual(&a.rem(&g), &t, &g);
        assert!(res <= 1e-8, "g = {g:?}, a = {a:?}: {res}");
        done += 1;
    }
}

#[test]
fn certificate_identity_and_eta_scaling() {
    let mut r = rng(11);
    for _ in 0..20 {
        let inst = cert_instance(&mut r, 8);
        let tol = 1e-6 * (1.0 + sampled_norm_sq(&inst.p));
        let mut totals = Vec::new();
        for eta in [1.0, 10.0, 100.0] {
            let cert = certificate_build(&inst.u, &inst.squares, eta).unwrap();
            let check = certificate_verify(&cert, &inst.u, &inst.p).unwrap();
            assert!(check.identity_residual <= tol, "{:?} eta {eta}: {check:?}", inst.u);
            totals.push(check.bound_total());
        }
        for w in totals.windows(2) {
            assert!(w[1] <= w[0] / 10.0, "{totals:?}");
        }
    }
}

#[test]
fn residual_shrinks_with_sqrt_precision() {
    let mut r = rng(3);
    let mut tested = 0;
    while tested < 5 {
        let inst = cert_instance(&mut r, 6);
        // The residual only depends on sqrt_mod when g is nontrivial.
        if split_gcd(&inst.u).unwrap().g.degree() + split_gcd(&inst.u).unwrap().h.degree() == 0 {
            continue;
        }
        let residual = |opts: SqrtOptions| {
            let cert = certificate_build_with(&inst.u, &inst.squares, 10.0, &opts).unwrap();
            certificate_verify(&cert, &inst.u, &inst.p).unwrap().identity_residual
        };
        let coarse = residual(SqrtOptions { digits: Some(2), newton_steps: 0 });
        let fine = residual(SqrtOptions { digits: Some(2), newton_steps: 4 });
        assert!(fine < coarse || coarse == 0.0, "{coarse} -> {fine}");
        assert!(fine <= 1e-12 * (1.0 + sampled_norm_sq(&inst.p)), "{fine}");
        tested += 1;
    }
}

/// Form of degree `2h` with `u(t(x))·(1+x²)^h = N(x)` under `x = tan(t/2)`.
fn trig_to_form(u: &TrigPoly) -> BinaryForm {
    BinaryForm::from_f64(2 * u.degree(), &u.to_rational()).unwrap()
}

#[test]
fn converged_runs_satisfy_the_bound() {
    let mut r = rng(8);
    for n in [4usize, 8] {
        for _ in 0..3 {
            let h = n / 2;
            let a = common::random_trig(&mut r, h);
            let b = common::random_trig(&mut r, h);
            // p = a² + b² in trig form; its squares map to forms exactly.
            let sq = |q: &TrigPoly| {
                let grid = trigsos::grid::Grid::for_degree(n);
                let v = grid.to_grid(q).unwrap();
                let v2 = trigsos::grid::GridVector::new(v.values.iter().map(|x| x * x).collect());
                grid.from_grid(&v2, n).unwrap()
            };
            let pa = sq(&a);
            let pb = sq(&b);
            let p = TrigPoly::from_packed(n, &pa.packed().iter().zip(pb.packed()).map(|(x, y)| x + y).collect::<Vec<_>>())
                .unwrap();
            // Drive f far below the default floor so the first- and
            // second-order conditions hold to near machine precision.
            let cfg = SolverConfig::default()
                .with_rank(2)
                .with_seed(r.random())
                .with_tol_objective(1e-30)
                .with_tol_rel_step(1e-15);
            let (u, _) = lbfgs_minimize(&p, &cfg).unwrap();
            let uf = FormPair::new(trig_to_form(&u.column_poly(0)), trig_to_form(&u.column_poly(1))).unwrap();
            let squares = vec![trig_to_form(&a), trig_to_form(&b)];
            let pf = form_from_squares(&squares).unwrap();
            let cert = certificate_build(&uf, &squares, 10.0).unwrap();
            let check = certificate_verify(&cert, &uf, &pf).unwrap();
            let scale = 1.0 + sampled_norm_sq(&pf);
            // Hypotheses: first- and second-order conditions hold numerically.
            assert!(check.grad_term.abs() <= 1e-8 * scale, "{check:?}");
            assert!(check.hessian_terms.iter().all(|&t| t >= -1e-8 * scale), "{check:?}");
            let bound: f64 = check.bound_terms.iter().sum();
            assert!(check.error_norm_sq <= bound.max(0.0) + 1e-8 * scale, "{check:?}");
        }
    }
}
