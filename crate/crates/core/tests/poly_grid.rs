mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use common::{form, random_trig, rng};
use trigsos::grid::{smooth_odd_size, Grid, GridVector};
use trigsos::instance::{gen_instance, InstanceSpec};
use trigsos::poly::{BinaryForm, TrigPoly};

fn int_form(max_degree: usize) -> impl Strategy<Value = BinaryForm> {
    (0..=max_degree).prop_flat_map(|d| prop::collection::vec(-6i64..=6, d + 1).prop_map(move |c| form(d, &c)))
}

fn trig(max_degree: usize) -> impl Strategy<Value = TrigPoly> {
    (0..=max_degree).prop_flat_map(|n| {
        (-3.0..3.0f64, prop::collection::vec(-3.0..3.0f64, n), prop::collection::vec(-3.0..3.0f64, n))
            .prop_map(|(a0, c, s)| TrigPoly::new(a0, c, s).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mul_commutes_and_associates(a in int_form(12), b in int_form(12), c in int_form(12)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn divexact_inverts_mul(a in int_form(8), b in int_form(8)) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!(a.mul(&b).divexact(&b).unwrap(), a);
    }

    #[test]
    fn gcd_scales_with_common_factor(a in int_form(5), b in int_form(5), w in int_form(4)) {
        prop_assume!(!a.is_zero() && !b.is_zero() && !w.is_zero());
        prop_assume!(a.is_coprime(&b).unwrap());
        let g = a.mul(&w).gcd(&b.mul(&w)).unwrap();
        prop_assert_eq!(g, w.normalize());
    }

    #[test]
    fn gcd_divides_both(a in int_form(6), b in int_form(6)) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        let g = a.gcd(&b).unwrap();
        prop_assert!(a.divexact(&g).is_ok());
        prop_assert!(b.divexact(&g).is_ok());
    }

    #[test]
    fn dehomogenize_round_trip(a in int_form(10)) {
        let dh = a.dehomogenize();
        prop_assert_eq!(BinaryForm::homogenize(&dh.poly, a.degree()), a.clone());
        let m = dh.poly.degree().unwrap_or(0);
        if !a.is_zero() {
            prop_assert_eq!(dh.x2_power + m, a.degree());
        }
    }

    #[test]
    fn form_json_round_trip(a in int_form(6)) {
        let text = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<BinaryForm>(&text).unwrap(), a);
    }

    #[test]
    fn trig_json_round_trip(p in trig(10)) {
        let text = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<TrigPoly>(&text).unwrap(), p);
    }

    #[test]
    fn grid_round_trip(p in trig(40)) {
        let grid = Grid::for_degree(p.degree());
        let back = grid.from_grid(&grid.to_grid(&p).unwrap(), p.degree()).unwrap();
        let scale = p.max_abs_coeff().max(1.0);
        for (x, y) in back.packed().iter().zip(p.packed()) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn quadrature_is_exact(p in trig(20), q in trig(20), extra in 0usize..4) {
        // Continuous inner product from the mode integrals.
        let n = p.degree().max(q.degree());
        let (pp, qq) = (p.padded(n).unwrap(), q.padded(n).unwrap());
        let exact = pp.a0() * qq.a0()
            + 0.5 * pp.cos_coeffs().iter().zip(qq.cos_coeffs()).map(|(a, b)| a * b).sum::<f64>()
            + 0.5 * pp.sin_coeffs().iter().zip(qq.sin_coeffs()).map(|(a, b)| a * b).sum::<f64>();
        let m = (p.degree() + q.degree() + 1 + 2 * extra).max(2 * n + 1).max(3);
        let grid = Grid::new(m | 1).unwrap();
        let got = grid.inner(&grid.to_grid(&p).unwrap(), &grid.to_grid(&q).unwrap()).unwrap();
        let scale = (p.norm_sq() * q.norm_sq()).sqrt().max(1e-300);
        prop_assert!((got - exact).abs() <= 1e-12 * scale.max(1.0), "{got} vs {exact}");
    }

    #[test]
    fn zero_norm_means_zero_polynomial(values in prop::collection::vec(-1.0..1.0f64, 9)) {
        let grid = Grid::new(9).unwrap();
        let v = GridVector::new(values);
        let p = grid.from_grid(&v, 4).unwrap();
        let norm = grid.inner(&v, &v).unwrap();
        // On m = 2n+1 points the sample vector determines p exactly.
        prop_assert!((norm - p.norm_sq()).abs() <= 1e-12 * norm.max(1.0));
    }
}

#[test]
fn to_grid_matches_naive_evaluation() {
    let mut r = rng(1);
    for n in [2usize, 8, 64, 300] {
        let p = random_trig(&mut r, n);
        for grid in [Grid::for_degree(n), Grid::fast_for_degree(n), Grid::new(4 * n + 7).unwrap()] {
            let v = grid.to_grid(&p).unwrap();
            let norm = p.norm_sq().sqrt();
            for k in 0..grid.m() {
                let t = 2.0 * PI * k as f64 / grid.m() as f64;
                assert!((v.values[k] - p.eval(t)).abs() < 1e-12 * norm * (n as f64).sqrt(), "n = {n}, k = {k}");
            }
        }
    }
}

#[test]
fn rational_form_matches_evaluation() {
    let mut r = rng(2);
    for i in 0..100 {
        let n = 2 * (1 + i % 8);
        let p = random_trig(&mut r, n);
        let num = p.to_rational();
        let t: f64 = rand::Rng::random_range(&mut r, -3.0..3.0);
        let x = (t / 2.0).tan();
        let lhs: f64 = num.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let rhs = p.eval(t) * (1.0 + x * x).powi(n as i32);
        let scale: f64 = num.iter().enumerate().map(|(k, c)| c.abs() * x.abs().powi(k as i32)).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * scale, "t = {t}: {lhs} vs {rhs}");
    }
}

#[test]
fn transforms_are_thread_safe() {
    let p = random_trig(&mut rng(4), 50);
    let grid = Grid::fast_for_degree(50);
    let expect = grid.to_grid(&p).unwrap();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..4).map(|_| s.spawn(|| grid.to_grid(&p).unwrap())).collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), expect);
        }
    });
}

#[test]
fn transform_cost_scales_near_linearly() {
    // Doubling m should cost ~2x. Batches of 100 calls alternate between the
    // two sizes so that load from concurrently running tests hits both alike;
    // the median of the paired ratios is compared.
    let setup = |m: usize| {
        let grid = Grid::new(m).unwrap();
        let p = random_trig(&mut rng(6), (m - 1) / 2);
        (grid, p)
    };
    let batch = |(grid, p): &(Grid, TrigPoly)| {
        let start = std::time::Instant::now();
        for _ in 0..100 {
            std::hint::black_box(grid.to_grid(p).unwrap());
        }
        start.elapsed().as_secs_f64()
    };
    let small = smooth_odd_size(1 << 14);
    let large = smooth_odd_size(2 * small);
    let (a, b) = (setup(small), setup(large));
    batch(&a);
    batch(&b);
    let mut ratios: Vec<f64> = (0..15).map(|_| batch(&b) / batch(&a)).collect();
    ratios.sort_by(f64::total_cmp);
    let ratio = ratios[7] * (2 * small) as f64 / large as f64;
    println!("m {small} -> {large}: ratio {ratio:.2}");
    assert!(ratio <= 2.2, "{ratio}");
}

#[test]
fn generated_instances_respect_offset() {
    for (n, seed) in [(2usize, 0u64), (2, 9), (16, 1), (64, 2), (256, 3)] {
        let spec = InstanceSpec { degree: n, seed, min_offset: Some(0.25) };
        let p = gen_instance(&spec).unwrap();
        // 10⁶ dense samples
        let grid = Grid::new(1_000_001).unwrap();
        let values = grid.to_grid(&p).unwrap().values;
        let (k, &min) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!(min >= 0.125, "n = {n}: {min}");
        // Newton polish of the best sample closes the sampling gap.
        let mut t = grid.node(k);
        for _ in 0..30 {
            let (_, d1, d2) = p.eval_d2(t);
            t -= d1 / d2;
        }
        let refined = p.eval(t).min(min);
        assert!((refined - 0.25).abs() <= 1e-6, "n = {n}: {refined}");
    }
}

#[test]
fn generated_instances_are_deterministic() {
    let spec = InstanceSpec::new(32, 77);
    let a = serde_json::to_vec(&gen_instance(&spec).unwrap()).unwrap();
    let b = serde_json::to_vec(&gen_instance(&spec).unwrap()).unwrap();
    assert_eq!(a, b);
}
