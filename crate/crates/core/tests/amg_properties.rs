mod common;

use common::{contraction, energy};
use pfmix::amg::{q1_laplacian, AmgHierarchy, AmgSettings, NearNullspace};
use pfmix::linsolve::krylov::{cg, Identity, KrylovSettings};
use pfmix::sparse::dot;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn poisson_contraction_is_mesh_independent() {
    let f: Vec<f64> = [64, 128, 256].iter().map(|&n| contraction(n, 10)).collect();
    println!("contraction factors {f:?}");
    for &v in &f {
        assert!(v < 0.7, "{f:?}");
    }
    for w in f.windows(2) {
        assert!(w[1] / w[0] < 1.3, "{f:?}");
    }
}

#[test]
fn laplacian_128_random_rhs_contraction() {
    let a = q1_laplacian(128);
    let h = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &AmgSettings::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let exact = cg(&a, &mut Identity, &b, &KrylovSettings { tol: 1e-13, max_iter: 5000, restart: None }).unwrap().x;
    let mut x = vec![0.0; a.nrows()];
    let err = |x: &[f64]| {
        let e: Vec<f64> = x.iter().zip(&exact).map(|(a, b)| a - b).collect();
        energy(&a, &e)
    };
    let e0 = err(&x);
    for _ in 0..10 {
        h.vcycle(&b, &mut x);
    }
    let factor = (err(&x) / e0).powf(0.1);
    assert!(factor < 0.7, "factor {factor}");
}

#[test]
fn cg_with_vcycle_is_bounded() {
    let mut plain = Vec::new();
    let mut amg = Vec::new();
    for n in [16, 32, 64] {
        let a = q1_laplacian(n);
        let b = vec![1.0; a.nrows()];
        let s = KrylovSettings { tol: 1e-8, max_iter: 2000, restart: None };
        plain.push(cg(&a, &mut Identity, &b, &s).unwrap().iterations);
        let mut h = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &AmgSettings::default()).unwrap();
        amg.push(cg(&a, &mut h, &b, &s).unwrap().iterations);
    }
    assert!(plain[2] as f64 > 3.0 * plain[0] as f64, "unpreconditioned {plain:?}");
    assert!(amg.iter().all(|&k| k <= 25), "amg {amg:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn vcycle_is_symmetric(seed in 0u64..1000) {
        let a = q1_laplacian(24);
        let h = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &AmgSettings { coarse_size: 20, ..Default::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = dot(&h.apply(&x), &y);
        let rhs = dot(&x, &h.apply(&y));
        prop_assert!((lhs - rhs).abs() < 1e-8 * lhs.abs().max(1.0));
    }

    #[test]
    fn vcycle_is_linear(seed in 0u64..1000, alpha in -3.0f64..3.0) {
        let a = q1_laplacian(20);
        let h = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &AmgSettings { coarse_size: 20, ..Default::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let comb: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + b).collect();
        let l = h.apply(&comb);
        let (hx, hy) = (h.apply(&x), h.apply(&y));
        for i in 0..l.len() {
            prop_assert!((l[i] - alpha * hx[i] - hy[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn setup_is_deterministic(n in 8usize..20) {
        let a = q1_laplacian(n);
        let s = AmgSettings { coarse_size: 8, ..Default::default() };
        let h1 = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &s).unwrap();
        let h2 = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &s).unwrap();
        let b = vec![1.0; a.nrows()];
        prop_assert_eq!(h1.apply(&b), h2.apply(&b));
    }
}
