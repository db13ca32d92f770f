use super::*;
use crate::torus_spectral::{cutoff_for, empirical_fourier, project};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_measure(d: usize, k: usize) -> SpectralEmpiricalMeasure {
    let total = (2 * k + 1).pow(d as u32);
    let mut c = vec![Complex64::new(0.0, 0.0); total];
    c[total / 2] = Complex64::new(1.0, 0.0);
    SpectralEmpiricalMeasure::from_coefficients(d, k, c).unwrap()
}

fn dirac(k: usize) -> SpectralEmpiricalMeasure {
    empirical_fourier(&[TorusPoint::origin(1)], None, k).unwrap()
}

fn random_cloud(d: usize, n: usize, r: &mut ChaCha8Rng) -> Vec<TorusPoint> {
    (0..n)
        .map(|_| project(&(0..d).map(|_| r.random::<f64>()).collect::<Vec<_>>()))
        .collect()
}

/// Brownian path on the circle observed at `n` steps of size `tau`.
fn brownian_circle(n: usize, tau: f64, r: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            let z: f64 = r.sample(StandardNormal);
            x += tau.sqrt() * z;
            project(&[x]).coords()[0]
        })
        .collect()
}

#[test]
fn l2_examples() {
    assert_eq!(grad_poisson_l2(&uniform_measure(2, 4), 0.1).unwrap(), 0.0);
    let k = cutoff_for(0.1).unwrap();
    let v = grad_poisson_l2(&dirac(k), 0.1).unwrap();
    assert!((v - 0.031_266_017_996_550_79).abs() < 1e-15, "{v}");
    let w = grad_poisson_l2(&dirac(k), 0.2).unwrap();
    assert!((w - 0.004_343_194_088_102_593).abs() < 1e-15, "{w}");
    assert!(w < v);
    assert!(grad_poisson_l2(&dirac(k), 0.0).is_err());
}

#[test]
fn streaming_energy_matches_box() {
    let mut r = rng(3);
    for d in 1..=3 {
        let pts = random_cloud(d, 40, &mut r);
        let eps = 0.02;
        let k = cutoff_for(eps).unwrap();
        let m = empirical_fourier(&pts, None, k).unwrap();
        let boxed = grad_poisson_l2(&m, eps).unwrap();
        let ball = grad_poisson_l2_samples(&pts, &vec![1.0 / 40.0; 40], eps).unwrap();
        assert!((boxed - ball).abs() < 1e-5 * boxed, "d={d}: {boxed} vs {ball}");
    }
}

#[test]
fn lp_agrees_with_l2_at_p2() {
    let mut r = rng(4);
    for _ in 0..5 {
        let pts = random_cloud(1, 16, &mut r);
        let eps = 0.01;
        let m = empirical_fourier(&pts, None, cutoff_for(eps).unwrap()).unwrap();
        let a = grad_poisson_l2(&m, eps).unwrap();
        let b = grad_poisson_lp(&m, eps, 2, 4 * m.cutoff()).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn lp_examples() {
    assert_eq!(grad_poisson_lp(&uniform_measure(1, 5), 0.1, 4, 32).unwrap(), 0.0);
    let m = dirac(cutoff_for(0.1).unwrap());
    let a = grad_poisson_lp(&m, 0.1, 4, 16).unwrap();
    let b = grad_poisson_lp(&m, 0.1, 4, 64).unwrap();
    assert!((a - b).abs() < 1e-8);
    assert!(grad_poisson_lp(&m, 0.1, 3, 64).is_err());
    assert!(matches!(grad_poisson_lp(&m, 0.1, 4, 4), Err(Error::Precision { .. })));
}

#[test]
fn lp_in_two_dimensions_matches_l2() {
    let mut r = rng(5);
    let pts = random_cloud(2, 12, &mut r);
    let eps = 0.02;
    let m = empirical_fourier(&pts, None, cutoff_for(eps).unwrap()).unwrap();
    let a = grad_poisson_l2(&m, eps).unwrap();
    let b = grad_poisson_lp(&m, eps, 2, 4 * m.cutoff()).unwrap();
    assert!((a - b).abs() < 1e-10);
    assert!(grad_poisson_lp(&m, eps, 4, 4 * m.cutoff()).unwrap() >= b);
}

#[test]
fn upper_examples() {
    let u = fourier_upper(&uniform_measure(1, 3), 1e-6, 1.0).unwrap();
    assert!((u.value - 1e-3).abs() < 1e-15);
    assert_eq!(u.method, Method::FourierUpper);
    assert_eq!(u.params.eps, Some(1e-6));
    let m = dirac(cutoff_for(0.05).unwrap());
    let four = fourier_upper(&m, 0.05, 4.0).unwrap();
    assert!(four.value > 0.05f64.sqrt());
    assert!(fourier_upper(&m, 0.05, 3.0).is_err());
}

#[test]
fn lower_closed_form() {
    let (kappa, value) = lower_from_moments(1.0, 1.0, 1.0, 1e-9);
    assert!((kappa - 3f64.sqrt()).abs() < 1e-15);
    // Dense scan of a/κ − b/κ³ as the oracle.
    let scan = (1..200_000)
        .map(|i| {
            let k = i as f64 * 1e-4;
            1.0 / k - 1.0 / k.powi(3)
        })
        .fold(f64::MIN, f64::max);
    assert!((value - scan).abs() < 1e-8);
    assert!((value - 0.384_900_179_459_750_5).abs() < 1e-15);
    assert_eq!(fourier_lower(&uniform_measure(1, 3), 0.1, 1.0).unwrap().value, 0.0);
}

#[test]
fn fourier_functionals_bracket_exact_circle() {
    let mut r = rng(6);
    let n = 64;
    let w = vec![1.0 / n as f64; n];
    let mut lower_positive_and_bounded = 0;
    for _ in 0..100 {
        let atoms = brownian_circle(n, 1.0 / 16.0, &mut r);
        let exact = circle_wp_exact(&atoms, &w, 1.0).unwrap().value;
        let eps = 1.0 / n as f64;
        let pts: Vec<TorusPoint> = atoms.iter().map(|&x| TorusPoint::new(vec![x]).unwrap()).collect();
        let m = empirical_fourier(&pts, None, cutoff_for(eps).unwrap()).unwrap();
        let upper = fourier_upper(&m, eps, 1.0).unwrap().value;
        assert!(upper >= 0.5 * exact, "{upper} vs {exact}");
        let lower = fourier_lower(&m, eps, 1.0).unwrap().value;
        assert!(lower <= upper);
        if lower > 0.0 && lower <= 10.0 * exact {
            lower_positive_and_bounded += 1;
        }
    }
    assert!(lower_positive_and_bounded >= 95, "{lower_positive_and_bounded}");
}

#[test]
fn circle_examples() {
    let one = circle_wp_exact(&[0.0], &[1.0], 1.0).unwrap();
    assert!((one.value - 0.25).abs() < 1e-14);
    assert_eq!(one.method, Method::ExactCircle);
    let two = circle_wp_exact(&[-0.25, 0.25], &[0.5, 0.5], 1.0).unwrap();
    assert!((two.value - 0.125).abs() < 1e-14);
    for n in [2usize, 4, 8] {
        let atoms: Vec<f64> = (0..n).map(|i| -0.5 + i as f64 / n as f64).collect();
        let v = circle_wp_exact(&atoms, &vec![1.0 / n as f64; n], 1.0).unwrap().value;
        assert!((v - 1.0 / (4.0 * n as f64)).abs() < 1e-14, "n={n}: {v}");
    }
    // Single atom, p = 2: mean squared wrapped distance is 1/12.
    let v = circle_wp_exact(&[0.1], &[1.0], 2.0).unwrap().value;
    assert!((v - (1.0f64 / 12.0).sqrt()).abs() < 1e-10);
    assert!(circle_wp_exact(&[0.0, 0.1], &[0.5, 0.6], 1.0).is_err());
    assert!(circle_wp_exact(&[0.6], &[1.0], 1.0).is_err());
}

#[test]
fn circle_matches_grid_assignment() {
    let mut r = rng(7);
    for p in [1.0, 2.0] {
        for _ in 0..5 {
            let atoms: Vec<f64> = (0..8).map(|_| r.random::<f64>() - 0.5).collect();
            let exact = circle_wp_exact(&atoms, &[0.125; 8], p).unwrap().value;
            let pts: Vec<TorusPoint> = atoms.iter().map(|&x| TorusPoint::new(vec![x]).unwrap()).collect();
            let grid = grid_wp(&pts, p, 4096).unwrap().value;
            assert!((exact - grid).abs() < 5e-4, "p={p}: {exact} vs {grid}");
        }
    }
}

#[test]
fn circle_weighted_matches_grid() {
    let atoms = [-0.4, 0.05, 0.3];
    let weights = [0.25, 0.5, 0.25];
    let exact = circle_wp_exact(&atoms, &weights, 1.0).unwrap().value;
    let pts: Vec<TorusPoint> = [-0.4, 0.05, 0.05, 0.3]
        .iter()
        .map(|&x| TorusPoint::new(vec![x]).unwrap())
        .collect();
    let grid = grid_wp(&pts, 1.0, 4096).unwrap().value;
    assert!((exact - grid).abs() < 5e-4);
}

#[test]
fn discrete_examples() {
    let mut r = rng(8);
    let x = random_cloud(3, 20, &mut r);
    assert_eq!(discrete_wp(&x, &x, 1.0, Ground::Torus).unwrap().value, 0.0);
    let a = [TorusPoint::origin(1)];
    let b = [TorusPoint::new(vec![0.3]).unwrap()];
    assert!((discrete_wp(&a, &b, 1.0, Ground::Torus).unwrap().value - 0.3).abs() < 1e-15);
    assert!(discrete_wp(&x, &x[..3], 1.0, Ground::Torus).is_err());
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn discrete_matches_exhaustive_search() {
    let perms = permutations(8);
    assert_eq!(perms.len(), 40_320);
    let mut r = rng(9);
    for _ in 0..3 {
        let x = random_cloud(2, 8, &mut r);
        let y = random_cloud(2, 8, &mut r);
        let best = perms
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(i, &j)| crate::torus_spectral::distance(&x[i], &y[j]))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let v = discrete_wp(&x, &y, 1.0, Ground::Torus).unwrap().value;
        assert!((v - best / 8.0).abs() < 1e-12);
    }
}

#[test]
fn discrete_properties() {
    let mut r = rng(10);
    for _ in 0..10 {
        let a = random_cloud(2, 30, &mut r);
        let b = random_cloud(2, 30, &mut r);
        let c = random_cloud(2, 30, &mut r);
        let w1 = |x: &[TorusPoint], y: &[TorusPoint]| discrete_wp(x, y, 1.0, Ground::Torus).unwrap().value;
        assert!(w1(&a, &b) <= discrete_wp(&a, &b, 2.0, Ground::Torus).unwrap().value + 1e-12);
        assert!(w1(&a, &c) <= w1(&a, &b) + w1(&b, &c) + 1e-12);

        let lift = |pts: &[TorusPoint], r: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            pts.iter()
                .map(|p| p.coords().iter().map(|&x| x + r.random_range(-2..=2) as f64).collect())
                .collect()
        };
        let (la, lb) = (lift(&a, &mut r), lift(&b, &mut r));
        let torus = discrete_wp(&la, &lb, 1.0, Ground::Torus).unwrap().value;
        let eucl = discrete_wp(&la, &lb, 1.0, Ground::Euclidean).unwrap().value;
        assert!((torus - w1(&a, &b)).abs() < 1e-12);
        assert!(torus <= eucl + 1e-12);
    }
}

#[test]
fn grid_wp_rejects_large_lcm() {
    let pts: Vec<TorusPoint> = (0..7).map(|i| project(&[i as f64 / 7.0, 0.0])).collect();
    assert!(grid_wp(&pts, 1.0, 300).is_err());
    assert_eq!(default_grid_per_axis(16, 2), 16);
    assert_eq!(default_grid_per_axis(5, 2), 9);
    assert_eq!(uniform_grid(2, 4).len(), 16);
}

#[test]
fn sinkhorn_examples() {
    let mut r = rng(11);
    let x = random_cloud(2, 64, &mut r);
    let y = random_cloud(2, 64, &mut r);
    let same = sinkhorn_wp(&x, &x, 1.0, 1e-3, 20_000).unwrap();
    assert!(same.value < 0.01, "{}", same.value);
    assert_eq!(same.params.reg, Some(1e-3));
    let approx = sinkhorn_wp(&x, &y, 1.0, 1e-3, 20_000).unwrap().value;
    let exact = discrete_wp(&x, &y, 1.0, Ground::Torus).unwrap().value;
    assert!(approx >= exact - 1e-9);
    assert!((approx - exact) / exact < 0.05, "{approx} vs {exact}");
    assert!(sinkhorn_marginal_error(&x, &y, 1.0, 1e-3, 20_000).unwrap() <= MARGINAL_TOL);
    assert!(matches!(sinkhorn_wp(&x, &y, 1.0, 1e-3, 1), Err(Error::Convergence(_))));
    assert!(sinkhorn_wp(&x, &y, 1.0, 0.0, 10).is_err());
}

#[test]
fn estimate_serializes_without_unused_params() {
    let e = circle_wp_exact(&[0.0], &[1.0], 1.0).unwrap();
    let s = serde_json::to_string(&e).unwrap();
    assert_eq!(s, r#"{"value":0.25,"p":1.0,"method":"exact_circle","params":{}}"#);
}
