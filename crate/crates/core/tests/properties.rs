use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfbm::fbm::covariance;
use sfbm::rng::stream;
use sfbm::subordinator::sample_path;
use sfbm::torus_spectral::{distance, empirical_fourier, project};
use sfbm::wasserstein::{circle_wp_exact, discrete_wp, Ground};
use sfbm::BernsteinFunction;

fn coords(d: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torus_distance_is_a_metric(pts in coords(3, 3)) {
        let [x, y, z] = [0, 1, 2].map(|i| project(&pts[i]));
        let dxy = distance(&x, &y);
        prop_assert!((dxy - distance(&y, &x)).abs() < 1e-15);
        prop_assert!(dxy <= 3f64.sqrt() / 2.0 + 1e-12);
        prop_assert!(dxy <= distance(&x, &z) + distance(&z, &y) + 1e-12);
    }

    #[test]
    fn circle_distance_is_rotation_invariant(atoms in prop::collection::vec(-0.5f64..0.5, 1..40), shift in -1.0f64..1.0) {
        let w = vec![1.0 / atoms.len() as f64; atoms.len()];
        let moved: Vec<f64> = atoms.iter().map(|&a| project(&[a + shift]).coords()[0]).collect();
        for p in [1.0, 2.0] {
            let a = circle_wp_exact(&atoms, &w, p).unwrap().value;
            let b = circle_wp_exact(&moved, &w, p).unwrap().value;
            prop_assert!((a - b).abs() < 1e-6, "p = {p}: {a} vs {b}");
            prop_assert!(a <= 0.5);
        }
    }

    #[test]
    fn circle_distance_grows_with_order(atoms in prop::collection::vec(-0.5f64..0.5, 1..40)) {
        let w = vec![1.0 / atoms.len() as f64; atoms.len()];
        let w1 = circle_wp_exact(&atoms, &w, 1.0).unwrap().value;
        let w2 = circle_wp_exact(&atoms, &w, 2.0).unwrap().value;
        prop_assert!(w1 <= w2 + 1e-9);
    }

    #[test]
    fn assignment_distance_is_symmetric(x in coords(2, 12), y in coords(2, 12)) {
        let a = discrete_wp(&x, &y, 2.0, Ground::Torus).unwrap().value;
        let b = discrete_wp(&y, &x, 2.0, Ground::Torus).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(discrete_wp(&x, &x, 2.0, Ground::Torus).unwrap().value < 1e-12);
    }

    #[test]
    fn fourier_coefficients_are_hermitian(pts in coords(2, 20), k in 1usize..5) {
        let samples: Vec<_> = pts.iter().map(|p| project(p)).collect();
        let m = empirical_fourier(&samples, None, k).unwrap();
        prop_assert!((m.mass().re - 1.0).abs() < 1e-15 && m.mass().im == 0.0);
        for a in -(k as i64)..=k as i64 {
            for b in -(k as i64)..=k as i64 {
                let c = m.coeff(&[a, b]).unwrap();
                let mirror = m.coeff(&[-a, -b]).unwrap();
                prop_assert!((c - mirror.conj()).norm() < 1e-12);
                prop_assert!(c.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn subordinator_paths_are_nondecreasing(alpha in 0.1f64..0.95, seed in any::<u64>()) {
        let times: Vec<f64> = (1..=30).map(|i| i as f64 * 0.1).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for b in [BernsteinFunction::stable(alpha).unwrap(), BernsteinFunction::tempered_stable(alpha).unwrap()] {
            let path = sample_path(&b, &times, &mut rng).unwrap();
            prop_assert!(path.values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(path.values[0] >= 0.0);
        }
    }

    #[test]
    fn fbm_covariance_is_symmetric_with_power_variance(h in 0.05f64..0.95, s in 0.0f64..10.0, t in 0.0f64..10.0) {
        let c = covariance(h, s, t).unwrap();
        prop_assert!((c - covariance(h, t, s).unwrap()).abs() < 1e-12);
        prop_assert!((covariance(h, t, t).unwrap() - t.powf(2.0 * h)).abs() <= 1e-12 * (1.0 + t.powf(2.0 * h)));
        prop_assert!(c.abs() <= (s * t).powf(h) + 1e-9);
    }

    #[test]
    fn streams_depend_only_on_key(root in any::<u64>(), i in any::<u64>(), j in any::<u64>()) {
        use rand::Rng;
        let a: u64 = stream(root, "prop", &[i, j]).random();
        let b: u64 = stream(root, "prop", &[i, j]).random();
        prop_assert_eq!(a, b);
    }
}
