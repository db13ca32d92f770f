//! Subordinator paths and Laplace-transform functionals.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::bernstein::{BernsteinFunction, BernsteinKind};
use crate::error::{argument, domain, Result};
use crate::stats::Estimate;

/// Subordinator values `S_t` sampled at the physical times `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub bernstein: BernsteinFunction,
}

impl SubordinatorPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[inline]
fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One draw of `S_1` for `B(λ) = λ^α` (Kanter / Chambers–Mallows–Stuck).
#[inline]
pub(crate) fn positive_stable_unit<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = PI * open01(rng);
    let w: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Increment of the `λ^α` subordinator over a time step `dt`.
pub fn sample_stable_increment<R: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("stable index must lie in (0, 1), got {alpha}"));
    }
    if !(dt > 0.0) {
        return domain(format!("time step must be positive, got {dt}"));
    }
    Ok(dt.powf(1.0 / alpha) * positive_stable_unit(alpha, rng))
}

/// Tempered increment over `dt ≤ 1`: a stable draw `X` accepted with probability `e^{−X}`.
fn tempered_unit_step<R: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut R) -> f64 {
    let scale = dt.powf(1.0 / alpha);
    loop {
        let x = scale * positive_stable_unit(alpha, rng);
        if open01(rng) < (-x).exp() {
            return x;
        }
    }
}

/// Increment `S_{s+dt} − S_s` for any supported Bernstein function.
pub(crate) fn increment<R: Rng + ?Sized>(b: &BernsteinFunction, dt: f64, rng: &mut R) -> f64 {
    if dt <= 0.0 {
        return 0.0;
    }
    let jumps = match b.kind() {
        BernsteinKind::Identity => dt,
        BernsteinKind::Stable | BernsteinKind::DriftPlusStable => {
            dt.powf(1.0 / b.alpha()) * positive_stable_unit(b.alpha(), rng)
        }
        BernsteinKind::TemperedStable => {
            // Acceptance rate is e^{-dt}; keep every piece at most one time unit.
            let pieces = dt.ceil().max(1.0) as usize;
            let h = dt / pieces as f64;
            (0..pieces).map(|_| tempered_unit_step(b.alpha(), h, rng)).sum()
        }
    };
    b.drift() * dt + jumps
}

/// Sample `S` at the sorted nonnegative times `times` (with `S_0 = 0`).
pub fn sample_path<R: Rng + ?Sized>(b: &BernsteinFunction, times: &[f64], rng: &mut R) -> Result<SubordinatorPath> {
    if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return argument("subordinator times must be finite and nonnegative");
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return argument("subordinator times must be sorted");
    }
    let mut values = Vec::with_capacity(times.len());
    let mut prev_t = 0.0;
    let mut level = 0.0;
    for &t in times {
        level += increment(b, t - prev_t, rng);
        values.push(level);
        prev_t = t;
    }
    Ok(SubordinatorPath {
        times: times.to_vec(),
        values,
        bernstein: *b,
    })
}

fn column(paths: &[SubordinatorPath], t_index: usize) -> Result<Vec<f64>> {
    if paths.is_empty() {
        return argument("no subordinator paths supplied");
    }
    let grid = &paths[0].times;
    if t_index >= grid.len() {
        return argument(format!("time index {t_index} out of range for {} times", grid.len()));
    }
    if paths.iter().any(|p| p.times != *grid) {
        return argument("subordinator paths must share one time grid");
    }
    Ok(paths.iter().map(|p| p.values[t_index]).collect())
}

/// Monte Carlo estimate of `E[e^{−λ S_t}]` at `t = times[t_index]`.
pub fn empirical_laplace(paths: &[SubordinatorPath], t_index: usize, lambda: f64) -> Result<Estimate> {
    if !(lambda >= 0.0) {
        return domain(format!("Laplace argument must be nonnegative, got {lambda}"));
    }
    let s = column(paths, t_index)?;
    let v: Vec<f64> = s.iter().map(|&x| (-lambda * x).exp()).collect();
    Estimate::from_samples(&v)
}

/// Monte Carlo estimate of `E[e^{−λ (S_t)^δ}]`.
pub fn moment_functional(paths: &[SubordinatorPath], t_index: usize, lambda: f64, delta: f64) -> Result<Estimate> {
    if !(delta > 0.0) {
        return domain(format!("moment power δ must be positive, got {delta}"));
    }
    if !(lambda > 0.0) {
        return domain(format!("moment functional needs λ > 0, got {lambda}"));
    }
    let s = column(paths, t_index)?;
    let v: Vec<f64> = s.iter().map(|&x| (-lambda * x.powf(delta)).exp()).collect();
    Estimate::from_samples(&v)
}

/// Powers `(a, b)` of `λ` and `t` in the stretched-exponential moment bound.
pub fn sdu_exponents(alpha: f64, delta: f64) -> (f64, f64) {
    let denom = if delta <= 1.0 {
        (1.0 - delta) * alpha + delta
    } else {
        (1.0 - delta) * alpha + delta * delta
    };
    (alpha / denom, delta / denom)
}

/// Upper bound `e · exp(−c₁ λ^a t^b)` on `E[e^{−λ (S_t)^δ}]`.
pub fn sdu_bound(alpha: f64, delta: f64, lambda: f64, t: f64, c1: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("α must lie in (0, 1), got {alpha}"));
    }
    if !(delta > 0.0 && lambda > 0.0 && t > 0.0 && c1 > 0.0) {
        return domain("δ, λ, t and c₁ must all be positive");
    }
    let (a, b) = sdu_exponents(alpha, delta);
    Ok(std::f64::consts::E * (-c1 * lambda.powf(a) * t.powf(b)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_two_sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn laplace_of_increments(alpha: f64, dt: f64, n: usize, seed: u64) -> Estimate {
        let mut r = rng(seed);
        let v: Vec<f64> = (0..n)
            .map(|_| (-sample_stable_increment(alpha, dt, &mut r).unwrap()).exp())
            .collect();
        Estimate::from_samples(&v).unwrap()
    }

    #[test]
    fn stable_increment_laplace() {
        let e = laplace_of_increments(0.5, 1.0, 100_000, 1);
        assert!(e.within((-1.0f64).exp(), 3.0), "{e:?}");
        let e = laplace_of_increments(0.5, 4.0, 100_000, 2);
        assert!(e.within((-4.0f64).exp(), 3.0), "{e:?}");
    }

    #[test]
    fn stable_increment_scaling_law() {
        let alpha = 0.5;
        let mut r = rng(3);
        let a: Vec<f64> = (0..20_000)
            .map(|_| sample_stable_increment(alpha, 2.0, &mut r).unwrap())
            .collect();
        let b: Vec<f64> = (0..20_000)
            .map(|_| 2f64.powf(1.0 / alpha) * sample_stable_increment(alpha, 1.0, &mut r).unwrap())
            .collect();
        let (_, p) = ks_two_sample(&a, &b).unwrap();
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn stable_increment_rejects_bad_index() {
        assert!(sample_stable_increment(1.0, 1.0, &mut rng(0)).is_err());
        assert!(sample_stable_increment(0.5, 0.0, &mut rng(0)).is_err());
    }

    #[test]
    fn identity_path_is_the_clock() {
        let p = sample_path(&BernsteinFunction::identity(), &[0.0, 1.0, 2.0], &mut rng(0)).unwrap();
        assert_eq!(p.values, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn unsorted_times_are_rejected() {
        let b = BernsteinFunction::stable(0.5).unwrap();
        assert!(matches!(
            sample_path(&b, &[0.0, 2.0, 1.0], &mut rng(0)),
            Err(crate::Error::Argument(_))
        ));
    }

    fn paths(b: &BernsteinFunction, times: &[f64], n: usize, seed: u64) -> Vec<SubordinatorPath> {
        let mut r = rng(seed);
        (0..n).map(|_| sample_path(b, times, &mut r).unwrap()).collect()
    }

    #[test]
    fn paths_are_nondecreasing() {
        for b in [
            BernsteinFunction::stable(0.7).unwrap(),
            BernsteinFunction::tempered_stable(0.4).unwrap(),
            BernsteinFunction::drift_plus_stable(0.2, 0.5).unwrap(),
        ] {
            let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
            for p in paths(&b, &times, 50, 9) {
                assert_eq!(p.values[0], 0.0);
                assert!(p.values.windows(2).all(|w| w[1] >= w[0]));
            }
        }
    }

    #[test]
    fn stable_path_laplace() {
        let b = BernsteinFunction::stable(0.5).unwrap();
        let ps = paths(&b, &[1.0], 100_000, 11);
        let e = empirical_laplace(&ps, 0, 2.0).unwrap();
        assert!(e.within((-(2f64).sqrt()).exp(), 3.0), "{e:?}");
        let e = empirical_laplace(&ps, 0, 1.0).unwrap();
        assert!(e.within((-1.0f64).exp(), 3.0), "{e:?}");
    }

    #[test]
    fn tempered_path_laplace() {
        let b = BernsteinFunction::tempered_stable(0.5).unwrap();
        let ps = paths(&b, &[1.0, 2.5], 100_000, 12);
        let e = empirical_laplace(&ps, 0, 3.0).unwrap();
        assert!(e.within((-1.0f64).exp(), 3.0), "{e:?}");
        // dt > 1 goes through the split sampler.
        let e = empirical_laplace(&ps, 1, 3.0).unwrap();
        assert!(e.within((-2.5f64).exp(), 3.0), "{e:?}");
    }

    #[test]
    fn drift_shifts_the_exponent() {
        let b = BernsteinFunction::drift_plus_stable(0.5, 0.5).unwrap();
        let ps = paths(&b, &[1.0], 100_000, 13);
        let e = empirical_laplace(&ps, 0, 4.0).unwrap();
        assert!(e.within((-(0.5 * 4.0 + 2.0f64)).exp(), 3.0), "{e:?}");
    }

    #[test]
    fn laplace_edge_cases() {
        let b = BernsteinFunction::stable(0.5).unwrap();
        let ps = paths(&b, &[1.0], 100, 5);
        let e = empirical_laplace(&ps, 0, 0.0).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.std_error, 0.0);
        assert!(empirical_laplace(&[], 0, 1.0).is_err());

        let id = paths(&BernsteinFunction::identity(), &[1.0, 2.0], 10, 0);
        let e = empirical_laplace(&id, 1, 1.0).unwrap();
        assert!((e.estimate - (-2.0f64).exp()).abs() < 1e-15);
        assert!(e.std_error < 1e-15);
    }

    #[test]
    fn moment_functional_cases() {
        let b = BernsteinFunction::stable(0.5).unwrap();
        let ps = paths(&b, &[1.0], 5_000, 6);
        let a = moment_functional(&ps, 0, 1.3, 1.0).unwrap();
        let l = empirical_laplace(&ps, 0, 1.3).unwrap();
        assert_eq!(a, l);

        let id = paths(&BernsteinFunction::identity(), &[2.0], 3, 0);
        let m = moment_functional(&id, 0, 1.0, 2.0).unwrap();
        assert_eq!(m.estimate, (-4.0f64).exp());
        assert!(moment_functional(&ps, 0, 1.0, 0.0).is_err());
    }

    /// `E[e^{−√S_1}]` for the ½-stable law, from its closed-form density
    /// `(2√π)^{-1} x^{-3/2} e^{-1/(4x)}` integrated on a log grid.
    fn half_stable_moment(lambda: f64, delta: f64) -> f64 {
        let (lo, hi, n) = (-40.0f64, 60.0f64, 400_000);
        let h = (hi - lo) / n as f64;
        let c = 0.5 / PI.sqrt();
        let mut acc = 0.0;
        for i in 0..=n {
            let u = lo + i as f64 * h;
            let x = u.exp();
            let dens = c * x.powf(-1.5) * (-0.25 / x).exp();
            let f = (-lambda * x.powf(delta)).exp() * dens * x;
            acc += if i == 0 || i == n { 0.5 * f } else { f };
        }
        acc * h
    }

    #[test]
    fn quadrature_oracle_reproduces_laplace_transform() {
        assert!((half_stable_moment(1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-9);
        assert!((half_stable_moment(4.0, 1.0) - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn moment_functional_matches_density_quadrature() {
        let b = BernsteinFunction::stable(0.5).unwrap();
        let ps = paths(&b, &[1.0], 100_000, 21);
        let m = moment_functional(&ps, 0, 1.0, 0.5).unwrap();
        let oracle = half_stable_moment(1.0, 0.5);
        assert!(m.estimate > 0.0 && m.estimate < 1.0);
        assert!(m.within(oracle, 3.0), "{m:?} vs {oracle}");
    }

    #[test]
    fn sdu_bound_examples() {
        let e = std::f64::consts::E;
        let v = sdu_bound(0.5, 1.0, 1.0, 4.0, 1.0).unwrap();
        assert!((v - e * (-4.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.049787068367863944).abs() < 1e-12);
        let v = sdu_bound(0.5, 0.5, 1.0, 1.0, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = sdu_bound(0.5, 2.0, 16.0, 1.0, 1.0).unwrap();
        let oracle = e * (-(16f64.powf(1.0 / 7.0))).exp();
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.6153).abs() < 1e-3);
        let (a, b) = sdu_exponents(0.5, 2.0);
        assert!((a - 0.5 / 3.5).abs() < 1e-15 && (b - 2.0 / 3.5).abs() < 1e-15);
    }
}
