//! Fourier coefficients of occupation measures along simulated sBM paths.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bernstein::BernsteinFunction;
use crate::subordinator::increment;

fn power(e: Complex64, k: i64) -> Complex64 {
    let base = if k < 0 { e.conj() } else { e };
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..k.unsigned_abs() {
        acc *= base;
    }
    acc
}

/// `μ̂_{τ,t}(ξ)` for every `ξ` in `freqs`, along one path of subordinated
/// Brownian motion sampled at `kτ`, `k = 1..=n`, `τ = t/n`.
///
/// Each step draws an exact subordinator increment `ΔS` and then the Gaussian
/// increment `√ΔS · Z`, so the only approximation is the time discretization.
pub fn spectral_path<R: Rng + ?Sized>(
    b: &BernsteinFunction,
    d: usize,
    freqs: &[Vec<i64>],
    t: f64,
    n: usize,
    rng: &mut R,
) -> Vec<Complex64> {
    let tau = t / n as f64;
    let mut x = vec![0.0; d];
    let mut e = vec![Complex64::new(1.0, 0.0); d];
    let mut acc = vec![Complex64::new(0.0, 0.0); freqs.len()];
    for _ in 0..n {
        let sd = increment(b, tau, rng).sqrt();
        for c in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            x[c] = (x[c] + sd * z).rem_euclid(1.0);
            let (s, co) = (2.0 * PI * x[c]).sin_cos();
            e[c] = Complex64::new(co, -s);
        }
        for (a, xi) in acc.iter_mut().zip(freqs) {
            *a += xi
                .iter()
                .zip(&e)
                .fold(Complex64::new(1.0, 0.0), |p, (&k, &ec)| p * power(ec, k));
        }
    }
    acc.iter().map(|a| a / n as f64).collect()
}
