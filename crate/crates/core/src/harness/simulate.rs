//! Sample clouds of subordinated fBM paths.

use rand::Rng;

use crate::bernstein::BernsteinFunction;
use crate::error::{argument, domain, Result};
use crate::fbm::FbmSampler;
use crate::subordinator::increment;
use crate::torus_spectral::{project, TorusPoint};

/// `S_{kτ}` for `k = 1..=n_steps`, `τ = t / n_steps`.
pub fn subordinated_times<R: Rng + ?Sized>(b: &BernsteinFunction, t: f64, n_steps: usize, rng: &mut R) -> Vec<f64> {
    let tau = t / n_steps as f64;
    let mut level = 0.0;
    (0..n_steps)
        .map(|_| {
            level += increment(b, tau, rng);
            level
        })
        .collect()
}

fn check(d: usize, t: f64, n_steps: usize) -> Result<()> {
    if d == 0 {
        return argument("dimension must be at least 1");
    }
    if n_steps == 0 {
        return argument("need at least one time step");
    }
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("time horizon must be positive and finite, got {t}"));
    }
    Ok(())
}

/// Unprojected path values `X^H(S_{kτ}) ∈ R^d`, `k = 1..=n_steps`.
pub fn simulate_sfbm_raw<R: Rng + ?Sized>(
    b: &BernsteinFunction,
    sampler: &FbmSampler,
    d: usize,
    t: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    check(d, t, n_steps)?;
    let times = subordinated_times(b, t, n_steps, rng);
    let path = sampler.sample_at_times(&times, d, rng)?;
    Ok((0..path.len()).map(|i| path.value(i).to_vec()).collect())
}

/// As [`simulate_sfbm_samples`], reusing the factorization cache of `sampler`.
pub fn simulate_sfbm_samples_with<R: Rng + ?Sized>(
    b: &BernsteinFunction,
    sampler: &FbmSampler,
    d: usize,
    t: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<Vec<TorusPoint>> {
    Ok(simulate_sfbm_raw(b, sampler, d, t, n_steps, rng)?
        .iter()
        .map(|x| project(x))
        .collect())
}

/// Points `project(X^H(S_{kτ}))`, `k = 1..=n_steps`, `τ = t / n_steps`.
pub fn simulate_sfbm_samples<R: Rng + ?Sized>(
    b: &BernsteinFunction,
    h: f64,
    d: usize,
    t: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<Vec<TorusPoint>> {
    let sampler = FbmSampler::new(h)?;
    simulate_sfbm_samples_with(b, &sampler, d, t, n_steps, rng)
}
