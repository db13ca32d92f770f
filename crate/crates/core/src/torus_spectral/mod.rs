//! Flat-torus geometry, the heat semigroup and Fourier coefficients of
//! empirical measures on `T^d = [−1/2, 1/2)^d`.

mod lattice;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, domain, Error, Result};

pub(crate) use lattice::ball_power_sum;
pub use lattice::grid_synthesis;

/// Tolerance on the total mass of sample weights.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A point of the torus with every coordinate in `[−1/2, 1/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusPoint {
    pub(crate) coords: Vec<f64>,
}

impl TorusPoint {
    /// Checks the fundamental-domain invariant; use [`project`] to reduce first.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return argument("torus point needs at least one coordinate");
        }
        if coords.iter().any(|&x| !(-0.5..0.5).contains(&x)) {
            return argument("torus coordinates must lie in [-1/2, 1/2)");
        }
        Ok(Self { coords })
    }

    pub fn origin(d: usize) -> Self {
        Self { coords: vec![0.0; d] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

#[inline]
fn wrap(x: f64) -> f64 {
    let mut r = x - (x + 0.5).floor();
    if r >= 0.5 {
        r -= 1.0;
    }
    if r < -0.5 {
        r += 1.0;
    }
    r
}

/// Reduce each coordinate mod 1 into `[−1/2, 1/2)`.
pub fn project(x: &[f64]) -> TorusPoint {
    TorusPoint {
        coords: x.iter().map(|&v| wrap(v)).collect(),
    }
}

/// Coordinatewise wraparound gap `min(|x − y|, 1 − |x − y|)`.
#[inline]
pub(crate) fn wrapped_gap(a: f64, b: f64) -> f64 {
    let g = (a - b).abs();
    g.min(1.0 - g)
}

/// Squared flat-torus distance.
pub fn distance_sq(x: &TorusPoint, y: &TorusPoint) -> f64 {
    x.coords
        .iter()
        .zip(&y.coords)
        .map(|(&a, &b)| wrapped_gap(a, b).powi(2))
        .sum()
}

/// Flat-torus distance `ρ(x, y) = min_k |x − y − k|`.
pub fn distance(x: &TorusPoint, y: &TorusPoint) -> f64 {
    distance_sq(x, y).sqrt()
}

/// Wrapped Gaussian heat kernel `q_t(x) = (2πt)^{−d/2} Σ_k e^{−|x−k|²/(2t)}`.
///
/// The kernel is a product over coordinates; each one-dimensional lattice sum
/// is truncated where the remaining tail falls below 1e-14.
pub fn heat_kernel(x: &TorusPoint, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("heat kernel time must be positive, got {t}"));
    }
    let kq = (0.5 + (2.0 * t * 1e16f64.ln()).sqrt()).ceil() as i64 + 1;
    let norm = (2.0 * PI * t).sqrt();
    Ok(x.coords
        .iter()
        .map(|&xc| {
            let s: f64 = (-kq..=kq).map(|k| (-(xc - k as f64).powi(2) / (2.0 * t)).exp()).sum();
            s / norm
        })
        .product())
}

/// Smallest `K` with `exp(−2π²εK²) < 1e−12`.
pub fn cutoff_for(eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return domain(format!("smoothing level must be positive, got {eps}"));
    }
    let k = (1e12f64.ln() / (2.0 * PI * PI * eps)).sqrt();
    let mut k = k.floor().max(1.0) as usize;
    while (-2.0 * PI * PI * eps * (k * k) as f64).exp() >= 1e-12 {
        k += 1;
    }
    Ok(k)
}

/// `φ_ε(ξ) = e^{−ε|ξ|²} / (|ξ| + 1)`.
#[inline]
pub fn phi(eps: f64, norm_sq: f64) -> f64 {
    (-eps * norm_sq).exp() / (norm_sq.sqrt() + 1.0)
}

/// Number of lattice points of the box `‖ξ‖_∞ ≤ k` at each squared norm.
fn box_shell_counts(d: usize, k: usize) -> Vec<f64> {
    let mut counts = vec![1u64];
    for _ in 0..d {
        let mut next = vec![0u64; counts.len() + k * k];
        for (n, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            next[n] += c;
            for j in 1..=k {
                next[n + j * j] += 2 * c;
            }
        }
        counts = next;
    }
    counts.into_iter().map(|c| c as f64).collect()
}

/// `(Σ_{‖ξ‖_∞ ≤ K} φ_ε(ξ)^p)^{1/p}`, summed over shells of equal `|ξ|²`.
pub fn phi_norm(eps: f64, p: f64, d: usize, k: usize) -> Result<f64> {
    if !(eps > 0.0) {
        return domain(format!("ε must be positive, got {eps}"));
    }
    if !(p >= 1.0) {
        return domain(format!("p must be at least 1, got {p}"));
    }
    if d == 0 {
        return argument("dimension must be at least 1");
    }
    let tail = |k: usize| (-eps * (k * k) as f64).exp() / (k as f64 + 1.0);
    if tail(k) >= 1e-14 {
        let mut s = k.max(1);
        while tail(s) >= 1e-14 {
            s *= 2;
        }
        return Err(Error::Precision {
            message: format!("cutoff {k} too small for ε = {eps}"),
            suggested: Some(s),
        });
    }
    let counts = box_shell_counts(d, k);
    let sum: f64 = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0)
        .map(|(n, &c)| c * phi(eps, n as f64).powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Regime value of `‖φ_ε‖_{ℓ^p}` with unit constants: 1 for `d < p`,
/// `|log ε|^{1/p}` for `d = p`, `ε^{−(d/p − 1)/2}` for `d > p`. Needs `ε ∈ (0, 1)`.
pub fn phi_asymptotic(eps: f64, p: f64, d: usize) -> f64 {
    let d = d as f64;
    if (d - p).abs() < 1e-12 {
        eps.ln().abs().powf(1.0 / p)
    } else if d < p {
        1.0
    } else {
        eps.powf(-(d / p - 1.0) / 2.0)
    }
}

/// Fourier coefficients of a weighted point cloud over the box `‖ξ‖_∞ ≤ K`.
///
/// Coefficients are stored densely, row-major in `ξ + K`; the origin sits at
/// the middle index and `−ξ` at the mirrored index.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmpiricalMeasure {
    dim: usize,
    cutoff: usize,
    coeffs: Vec<Complex64>,
    samples: Vec<TorusPoint>,
    weights: Vec<f64>,
}

impl SpectralEmpiricalMeasure {
    /// Build from explicit coefficients (no samples). The origin coefficient
    /// must be 1 and the array Hermitian within 1e-12.
    pub fn from_coefficients(dim: usize, cutoff: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return argument("dimension must be at least 1");
        }
        let total = (2 * cutoff + 1).pow(dim as u32);
        if coeffs.len() != total {
            return argument(format!(
                "expected {total} coefficients for d = {dim}, K = {cutoff}, got {}",
                coeffs.len()
            ));
        }
        if (coeffs[total / 2] - Complex64::new(1.0, 0.0)).norm() > WEIGHT_TOL {
            return argument("origin coefficient must equal 1");
        }
        if (0..total).any(|i| (coeffs[total - 1 - i] - coeffs[i].conj()).norm() > WEIGHT_TOL) {
            return argument("coefficients are not Hermitian");
        }
        Ok(Self {
            dim,
            cutoff,
            coeffs,
            samples: Vec::new(),
            weights: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn samples(&self) -> &[TorusPoint] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index_of(&self, xi: &[i64]) -> Option<usize> {
        if xi.len() != self.dim {
            return None;
        }
        let k = self.cutoff as i64;
        let mut idx = 0;
        for &v in xi {
            if v.abs() > k {
                return None;
            }
            idx = idx * self.side() + (v + k) as usize;
        }
        Some(idx)
    }

    pub fn lattice_vector(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut xi = vec![0i64; self.dim];
        for c in (0..self.dim).rev() {
            xi[c] = (idx % side) as i64 - self.cutoff as i64;
            idx /= side;
        }
        xi
    }

    /// `|ξ|²` for the lattice vector at `idx`.
    pub fn norm_sq_at(&self, mut idx: usize) -> f64 {
        let side = self.side();
        let mut s = 0i64;
        for _ in 0..self.dim {
            let v = (idx % side) as i64 - self.cutoff as i64;
            s += v * v;
            idx /= side;
        }
        s as f64
    }

    pub fn coeff(&self, xi: &[i64]) -> Option<Complex64> {
        self.index_of(xi).map(|i| self.coeffs[i])
    }

    /// The origin coefficient, i.e. the total mass.
    pub fn mass(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() / 2]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectralJson {
    d: usize,
    #[serde(rename = "K")]
    k: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for SpectralEmpiricalMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectralJson {
            d: self.dim,
            k: self.cutoff,
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: self.coeffs.iter().map(|c| c.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralEmpiricalMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = SpectralJson::deserialize(de)?;
        if raw.re.len() != raw.im.len() {
            return Err(serde::de::Error::custom("re and im differ in length"));
        }
        let coeffs = raw
            .re
            .into_iter()
            .zip(raw.im)
            .map(|(r, i)| Complex64::new(r, i))
            .collect();
        Self::from_coefficients(raw.d, raw.k, coeffs).map_err(serde::de::Error::custom)
    }
}

/// Uniform weights `1/n`.
pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return argument("weights must be nonnegative");
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return argument(format!("weights sum to {total}, not 1"));
    }
    Ok(())
}

/// `μ̂(ξ) = Σ_j w_j e^{−2πi⟨ξ, x_j⟩}` for `‖ξ‖_∞ ≤ K`; `weights = None` means uniform.
pub fn empirical_fourier(
    samples: &[TorusPoint],
    weights: Option<&[f64]>,
    cutoff: usize,
) -> Result<SpectralEmpiricalMeasure> {
    if samples.is_empty() {
        return argument("at least one sample is required");
    }
    if cutoff == 0 {
        return argument("cutoff must be at least 1");
    }
    let weights = match weights {
        Some(w) => {
            check_weights(w)?;
            w.to_vec()
        }
        None => uniform_weights(samples.len()),
    };
    let dim = samples[0].dim();
    let mut coeffs = lattice::box_coefficients(samples, &weights, dim, cutoff)?;
    let total = coeffs.len();
    coeffs[total / 2] = Complex64::new(1.0, 0.0);
    Ok(SpectralEmpiricalMeasure {
        dim,
        cutoff,
        coeffs,
        samples: samples.to_vec(),
        weights,
    })
}

/// Multiply each coefficient by the heat factor `e^{−2π²ε|ξ|²}`.
pub fn heat_smooth(m: &SpectralEmpiricalMeasure, eps: f64) -> Result<SpectralEmpiricalMeasure> {
    if !(eps > 0.0) {
        return domain(format!("smoothing level must be positive, got {eps}"));
    }
    let mut out = m.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        *c *= (-2.0 * PI * PI * eps * m.norm_sq_at(i)).exp();
    }
    Ok(out)
}
