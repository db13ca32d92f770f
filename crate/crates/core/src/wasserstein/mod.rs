//! Wasserstein distances: exact solvers at desk scale and the Fourier
//! functionals built from the regularized Poisson equation `−Δu = P_ε(μ − 𝔪)`.
//!
//! The Fourier functionals are reported raw. Their relation to `W_p` holds up
//! to unknown constants, so only their rates in `t` are comparable.

mod assignment;
mod circle;
mod sinkhorn;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, domain, Error, Result};
use crate::torus_spectral::{ball_power_sum, check_weights, grid_synthesis, SpectralEmpiricalMeasure, TorusPoint};

pub use assignment::{solve_assignment, solve_transport};
pub use sinkhorn::MARGINAL_TOL;

/// Heat factor level below which lattice terms are dropped in the streaming energy.
pub const BALL_TAIL: f64 = 1e-6;
/// Relative change under grid doubling tolerated by [`grad_poisson_lp`].
pub const REFINEMENT_TOL: f64 = 1e-6;
/// Largest point set accepted by [`discrete_wp`].
pub const MAX_ASSIGNMENT: usize = 2048;
/// Largest replicated problem accepted by [`grid_wp`].
pub const MAX_TRANSPORT_UNITS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactCircle,
    Assignment,
    Sinkhorn,
    FourierUpper,
    FourierLower,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactCircle => "exact_circle",
            Method::Assignment => "assignment",
            Method::Sinkhorn => "sinkhorn",
            Method::FourierUpper => "fourier_upper",
            Method::FourierLower => "fourier_lower",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ground metric for point-cloud transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ground {
    Torus,
    Euclidean,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WassersteinEstimate {
    pub value: f64,
    pub p: f64,
    pub method: Method,
    pub params: EstimateParams,
}

impl WassersteinEstimate {
    fn new(value: f64, p: f64, method: Method, params: EstimateParams) -> Self {
        Self {
            value,
            p,
            method,
            params,
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        domain(format!("ε must be positive, got {eps}"))
    }
}

/// `‖∇u_ε‖_{L²}` by Parseval over the stored box of coefficients.
pub fn grad_poisson_l2(m: &SpectralEmpiricalMeasure, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let sum: f64 = m
        .coefficients()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let n2 = m.norm_sq_at(i);
            (n2 > 0.0).then(|| (-4.0 * PI * PI * eps * n2).exp() * c.norm_sqr() / (4.0 * PI * PI * n2))
        })
        .sum();
    Ok(sum.sqrt())
}

/// `‖∇u_ε‖_{L²}` summed over the ball where the heat factor exceeds
/// [`BALL_TAIL`], without storing coefficients. Used in high dimension where
/// the box is too large.
pub fn grad_poisson_l2_samples(samples: &[TorusPoint], weights: &[f64], eps: f64) -> Result<f64> {
    check_eps(eps)?;
    check_weights(weights)?;
    let d = samples.first().map(TorusPoint::dim).unwrap_or(0);
    if d == 0 {
        return argument("at least one sample is required");
    }
    let radius2 = ((1.0 / BALL_TAIL).ln() / (4.0 * PI * PI * eps)).floor() as u64;
    let sum = ball_power_sum(samples, weights, d, radius2, |n| {
        let n = n as f64;
        (-4.0 * PI * PI * eps * n).exp() / (4.0 * PI * PI * n)
    })?;
    Ok(sum.sqrt())
}

fn gradient_power_mean(m: &SpectralEmpiricalMeasure, eps: f64, p: u32, n: usize) -> Result<f64> {
    let (d, k) = (m.dim(), m.cutoff());
    let mut sq = vec![0.0; n.pow(d as u32)];
    for a in 0..d {
        let comp: Vec<Complex64> = m
            .coefficients()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n2 = m.norm_sq_at(i);
                if n2 == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let xa = m.lattice_vector(i)[a] as f64;
                let scale = xa * (-2.0 * PI * PI * eps * n2).exp() / (2.0 * PI * n2);
                Complex64::new(0.0, scale) * c
            })
            .collect();
        let vals = grid_synthesis(d, k, &comp, n)?;
        for (s, v) in sq.iter_mut().zip(&vals) {
            *s += v.re * v.re;
        }
    }
    let half = p as f64 / 2.0;
    Ok(sq.iter().map(|s| s.powf(half)).sum::<f64>() / sq.len() as f64)
}

/// `‖∇u_ε‖_{L^p}` for even `p`, by synthesizing `∇u_ε` on a uniform grid with
/// `grid_n` points per axis and averaging. The value is recomputed on the
/// doubled grid; a relative shift above [`REFINEMENT_TOL`] is reported as a
/// precision error.
pub fn grad_poisson_lp(m: &SpectralEmpiricalMeasure, eps: f64, p: u32, grid_n: usize) -> Result<f64> {
    check_eps(eps)?;
    if p < 2 || !p.is_multiple_of(2) {
        return domain(format!("grid L^p norm needs an even p ≥ 2, got {p}"));
    }
    if m.dim() > 3 {
        return argument("grid quadrature is limited to d ≤ 3");
    }
    if grid_n < 4 * m.cutoff() {
        return Err(Error::Precision {
            message: format!("grid of {grid_n} points per axis is below 4K = {}", 4 * m.cutoff()),
            suggested: Some(4 * m.cutoff()),
        });
    }
    let coarse = gradient_power_mean(m, eps, p, grid_n)?;
    let fine = gradient_power_mean(m, eps, p, 2 * grid_n)?;
    if (fine - coarse).abs() > REFINEMENT_TOL * fine.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Precision {
            message: format!("L^{p} quadrature shifts from {coarse:e} to {fine:e} under grid doubling"),
            suggested: Some(4 * grid_n),
        });
    }
    Ok(fine.powf(1.0 / p as f64))
}

fn default_grid(m: &SpectralEmpiricalMeasure, p: u32) -> usize {
    (p as usize * m.cutoff() + 1).max(4 * m.cutoff()).next_power_of_two()
}

/// `ε^{1/2} + ‖∇u_ε‖_{L²}` for `p ∈ [1, 2]`; `(ε^{p/2} + ‖∇u_ε‖_{L^p}^p)^{1/p}` for even `p > 2`.
pub fn fourier_upper(m: &SpectralEmpiricalMeasure, eps: f64, p: f64) -> Result<WassersteinEstimate> {
    check_eps(eps)?;
    let params = EstimateParams {
        eps: Some(eps),
        cutoff: Some(m.cutoff()),
        ..Default::default()
    };
    let value = if (1.0..=2.0).contains(&p) {
        eps.sqrt() + grad_poisson_l2(m, eps)?
    } else if p > 2.0 && p.fract() == 0.0 && (p as u32).is_multiple_of(2) {
        let pi = p as u32;
        let g = grad_poisson_lp(m, eps, pi, default_grid(m, pi))?;
        (eps.powf(p / 2.0) + g.powf(p)).powf(1.0 / p)
    } else {
        return domain(format!("Fourier upper functional needs p ∈ [1, 2] or even p, got {p}"));
    };
    Ok(WassersteinEstimate::new(value, p, Method::FourierUpper, params))
}

/// [`fourier_upper`] for `p ∈ [1, 2]` straight from samples, via the streaming energy.
pub fn fourier_upper_samples(samples: &[TorusPoint], weights: &[f64], eps: f64, p: f64) -> Result<WassersteinEstimate> {
    if !(1.0..=2.0).contains(&p) {
        return domain(format!("streaming Fourier upper functional needs p ∈ [1, 2], got {p}"));
    }
    let value = eps.sqrt() + grad_poisson_l2_samples(samples, weights, eps)?;
    let params = EstimateParams {
        eps: Some(eps),
        ..Default::default()
    };
    Ok(WassersteinEstimate::new(value, p, Method::FourierUpper, params))
}

/// `max(0, sup_κ a/κ − C·b/κ³)` with `a = ‖∇u_ε‖²_{L²}`, `b = ‖∇u_ε‖⁴_{L⁴}`,
/// taken as the better of the stationary point `√(3Cb/a)` and `κ = 2√(Cε)`.
pub fn fourier_lower(m: &SpectralEmpiricalMeasure, eps: f64, c: f64) -> Result<WassersteinEstimate> {
    check_eps(eps)?;
    if !(c > 0.0) {
        return domain(format!("lower-bound constant must be positive, got {c}"));
    }
    let mut params = EstimateParams {
        eps: Some(eps),
        cutoff: Some(m.cutoff()),
        ..Default::default()
    };
    let a = grad_poisson_l2(m, eps)?.powi(2);
    if a == 0.0 {
        params.kappa = Some(0.0);
        return Ok(WassersteinEstimate::new(0.0, 1.0, Method::FourierLower, params));
    }
    let b = grad_poisson_lp(m, eps, 4, default_grid(m, 4))?.powi(4);
    let (kappa, value) = lower_from_moments(a, b, c, eps);
    params.kappa = Some(kappa);
    Ok(WassersteinEstimate::new(value, 1.0, Method::FourierLower, params))
}

/// `(κ, max(0, a/κ − C·b/κ³))` at the better of `√(3Cb/a)` and `2√(Cε)`.
pub(crate) fn lower_from_moments(a: f64, b: f64, c: f64, eps: f64) -> (f64, f64) {
    let f = |k: f64| a / k - c * b / k.powi(3);
    let stationary = (3.0 * c * b / a).sqrt();
    let scaled = 2.0 * (c * eps).sqrt();
    let (kappa, value) = if f(stationary) >= f(scaled) {
        (stationary, f(stationary))
    } else {
        (scaled, f(scaled))
    };
    (kappa, value.max(0.0))
}

/// Exact `W_p(μ, 𝔪)` on the circle for atoms in `[−1/2, 1/2)` with the given weights.
pub fn circle_wp_exact(atoms: &[f64], weights: &[f64], p: f64) -> Result<WassersteinEstimate> {
    let (cost, _) = circle::circle_cost(atoms, weights, p)?;
    Ok(WassersteinEstimate::new(
        cost.powf(1.0 / p),
        p,
        Method::ExactCircle,
        EstimateParams::default(),
    ))
}

#[inline]
fn ground_dist_sq(a: &[f64], b: &[f64], ground: Ground) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let g = match ground {
                Ground::Euclidean => (x - y).abs(),
                Ground::Torus => {
                    let g = (x - y).rem_euclid(1.0);
                    g.min(1.0 - g)
                }
            };
            g * g
        })
        .sum()
}

fn cost_matrix<P: AsRef<[f64]>>(x: &[P], y: &[P], p: f64, ground: Ground) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![0.0; n * y.len()];
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            c[i * n + j] = ground_dist_sq(xi.as_ref(), yj.as_ref(), ground).powf(p / 2.0);
        }
    }
    c
}

fn check_clouds<P: AsRef<[f64]>>(x: &[P], y: &[P], p: f64) -> Result<()> {
    if x.len() != y.len() {
        return argument(format!("point sets differ in size: {} vs {}", x.len(), y.len()));
    }
    if x.is_empty() {
        return argument("point sets must be nonempty");
    }
    let d = x[0].as_ref().len();
    if x.iter().chain(y).any(|v| v.as_ref().len() != d) {
        return argument("points have inconsistent dimension");
    }
    if !(p > 0.0) {
        return domain(format!("order p must be positive, got {p}"));
    }
    Ok(())
}

/// Exact `W_p` between equal-size uniform point clouds,
/// `(min-cost / n)^{min(1, 1/p)}` under `ρ^p` or `|·|^p`.
pub fn discrete_wp<P: AsRef<[f64]>>(x: &[P], y: &[P], p: f64, ground: Ground) -> Result<WassersteinEstimate> {
    check_clouds(x, y, p)?;
    let n = x.len();
    if n > MAX_ASSIGNMENT {
        return argument(format!("assignment size {n} exceeds {MAX_ASSIGNMENT}"));
    }
    let (_, cost) = solve_assignment(&cost_matrix(x, y, p, ground), n)?;
    Ok(WassersteinEstimate::new(
        (cost.max(0.0) / n as f64).powf(1f64.min(1.0 / p)),
        p,
        Method::Assignment,
        EstimateParams::default(),
    ))
}

/// Cell centres of the uniform grid with `per_axis^d` points.
pub fn uniform_grid(d: usize, per_axis: usize) -> Vec<TorusPoint> {
    let total = per_axis.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut coords = vec![0.0; d];
            for c in (0..d).rev() {
                coords[c] = (idx % per_axis) as f64 / per_axis as f64 + 0.5 / per_axis as f64 - 0.5;
                idx /= per_axis;
            }
            TorusPoint { coords }
        })
        .collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Grid size per axis giving at least `16 N` points in dimension `d`.
pub fn default_grid_per_axis(n: usize, d: usize) -> usize {
    let target = 16 * n;
    let mut g = (target as f64).powf(1.0 / d as f64).floor().max(1.0) as usize;
    while g.pow(d as u32) < target {
        g += 1;
    }
    g
}

/// `W_p(μ_N, 𝔪)` for a uniform `N`-point measure, with `𝔪` discretized as
/// the `per_axis^d` cell-centre grid. Both sides are replicated to the lcm
/// of their sizes and solved exactly on the torus.
pub fn grid_wp(points: &[TorusPoint], p: f64, per_axis: usize) -> Result<WassersteinEstimate> {
    if points.is_empty() {
        return argument("at least one point is required");
    }
    if !(p >= 1.0) {
        return domain(format!("grid transport needs p ≥ 1, got {p}"));
    }
    let d = points[0].dim();
    let grid = uniform_grid(d, per_axis);
    let (n, m) = (points.len(), grid.len());
    let units = n / gcd(n, m) * m;
    if units > MAX_TRANSPORT_UNITS {
        return argument(format!(
            "replicated transport of {units} units exceeds {MAX_TRANSPORT_UNITS}; choose sizes with a smaller lcm"
        ));
    }
    let sink_rep = units / m;
    let capacity = vec![units / n; n];
    let (_, cost) = solve_transport(&capacity, units, |i, j| {
        ground_dist_sq(points[i].coords(), grid[j / sink_rep].coords(), Ground::Torus).powf(p / 2.0)
    })?;
    let params = EstimateParams {
        cutoff: Some(per_axis),
        ..Default::default()
    };
    Ok(WassersteinEstimate::new(
        (cost.max(0.0) / units as f64).powf(1.0 / p),
        p,
        Method::Assignment,
        params,
    ))
}

/// Entropic transport cost `⟨P_reg, C⟩^{min(1, 1/p)}` on the torus, an
/// upper-biased approximation of [`discrete_wp`].
pub fn sinkhorn_wp(x: &[TorusPoint], y: &[TorusPoint], p: f64, reg: f64, iters: usize) -> Result<WassersteinEstimate> {
    check_clouds(x, y, p)?;
    let n = x.len();
    let (cost, _) = sinkhorn::sinkhorn_cost(&cost_matrix(x, y, p, Ground::Torus), n, reg, iters)?;
    let params = EstimateParams {
        reg: Some(reg),
        ..Default::default()
    };
    Ok(WassersteinEstimate::new(
        cost.max(0.0).powf(1f64.min(1.0 / p)),
        p,
        Method::Sinkhorn,
        params,
    ))
}

/// Row sums of the entropic plan minus `1/n`, in L1, at convergence.
pub fn sinkhorn_marginal_error(x: &[TorusPoint], y: &[TorusPoint], p: f64, reg: f64, iters: usize) -> Result<f64> {
    check_clouds(x, y, p)?;
    let n = x.len();
    Ok(sinkhorn::sinkhorn_cost(&cost_matrix(x, y, p, Ground::Torus), n, reg, iters)?.1)
}

impl AsRef<[f64]> for TorusPoint {
    fn as_ref(&self) -> &[f64] {
        self.coords()
    }
}

#[cfg(test)]
mod tests;
