//! Exact `W_p(μ, 𝔪)` on the circle for a discrete `μ` and the uniform law.
//!
//! With atoms lifted to `[0, 1)`, sorted as `y_1 ≤ … ≤ y_n` with cumulative
//! weights `W_i`, the circular quantile coupling with shift `θ` costs
//! `Σ_i ∫_{W_{i−1}}^{W_i} |y_i − u − θ|^p du`, a convex function of `θ`.

use crate::error::{argument, domain, Result};

fn antiderivative(z: f64, p: f64) -> f64 {
    z.signum() * z.abs().powf(p + 1.0) / (p + 1.0)
}

struct Lifted {
    y: Vec<f64>,
    cum: Vec<f64>,
}

impl Lifted {
    fn new(atoms: &[f64], weights: &[f64]) -> Self {
        let mut pairs: Vec<(f64, f64)> = atoms
            .iter()
            .zip(weights)
            .map(|(&x, &w)| (x.rem_euclid(1.0), w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cum = Vec::with_capacity(pairs.len() + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for &(_, w) in &pairs {
            acc += w;
            cum.push(acc);
        }
        let last = cum.len() - 1;
        cum[last] = 1.0;
        Self {
            y: pairs.into_iter().map(|(y, _)| y).collect(),
            cum,
        }
    }

    fn cost(&self, theta: f64, p: f64) -> f64 {
        self.y
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let c = y - theta;
                antiderivative(c - self.cum[i], p) - antiderivative(c - self.cum[i + 1], p)
            })
            .sum()
    }

    /// Lebesgue measure of `{u : G(u) ≤ θ}` with `G(u) = y_i − u` on piece `i`.
    fn g_cdf(&self, theta: f64) -> f64 {
        self.y
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let (a, b) = (self.cum[i], self.cum[i + 1]);
                (b - (y - theta).max(a)).clamp(0.0, b - a)
            })
            .sum()
    }

    fn median(&self) -> f64 {
        let (mut lo, mut hi) = (-1.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.g_cdf(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    fn golden_section(&self, p: f64) -> f64 {
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (-1.0f64, 1.0f64);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut f1, mut f2) = (self.cost(x1, p), self.cost(x2, p));
        while b - a > 1e-13 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = self.cost(x1, p);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = self.cost(x2, p);
            }
        }
        0.5 * (a + b)
    }
}

/// `(min_θ cost(θ), θ*)` for the circle against the uniform law.
pub(crate) fn circle_cost(atoms: &[f64], weights: &[f64], p: f64) -> Result<(f64, f64)> {
    if atoms.is_empty() || atoms.len() != weights.len() {
        return argument("circle transport needs matching, nonempty atoms and weights");
    }
    if atoms.iter().any(|&x| !(-0.5..0.5).contains(&x)) {
        return argument("circle atoms must lie in [-1/2, 1/2)");
    }
    crate::torus_spectral::check_weights(weights)?;
    if !(p >= 1.0) {
        return domain(format!("circle transport needs p ≥ 1, got {p}"));
    }
    let lifted = Lifted::new(atoms, weights);
    let theta = if p == 1.0 {
        lifted.median()
    } else {
        lifted.golden_section(p)
    };
    Ok((lifted.cost(theta, p).max(0.0), theta))
}
