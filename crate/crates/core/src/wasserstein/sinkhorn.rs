//! Log-domain Sinkhorn iterations for uniform discrete measures.

use crate::error::{domain, Error, Result};
use crate::fbm::cholesky_with_jitter;

const CHECK_EVERY: usize = 10;
const ANNEAL_SWEEPS: usize = 20;
const OVER_RELAXATION: f64 = 1.8;
const NEWTON_MAX_N: usize = 512;
const NEWTON_START: f64 = 1e-3;
const NEWTON_STEPS: usize = 50;
pub const MARGINAL_TOL: f64 = 1e-6;

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// One pair of dual updates, over-relaxed by `omega` (1 is plain Sinkhorn).
fn sweep(cost: &[f64], n: usize, reg: f64, omega: f64, f: &mut [f64], g: &mut [f64]) {
    let log_w = -(n as f64).ln();
    for i in 0..n {
        let next = reg * log_w - reg * log_sum_exp((0..n).map(|j| (g[j] - cost[i * n + j]) / reg));
        f[i] += omega * (next - f[i]);
    }
    for j in 0..n {
        let next = reg * log_w - reg * log_sum_exp((0..n).map(|i| (f[i] - cost[i * n + j]) / reg));
        g[j] += omega * (next - g[j]);
    }
}

fn row_error(cost: &[f64], n: usize, reg: f64, f: &[f64], g: &[f64]) -> f64 {
    (0..n)
        .map(|i| {
            let row: f64 = (0..n).map(|j| ((f[i] + g[j] - cost[i * n + j]) / reg).exp()).sum();
            (row - 1.0 / n as f64).abs()
        })
        .sum()
}

/// Entropic plan for `n × n` costs with uniform marginals. Returns the
/// transport cost `⟨P, C⟩` and the final marginal error (L1 over rows).
///
/// The regularization is annealed from the largest cost down to `reg`,
/// warm-starting the dual potentials; `iters` bounds the final stage, which
/// uses over-relaxed updates.
pub(crate) fn sinkhorn_cost(cost: &[f64], n: usize, reg: f64, iters: usize) -> Result<(f64, f64)> {
    if !(reg > 0.0) {
        return domain(format!("regularization must be positive, got {reg}"));
    }
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut stage = cost.iter().copied().fold(0.0, f64::max);
    while stage > reg {
        for _ in 0..ANNEAL_SWEEPS {
            sweep(cost, n, stage, 1.0, &mut f, &mut g);
        }
        stage *= 0.5;
    }
    let mut err = f64::INFINITY;
    for it in 0..iters {
        sweep(cost, n, reg, OVER_RELAXATION, &mut f, &mut g);
        if (it + 1) % CHECK_EVERY == 0 || it + 1 == iters {
            err = row_error(cost, n, reg, &f, &g);
            if err <= MARGINAL_TOL || (n <= NEWTON_MAX_N && err <= NEWTON_START) {
                break;
            }
        }
    }
    if err > MARGINAL_TOL && n <= NEWTON_MAX_N && err <= NEWTON_START {
        err = newton_polish(cost, n, reg, &mut f, &mut g)?;
    }
    if !(err <= MARGINAL_TOL) {
        return Err(Error::Convergence(format!(
            "Sinkhorn marginal error {err:e} after {iters} iterations at reg = {reg}"
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let c = cost[i * n + j];
            total += ((f[i] + g[j] - c) / reg).exp() * c;
        }
    }
    Ok((total, err))
}

fn plan(cost: &[f64], n: usize, reg: f64, f: &[f64], g: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((f[i] + g[j] - cost[i * n + j]) / reg).exp();
        }
    }
    p
}

fn both_marginal_error(p: &[f64], n: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let w = 1.0 / n as f64;
    let rows: Vec<f64> = (0..n).map(|i| p[i * n..(i + 1) * n].iter().sum()).collect();
    let cols: Vec<f64> = (0..n).map(|j| (0..n).map(|i| p[i * n + j]).sum()).collect();
    let err = rows.iter().chain(&cols).map(|s| (s - w).abs()).sum::<f64>() / 2.0;
    (err, rows, cols)
}

/// Newton ascent on the entropic dual with the gauge `δg_{n−1} = 0`,
/// accepting a step once it reduces the marginal error.
fn newton_polish(cost: &[f64], n: usize, reg: f64, f: &mut [f64], g: &mut [f64]) -> Result<f64> {
    let w = 1.0 / n as f64;
    let m = 2 * n - 1;
    let p = plan(cost, n, reg, f, g);
    let (mut err, mut rows, mut cols) = both_marginal_error(&p, n);
    let mut p = p;
    for _ in 0..NEWTON_STEPS {
        if err <= MARGINAL_TOL {
            break;
        }
        let mut h = vec![0.0; m * m];
        for i in 0..n {
            h[i * m + i] = rows[i] / reg;
            for j in 0..n - 1 {
                let v = p[i * n + j] / reg;
                h[i * m + n + j] = v;
                h[(n + j) * m + i] = v;
            }
        }
        for j in 0..n - 1 {
            h[(n + j) * m + n + j] = cols[j] / reg;
        }
        let rhs: Vec<f64> = (0..n)
            .map(|i| w - rows[i])
            .chain((0..n - 1).map(|j| w - cols[j]))
            .collect();
        let (l, _) = cholesky_with_jitter(&h, m)?;
        let step = cholesky_solve(&l, m, &rhs);

        let mut t = 1.0;
        loop {
            let nf: Vec<f64> = (0..n).map(|i| f[i] + t * step[i]).collect();
            let ng: Vec<f64> = (0..n)
                .map(|j| g[j] + if j < n - 1 { t * step[n + j] } else { 0.0 })
                .collect();
            let np = plan(cost, n, reg, &nf, &ng);
            let (ne, nr, nc) = both_marginal_error(&np, n);
            if ne < err || t < 1e-6 {
                f.copy_from_slice(&nf);
                g.copy_from_slice(&ng);
                (err, rows, cols, p) = (ne, nr, nc, np);
                break;
            }
            t *= 0.5;
        }
    }
    Ok(row_error(cost, n, reg, f, g).max(err))
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    x
}
