//! Lattice Fourier sums over weighted point clouds.
//!
//! `μ̂(ξ) = Σ_j w_j e^{−2πi⟨ξ, x_j⟩}` factorizes over coordinates. The first
//! `d − 1` coordinates are folded into per-prefix vectors over the samples;
//! the last axis is then a dense matrix product against its phase table.

use ndarray::{s, Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{argument, Result};

use super::TorusPoint;

const PREFIX_BATCH: usize = 128;

/// Phase table for one coordinate, `k`-major: entry `(k + l) * n + j` is
/// `e^{−2πi k x_{j,c}}` for `k ∈ [−l, l]`. Negative `k` are exact conjugates.
struct PhaseTable {
    n: usize,
    l: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl PhaseTable {
    fn new(samples: &[TorusPoint], coord: usize, l: usize) -> Self {
        let n = samples.len();
        let side = 2 * l + 1;
        let mut re = vec![0.0; side * n];
        let mut im = vec![0.0; side * n];
        for k in 0..=l {
            for (j, x) in samples.iter().enumerate() {
                let a = (k as f64 * x.coords[coord]).rem_euclid(1.0);
                let (sn, cs) = (2.0 * std::f64::consts::PI * a).sin_cos();
                re[(l + k) * n + j] = cs;
                im[(l + k) * n + j] = -sn;
                re[(l - k) * n + j] = cs;
                im[(l - k) * n + j] = sn;
            }
        }
        Self { n, l, re, im }
    }

    #[inline]
    fn at(&self, k: i64, j: usize) -> (f64, f64) {
        let i = (k + self.l as i64) as usize * self.n + j;
        (self.re[i], self.im[i])
    }

    /// `[[Re E], [−Im E]]` and `[[Im E], [Re E]]`, each `2n × (2l + 1)`.
    fn last_axis_blocks(&self) -> (Array2<f64>, Array2<f64>) {
        let (n, side) = (self.n, 2 * self.l + 1);
        let mut m1 = Array2::zeros((2 * n, side));
        let mut m2 = Array2::zeros((2 * n, side));
        for k in 0..side {
            for j in 0..n {
                let (r, i) = (self.re[k * n + j], self.im[k * n + j]);
                m1[[j, k]] = r;
                m1[[n + j, k]] = -i;
                m2[[j, k]] = i;
                m2[[n + j, k]] = r;
            }
        }
        (m1, m2)
    }
}

/// Fill one row of the stacked `[Re | Im]` prefix matrix.
fn prefix_row(tables: &[PhaseTable], weights: &[f64], prefix: &[i64], row: &mut ndarray::ArrayViewMut1<f64>) {
    let n = weights.len();
    for j in 0..n {
        let (mut r, mut i) = (weights[j], 0.0);
        for (table, &k) in tables.iter().zip(prefix) {
            let (a, b) = table.at(k, j);
            (r, i) = (r * a - i * b, r * b + i * a);
        }
        row[j] = r;
        row[n + j] = i;
    }
}

fn multiply(a: &Array2<f64>, m1: ArrayView2<f64>, m2: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    (a.dot(&m1), a.dot(&m2))
}

fn check_inputs(samples: &[TorusPoint], weights: &[f64], d: usize) -> Result<()> {
    if samples.is_empty() {
        return argument("at least one sample is required");
    }
    if samples.len() != weights.len() {
        return argument("samples and weights differ in length");
    }
    if samples.iter().any(|x| x.dim() != d) {
        return argument("samples have inconsistent dimension");
    }
    Ok(())
}

/// Dense coefficients over the box `‖ξ‖_∞ ≤ k`, row-major with offset `k`.
/// Only half the prefixes are computed; the rest follow from `μ̂(−ξ) = conj μ̂(ξ)`.
pub(crate) fn box_coefficients(samples: &[TorusPoint], weights: &[f64], d: usize, k: usize) -> Result<Vec<Complex64>> {
    check_inputs(samples, weights, d)?;
    let side = 2 * k + 1;
    let tables: Vec<PhaseTable> = (0..d).map(|c| PhaseTable::new(samples, c, k)).collect();
    let (prefix_tables, last) = tables.split_at(d - 1);
    let (m1, m2) = last[0].last_axis_blocks();
    let n = samples.len();

    let n_prefix = side.pow(d as u32 - 1);
    let half = n_prefix / 2 + 1;
    let starts: Vec<usize> = (0..half).step_by(PREFIX_BATCH).collect();
    let blocks: Vec<(Array2<f64>, Array2<f64>)> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + PREFIX_BATCH).min(half);
            let mut a = Array2::zeros((end - start, 2 * n));
            let mut digits = vec![0i64; d - 1];
            for (r, p) in (start..end).enumerate() {
                let mut rem = p;
                for c in (0..d - 1).rev() {
                    digits[c] = (rem % side) as i64 - k as i64;
                    rem /= side;
                }
                prefix_row(prefix_tables, weights, &digits, &mut a.row_mut(r));
            }
            multiply(&a, m1.view(), m2.view())
        })
        .collect();

    let total = n_prefix * side;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); total];
    for (&start, (re, im)) in starts.iter().zip(&blocks) {
        for r in 0..re.nrows() {
            let base = (start + r) * side;
            for c in 0..side {
                coeffs[base + c] = Complex64::new(re[[r, c]], im[[r, c]]);
            }
        }
    }
    for idx in 0..total / 2 {
        coeffs[total - 1 - idx] = coeffs[idx].conj();
    }
    coeffs[total / 2] = Complex64::new(weights.iter().sum(), 0.0);
    Ok(coeffs)
}

/// `Σ_{0 < |ξ|² ≤ radius2} f(|ξ|²)·|μ̂(ξ)|²` without storing coefficients.
///
/// Prefixes range over the half-space `ξ_1 ≥ 0` (weight 2 when `ξ_1 > 0`) and
/// are bucketed by the admissible range of the last coordinate.
pub(crate) fn ball_power_sum(
    samples: &[TorusPoint],
    weights: &[f64],
    d: usize,
    radius2: u64,
    f: impl Fn(u64) -> f64,
) -> Result<f64> {
    check_inputs(samples, weights, d)?;
    let fvals: Vec<f64> = (0..=radius2).map(&f).collect();
    let l = (radius2 as f64).sqrt().floor() as usize;
    if l == 0 {
        return Ok(0.0);
    }
    if d == 1 {
        let c = box_coefficients(samples, weights, 1, l)?;
        return Ok((1..=l).map(|k| 2.0 * fvals[k * k] * c[l + k].norm_sqr()).sum());
    }

    let tables: Vec<PhaseTable> = (0..d).map(|c| PhaseTable::new(samples, c, l)).collect();
    let (prefix_tables, last) = tables.split_at(d - 1);
    let (m1, m2) = last[0].last_axis_blocks();
    let n = samples.len();

    // Enumerate prefixes with partial norm ≤ radius2, grouped by last-axis range.
    let mut buckets: Vec<Vec<(Vec<i64>, u64, f64)>> = vec![Vec::new(); l + 1];
    let mut stack: Vec<(Vec<i64>, u64)> = vec![(Vec::new(), 0)];
    while let Some((prefix, norm)) = stack.pop() {
        if prefix.len() == d - 1 {
            let lp = ((radius2 - norm) as f64).sqrt().floor() as usize;
            let w = if prefix[0] > 0 { 2.0 } else { 1.0 };
            buckets[lp].push((prefix, norm, w));
            continue;
        }
        let room = ((radius2 - norm) as f64).sqrt().floor() as i64;
        let lo = if prefix.is_empty() { 0 } else { -room };
        for v in lo..=room {
            let mut next = prefix.clone();
            next.push(v);
            stack.push((next, norm + (v * v) as u64));
        }
    }

    let mut jobs: Vec<(usize, &[(Vec<i64>, u64, f64)])> = Vec::new();
    for (lp, bucket) in buckets.iter().enumerate() {
        for chunk in bucket.chunks(PREFIX_BATCH) {
            jobs.push((lp, chunk));
        }
    }
    let partials: Vec<f64> = jobs
        .par_iter()
        .map(|&(lp, chunk)| {
            let mut a = Array2::zeros((chunk.len(), 2 * n));
            for (r, (prefix, _, _)) in chunk.iter().enumerate() {
                prefix_row(prefix_tables, weights, prefix, &mut a.row_mut(r));
            }
            let cols = s![.., l - lp..=l + lp];
            let (re, im) = multiply(&a, m1.slice(cols), m2.slice(cols));
            let mut acc = 0.0;
            for (r, (_, norm, w)) in chunk.iter().enumerate() {
                let zero_prefix = *norm == 0;
                for c in 0..=2 * lp {
                    let kk = c as i64 - lp as i64;
                    if zero_prefix && kk == 0 {
                        continue;
                    }
                    let n2 = norm + (kk * kk) as u64;
                    acc += w * fvals[n2 as usize] * (re[[r, c]].powi(2) + im[[r, c]].powi(2));
                }
            }
            acc
        })
        .collect();
    Ok(partials.iter().sum())
}

/// Multi-dimensional FFT over an `n^d` row-major array, in place.
pub(crate) fn fft_axes(data: &mut [Complex64], d: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Values of `Σ_ξ c_ξ e^{2πi⟨ξ, x⟩}` on the grid `x = j / n`, for box
/// coefficients with cutoff `k`. Requires `n ≥ 2k + 1`.
pub fn grid_synthesis(d: usize, k: usize, coeffs: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    let side = 2 * k + 1;
    if coeffs.len() != side.pow(d as u32) {
        return argument("coefficient array does not match the box size");
    }
    if n < side {
        return argument(format!("grid of {n} points per axis aliases cutoff {k}"));
    }
    let mut data = vec![Complex64::new(0.0, 0.0); n.pow(d as u32)];
    for (idx, c) in coeffs.iter().enumerate() {
        let mut rem = idx;
        let mut pos = 0;
        let mut scale = 1;
        for _ in 0..d {
            let digit = rem % side;
            rem /= side;
            let xi = digit as i64 - k as i64;
            pos += xi.rem_euclid(n as i64) as usize * scale;
            scale *= n;
        }
        data[pos] = *c;
    }
    fft_axes(&mut data, d, n, true);
    Ok(data)
}
