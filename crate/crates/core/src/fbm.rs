//! Fractional Brownian motion at arbitrary and uniform time points.
//!
//! Subordinated paths need `X^H` at the random times `S_{kτ}`, so the general
//! sampler factorizes the Gram matrix of the requested times. Brownian motion
//! (`H = 1/2`) has independent increments and skips the factorization; uniform
//! grids can use circulant embedding instead.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{argument, domain, Error, Result};

/// Largest dense Gram matrix factorized by default.
pub const DEFAULT_N_MAX: usize = 4096;
/// Times closer than this share one value.
pub const MERGE_TOL: f64 = 1e-12;

const JITTER_START: f64 = 1e-12;
const JITTER_MAX: f64 = 1e-8;
const CACHE_MAX_N: usize = 1024;
const CACHE_MAX_ENTRIES: usize = 8;

/// A `d`-dimensional fBM sampled at `times`; `values` is row-major `times.len() × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPath {
    pub hurst: f64,
    pub dim: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FractionalPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// One coordinate across all times.
    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.values[i * self.dim + c]).collect()
    }
}

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        domain(format!("Hurst index must lie in (0, 1), got {h}"))
    }
}

/// `Cov(X_s, X_t) = (s^{2H} + t^{2H} − |t − s|^{2H}) / 2` for one coordinate.
pub fn covariance(h: f64, s: f64, t: f64) -> Result<f64> {
    check_hurst(h)?;
    if !(s >= 0.0 && t >= 0.0) {
        return domain("fBM covariance needs s, t ≥ 0");
    }
    Ok(cov_unchecked(h, s, t))
}

#[inline]
fn cov_unchecked(h: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

/// Lower Cholesky factor of a row-major SPD matrix, stored row-major.
///
/// Adds `jitter` to the diagonal, starting at 1e-12 and escalating ×10 up to
/// 1e-8 when a pivot is not positive. Returns the factor and the jitter used.
pub fn cholesky_with_jitter(a: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    if a.len() != n * n {
        return argument("cholesky: matrix size mismatch");
    }
    let mut jitter = JITTER_START;
    loop {
        match cholesky(a, n, jitter) {
            Ok(l) => return Ok((l, jitter)),
            Err((row, pivot)) => {
                if jitter >= JITTER_MAX {
                    return Err(Error::Numerical(format!(
                        "Gram matrix of size {n} is not positive definite after jitter {jitter:e}: \
                         pivot {pivot:e} at row {row}"
                    )));
                }
                jitter *= 10.0;
            }
        }
    }
}

fn cholesky(a: &[f64], n: usize, jitter: f64) -> std::result::Result<Vec<f64>, (usize, f64)> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
            let dot: f64 = ri.iter().zip(rj).map(|(x, y)| x * y).sum();
            if i == j {
                let p = a[i * n + i] + jitter - dot;
                if !(p > 0.0) {
                    return Err((i, p));
                }
                l[i * n + i] = p.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - dot) / l[j * n + j];
            }
        }
    }
    Ok(l)
}

type CacheKey = (u64, usize, u64);

/// fBM sampler with a shared cache of Gram factorizations.
#[derive(Debug)]
pub struct FbmSampler {
    hurst: f64,
    n_max: usize,
    cache: RwLock<HashMap<CacheKey, Arc<Vec<f64>>>>,
}

impl FbmSampler {
    pub fn new(hurst: f64) -> Result<Self> {
        Self::with_n_max(hurst, DEFAULT_N_MAX)
    }

    pub fn with_n_max(hurst: f64, n_max: usize) -> Result<Self> {
        check_hurst(hurst)?;
        Ok(Self {
            hurst,
            n_max,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Jointly sample `d` independent fBM coordinates at sorted `times`.
    pub fn sample_at_times<R: Rng + ?Sized>(&self, times: &[f64], d: usize, rng: &mut R) -> Result<FractionalPath> {
        if d == 0 {
            return argument("dimension must be at least 1");
        }
        if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return argument("fBM times must be finite and nonnegative");
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return argument("fBM times must be sorted");
        }

        // Distinct positive times; `slot[i]` is the distinct index of times[i] (None at t = 0).
        let mut distinct: Vec<f64> = Vec::new();
        let mut slot: Vec<Option<usize>> = Vec::with_capacity(times.len());
        for &t in times {
            if t <= MERGE_TOL {
                slot.push(None);
                continue;
            }
            match distinct.last() {
                Some(&last) if t - last <= MERGE_TOL => {}
                _ => distinct.push(t),
            }
            slot.push(Some(distinct.len() - 1));
        }

        let m = distinct.len();
        let mut base = vec![0.0; m * d];
        if m > 0 {
            if self.hurst == 0.5 {
                self.brownian_values(&distinct, d, &mut base, rng);
            } else {
                if m > self.n_max {
                    return argument(format!("{m} distinct times exceed the dense fBM limit {}", self.n_max));
                }
                let l = self.factor(&distinct)?;
                let mut z = vec![0.0; m];
                for c in 0..d {
                    for zi in z.iter_mut() {
                        *zi = rng.sample(StandardNormal);
                    }
                    let mut level = 0.0;
                    for i in 0..m {
                        let row = &l[i * m..i * m + i + 1];
                        level += row.iter().zip(&z[..=i]).map(|(a, b)| a * b).sum::<f64>();
                        base[i * d + c] = level;
                    }
                }
            }
        }

        let mut values = vec![0.0; times.len() * d];
        for (i, s) in slot.iter().enumerate() {
            if let Some(k) = s {
                values[i * d..(i + 1) * d].copy_from_slice(&base[k * d..(k + 1) * d]);
            }
        }
        Ok(FractionalPath {
            hurst: self.hurst,
            dim: d,
            times: times.to_vec(),
            values,
        })
    }

    fn brownian_values<R: Rng + ?Sized>(&self, distinct: &[f64], d: usize, out: &mut [f64], rng: &mut R) {
        let mut prev_t = 0.0;
        for (i, &t) in distinct.iter().enumerate() {
            let sd = (t - prev_t).sqrt();
            for c in 0..d {
                let prev = if i == 0 { 0.0 } else { out[(i - 1) * d + c] };
                let z: f64 = rng.sample(StandardNormal);
                out[i * d + c] = prev + sd * z;
            }
            prev_t = t;
        }
    }

    /// Factor `L` with `L Lᵀ` the covariance of the increments over
    /// `[t_{i−1}, t_i]` (`t_{−1} = 0`), returned as `D^{1/2} L_R` where `L_R`
    /// factors the increment correlation matrix. Working with correlations
    /// keeps the factorization insensitive to the spread of interval lengths.
    fn factor(&self, times: &[f64]) -> Result<Arc<Vec<f64>>> {
        let n = times.len();
        let key = cache_key(self.hurst, times);
        if n <= CACHE_MAX_N {
            if let Some(l) = self.cache.read().expect("fbm cache poisoned").get(&key) {
                return Ok(Arc::clone(l));
            }
        }
        let starts: Vec<f64> = std::iter::once(0.0).chain(times[..n - 1].iter().copied()).collect();
        let lens: Vec<f64> = times.iter().zip(&starts).map(|(t, s)| t - s).collect();
        let e = 2.0 * self.hurst;
        let sd: Vec<f64> = lens.iter().map(|h| h.powf(self.hurst)).collect();
        let mut corr = vec![0.0; n * n];
        for i in 0..n {
            corr[i * n + i] = 1.0;
            for j in 0..i {
                let gap = starts[i] - times[j];
                let c = increment_cov(e, lens[j], gap, lens[i]) / (sd[i] * sd[j]);
                corr[i * n + j] = c;
                corr[j * n + i] = c;
            }
        }
        let (mut l, _) = cholesky_with_jitter(&corr, n)?;
        for i in 0..n {
            for v in &mut l[i * n..i * n + i + 1] {
                *v *= sd[i];
            }
        }
        let l = Arc::new(l);
        if n <= CACHE_MAX_N {
            let mut cache = self.cache.write().expect("fbm cache poisoned");
            if cache.len() >= CACHE_MAX_ENTRIES {
                cache.clear();
            }
            cache.insert(key, Arc::clone(&l));
        }
        Ok(l)
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, 8 points.
const GL_NODES: [f64; 8] = [
    0.019_855_071_751_231_912,
    0.101_666_761_293_186_64,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_8,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_1,
];
const GL_WEIGHTS: [f64; 8] = [
    0.050_614_268_145_188_344,
    0.111_190_517_226_687_17,
    0.156_853_322_938_943_52,
    0.181_341_891_689_180_88,
    0.181_341_891_689_180_88,
    0.156_853_322_938_943_52,
    0.111_190_517_226_687_17,
    0.050_614_268_145_188_344,
];

/// Covariance of fBM increments over `[a, a + h1]` and `[a + h1 + gap, … + h2]`
/// with `e = 2H`: `½[F(g+h1+h2) − F(g+h1) − F(g+h2) + F(g)]`, `F(x) = x^e`.
///
/// Far-apart intervals use the double-integral form `½∫∫ F''` by quadrature,
/// which avoids the cancellation of the four-term difference.
fn increment_cov(e: f64, h1: f64, gap: f64, h2: f64) -> f64 {
    let gap = gap.max(0.0);
    if gap > 2.0 * h1.max(h2) {
        let c = 0.5 * e * (e - 1.0) * h1 * h2;
        let mut sum = 0.0;
        for (x, wx) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            for (y, wy) in GL_NODES.iter().zip(&GL_WEIGHTS) {
                sum += wx * wy * (gap + x * h1 + y * h2).powf(e - 2.0);
            }
        }
        c * sum
    } else {
        let f = |x: f64| x.powf(e);
        0.5 * (f(gap + h1 + h2) - f(gap + h1) - f(gap + h2) + f(gap))
    }
}

fn cache_key(h: f64, times: &[f64]) -> CacheKey {
    let mut hasher = DefaultHasher::new();
    for t in times {
        t.to_bits().hash(&mut hasher);
    }
    (h.to_bits(), times.len(), hasher.finish())
}

/// Sample at arbitrary sorted times with a one-off sampler (default `n_max`).
pub fn sample_at_times<R: Rng + ?Sized>(h: f64, times: &[f64], d: usize, rng: &mut R) -> Result<FractionalPath> {
    FbmSampler::new(h)?.sample_at_times(times, d, rng)
}

/// Maximum number of embedding doublings tried before falling back to Cholesky.
const MAX_PADDING_DOUBLINGS: usize = 4;

/// Eigenvalues of the circulant embedding of fractional Gaussian noise of
/// length `n` into size `2m` (`m ≥ n`), unit step.
fn circulant_eigenvalues(h: f64, m: usize) -> Vec<f64> {
    let e = 2.0 * h;
    let gamma = |k: usize| {
        let k = k as f64;
        0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
    };
    let size = 2 * m;
    let mut row: Vec<Complex64> = (0..size)
        .map(|j| {
            let k = if j <= m { j } else { size - j };
            Complex64::new(gamma(k), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(size).process(&mut row);
    row.into_iter().map(|z| z.re).collect()
}

/// fBM on the uniform grid `k T / n`, `k = 0..=n`, via circulant embedding of
/// the increments. Falls back to the Cholesky sampler when the embedding is
/// not nonnegative after padding.
pub fn sample_uniform_grid<R: Rng + ?Sized>(
    h: f64,
    n: usize,
    horizon: f64,
    d: usize,
    rng: &mut R,
) -> Result<FractionalPath> {
    check_hurst(h)?;
    if !n.is_power_of_two() || n > 1 << 20 {
        return argument(format!("grid size must be a power of two ≤ 2^20, got {n}"));
    }
    if !(horizon > 0.0) {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    if d == 0 {
        return argument("dimension must be at least 1");
    }
    let times: Vec<f64> = (0..=n).map(|k| horizon * k as f64 / n as f64).collect();

    let mut m = n;
    let mut eig = None;
    for _ in 0..=MAX_PADDING_DOUBLINGS {
        let lam = circulant_eigenvalues(h, m);
        let max = lam.iter().copied().fold(0.0, f64::max);
        let min = lam.iter().copied().fold(f64::INFINITY, f64::min);
        if min >= -1e-10 * max {
            eig = Some(lam);
            break;
        }
        m *= 2;
    }
    let Some(eig) = eig else {
        if n + 1 > DEFAULT_N_MAX {
            return Err(Error::Numerical(format!(
                "circulant embedding is indefinite for H = {h}, n = {n}, and n exceeds the dense limit"
            )));
        }
        return sample_at_times(h, &times, d, rng);
    };

    let size = 2 * m;
    let fft = FftPlanner::new().plan_fft_forward(size);
    let scale = (horizon / n as f64).powf(h);
    let sqrt_eig: Vec<f64> = eig.iter().map(|&l| (l.max(0.0) / size as f64).sqrt()).collect();

    let mut values = vec![0.0; (n + 1) * d];
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    let mut c = 0;
    while c < d {
        for (b, s) in buf.iter_mut().zip(&sqrt_eig) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *b = Complex64::new(re, im) * *s;
        }
        fft.process(&mut buf);
        // Real and imaginary parts are independent noise sequences.
        for (part, coord) in [(0, c), (1, c + 1)] {
            if coord >= d {
                break;
            }
            let mut level = 0.0;
            for k in 0..n {
                let z = if part == 0 { buf[k].re } else { buf[k].im };
                level += scale * z;
                values[(k + 1) * d + coord] = level;
            }
        }
        c += 2;
    }
    Ok(FractionalPath {
        hurst: h,
        dim: d,
        times,
        values,
    })
}
