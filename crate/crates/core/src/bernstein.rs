//! Bernstein functions with closed-form Laplace exponents.
//!
//! Each function is `B(λ) = b·λ + base(λ)` where `base` is one of the
//! supported kinds. Only kinds with closed-form exponent and Lévy density are
//! offered; that covers the identity clock, stable and tempered stable
//! subordinators, and stable-plus-drift.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::gamma;

use crate::error::{argument, domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BernsteinKind {
    /// `B(λ) = λ`: the subordinator is the identity clock `S_t = t`.
    Identity,
    /// `B(λ) = λ^α`.
    Stable,
    /// `B(λ) = (1 + λ)^α − 1`, the exponentially tilted stable law.
    TemperedStable,
    /// `B(λ) = b·λ + λ^α`.
    DriftPlusStable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinFunction {
    kind: BernsteinKind,
    alpha: f64,
    drift: f64,
}

impl BernsteinFunction {
    pub fn identity() -> Self {
        Self {
            kind: BernsteinKind::Identity,
            alpha: 1.0,
            drift: 0.0,
        }
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            kind: BernsteinKind::Stable,
            alpha,
            drift: 0.0,
        })
    }

    pub fn tempered_stable(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            kind: BernsteinKind::TemperedStable,
            alpha,
            drift: 0.0,
        })
    }

    pub fn drift_plus_stable(drift: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(drift >= 0.0) || !drift.is_finite() {
            return domain(format!("drift must be a finite nonnegative number, got {drift}"));
        }
        Ok(Self {
            kind: BernsteinKind::DriftPlusStable,
            alpha,
            drift,
        })
    }

    /// Build from the serialized triple, validating the parameters.
    pub fn from_parts(kind: BernsteinKind, alpha: Option<f64>, drift: f64) -> Result<Self> {
        let need_alpha = || alpha.ok_or_else(|| crate::Error::Config(format!("{kind:?} needs alpha")));
        let mut b = match kind {
            BernsteinKind::Identity => Self::identity(),
            BernsteinKind::Stable => Self::stable(need_alpha()?)?,
            BernsteinKind::TemperedStable => Self::tempered_stable(need_alpha()?)?,
            BernsteinKind::DriftPlusStable => return Self::drift_plus_stable(drift, need_alpha()?),
        };
        if drift != 0.0 {
            if !(drift > 0.0) || !drift.is_finite() {
                return domain(format!("drift must be a finite nonnegative number, got {drift}"));
            }
            b.drift = drift;
        }
        Ok(b)
    }

    pub fn kind(&self) -> BernsteinKind {
        self.kind
    }

    /// Growth index: `α` for the stable kinds, 1 for the identity clock.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Index `α` with `B(λ) ≍ λ^α` at infinity: 1 once a drift is present.
    pub fn growth_index(&self) -> f64 {
        if self.drift > 0.0 {
            1.0
        } else {
            self.alpha
        }
    }

    /// Stable index of the jump part, if there is one.
    pub fn stable_index(&self) -> Option<f64> {
        match self.kind {
            BernsteinKind::Identity => None,
            _ => Some(self.alpha),
        }
    }

    /// `B(λ)`.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return domain(format!("Bernstein functions are evaluated at λ ≥ 0, got {lambda}"));
        }
        Ok(self.eval_unchecked(lambda))
    }

    pub(crate) fn eval_unchecked(&self, lambda: f64) -> f64 {
        let base = match self.kind {
            BernsteinKind::Identity => lambda,
            BernsteinKind::Stable | BernsteinKind::DriftPlusStable => lambda.powf(self.alpha),
            // (1+λ)^α − 1 without cancellation for small λ
            BernsteinKind::TemperedStable => (self.alpha * lambda.ln_1p()).exp_m1(),
        };
        self.drift * lambda + base
    }

    /// Density of the Lévy measure at `y > 0`; zero for the identity clock.
    pub fn levy_density(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return domain(format!("Lévy density is defined for y > 0, got {y}"));
        }
        let a = self.alpha;
        Ok(match self.kind {
            BernsteinKind::Identity => 0.0,
            BernsteinKind::Stable | BernsteinKind::DriftPlusStable => a / gamma(1.0 - a) * y.powf(-1.0 - a),
            BernsteinKind::TemperedStable => a / gamma(1.0 - a) * (-y).exp() * y.powf(-1.0 - a),
        })
    }

    /// `B'(0)`; `+∞` for the pure stable kinds.
    pub fn derivative_at_zero(&self) -> f64 {
        match self.kind {
            BernsteinKind::Identity => 1.0 + self.drift,
            BernsteinKind::Stable | BernsteinKind::DriftPlusStable => f64::INFINITY,
            BernsteinKind::TemperedStable => self.alpha + self.drift,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("stable index must lie in (0, 1), got {alpha}"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBernstein {
    kind: BernsteinKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default)]
    drift: f64,
}

impl Serialize for BernsteinFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawBernstein {
            kind: self.kind,
            alpha: self.stable_index(),
            drift: self.drift,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BernsteinFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawBernstein::deserialize(d)?;
        Self::from_parts(raw.kind, raw.alpha, raw.drift).map_err(serde::de::Error::custom)
    }
}

/// Outcome of the finite-grid screen for the growth classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundScreen {
    /// `B(λ) ≥ c·min{λ^α, λ}` is plausible on the grid.
    pub lower_ok: bool,
    /// `B(λ) ≤ c·λ^α` is plausible on the grid.
    pub upper_ok: bool,
    /// Smallest observed `B(λ) / min{λ^α, λ}`.
    pub lower_witness: f64,
    /// Largest observed `B(λ) / λ^α`.
    pub upper_witness: f64,
}

/// Largest log-log drift of a ratio over the top decade that still counts as bounded.
const RATIO_DRIFT_TOL: f64 = 0.05;

/// Screen membership of `B` in the lower and upper growth classes of index `alpha`.
///
/// A ratio is accepted as bounded away from zero (resp. bounded) when its
/// witness is positive and finite and its log-log slope over the top decade
/// of the grid is at least `−0.05` (resp. at most `0.05`). The classes are
/// defined through limits as `λ → ∞`, which no finite grid certifies.
pub fn classify_bounds(b: &BernsteinFunction, alpha: f64, grid: &[f64]) -> Result<BoundScreen> {
    if grid.is_empty() {
        return argument("classify_bounds: empty λ grid");
    }
    if grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return argument("classify_bounds: grid points must be positive and finite");
    }
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    if hi / lo < 1e4 {
        return argument("classify_bounds: grid must span at least four decades");
    }
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("class index must lie in [0, 1], got {alpha}"));
    }

    let mut pts: Vec<f64> = grid.to_vec();
    pts.sort_by(f64::total_cmp);
    let lower: Vec<f64> = pts
        .iter()
        .map(|&l| b.eval_unchecked(l) / l.powf(alpha).min(l))
        .collect();
    let upper: Vec<f64> = pts.iter().map(|&l| b.eval_unchecked(l) / l.powf(alpha)).collect();

    let lower_witness = lower.iter().copied().fold(f64::INFINITY, f64::min);
    let upper_witness = upper.iter().copied().fold(0.0, f64::max);

    let top = top_decade_start(&pts);
    let lower_drift = log_slope(&pts[top..], &lower[top..]);
    let upper_drift = log_slope(&pts[top..], &upper[top..]);

    Ok(BoundScreen {
        lower_ok: lower_witness > 0.0 && lower_witness.is_finite() && lower_drift >= -RATIO_DRIFT_TOL,
        upper_ok: upper_witness.is_finite() && upper_drift <= RATIO_DRIFT_TOL,
        lower_witness,
        upper_witness,
    })
}

fn top_decade_start(sorted: &[f64]) -> usize {
    let cut = sorted[sorted.len() - 1] / 10.0;
    let idx = sorted.partition_point(|&l| l < cut);
    idx.min(sorted.len().saturating_sub(2))
}

fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let (x0, x1) = (x[0], x[x.len() - 1]);
    let (y0, y1) = (y[0], y[y.len() - 1]);
    if x1 == x0 {
        return 0.0;
    }
    (y1 / y0).ln() / (x1 / x0).ln()
}
