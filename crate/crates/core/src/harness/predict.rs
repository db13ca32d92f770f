//! Rate exponents predicted by the continuous, discrete and two-process theorems.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Upper bound for the continuous occupation measure.
    UpperTH2,
    /// Matching lower bound for subordinated Brownian motion.
    LowerTH1_1,
    /// Lower bound valid for every `p > 0`.
    LowerTH1_2,
    /// Time-discretized measure with step `τ = t^{−β}`.
    DiscreteW1TU,
    /// `E[W_p^p]` between two independent clouds in `R^d`.
    TwoProcessCor,
}

/// Exponent of `t` and whether a `√(log t)` factor accompanies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub exponent: f64,
    pub log_regime: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

const DIM_TOL: f64 = 1e-12;

fn regime(d: f64, threshold: f64) -> std::cmp::Ordering {
    if (d - threshold).abs() <= DIM_TOL {
        std::cmp::Ordering::Equal
    } else {
        d.total_cmp(&threshold)
    }
}

fn plain(exponent: f64) -> Prediction {
    Prediction {
        exponent,
        log_regime: false,
        note: None,
    }
}

fn with_log(exponent: f64) -> Prediction {
    Prediction {
        exponent,
        log_regime: true,
        note: None,
    }
}

fn check_common(d: usize, h: f64) -> Result<()> {
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    if !(h > 0.0 && h < 1.0) {
        return domain(format!("Hurst index must lie in (0, 1), got {h}"));
    }
    Ok(())
}

fn check_alpha_for_hurst(h: f64, alpha: f64) -> Result<()> {
    if h == 0.5 {
        if !(0.0..=1.0).contains(&alpha) {
            return domain(format!("growth index must lie in [0, 1] when H = 1/2, got {alpha}"));
        }
    } else if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("growth index must lie in (0, 1) when H ≠ 1/2, got {alpha}"));
    }
    Ok(())
}

fn check_p_at_least_one(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return domain(format!("order must satisfy p ≥ 1, got {p}"));
    }
    Ok(())
}

/// Piecewise exponent of `t` for the chosen theorem.
///
/// `alpha` is the growth index of the subordinator (of the first one for
/// [`Theorem::TwoProcessCor`]); `beta` is only read for
/// [`Theorem::DiscreteW1TU`].
pub fn predicted_exponent(theorem: Theorem, d: usize, h: f64, alpha: f64, p: f64, beta: f64) -> Result<Prediction> {
    use std::cmp::Ordering::*;
    check_common(d, h)?;
    let df = d as f64;
    let r = alpha / h;
    match theorem {
        Theorem::UpperTH2 => {
            check_alpha_for_hurst(h, alpha)?;
            check_p_at_least_one(p)?;
            Ok(match regime(df, 2.0 + r) {
                Less => plain(-0.5),
                Equal => with_log(-0.5),
                Greater => plain(-1.0 / (df - r)),
            })
        }
        Theorem::LowerTH1_1 => {
            if h != 0.5 {
                return domain(format!("this lower bound needs H = 1/2, got {h}"));
            }
            check_alpha_for_hurst(h, alpha)?;
            check_p_at_least_one(p)?;
            Ok(match regime(df, 2.0 * (1.0 + alpha)) {
                Less => plain(-0.5),
                Equal => with_log(-0.5),
                Greater => plain(-1.0 / (df - 2.0 * alpha)),
            })
        }
        Theorem::LowerTH1_2 => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return domain(format!("growth index must lie in (0, 1], got {alpha}"));
            }
            if !(p > 0.0) {
                return domain(format!("order must be positive, got {p}"));
            }
            if !(df > r) {
                return domain(format!("this lower bound needs d > α/H, got d = {d}, α/H = {r}"));
            }
            Ok(plain(-p.min(1.0) / (df - r)))
        }
        Theorem::DiscreteW1TU => {
            if !(beta > 0.0) || !beta.is_finite() {
                return domain(format!("discretization exponent must satisfy β > 0, got {beta}"));
            }
            if !(alpha > 0.0 && alpha <= 1.0) {
                return domain(format!("growth index must lie in (0, 1], got {alpha}"));
            }
            let q = (1.0 + beta) / df;
            if d <= 2 {
                return Ok(plain(-0.5));
            }
            Ok(match regime(df, 2.0 + r) {
                Less => plain(-(0.5f64.min(q))),
                Equal if q >= 0.5 => with_log(-0.5),
                Equal => plain(-q),
                Greater => Prediction {
                    exponent: -(1.0 / (df - r)).min(q),
                    log_regime: false,
                    note: Some("exponent above the critical dimension read as min{1/(d − α/H), (1+β)/d}".into()),
                },
            })
        }
        Theorem::TwoProcessCor => {
            if h != 0.5 {
                return domain(format!("the two-process bound needs H = 1/2, got {h}"));
            }
            check_alpha_for_hurst(h, alpha)?;
            check_p_at_least_one(p)?;
            Ok(match regime(df, 2.0 * (1.0 + alpha)) {
                Less => plain(-p / 2.0),
                Equal => with_log(-p / 2.0),
                Greater => plain(-p / (df - 2.0 * alpha)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(th: Theorem, d: usize, h: f64, a: f64, p: f64, beta: f64) -> Prediction {
        predicted_exponent(th, d, h, a, p, beta).unwrap()
    }

    #[test]
    fn continuous_upper_rows() {
        assert_eq!(ex(Theorem::UpperTH2, 1, 0.5, 1.0, 1.0, 0.0), plain(-0.5));
        assert_eq!(ex(Theorem::UpperTH2, 4, 0.5, 1.0, 1.0, 0.0), with_log(-0.5));
        let p = ex(Theorem::UpperTH2, 5, 0.5, 1.0, 1.0, 0.0);
        assert!((p.exponent + 1.0 / 3.0).abs() < 1e-15 && !p.log_regime);
        let p = ex(Theorem::UpperTH2, 4, 0.5, 0.5, 2.0, 0.0);
        assert!((p.exponent + 1.0 / 3.0).abs() < 1e-15);
        assert!(ex(Theorem::UpperTH2, 3, 0.5, 0.5, 1.0, 0.0).log_regime);
    }

    #[test]
    fn lower_rows() {
        assert_eq!(ex(Theorem::LowerTH1_1, 3, 0.5, 0.5, 1.0, 0.0), with_log(-0.5));
        let p = ex(Theorem::LowerTH1_1, 5, 0.5, 1.0, 1.0, 0.0);
        assert!((p.exponent + 1.0 / 3.0).abs() < 1e-15);
        let p = ex(Theorem::LowerTH1_2, 3, 0.75, 0.5, 0.5, 0.0);
        assert!((p.exponent + 0.5 / (3.0 - 2.0 / 3.0)).abs() < 1e-15);
        assert!(predicted_exponent(Theorem::LowerTH1_2, 1, 0.25, 0.5, 1.0, 0.0).is_err());
        assert!(predicted_exponent(Theorem::LowerTH1_1, 3, 0.7, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn discrete_rows() {
        assert_eq!(ex(Theorem::DiscreteW1TU, 1, 0.5, 1.0, 1.0, 1.0), plain(-0.5));
        assert_eq!(ex(Theorem::DiscreteW1TU, 3, 0.5, 0.5, 1.0, 2.0), with_log(-0.5));
        let p = ex(Theorem::DiscreteW1TU, 3, 0.5, 0.5, 1.0, 0.2);
        assert!((p.exponent + 0.4).abs() < 1e-15 && !p.log_regime);
        let p = ex(Theorem::DiscreteW1TU, 3, 0.5, 1.0, 1.0, 0.2);
        assert!((p.exponent + 0.4).abs() < 1e-15);
        let p = ex(Theorem::DiscreteW1TU, 5, 0.5, 1.0, 1.0, 1.0);
        assert!((p.exponent + 1.0 / 3.0).abs() < 1e-15);
        let p = ex(Theorem::DiscreteW1TU, 5, 0.5, 1.0, 1.0, 0.5);
        assert!((p.exponent + 0.3).abs() < 1e-15);
        assert!(p.note.is_some());
        assert!(predicted_exponent(Theorem::DiscreteW1TU, 1, 0.5, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn two_process_rows() {
        assert_eq!(ex(Theorem::TwoProcessCor, 1, 0.5, 1.0, 1.0, 0.0), plain(-0.5));
        assert_eq!(ex(Theorem::TwoProcessCor, 4, 0.5, 1.0, 2.0, 0.0), with_log(-1.0));
        let p = ex(Theorem::TwoProcessCor, 5, 0.5, 1.0, 1.0, 0.0);
        assert!((p.exponent + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hypotheses_are_enforced() {
        assert!(predicted_exponent(Theorem::UpperTH2, 2, 0.75, 1.0, 1.0, 0.0).is_err());
        assert!(predicted_exponent(Theorem::UpperTH2, 2, 0.5, 1.0, 0.5, 0.0).is_err());
        assert!(predicted_exponent(Theorem::UpperTH2, 0, 0.5, 1.0, 1.0, 0.0).is_err());
        assert!(predicted_exponent(Theorem::UpperTH2, 2, 1.0, 0.5, 1.0, 0.0).is_err());
    }
}
