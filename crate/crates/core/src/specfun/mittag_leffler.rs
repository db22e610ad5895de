//! Mittag-Leffler function, Pollard density and moments.

use std::f64::consts::PI;

use super::gamma::{gamma, ln_gamma, ln_gamma_ratio, sin_pi};
use super::SeriesControl;
use crate::error::{ErwsError, Result};

/// Relative rounding budget above which the density is refused.
///
/// Once x grows the Pollard series alternates with terms many orders of
/// magnitude above the sum. The estimate compared against this budget is a
/// first-order worst case (every term off by its accumulated recurrence
/// error, all errors aligned); observed errors are two orders of magnitude
/// smaller.
pub const DENSITY_ROUNDING_REL: f64 = 1e-2;

/// Cancellation budget of [`ml_mgf`] relative to `sqrt(rel_tol)`.
const MGF_ROUNDING_FACTOR: f64 = 1.0;

/// E_α(t) = Σ_{n>=0} t^n / Γ(1 + nα).
///
/// Any `alpha >= 0` is accepted (E_2 included). Truncation stops once the
/// geometric bound on the remaining terms drops below `rel_tol · |sum|`.
/// The bound is rigorous because the term ratio
/// `|t| Γ(1 + nα) / Γ(1 + (n+1)α)` is non-increasing in n (log-convexity of
/// Γ). The call fails when cancellation between terms of opposite sign
/// could have destroyed more than `sqrt(rel_tol)` of the result.
pub fn ml_mgf(alpha: f64, t: f64, ctl: &SeriesControl) -> Result<f64> {
    ctl.check()?;
    if !(alpha >= 0.0) || !alpha.is_finite() || !t.is_finite() {
        return Err(ErwsError::domain(format!("ml_mgf needs alpha >= 0 and finite t, got ({alpha}, {t})")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if alpha == 0.0 && t.abs() >= 1.0 {
        return Err(ErwsError::ConvergenceFailure(format!(
            "E_0(t) = 1/(1-t) only converges for |t| < 1, got t = {t}"
        )));
    }
    let ln_abs_t = t.abs().ln();
    let negative = t < 0.0;
    let log_term = |n: usize| n as f64 * ln_abs_t - ln_gamma(1.0 + n as f64 * alpha);

    let mut sum = 1.0;
    let mut abs_sum = 1.0;
    let mut rounding = 0.0;
    for n in 1..=ctl.max_terms {
        let lt = log_term(n);
        let mag = lt.exp();
        if !mag.is_finite() {
            return Err(ErwsError::ConvergenceFailure(format!("E_{alpha}({t}) overflows")));
        }
        let term = if negative && n % 2 == 1 { -mag } else { mag };
        sum += term;
        abs_sum += mag;
        rounding += mag * (lt.abs() + 2.0);

        let next = log_term(n + 1);
        let ratio = (log_term(n + 2) - next).exp();
        if ratio < 1.0 {
            let tail = next.exp() / (1.0 - ratio);
            if tail <= ctl.rel_tol * sum.abs() {
                let round_est = f64::EPSILON * rounding.max(abs_sum);
                if round_est > MGF_ROUNDING_FACTOR * ctl.rel_tol.sqrt() * sum.abs() {
                    return Err(ErwsError::ConvergenceFailure(format!(
                        "E_{alpha}({t}): cancellation, rounding estimate {round_est:e} vs |sum| {:e}",
                        sum.abs()
                    )));
                }
                return Ok(sum);
            }
        }
    }
    Err(ErwsError::ConvergenceFailure(format!(
        "E_{alpha}({t}) not converged within {} terms",
        ctl.max_terms
    )))
}

/// A density value together with its error budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    /// Bound on the absolute truncation error.
    pub tail_bound: f64,
    /// Worst-case estimate of the accumulated absolute rounding error.
    pub rounding_bound: f64,
    pub terms: usize,
}

/// Pollard's series for the Mittag-Leffler density with the error budget.
///
/// `f_α(x) = 1/(πα) Σ_{n>=1} (-1)^{n-1} Γ(1+αn) sin(αnπ) x^{n-1} / n!` for
/// `x > 0`, and 0 for `x <= 0`. A value is returned only when the truncation
/// bound is below `rel_tol · |f|` and the rounding estimate is below
/// [`DENSITY_ROUNDING_REL`] `· |f|`; otherwise the point is outside the
/// certified domain and the call fails.
pub fn ml_density_bounded(alpha: f64, x: f64, ctl: &SeriesControl) -> Result<DensityValue> {
    ctl.check()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ErwsError::domain(format!("ml_density needs 0 < alpha < 1, got {alpha}")));
    }
    if x.is_nan() {
        return Err(ErwsError::domain("ml_density at NaN"));
    }
    if x <= 0.0 {
        return Ok(DensityValue {
            value: 0.0,
            tail_bound: 0.0,
            rounding_bound: 0.0,
            terms: 0,
        });
    }
    if !x.is_finite() {
        return Err(ErwsError::ConvergenceFailure("ml_density at +inf".into()));
    }
    // Terms m_n = Γ(1+αn) x^{n-1} / (πα n!) by the ratio
    // m_{n+1} / m_n = x Γ(1+α(n+1)) / (Γ(1+αn) (n+1)).
    let ratio = |n: usize| {
        let nf = n as f64;
        x * ln_gamma_ratio(1.0 + alpha * nf, alpha).exp() / (nf + 1.0)
    };
    // From this index on the ratio is non-increasing.
    let monotone_from = (alpha / (1.0 - alpha)).ceil() as usize + 2;

    let mut mag = gamma(1.0 + alpha) / (PI * alpha);
    let mut sum = 0.0;
    let mut rounding = 0.0;
    for n in 1..=ctl.max_terms {
        if !mag.is_finite() {
            break;
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * mag * sin_pi(alpha * n as f64);
        // Each recurrence step and the sine argument cost a few ulps.
        rounding += mag * (6 * n + 4) as f64;

        let next = mag * ratio(n);
        if n + 1 >= monotone_from {
            let rho = ratio(n + 1);
            if rho < 1.0 {
                let tail = next / (1.0 - rho);
                if tail <= ctl.rel_tol * sum.abs() {
                    let rounding_bound = f64::EPSILON * rounding;
                    if rounding_bound > DENSITY_ROUNDING_REL * sum.abs() {
                        break;
                    }
                    return Ok(DensityValue {
                        value: sum,
                        tail_bound: tail,
                        rounding_bound,
                        terms: n,
                    });
                }
            }
        }
        mag = next;
    }
    Err(ErwsError::ConvergenceFailure(format!(
        "Pollard series for f_{alpha}({x}) cannot be certified"
    )))
}

/// Mittag-Leffler density f_α(x) on the certified domain.
pub fn ml_density(alpha: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    ml_density_bounded(alpha, x, ctl).map(|d| d.value)
}

/// m-th moment m! / Γ(1 + mα) of the Mittag-Leffler law.
pub fn ml_moment(alpha: f64, m: u32) -> f64 {
    let mf = m as f64;
    (ln_gamma(mf + 1.0) - ln_gamma(1.0 + mf * alpha)).exp()
}
