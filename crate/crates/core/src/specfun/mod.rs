//! Special functions and coefficient sequences.

pub mod gamma;
mod coeffs;
mod hypergeometric;
mod mittag_leffler;

use serde::{Deserialize, Serialize};

use crate::error::{ErwsError, Result};

pub use coeffs::{coeff_a, coeff_b, coeff_bm, pochhammer, stirling1u, STIRLING_MAX};
pub use gamma::log_gamma;
pub use hypergeometric::{hurwitz_zeta, v_limit, v_partial};
pub use mittag_leffler::{ml_density, ml_density_bounded, ml_mgf, ml_moment, DensityValue};

/// Truncation control for the infinite series in this module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-14,
            max_terms: 1_000_000,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        let ctl = SeriesControl { rel_tol, max_terms };
        ctl.check()?;
        Ok(ctl)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_terms < 1 {
            return Err(ErwsError::domain(format!(
                "series control needs rel_tol > 0 and max_terms >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Mittag-Leffler parameter. In this crate `alpha = 1 - r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    pub alpha: f64,
}

impl MLParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ErwsError::domain(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(MLParams { alpha })
    }

    pub fn mgf(&self, t: f64, ctl: &SeriesControl) -> Result<f64> {
        ml_mgf(self.alpha, t, ctl)
    }

    pub fn density(&self, x: f64, ctl: &SeriesControl) -> Result<f64> {
        ml_density(self.alpha, x, ctl)
    }

    pub fn moment(&self, m: u32) -> f64 {
        ml_moment(self.alpha, m)
    }
}
