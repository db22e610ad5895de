//! Model parameters and the constants derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{ErwsError, Result};
use crate::specfun::gamma::ln_gamma;

/// Tolerance on p + q + r = 1 and on the critical tie 2a = b.
pub const SIMPLEX_TOL: f64 = 1e-12;
pub const CRITICAL_TOL: f64 = 1e-12;

/// Step probabilities: `p` repeat the remembered step, `q` reverse it,
/// `r` stay put. `s` is P(X_1 = +1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Diffusive,
    Critical,
    Superdiffusive,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Regime::Diffusive => "diffusive",
            Regime::Critical => "critical",
            Regime::Superdiffusive => "superdiffusive",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// The validated (possibly renormalized) parameters.
    pub params: WalkParams,
    pub a: f64,
    pub b: f64,
    pub p_r: f64,
    pub regime: Regime,
    /// b / (b - 2a), diffusive only.
    pub sigma_r2: Option<f64>,
    /// b / (2a - b), superdiffusive only.
    pub tau_r2: Option<f64>,
    /// Γ(a+1)² / ((b - 2a) Γ(b+1)), the growth constant of v_n / n^{b-2a}.
    pub ell_r: Option<f64>,
    /// 2p + r - 1, the superdiffusive scaling exponent. Equals `a`.
    pub sd_exponent: f64,
}

impl WalkParams {
    pub fn new(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        validate(p, q, r, s).map(|c| c.params)
    }

    pub fn derived(&self) -> Result<DerivedConstants> {
        validate(self.p, self.q, self.r, self.s)
    }
}

/// Check the simplex, renormalize within [`SIMPLEX_TOL`], and derive every
/// constant.
pub fn validate(p: f64, q: f64, r: f64, s: f64) -> Result<DerivedConstants> {
    for (name, v) in [("p", p), ("q", q), ("r", r), ("s", s)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ErwsError::InvalidSimplex(format!("{name} = {v} is outside [0, 1]")));
        }
    }
    let total = p + q + r;
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(ErwsError::InvalidSimplex(format!("p + q + r = {total}, expected 1")));
    }
    let (p, q, r) = if total == 1.0 { (p, q, r) } else { (p / total, q / total, r / total) };
    if q >= 1.0 - SIMPLEX_TOL {
        return Err(ErwsError::DegenerateParameters(
            "q = 1 gives a = -1, a pole of Γ(a + 1)".into(),
        ));
    }
    if r >= 1.0 - SIMPLEX_TOL {
        return Err(ErwsError::DegenerateParameters(
            "r = 1 freezes the walk after the first step".into(),
        ));
    }
    let a = p - q;
    let b = p + q;
    let gap = b - 2.0 * a;
    let regime = if gap.abs() <= CRITICAL_TOL {
        Regime::Critical
    } else if gap > 0.0 {
        Regime::Diffusive
    } else {
        Regime::Superdiffusive
    };
    let (sigma_r2, ell_r) = match regime {
        Regime::Diffusive => {
            let ell = (2.0 * ln_gamma(a + 1.0) - ln_gamma(b + 1.0)).exp() / gap;
            (Some(b / gap), Some(ell))
        }
        _ => (None, None),
    };
    let tau_r2 = match regime {
        Regime::Superdiffusive => Some(b / -gap),
        _ => None,
    };
    Ok(DerivedConstants {
        params: WalkParams { p, q, r, s },
        a,
        b,
        p_r: p / b,
        regime,
        sigma_r2,
        tau_r2,
        ell_r,
        sd_exponent: 2.0 * p + r - 1.0,
    })
}
