//! The martingales M_n = a_n S_n and N_n = b_n Σ_n along a simulated path,
//! their variation processes, and LIL-scaled diagnostics.
//!
//! With α_n = 1 + a/n and β_n = 1 + b/n the increments are
//! ε_n = S_n - α_{n-1} S_{n-1} and ξ_n = Σ_n - β_{n-1} Σ_{n-1} (ε_1 = S_1,
//! ξ_1 = Σ_1), and
//!
//! ```text
//! ⟨M⟩_n = 1 + b V_n - a² W_n,
//! V_n = Σ_{k<n} a_{k+1}² Σ_k / k,   W_n = Σ_{k<n} a_{k+1}² (S_k / k)²,
//! [M]_n = Σ_{k<=n} a_k² ε_k².
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{ErwsError, Result};
use crate::params::{DerivedConstants, Regime};
use crate::simulator::PathRecord;
use crate::specfun::{coeff_a, coeff_b};

/// Values of every tracked process at the path's checkpoints.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MartingaleTrack {
    pub n: Vec<u64>,
    /// a_n S_n with a_n from the Gamma ratio.
    pub m: Vec<f64>,
    /// b_n Σ_n with b_n from the Gamma ratio.
    #[serde(rename = "N")]
    pub n_mart: Vec<f64>,
    /// Σ_{k<=n} a_k ε_k.
    pub m_additive: Vec<f64>,
    /// Σ_{k<=n} b_k ξ_k.
    pub n_additive: Vec<f64>,
    /// 1 + b V_n - a² W_n.
    pub predvar: Vec<f64>,
    /// Σ_k a_k² E[ε_k² | F_{k-1}] accumulated term by term.
    pub predvar_direct: Vec<f64>,
    pub quadvar: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// Largest ε_k² seen up to the checkpoint.
    pub max_eps2: Vec<f64>,
    /// Largest relative gap between the recurrence coefficients and the
    /// Gamma-ratio values over all checkpoints.
    pub coeff_drift: f64,
}

impl MartingaleTrack {
    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }
}

/// Walk the recorded increments once and fill a [`MartingaleTrack`].
///
/// a_k and b_k follow a_{k+1} = a_k / α_k and b_{k+1} = b_k / β_k; at each
/// checkpoint they are compared with [`coeff_a`]/[`coeff_b`] and reset to
/// them, so rounding cannot accumulate across checkpoints.
pub fn track(path: &PathRecord, c: &DerivedConstants) -> Result<MartingaleTrack> {
    let steps = path.increments.as_deref().ok_or(ErwsError::MissingIncrements)?;
    let (a, b) = (c.a, c.b);
    let mut out = MartingaleTrack::default();
    let mut cps = path.checkpoints.iter().peekable();

    let (mut s, mut sigma) = (0i64, 0u64);
    let (mut ak, mut bk) = (1.0f64, 1.0f64);
    let (mut m_add, mut n_add) = (0.0f64, 0.0f64);
    let (mut v, mut w, mut direct, mut qv, mut max_eps2) = (0.0f64, 0.0, 0.0, 0.0, 0.0f64);

    for (idx, &x) in steps.iter().enumerate() {
        let k = idx as u64 + 1;
        if k > 1 {
            let km1 = (k - 1) as f64;
            let (alpha, beta) = (1.0 + a / km1, 1.0 + b / km1);
            ak /= alpha;
            bk /= beta;
            let sk = s as f64 / km1;
            let sig = sigma as f64 / km1;
            let a2 = ak * ak;
            v += a2 * sig;
            w += a2 * sk * sk;
            direct += a2 * (b * sig - (a * sk) * (a * sk));
        } else {
            direct = 1.0;
        }
        let (s_prev, sigma_prev) = (s, sigma);
        s += x as i64;
        sigma += (x != 0) as u64;
        let (eps, xi) = if k == 1 {
            (s as f64, sigma as f64)
        } else {
            let km1 = (k - 1) as f64;
            (
                x as f64 - a * s_prev as f64 / km1,
                (x != 0) as u8 as f64 - b * sigma_prev as f64 / km1,
            )
        };
        m_add += ak * eps;
        n_add += bk * xi;
        qv += ak * ak * eps * eps;
        max_eps2 = max_eps2.max(eps * eps);

        while let Some(cp) = cps.peek() {
            if cp.n < k {
                cps.next();
                continue;
            }
            break;
        }
        if cps.peek().is_some_and(|cp| cp.n == k) {
            cps.next();
            let a_exact = coeff_a(k, a)?;
            let b_exact = coeff_b(k, b)?;
            let drift = ((ak - a_exact) / a_exact).abs().max(((bk - b_exact) / b_exact).abs());
            out.coeff_drift = out.coeff_drift.max(drift);
            ak = a_exact;
            bk = b_exact;
            out.n.push(k);
            out.m.push(a_exact * s as f64);
            out.n_mart.push(b_exact * sigma as f64);
            out.m_additive.push(m_add);
            out.n_additive.push(n_add);
            out.predvar.push(1.0 + b * v - a * a * w);
            out.predvar_direct.push(direct);
            out.quadvar.push(qv);
            out.v.push(v);
            out.w.push(w);
            out.max_eps2.push(max_eps2);
        }
    }
    Ok(out)
}

/// The LIL-scaled statistic at one point of a path.
///
/// * diffusive: S_n / sqrt(2 Σ_n log log Σ_n), needs Σ_n > e;
/// * critical: S_n / sqrt(2 Σ_n log Σ_n log log log Σ_n), needs Σ_n > e^e;
/// * superdiffusive: S_n / n^a, the quantity converging to L.
///
/// These are diagnostics only; their limsup behaviour cannot be checked at
/// finite n.
pub fn lil_statistic(n: u64, s: i64, sigma: u64, c: &DerivedConstants) -> Result<f64> {
    let sg = sigma as f64;
    match c.regime {
        Regime::Diffusive => {
            if sg <= std::f64::consts::E {
                return Err(ErwsError::domain(format!(
                    "diffusive LIL scaling needs Sigma > e, got {sigma}"
                )));
            }
            Ok(s as f64 / (2.0 * sg * sg.ln().ln()).sqrt())
        }
        Regime::Critical => {
            if sg <= std::f64::consts::E.powf(std::f64::consts::E) {
                return Err(ErwsError::domain(format!(
                    "critical LIL scaling needs Sigma > e^e, got {sigma}"
                )));
            }
            let l = sg.ln();
            Ok(s as f64 / (2.0 * sg * l * l.ln().ln()).sqrt())
        }
        Regime::Superdiffusive => Ok(s as f64 / (n as f64).powf(c.a)),
    }
}

/// [`lil_statistic`] at every checkpoint; `None` where the scaling is
/// undefined.
pub fn lil_statistics(path: &PathRecord, c: &DerivedConstants) -> Vec<Option<f64>> {
    path.checkpoints
        .iter()
        .map(|cp| lil_statistic(cp.n, cp.s, cp.sigma, c).ok())
        .collect()
}
