//! Exact finite-n moments of S_n and Σ_n, limit moments, and the
//! path-enumeration oracle.
//!
//! Notation: `G(x) = Γ(n+x) / (Γ(n) Γ(x))` and `H(x) = Γ(n+x) / (Γ(n) Γ(x+1))`,
//! so `a_n = 1/H(a)`, `b_n = 1/H(b)` and `E[Σ_n^{(m)}] = m! H(mb)`.
//!
//! The closed forms for E[S_n²], E[S_n²Σ_n], E[S_n³] and E[S_n⁴] divide by
//! `2a - b` (and E[S_n⁴] also by `4a - b`). Those removable singularities
//! cost about `eps / gap²` in accuracy, so near them the moments are taken
//! from the one-step recursions instead; see [`CLOSED_FORM_MIN_GAP`].

mod oracle;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ErwsError, Result};
use crate::params::{DerivedConstants, Regime};
use crate::specfun::gamma::{gamma_ratio_g, gamma_ratio_h, ln_gamma};
use crate::specfun::{ml_moment, stirling1u, STIRLING_MAX};

pub use oracle::{brute_force_oracle, oracle_table, PathView, ORACLE_MAX_N};

/// Smallest |2a - b| and |4a - b| at which the closed forms are used.
pub const CLOSED_FORM_MIN_GAP: f64 = 0.05;

fn g(x: f64, n: u64) -> f64 {
    gamma_ratio_g(x, n)
}

fn h(x: f64, n: u64) -> f64 {
    gamma_ratio_h(x, n)
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(ErwsError::domain("moments need n >= 1"));
    }
    Ok(())
}

fn sign_mean(c: &DerivedConstants) -> f64 {
    2.0 * c.params.s - 1.0
}

/// Moments obtained by running the exact one-step recursions from n = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursiveMoments {
    pub n: u64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub s_sigma: f64,
    pub s2_sigma: f64,
}

/// Propagate E[f(S_n, Σ_n)] for the needed monomials from n = 1.
///
/// With `E[X | F_n] = aS/n` and `E[X² | F_n] = bΣ/n` (X³ = X, X⁴ = X²):
///
/// ```text
/// E S'   = (1 + a/n) E S
/// E S'²  = (1 + 2a/n) E S² + (b/n) E Σ
/// E S'³  = (1 + 3a/n) E S³ + (3b/n) E SΣ + (a/n) E S
/// E S'⁴  = (1 + 4a/n) E S⁴ + (6b/n) E S²Σ + (4a/n) E S² + (b/n) E Σ
/// E Σ'   = (1 + b/n) E Σ
/// E Σ'²  = (1 + 2b/n) E Σ² + (b/n) E Σ
/// E S'Σ' = (1 + (a+b)/n) E SΣ + (a/n) E S
/// E S'²Σ'= (1 + (2a+b)/n) E S²Σ + (2a/n) E S² + (b/n) E Σ² + (b/n) E Σ
/// ```
pub fn recursive_moments(c: &DerivedConstants, n: u64) -> Result<RecursiveMoments> {
    check_n(n)?;
    let (a, b) = (c.a, c.b);
    let m1 = sign_mean(c);
    let mut r = RecursiveMoments {
        n: 1,
        s1: m1,
        s2: 1.0,
        s3: m1,
        s4: 1.0,
        sigma1: 1.0,
        sigma2: 1.0,
        s_sigma: m1,
        s2_sigma: 1.0,
    };
    for k in 1..n {
        let kf = k as f64;
        let (ak, bk) = (a / kf, b / kf);
        let next = RecursiveMoments {
            n: k + 1,
            s1: (1.0 + ak) * r.s1,
            s2: (1.0 + 2.0 * ak) * r.s2 + bk * r.sigma1,
            s3: (1.0 + 3.0 * ak) * r.s3 + 3.0 * bk * r.s_sigma + ak * r.s1,
            s4: (1.0 + 4.0 * ak) * r.s4 + 6.0 * bk * r.s2_sigma + 4.0 * ak * r.s2 + bk * r.sigma1,
            sigma1: (1.0 + bk) * r.sigma1,
            sigma2: (1.0 + 2.0 * bk) * r.sigma2 + bk * r.sigma1,
            s_sigma: (1.0 + ak + bk) * r.s_sigma + ak * r.s1,
            s2_sigma: (1.0 + 2.0 * ak + bk) * r.s2_sigma + 2.0 * ak * r.s2 + bk * r.sigma2 + bk * r.sigma1,
        };
        r = next;
    }
    Ok(r)
}

/// Closed forms; `None` where a denominator is within
/// [`CLOSED_FORM_MIN_GAP`] of zero.
pub mod closed {
    use super::*;

    fn gap2(c: &DerivedConstants) -> Option<f64> {
        let d = 2.0 * c.a - c.b;
        (d.abs() >= CLOSED_FORM_MIN_GAP).then_some(d)
    }

    pub fn mean_s(c: &DerivedConstants, n: u64) -> f64 {
        sign_mean(c) * h(c.a, n)
    }

    pub fn mean_s2(c: &DerivedConstants, n: u64) -> Option<f64> {
        let d = gap2(c)?;
        Some((g(2.0 * c.a, n) - g(c.b, n)) / d)
    }

    pub fn mean_s3(c: &DerivedConstants, n: u64) -> Option<f64> {
        let d = gap2(c)?;
        let (a, b) = (c.a, c.b);
        let inner = 3.0 * (a + b) * h(3.0 * a, n) / d - 3.0 * g(a + b, n) / d + h(a, n);
        Some(sign_mean(c) * inner)
    }

    pub fn mean_s4(c: &DerivedConstants, n: u64) -> Option<f64> {
        let d = gap2(c)?;
        let (a, b) = (c.a, c.b);
        let d4 = 4.0 * a - b;
        if d4.abs() < CLOSED_FORM_MIN_GAP {
            return None;
        }
        let g4a = g(4.0 * a, n);
        let terms = 12.0 * a * (g4a - g(2.0 * a + b, n)) / d - 4.0 * (g4a - g(2.0 * a, n))
            - 3.0 * b * (g4a - g(2.0 * b, n)) / d
            + (5.0 * b - 2.0 * a) * (g4a - g(b, n)) / d4;
        Some(terms / d)
    }

    pub fn mixed_s_sigma(c: &DerivedConstants, n: u64) -> f64 {
        sign_mean(c) / c.b * (g(c.a + c.b, n) - g(c.a, n))
    }

    pub fn mixed_s2_sigma(c: &DerivedConstants, n: u64) -> Option<f64> {
        let d = gap2(c)?;
        let (a, b) = (c.a, c.b);
        let num = 2.0 * a * (g(2.0 * a + b, n) - g(2.0 * a, n)) / b - g(2.0 * b, n) + g(b, n);
        Some(num / d)
    }
}

/// E[S_n].
pub fn mean_s(c: &DerivedConstants, n: u64) -> Result<f64> {
    check_n(n)?;
    Ok(closed::mean_s(c, n))
}

/// E[S_n²].
pub fn mean_s2(c: &DerivedConstants, n: u64) -> Result<f64> {
    check_n(n)?;
    match closed::mean_s2(c, n) {
        Some(v) => Ok(v),
        None => Ok(recursive_moments(c, n)?.s2),
    }
}

/// E[S_n³].
pub fn mean_s3(c: &DerivedConstants, n: u64) -> Result<f64> {
    check_n(n)?;
    match closed::mean_s3(c, n) {
        Some(v) => Ok(v),
        None => Ok(recursive_moments(c, n)?.s3),
    }
}

/// E[S_n⁴].
pub fn mean_s4(c: &DerivedConstants, n: u64) -> Result<f64> {
    check_n(n)?;
    match closed::mean_s4(c, n) {
        Some(v) => Ok(v),
        None => Ok(recursive_moments(c, n)?.s4),
    }
}

/// E[S_n^m] for m = 1..=4.
pub fn mean_s_power(c: &DerivedConstants, n: u64, m: u32) -> Result<f64> {
    match m {
        1 => mean_s(c, n),
        2 => mean_s2(c, n),
        3 => mean_s3(c, n),
        4 => mean_s4(c, n),
        _ => Err(ErwsError::domain(format!("moments of S_n are implemented for m <= 4, got {m}"))),
    }
}

/// E[S_n Σ_n].
pub fn mixed_s_sigma(c: &DerivedConstants, n: u64) -> Result<f64> {
    check_n(n)?;
    Ok(closed::mixed_s_sigma(c, n))
}

/// E[S_n² Σ_n].
pub fn mixed_s2_sigma(c: &DerivedConstants, n: u64) -> Result<f64> {
    check_n(n)?;
    match closed::mixed_s2_sigma(c, n) {
        Some(v) => Ok(v),
        None => Ok(recursive_moments(c, n)?.s2_sigma),
    }
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 || m > STIRLING_MAX {
        return Err(ErwsError::domain(format!("m must lie in 1..={STIRLING_MAX}, got {m}")));
    }
    Ok(())
}

/// E[Σ_n^{(m)}] = m! Γ(n + mb) / (Γ(n) Γ(1 + mb)).
pub fn poch_moment_sigma(c: &DerivedConstants, n: u64, m: u32) -> Result<f64> {
    check_n(n)?;
    check_m(m)?;
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    Ok(fact * h(m as f64 * c.b, n))
}

/// E[Σ_n^k] for k = 1..=m, by inverting `x^{(m)} = Σ_k [m, k] x^k`.
///
/// The inversion subtracts positive quantities; for small n and large m
/// (where Σ_n is of order one but Σ_n^{(m)} of order m!) it loses about
/// `log10(m!)` digits.
pub fn raw_moments_sigma(c: &DerivedConstants, n: u64, m: u32) -> Result<Vec<f64>> {
    check_n(n)?;
    check_m(m)?;
    let mut raw: Vec<f64> = Vec::with_capacity(m as usize);
    for j in 1..=m {
        let mut v = poch_moment_sigma(c, n, j)?;
        for k in 1..j {
            v -= stirling1u(j, k)? as f64 * raw[(k - 1) as usize];
        }
        raw.push(v);
    }
    Ok(raw)
}

/// E[Σ_n^m].
pub fn raw_moment_sigma(c: &DerivedConstants, n: u64, m: u32) -> Result<f64> {
    Ok(*raw_moments_sigma(c, n, m)?.last().expect("m >= 1"))
}

/// Moments of the limits: L = lim S_n / n^a (superdiffusive only),
/// Σ = lim Σ_n / n^b ~ ML(b) and N = lim b_n Σ_n = Γ(b+1) Σ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitMoments {
    /// E[L^m], m = 1..=4; `None` outside the superdiffusive regime.
    pub l: Option<[f64; 4]>,
    /// E[N^m], m = 1..=8.
    pub n: [f64; 8],
    /// E[Σ^m], m = 1..=8.
    pub sigma: [f64; 8],
}

/// E[L^m] for m = 1..=4.
pub fn l_moments(c: &DerivedConstants) -> Result<[f64; 4]> {
    if c.regime != Regime::Superdiffusive {
        return Err(ErwsError::Regime(format!(
            "moments of L need the superdiffusive regime, parameters are {}",
            c.regime
        )));
    }
    let (a, b) = (c.a, c.b);
    let m1 = sign_mean(c);
    let d = 2.0 * a - b;
    let gam = |x: f64| ln_gamma(x).exp();
    Ok([
        m1 / gam(a + 1.0),
        1.0 / (d * gam(2.0 * a)),
        m1 * (a + b) / (a * d * gam(3.0 * a)),
        6.0 * (2.0 * a * a + 2.0 * a * b - b * b) / ((4.0 * a - b) * d * d * gam(4.0 * a)),
    ])
}

pub fn limit_moments(c: &DerivedConstants) -> LimitMoments {
    let mut sigma = [0.0; 8];
    let mut nm = [0.0; 8];
    let gb = ln_gamma(c.b + 1.0).exp();
    for m in 1..=8u32 {
        let s = ml_moment(c.b, m);
        sigma[m as usize - 1] = s;
        nm[m as usize - 1] = s * gb.powi(m as i32);
    }
    LimitMoments {
        l: l_moments(c).ok(),
        n: nm,
        sigma,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    S1,
    S2,
    S3,
    S4,
    SigmaPoch(u32),
    SigmaRaw(u32),
    SSigma,
    S2Sigma,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::S1 => f.write_str("S1"),
            Quantity::S2 => f.write_str("S2"),
            Quantity::S3 => f.write_str("S3"),
            Quantity::S4 => f.write_str("S4"),
            Quantity::SigmaPoch(m) => write!(f, "SigmaPoch({m})"),
            Quantity::SigmaRaw(m) => write!(f, "SigmaRaw({m})"),
            Quantity::SSigma => f.write_str("SSigma"),
            Quantity::S2Sigma => f.write_str("S2Sigma"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl Quantity {
    /// The quantities reported by the `exact` command.
    pub fn standard_set() -> Vec<Quantity> {
        let mut v = vec![Quantity::S1, Quantity::S2, Quantity::S3, Quantity::S4];
        v.extend((1..=4).map(Quantity::SigmaPoch));
        v.extend((1..=4).map(Quantity::SigmaRaw));
        v.push(Quantity::SSigma);
        v.push(Quantity::S2Sigma);
        v
    }

    /// Exact value from the closed forms (recursions near singularities).
    pub fn exact(&self, c: &DerivedConstants, n: u64) -> Result<f64> {
        match *self {
            Quantity::S1 => mean_s(c, n),
            Quantity::S2 => mean_s2(c, n),
            Quantity::S3 => mean_s3(c, n),
            Quantity::S4 => mean_s4(c, n),
            Quantity::SigmaPoch(m) => poch_moment_sigma(c, n, m),
            Quantity::SigmaRaw(m) => raw_moment_sigma(c, n, m),
            Quantity::SSigma => mixed_s_sigma(c, n),
            Quantity::S2Sigma => mixed_s2_sigma(c, n),
        }
    }

    /// The same expectation as a function of a path.
    pub fn functional(&self) -> impl Fn(&PathView) -> f64 + Sync + Send + 'static {
        let q = *self;
        move |p: &PathView| {
            let s = p.s as f64;
            let sg = p.sigma as f64;
            match q {
                Quantity::S1 => s,
                Quantity::S2 => s * s,
                Quantity::S3 => s * s * s,
                Quantity::S4 => s * s * s * s,
                Quantity::SigmaPoch(m) => (0..m).map(|k| sg + k as f64).product(),
                Quantity::SigmaRaw(m) => sg.powi(m as i32),
                Quantity::SSigma => s * sg,
                Quantity::S2Sigma => s * s * sg,
            }
        }
    }
}

/// One row of the exact-moment table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: u64,
    pub quantity: Quantity,
    pub closed_form: f64,
    pub oracle: Option<f64>,
    pub abs_err: Option<f64>,
}

/// Exact moments at horizon `n`, with oracle values when `n` is small
/// enough to enumerate and `with_oracle` is set.
pub fn moment_reports(c: &DerivedConstants, n: u64, with_oracle: bool) -> Result<Vec<MomentReport>> {
    let qs = Quantity::standard_set();
    let oracle_vals = if with_oracle {
        let fns: Vec<_> = qs.iter().map(|q| q.functional()).collect();
        let refs: Vec<&(dyn Fn(&PathView) -> f64 + Sync)> =
            fns.iter().map(|f| f as &(dyn Fn(&PathView) -> f64 + Sync)).collect();
        Some(brute_force_oracle(c, n, &refs)?)
    } else {
        None
    };
    qs.iter()
        .enumerate()
        .map(|(i, q)| {
            let closed_form = q.exact(c, n)?;
            let oracle = oracle_vals.as_ref().map(|v| v[i]);
            Ok(MomentReport {
                n,
                quantity: *q,
                closed_form,
                oracle,
                abs_err: oracle.map(|o| (closed_form - o).abs()),
            })
        })
        .collect()
}
