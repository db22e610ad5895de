//! The series v_n = Σ_{k<=n} a_k² / (k b_k) and its limit, the
//! hypergeometric value 4F3(1, 1, 1, 1+b; 2, a+1, a+1; 1).
//!
//! The limit is summed directly up to a cut-off and the remainder is taken
//! from the asymptotic expansion of the summand,
//! `a_k² / (k b_k) = K k^{-1-s} Σ_j d_j k^{-j}` with `s = 2a - b` and
//! `K = Γ(a+1)² / Γ(b+1)`, each power summed with a Hurwitz zeta.

use super::coeffs::{coeff_a, coeff_b};
use super::gamma::ln_gamma;
use super::SeriesControl;
use crate::error::{ErwsError, Result};

/// B_0 .. B_20.
const BERNOULLI: [f64; 21] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
    43867.0 / 798.0,
    0.0,
    -174611.0 / 330.0,
];

/// Direct-sum cut-off for [`v_limit`].
const DIRECT_TERMS: u64 = 2000;
/// Number of correction terms in the summand expansion.
const EXPANSION_TERMS: usize = 10;
/// Refresh the recurrences from the Gamma form this often.
const REFRESH_EVERY: u64 = 1 << 16;

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn bernoulli_poly(m: usize, x: f64) -> f64 {
    (0..=m).map(|k| binomial(m, k) * BERNOULLI[k] * x.powi((m - k) as i32)).sum()
}

/// Hurwitz zeta ζ(σ, q) = Σ_{k>=0} (k + q)^{-σ} for σ > 1, q > 0.
pub fn hurwitz_zeta(sigma: f64, q: f64) -> Result<f64> {
    if !(sigma > 1.0) || !(q > 0.0) || !sigma.is_finite() || !q.is_finite() {
        return Err(ErwsError::domain(format!("hurwitz_zeta needs sigma > 1, q > 0, got ({sigma}, {q})")));
    }
    // Sum the first terms directly until Euler-Maclaurin is accurate.
    const SHIFT_TO: f64 = 20.0;
    let mut head = 0.0;
    let mut big_q = q;
    while big_q < SHIFT_TO {
        head += big_q.powf(-sigma);
        big_q += 1.0;
    }
    let mut tail = big_q.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * big_q.powf(-sigma);
    // (σ)_{2j-1} Q^{-σ-2j+1}, advanced by two factors each step.
    let mut rising = sigma * big_q.powf(-sigma - 1.0);
    let mut fact = 2.0; // (2j)!
    for j in 1..=9usize {
        tail += BERNOULLI[2 * j] / fact * rising;
        let s0 = sigma + (2 * j - 1) as f64;
        rising *= s0 * (s0 + 1.0) / (big_q * big_q);
        fact *= ((2 * j + 1) * (2 * j + 2)) as f64;
    }
    Ok(head + tail)
}

/// v_n = Σ_{k=1}^n a_k² / (k b_k).
pub fn v_partial(n: u64, a: f64, b: f64) -> Result<f64> {
    if n == 0 {
        return Err(ErwsError::domain("v_partial needs n >= 1"));
    }
    let mut ak = coeff_a(1, a)?;
    let mut bk = coeff_b(1, b)?;
    let mut sum = 0.0;
    for k in 1..=n {
        if k % REFRESH_EVERY == 0 {
            ak = coeff_a(k, a)?;
            bk = coeff_b(k, b)?;
        }
        let kf = k as f64;
        sum += ak * ak / (kf * bk);
        ak *= kf / (kf + a);
        bk *= kf / (kf + b);
    }
    Ok(sum)
}

/// Coefficients d_j of `exp(Σ_m e_m u^m)`, where
/// `ln[Γ(k+b) Γ(k) / Γ(k+a)²] = s ln k + Σ_m e_m k^{-m}`.
fn expansion_coeffs(a: f64, b: f64) -> [f64; EXPANSION_TERMS + 1] {
    let mut e = [0.0; EXPANSION_TERMS + 1];
    for (m, em) in e.iter_mut().enumerate().skip(1) {
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let bracket = bernoulli_poly(m + 1, b) - 2.0 * bernoulli_poly(m + 1, a) + bernoulli_poly(m + 1, 0.0);
        *em = sign * bracket / (m * (m + 1)) as f64;
    }
    let mut d = [0.0; EXPANSION_TERMS + 1];
    d[0] = 1.0;
    for j in 1..=EXPANSION_TERMS {
        let acc: f64 = (1..=j).map(|m| m as f64 * e[m] * d[j - m]).sum();
        d[j] = acc / j as f64;
    }
    d
}

/// lim v_n = 4F3(1, 1, 1, 1+b; 2, a+1, a+1; 1), finite iff 2a > b.
pub fn v_limit(a: f64, b: f64, ctl: &SeriesControl) -> Result<f64> {
    ctl.check()?;
    let s = 2.0 * a - b;
    if !(s > 1e-12) {
        return Err(ErwsError::domain(format!("v_limit needs 2a > b, got a={a}, b={b}")));
    }
    if ctl.max_terms < 100 {
        return Err(ErwsError::ConvergenceFailure(format!(
            "v_limit needs at least 100 direct terms, max_terms = {}",
            ctl.max_terms
        )));
    }
    let n = DIRECT_TERMS.min(ctl.max_terms as u64);
    let head = v_partial(n, a, b)?;
    let k_const = (2.0 * ln_gamma(a + 1.0) - ln_gamma(b + 1.0)).exp();
    let d = expansion_coeffs(a, b);
    let q = (n + 1) as f64;
    let mut tail = 0.0;
    let mut last = 0.0;
    for (j, dj) in d.iter().enumerate() {
        last = k_const * dj * hurwitz_zeta(1.0 + s + j as f64, q)?;
        tail += last;
    }
    let total = head + tail;
    if !(last.abs() <= ctl.rel_tol * total.abs()) || !total.is_finite() {
        return Err(ErwsError::ConvergenceFailure(format!(
            "v_limit({a}, {b}): remainder expansion not below rel_tol (last term {last:e})"
        )));
    }
    Ok(total)
}
