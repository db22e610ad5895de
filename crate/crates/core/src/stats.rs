//! Sample statistics with standard errors, and distribution-distance helpers.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;

use crate::error::{ErwsError, Result};

/// Location, spread and shape of a sample, each with a standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub se_mean: f64,
    /// Unbiased variance.
    pub var: f64,
    pub se_var: f64,
    pub skewness: f64,
    pub se_skewness: f64,
    pub excess_kurtosis: f64,
    pub se_excess_kurtosis: f64,
}

/// Two-pass summary; sums run in index order so the result depends only on
/// the sample.
pub fn summarize(xs: &[f64]) -> Result<Summary> {
    let r = xs.len();
    if r < 2 {
        return Err(ErwsError::domain(format!("need at least 2 observations, got {r}")));
    }
    let rf = r as f64;
    let mean = xs.iter().sum::<f64>() / rf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= rf;
    m3 /= rf;
    m4 /= rf;
    let var = m2 * rf / (rf - 1.0);
    let se_var = ((m4 - m2 * m2 * (rf - 3.0) / (rf - 1.0)).max(0.0) / rf).sqrt();
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    // Exact normal-theory standard errors of the sample skewness and kurtosis.
    let se_skewness = (6.0 * rf * (rf - 1.0) / ((rf - 2.0).max(1.0) * (rf + 1.0) * (rf + 3.0))).sqrt();
    let se_excess_kurtosis = 2.0 * se_skewness * ((rf * rf - 1.0) / ((rf - 3.0).max(1.0) * (rf + 5.0))).sqrt();
    Ok(Summary {
        count: r,
        mean,
        se_mean: (var / rf).sqrt(),
        var,
        se_var,
        skewness,
        se_skewness,
        excess_kurtosis,
        se_excess_kurtosis,
    })
}

/// Sample mean of x^m and its standard error.
pub fn raw_moment(xs: &[f64], m: i32) -> Result<(f64, f64)> {
    let powers: Vec<f64> = xs.iter().map(|x| x.powi(m)).collect();
    let s = summarize(&powers)?;
    Ok((s.mean, s.se_mean))
}

/// sup_x |F_n(x) - F(x)| for the empirical CDF F_n of `xs`.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // Ties form one jump of the empirical CDF.
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let f = cdf(sorted[i]);
        d = d.max((f - i as f64 / r).abs()).max(((j + 1) as f64 / r - f).abs());
        i = j + 1;
    }
    d
}

/// CDF of N(0, var).
pub fn normal_cdf(x: f64, var: f64) -> f64 {
    0.5 * (1.0 + erf(x / (2.0 * var).sqrt()))
}

/// CDF of |N(0, var)|.
pub fn abs_normal_cdf(x: f64, var: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erf(x / (2.0 * var).sqrt())
    }
}

/// Upper tail probability of a chi-square statistic.
pub fn chi_square_sf(stat: f64, dof: f64) -> Result<f64> {
    let d = ChiSquared::new(dof).map_err(|e| ErwsError::domain(format!("chi-square dof {dof}: {e}")))?;
    Ok(1.0 - d.cdf(stat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sample() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.var - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.se_mean - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!(s.skewness.abs() < 1e-15);
        // Population kurtosis of {1,2,3,4}: m4 / m2² = 2.5625 / 1.5625.
        assert!((s.excess_kurtosis - (1.64 - 3.0)).abs() < 1e-12);
        assert!(summarize(&[1.0]).is_err());
    }

    #[test]
    fn ks_against_uniform() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
        let d = ks_distance(&[0.5, 0.5], |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cdfs() {
        assert!((normal_cdf(0.0, 3.0) - 0.5).abs() < 1e-16);
        // statrs' erf is good to about 5e-11 absolute.
        assert!((normal_cdf(1.959963984540054, 1.0) - 0.975).abs() < 1e-10);
        // |N(0,2)|: P(|Z| <= x) = erf(x / 2).
        assert!((abs_normal_cdf(2.0, 2.0) - erf(1.0)).abs() < 1e-16);
        assert_eq!(abs_normal_cdf(-1.0, 2.0), 0.0);
        assert!((chi_square_sf(3.841458820694124, 1.0).unwrap() - 0.05).abs() < 1e-9);
    }
}
