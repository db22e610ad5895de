//! The Gamma-ratio sequences a_n, b_n, b_n(m), rising factorials and the
//! unsigned Stirling numbers of the first kind.

use std::sync::OnceLock;

use super::gamma::gamma_ratio_h;
use crate::error::{ErwsError, Result};

/// Largest row of the exact Stirling table. 30! < 2^128.
pub const STIRLING_MAX: u32 = 30;

fn check_index(n: u64) -> Result<()> {
    if n == 0 {
        return Err(ErwsError::domain("coefficient index n must be >= 1"));
    }
    Ok(())
}

fn check_exponent(name: &str, x: f64) -> Result<()> {
    if !(x > -1.0) || !x.is_finite() {
        return Err(ErwsError::domain(format!("{name} must be > -1, got {x}")));
    }
    Ok(())
}

/// a_n = Γ(n) Γ(a+1) / Γ(n+a).
pub fn coeff_a(n: u64, a: f64) -> Result<f64> {
    check_index(n)?;
    check_exponent("a", a)?;
    Ok(1.0 / gamma_ratio_h(a, n))
}

/// b_n = Γ(n) Γ(b+1) / Γ(n+b). Same sequence as [`coeff_a`] with `b`.
pub fn coeff_b(n: u64, b: f64) -> Result<f64> {
    check_index(n)?;
    check_exponent("b", b)?;
    Ok(1.0 / gamma_ratio_h(b, n))
}

/// b_n(m) = Γ(n + mb) / (Γ(n) Γ(1 + mb)).
pub fn coeff_bm(n: u64, m: u32, b: f64) -> Result<f64> {
    check_index(n)?;
    if m == 0 {
        return Err(ErwsError::domain("coeff_bm needs m >= 1"));
    }
    let mb = m as f64 * b;
    if !(1.0 + mb > 0.0) || !mb.is_finite() {
        return Err(ErwsError::domain(format!("Gamma pole: 1 + m b = {}", 1.0 + mb)));
    }
    Ok(gamma_ratio_h(mb, n))
}

/// Rising factorial x^{(m)} = x (x+1) ... (x+m-1), with x^{(0)} = 1.
pub fn pochhammer(x: f64, m: u32) -> f64 {
    let mut acc = 1.0;
    for k in 0..m {
        acc *= x + k as f64;
    }
    acc
}

fn stirling_table() -> &'static Vec<Vec<u128>> {
    static TABLE: OnceLock<Vec<Vec<u128>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let size = STIRLING_MAX as usize + 1;
        let mut rows: Vec<Vec<u128>> = Vec::with_capacity(size);
        rows.push(vec![1]);
        for m in 0..STIRLING_MAX as usize {
            let prev = &rows[m];
            let mut next = vec![0u128; m + 2];
            for k in 1..=m + 1 {
                let keep = if k <= m { m as u128 * prev[k] } else { 0 };
                next[k] = keep + prev[k - 1];
            }
            rows.push(next);
        }
        rows
    })
}

/// Unsigned Stirling number of the first kind [m, k], exact for m <= 30.
pub fn stirling1u(m: u32, k: u32) -> Result<u128> {
    if m > STIRLING_MAX {
        return Err(ErwsError::domain(format!(
            "stirling1u supports m <= {STIRLING_MAX}, got {m}"
        )));
    }
    if k > m {
        return Err(ErwsError::domain(format!("stirling1u needs k <= m, got [{m}, {k}]")));
    }
    Ok(stirling_table()[m as usize][k as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::gamma;

    #[test]
    fn first_coefficients() {
        assert_eq!(coeff_a(1, 0.37).unwrap(), 1.0);
        assert_eq!(coeff_b(1, 0.8).unwrap(), 1.0);
        for n in [1, 2, 17, 1000, 1_000_000] {
            assert!((coeff_a(n, 0.0).unwrap() - 1.0).abs() < 1e-15);
        }
        // a_2 = 1 / (1 + a), a_3 = a_2 * 2 / (2 + a)
        let a = 0.3;
        assert!((coeff_a(2, a).unwrap() - 1.0 / 1.3).abs() < 1e-15);
        assert!((coeff_a(3, a).unwrap() - 2.0 / (1.3 * 2.3)).abs() < 1e-15);
    }

    #[test]
    fn rejects_poles() {
        assert!(coeff_a(0, 0.5).is_err());
        assert!(coeff_a(5, -1.0).is_err());
        assert!(coeff_b(5, -1.5).is_err());
        assert!(coeff_bm(5, 3, -0.5).is_err());
        assert!(coeff_bm(5, 0, 0.5).is_err());
    }

    #[test]
    fn scaling_limit() {
        let a = 0.5;
        let n = 1_000_000u64;
        let got = (n as f64).powf(a) * coeff_a(n, a).unwrap();
        assert!((got - 0.886_226_925_452_758).abs() < 1e-4, "{got}");
        // Large indices stay finite.
        let big = coeff_a(1_000_000_000, 0.9).unwrap();
        let want = gamma(1.9) * 1e9f64.powf(-0.9);
        assert!((big / want - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bm_contracts() {
        let b = 0.7;
        for m in 1..=6 {
            assert_eq!(coeff_bm(1, m, b).unwrap(), 1.0);
        }
        for n in 1..=1000u64 {
            let bn = coeff_b(n, b).unwrap();
            assert!((coeff_bm(n, 1, b).unwrap() * bn - 1.0).abs() < 1e-12, "n={n}");
            if n >= 2 {
                for m in 1..=6 {
                    let v = coeff_bm(n, m, b).unwrap() * bn.powi(m as i32);
                    assert!(v <= 1.0 + 1e-12, "n={n} m={m} v={v}");
                }
            }
        }
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(7.5, 0), 1.0);
        assert_eq!(pochhammer(3.0, 3), 60.0);
        assert_eq!(pochhammer(2.0, 2), 6.0);
        // x x^{(k)} = x^{(k+1)} - k x^{(k)} at x = 2, k = 2
        assert_eq!(2.0 * pochhammer(2.0, 2), pochhammer(2.0, 3) - 2.0 * pochhammer(2.0, 2));
        assert_eq!(pochhammer(2.0, 3) - 2.0 * pochhammer(2.0, 2), 12.0);
    }

    #[test]
    fn stirling_values() {
        assert_eq!(stirling1u(0, 0).unwrap(), 1);
        assert_eq!(stirling1u(5, 0).unwrap(), 0);
        assert_eq!(stirling1u(7, 7).unwrap(), 1);
        assert_eq!(stirling1u(3, 1).unwrap(), 2);
        assert_eq!(stirling1u(3, 2).unwrap(), 3);
        let row4: u128 = (0..=4).map(|k| stirling1u(4, k).unwrap()).sum();
        assert_eq!(row4, 24);
        // [m, 1] = (m-1)!
        assert_eq!(stirling1u(30, 1).unwrap(), (1..30u128).product::<u128>());
        assert!(stirling1u(31, 1).is_err());
        assert!(stirling1u(4, 5).is_err());
    }

    #[test]
    fn stirling_recurrence_and_row_sums() {
        let mut fact: u128 = 1;
        for m in 0..STIRLING_MAX {
            let row: u128 = (0..=m).map(|k| stirling1u(m, k).unwrap()).sum();
            assert_eq!(row, fact, "m={m}");
            fact *= (m + 1) as u128;
            for k in 1..=m {
                let lhs = stirling1u(m + 1, k).unwrap();
                let rhs = m as u128 * stirling1u(m, k).unwrap() + stirling1u(m, k - 1).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn stirling_expands_rising_factorial() {
        for &x in &[-2.0f64, -1.0, 0.5, 1.0, 3.0] {
            for m in 0..=10u32 {
                let series: f64 = (0..=m)
                    .map(|k| stirling1u(m, k).unwrap() as f64 * x.powi(k as i32))
                    .sum();
                let direct = pochhammer(x, m);
                let scale = direct.abs().max(1.0);
                assert!((series - direct).abs() <= 1e-10 * scale, "x={x} m={m}");
            }
        }
    }
}
