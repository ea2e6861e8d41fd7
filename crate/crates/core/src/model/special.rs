//! Polynomial special functions behind the Lamb-Dicke coupling functions.

use crate::error::{Error, Result};

/// Kummer's ₁F₁(a; b; x) for a = −n (n ≥ 0 integer), summed as a finite polynomial.
pub fn kummer_1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a <= 0.0 && a.fract() == 0.0 && a.is_finite()) {
        return Err(Error::UnsupportedArgument(format!(
            "first argument of 1F1 must be a non-positive integer, got {a}"
        )));
    }
    if !(b > 0.0 && b.fract() == 0.0 && b.is_finite()) {
        return Err(Error::UnsupportedArgument(format!(
            "second argument of 1F1 must be a positive integer, got {b}"
        )));
    }
    let n = (-a) as u64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let k = k as f64;
        term *= (a + k) / (b + k) * x / (k + 1.0);
        sum += term;
    }
    Ok(sum)
}

/// Laguerre polynomial L_n(x) by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    assoc_laguerre(n, 0.0, x)
}

/// Generalized Laguerre polynomial L_n^(α)(x).
pub fn assoc_laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Lamb-Dicke coupling functions evaluated on Fock levels (n₁, n₂):
/// F = ₁F₁(−n₁; 2; η₁²)·L_{n₂}(η₂²), G = ₁F₁(−n₂; 2; η₂²)·L_{n₁}(η₁²).
pub fn coupling_fg(eta1: f64, n1: usize, eta2: f64, n2: usize) -> (f64, f64) {
    let x1 = eta1 * eta1;
    let x2 = eta2 * eta2;
    let f = kummer_1f1(-(n1 as f64), 2.0, x1).expect("integer arguments") * laguerre(n2, x2);
    let g = kummer_1f1(-(n2 as f64), 2.0, x2).expect("integer arguments") * laguerre(n1, x1);
    (f, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Σ_k (a)_k / ((b)_k k!) x^k with explicit Pochhammer products.
    fn series_oracle(n: u64, b: f64, x: f64) -> f64 {
        let a = -(n as f64);
        (0..=n)
            .map(|k| {
                let poch_a: f64 = (0..k).map(|i| a + i as f64).product();
                let poch_b: f64 = (0..k).map(|i| b + i as f64).product();
                poch_a / poch_b * x.powi(k as i32) / factorial(k)
            })
            .sum()
    }

    /// L_n(x) = Σ_k (−1)^k C(n,k) x^k / k!.
    fn laguerre_coefficients(n: u64, x: f64) -> f64 {
        (0..=n)
            .map(|k| {
                let binom = factorial(n) / (factorial(k) * factorial(n - k));
                (-1f64).powi(k as i32) * binom * x.powi(k as i32) / factorial(k)
            })
            .sum()
    }

    #[test]
    fn kummer_low_orders() {
        for x in [-1.5, 0.0, 0.3, 2.0] {
            assert_eq!(kummer_1f1(0.0, 2.0, x).unwrap(), 1.0);
            assert!((kummer_1f1(-1.0, 2.0, x).unwrap() - (1.0 - x / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn kummer_matches_series() {
        let v = kummer_1f1(-3.0, 2.0, 0.25).unwrap();
        assert!((v - series_oracle(3, 2.0, 0.25)).abs() < 1e-14);
        for n in 0..12 {
            let v = kummer_1f1(-(n as f64), 3.0, 0.7).unwrap();
            assert!((v - series_oracle(n, 3.0, 0.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn kummer_rejects_non_polynomial_case() {
        assert!(matches!(kummer_1f1(-0.5, 2.0, 1.0), Err(Error::UnsupportedArgument(_))));
        assert!(matches!(kummer_1f1(1.0, 2.0, 1.0), Err(Error::UnsupportedArgument(_))));
        assert!(matches!(kummer_1f1(-1.0, 0.0, 1.0), Err(Error::UnsupportedArgument(_))));
    }

    #[test]
    fn laguerre_values() {
        for x in [0.0, 0.3, 1.7] {
            assert_eq!(laguerre(0, x), 1.0);
            assert!((laguerre(1, x) - (1.0 - x)).abs() < 1e-15);
        }
        assert!((laguerre(4, 0.3) - laguerre_coefficients(4, 0.3)).abs() < 1e-13);
        for n in 0..10 {
            assert!((laguerre(n, 0.9) - laguerre_coefficients(n as u64, 0.9)).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_laguerre_relates_to_kummer() {
        // L_n^(α)(x) = C(n+α, n) ₁F₁(−n; α+1; x)
        let (n, alpha, x) = (5usize, 1.0, 0.4);
        let binom = factorial(6) / (factorial(5) * factorial(1));
        let via_kummer = binom * kummer_1f1(-(n as f64), alpha + 1.0, x).unwrap();
        assert!((assoc_laguerre(n, alpha, x) - via_kummer).abs() < 1e-13);
    }

    #[test]
    fn coupling_functions() {
        for eta in [0.0, 0.049, 0.2] {
            assert_eq!(coupling_fg(eta, 0, eta, 0), (1.0, 1.0));
        }
        let (f, _) = coupling_fg(0.049, 1, 0.049, 0);
        assert!((f - (1.0 - 0.049f64.powi(2) / 2.0)).abs() < 1e-15);
        assert!((f - 0.9987995).abs() < 1e-7);

        let (f, g) = coupling_fg(0.05, 2, 0.11, 3);
        let (f2, g2) = coupling_fg(0.11, 3, 0.05, 2);
        assert_eq!((f, g), (g2, f2));
    }
}
