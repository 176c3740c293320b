//! Bessel functions of the first kind, small-argument regime.
//!
//! Flux-modulation amplitudes in this crate stay below ~1.5 rad, where the
//! power series converges to machine precision in a handful of terms.

/// J_n(x) by power series; accurate to ~1e-15 for |x| <= 12.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let x2 = -half * half;
    for m in 1..200 {
        term *= x2 / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

pub fn bessel_j2(x: f64) -> f64 {
    bessel_j(2, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from Abramowitz & Stegun tables
    #[test]
    fn known_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(1.0) - 0.7651976865579666).abs() < 1e-14);
        assert!((bessel_j0(2.0) - 0.22389077914123567).abs() < 1e-14);
        assert!((bessel_j2(0.0)).abs() < 1e-15);
        assert!((bessel_j2(1.0) - 0.11490348493190048).abs() < 1e-14);
        assert!((bessel_j2(0.3) - 0.011165861949063923).abs() < 1e-14);
    }

    #[test]
    fn recurrence_consistency() {
        // J_{n-1}(x) + J_{n+1}(x) = (2n/x) J_n(x)
        for &x in &[0.2, 0.7, 1.4] {
            let lhs = bessel_j(0, x) + bessel_j(2, x);
            let rhs = 2.0 / x * bessel_j(1, x);
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn evenness_in_argument() {
        for &x in &[0.1, 0.9, 1.5] {
            assert!((bessel_j0(x) - bessel_j0(-x)).abs() < 1e-15);
            assert!((bessel_j2(x) - bessel_j2(-x)).abs() < 1e-15);
        }
    }
}
