//! Complete elliptic integrals by the arithmetic-geometric mean.
//!
//! Both functions take the *parameter* `m = k²`, not the modulus `k`.

use std::f64::consts::PI;

const MAX_ITER: usize = 64;
const TOL: f64 = 1e-15;

/// K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ), for `m < 1`. Diverges at `m = 1`.
pub fn complete_k(m: f64) -> f64 {
    if m.is_nan() || m > 1.0 {
        return f64::NAN;
    }
    if m == 1.0 {
        return f64::INFINITY;
    }
    let (a, _) = agm_with_defect(1.0, (1.0 - m).sqrt(), m);
    PI / (2.0 * a)
}

/// E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ, for `m ≤ 1`.
pub fn complete_e(m: f64) -> f64 {
    if m.is_nan() || m > 1.0 {
        return f64::NAN;
    }
    if m == 1.0 {
        return 1.0;
    }
    let (a, defect) = agm_with_defect(1.0, (1.0 - m).sqrt(), m);
    PI / (2.0 * a) * (1.0 - defect)
}

/// Runs the AGM from `(a0, b0)` and accumulates Σ 2^{n−1} c_n² with
/// c_0² = m, the correction that turns K into E.
fn agm_with_defect(a0: f64, b0: f64, m: f64) -> (f64, f64) {
    let (mut a, mut b) = (a0, b0);
    let mut defect = 0.5 * m;
    let mut weight = 0.5;
    for _ in 0..MAX_ITER {
        let c = 0.5 * (a - b);
        let next_a = 0.5 * (a + b);
        let next_b = (a * b).sqrt();
        weight *= 2.0;
        defect += weight * c * c;
        a = next_a;
        b = next_b;
        if (a - b).abs() <= TOL * a {
            break;
        }
    }
    (a, defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn zero_parameter() {
        assert!((complete_k(0.0) - PI / 2.0).abs() < 1e-15);
        assert!((complete_e(0.0) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn reference_values_at_half() {
        // Abramowitz & Stegun table 17.1
        assert!((complete_k(0.5) - 1.854_074_677_301_372).abs() < 1e-13);
        assert!((complete_e(0.5) - 1.350_643_881_047_675_5).abs() < 1e-13);
    }

    #[test]
    fn matches_direct_quadrature() {
        for &m in &[0.1, 0.37, 0.8, 0.99, 0.9999] {
            let k = integrate(
                |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(),
                0.0,
                PI / 2.0,
                1e-13,
            )
            .unwrap()
            .value;
            let e = integrate(
                |t: f64| (1.0 - m * t.sin().powi(2)).sqrt(),
                0.0,
                PI / 2.0,
                1e-13,
            )
            .unwrap()
            .value;
            assert!((complete_k(m) - k).abs() < 1e-12 * k, "K({m})");
            assert!((complete_e(m) - e).abs() < 1e-12, "E({m})");
        }
    }

    #[test]
    fn legendre_relation() {
        // E K' + E' K − K K' = π/2
        for &m in &[0.2, 0.5, 0.7] {
            let (k, e) = (complete_k(m), complete_e(m));
            let (kp, ep) = (complete_k(1.0 - m), complete_e(1.0 - m));
            assert!((e * kp + ep * k - k * kp - PI / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn unit_parameter_limits() {
        assert!(complete_k(1.0).is_infinite());
        assert_eq!(complete_e(1.0), 1.0);
        assert!(complete_k(1.5).is_nan());
    }
}
