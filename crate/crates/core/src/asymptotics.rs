//! Large-N and thermodynamic-limit closed forms used to cross-check the
//! finite-N sums: critical-point mode sums, elliptic-integral derivatives of
//! the clean utility density, and the near-critical expansion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_e, complete_k};
use crate::error::{Error, Result};
use crate::free_fermion::{positive_momenta, validate_coupling};
use crate::linalg::pairwise_sum;

#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Largest `|g − 1|` accepted by the near-critical expansion.
pub const NEAR_CRITICAL_WINDOW: f64 = 0.2;

fn validate_even(n_sites: usize) -> Result<()> {
    if n_sites < 2 || n_sites % 2 != 0 {
        return Err(Error::invalid(format!(
            "mode sums need an even number of sites, got {n_sites}"
        )));
    }
    Ok(())
}

/// `S₁ = Σ_{k>0} 1/sin(k/2)` over `k = π/N, 3π/N, …, (N−1)π/N`.
pub fn s1_exact(n_sites: usize) -> Result<f64> {
    validate_even(n_sites)?;
    let terms: Vec<f64> = positive_momenta(n_sites)
        .into_iter()
        .map(|k| 1.0 / (0.5 * k).sin())
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `S₁ ∼ (N/π) ln N + (N/π)(γ + ln(8/π))`.
pub fn s1_asymptotic(n_sites: usize) -> Result<f64> {
    validate_even(n_sites)?;
    let n = n_sites as f64;
    Ok(n / PI * (n.ln() + EULER_GAMMA + (8.0 / PI).ln()))
}

/// `S₂ = Σ_{k>0} 1/sin²(k/2)`.
pub fn s2_exact(n_sites: usize) -> Result<f64> {
    validate_even(n_sites)?;
    let terms: Vec<f64> = positive_momenta(n_sites)
        .into_iter()
        .map(|k| (0.5 * k).sin().powi(-2))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `S₂ ∼ N²/2`. For even N this is in fact exact.
pub fn s2_asymptotic(n_sites: usize) -> Result<f64> {
    validate_even(n_sites)?;
    let n = n_sites as f64;
    Ok(0.5 * n * n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalScalingReport {
    pub n_sites: usize,
    pub s1_exact: f64,
    pub s1_asymptotic: f64,
    pub s2_exact: f64,
    pub s2_asymptotic: f64,
    /// `χ″(1) = −S₂/4 + 3S₁/4 − N/4`.
    pub chi2_critical_exact: f64,
    /// `−N²/8`.
    pub chi2_critical_asymptotic: f64,
    /// Perfectly correlated `δu⁽²⁾/(Nσ²) = χ″(1)/(2N)`.
    pub rescaled_sv_critical: f64,
    /// `−N/16`.
    pub rescaled_sv_asymptotic: f64,
}

/// Mode sums and the curvature of the clean utility at `g = 1`.
pub fn critical_scaling(n_sites: usize) -> Result<CriticalScalingReport> {
    let (s1, s2) = (s1_exact(n_sites)?, s2_exact(n_sites)?);
    let n = n_sites as f64;
    let chi2 = -0.25 * s2 + 0.75 * s1 - 0.25 * n;
    Ok(CriticalScalingReport {
        n_sites,
        s1_exact: s1,
        s1_asymptotic: s1_asymptotic(n_sites)?,
        s2_exact: s2,
        s2_asymptotic: s2_asymptotic(n_sites)?,
        chi2_critical_exact: chi2,
        chi2_critical_asymptotic: -n * n / 8.0,
        rescaled_sv_critical: chi2 / (2.0 * n),
        rescaled_sv_asymptotic: -n / 16.0,
    })
}

fn validate_off_critical(g: f64) -> Result<()> {
    validate_coupling(g)?;
    if g == 1.0 {
        return Err(Error::invalid(
            "the thermodynamic derivatives diverge at the critical field g = 1",
        ));
    }
    Ok(())
}

fn elliptic_parameter(g: f64) -> f64 {
    4.0 * g / ((1.0 + g) * (1.0 + g))
}

fn ferromagnetic_step(g: f64) -> f64 {
    if g < 1.0 {
        1.0
    } else {
        0.0
    }
}

/// Per-site `dχ/dg` as `N → ∞`:
/// `−(1/2π) [2K(m)/(g(g+1)) − θ(1−g) π/g]` with `m = 4g/(1+g)²`.
pub fn dchi_dg_thermodynamic(g: f64) -> Result<f64> {
    validate_off_critical(g)?;
    let k = complete_k(elliptic_parameter(g));
    Ok(-(2.0 * k / (g * (g + 1.0)) - ferromagnetic_step(g) * PI / g) / (2.0 * PI))
}

/// Per-site `d²χ/dg²` as `N → ∞`:
/// `(1/2π) [E(m)/(g²(g−1)) + 3K(m)/(g²(g+1)) − θ(1−g) π/g²]`.
pub fn d2chi_dg2_thermodynamic(g: f64) -> Result<f64> {
    validate_off_critical(g)?;
    let m = elliptic_parameter(g);
    let (k, e) = (complete_k(m), complete_e(m));
    let g2 = g * g;
    Ok((e / (g2 * (g - 1.0)) + 3.0 * k / (g2 * (g + 1.0)) - ferromagnetic_step(g) * PI / g2) / (2.0 * PI))
}

fn validate_near_critical(g: f64) -> Result<()> {
    validate_coupling(g)?;
    let offset = (g - 1.0).abs();
    if offset == 0.0 || offset >= NEAR_CRITICAL_WINDOW {
        return Err(Error::invalid(format!(
            "near-critical expansion needs 0 < |g − 1| < {NEAR_CRITICAL_WINDOW}, got g = {g}"
        )));
    }
    Ok(())
}

/// The two-term expansion `1/(2(g−1)) − (3/4) ln|1−g|` as usually quoted
/// for the rescaled perfectly correlated second variation.
///
/// The actual rescaled second variation near `g = 1` is this bracket
/// divided by `2π`; see [`near_critical_expansion_normalized`].
pub fn near_critical_expansion(g: f64) -> Result<f64> {
    validate_near_critical(g)?;
    Ok(1.0 / (2.0 * (g - 1.0)) - 0.75 * (1.0 - g).abs().ln())
}

/// `[1/(2(g−1)) − (3/4) ln|1−g|] / (2π)`, the leading behaviour of
/// `½ d²χ/dg²` per site.
pub fn near_critical_expansion_normalized(g: f64) -> Result<f64> {
    Ok(near_critical_expansion(g)? / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::{chi_double_prime, chi_prime};

    fn rel(exact: f64, approx: f64) -> f64 {
        (exact - approx).abs() / exact.abs()
    }

    #[test]
    fn two_site_sums() {
        assert!((s1_exact(2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((s2_exact(2).unwrap() - 2.0).abs() < 1e-14);
        assert!(s1_exact(3).is_err());
    }

    #[test]
    fn s1_asymptotics_improve() {
        assert!(rel(s1_exact(1000).unwrap(), s1_asymptotic(1000).unwrap()) < 1e-3);
        let errs: Vec<f64> = [100, 400, 1600]
            .iter()
            .map(|&n| rel(s1_exact(n).unwrap(), s1_asymptotic(n).unwrap()))
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn s2_is_half_n_squared() {
        for n in [2, 4, 10, 100, 1000] {
            let exact = s2_exact(n).unwrap();
            assert!(rel(exact, s2_asymptotic(n).unwrap()) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn critical_curvature_assembly_matches_direct_sum() {
        for n in [8, 40, 200] {
            let report = critical_scaling(n).unwrap();
            let direct = chi_double_prime(1.0, n).unwrap();
            assert!(rel(direct, report.chi2_critical_exact) < 1e-8, "n = {n}");
        }
        let report = critical_scaling(200).unwrap();
        assert!(rel(-5000.0, report.chi2_critical_exact) < 0.1);
        assert!(rel(-12.5, report.rescaled_sv_critical) < 0.1);
    }

    #[test]
    fn critical_curvature_error_halves_when_n_quadruples() {
        let err = |n: usize| {
            let r = critical_scaling(n).unwrap();
            rel(r.chi2_critical_exact, r.chi2_critical_asymptotic)
        };
        assert!(err(400) <= 0.5 * err(100));
        assert!(err(800) <= 0.5 * err(200));
    }

    #[test]
    fn thermodynamic_first_derivative() {
        for &g in &[0.5, 1.5, 3.0] {
            let finite = chi_prime(g, 2000).unwrap() / 2000.0;
            assert!(rel(finite, dchi_dg_thermodynamic(g).unwrap()) < 1e-3, "g = {g}");
        }
        let far = dchi_dg_thermodynamic(1e4).unwrap();
        assert!(far < 0.0 && far > -1e-6);
        assert!(dchi_dg_thermodynamic(1.0).is_err());
    }

    #[test]
    fn thermodynamic_first_derivative_error_is_order_one_over_n() {
        for &g in &[0.5, 1.5] {
            let limit = dchi_dg_thermodynamic(g).unwrap();
            for n in [100, 200, 400] {
                let err = (chi_prime(g, n).unwrap() / n as f64 - limit).abs();
                assert!(err * (n as f64) < 1.0, "g = {g}, n = {n}, err = {err}");
            }
        }
    }

    #[test]
    fn thermodynamic_second_derivative() {
        for &g in &[0.5, 1.5, 2.5] {
            let finite = chi_double_prime(g, 2000).unwrap() / 2000.0;
            assert!(rel(finite, d2chi_dg2_thermodynamic(g).unwrap()) < 1e-3, "g = {g}");
        }
    }

    #[test]
    fn first_derivative_jumps_by_one_half_at_criticality() {
        let delta = 1e-7;
        let jump = dchi_dg_thermodynamic(1.0 - delta).unwrap() - dchi_dg_thermodynamic(1.0 + delta).unwrap();
        assert!((jump - 0.5).abs() < 1e-5, "{jump}");

        let n = 4000;
        for &g in &[0.95, 1.05] {
            let finite = chi_prime(g, n).unwrap() / n as f64;
            assert!((finite - dchi_dg_thermodynamic(g).unwrap()).abs() < 1e-3, "g = {g}");
        }
    }

    #[test]
    fn near_critical_values() {
        assert!((near_critical_expansion(1.01).unwrap() - 53.45).abs() < 0.01);
        let below = near_critical_expansion(0.99).unwrap();
        assert!((below - (-50.0 + 3.4539)).abs() < 1e-3);
        assert!(near_critical_expansion(1.3).is_err());
        assert!(near_critical_expansion(1.0).is_err());
    }

    #[test]
    fn normalized_expansion_tracks_elliptic_form() {
        for &g in &[0.98, 1.02] {
            let full = 0.5 * d2chi_dg2_thermodynamic(g).unwrap();
            let approx = near_critical_expansion_normalized(g).unwrap();
            assert!(rel(full, approx) < 0.2, "g = {g}: {full} vs {approx}");
        }
    }
}
