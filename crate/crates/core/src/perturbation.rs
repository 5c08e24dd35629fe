//! Analytic response of the utility to small coupling disorder: the mode
//! response `f_k`, derivatives of the clean utility, the Laplacian, and the
//! translation-invariant utility Hessian contracted against a covariance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_fermion::{positive_momenta, validate_coupling, validate_sites, BogoliubovMode};
use crate::linalg::pairwise_sum;
use crate::quadrature::{bisect, integrate_with_breakpoints};

/// Eigenvalues of a covariance below `-PSD_TOLERANCE` are not rounding
/// noise and make the matrix unusable.
pub const PSD_TOLERANCE: f64 = 1e-10;

const CROSSOVER_BRACKET: (f64, f64) = (0.95, 0.999);
const CROSSOVER_TOL: f64 = 1e-4;
const CROSSOVER_QUADRATURE_TOL: f64 = 1e-9;

/// `f_k(g) = −(1/ε_k) tan((θ_k(g) − θ_k(0⁺))/2) sin θ_k(g)`.
pub fn mode_response(g: f64, k: f64) -> f64 {
    mode_response_of(&BogoliubovMode::new(g, k))
}

fn mode_response_of(mode: &BogoliubovMode) -> f64 {
    -mode.half_angle_offset().tan() * mode.sin_theta / mode.energy
}

fn modes(g: f64, n_sites: usize) -> Result<Vec<BogoliubovMode>> {
    validate_coupling(g)?;
    validate_sites(n_sites)?;
    Ok(positive_momenta(n_sites)
        .into_iter()
        .map(|k| BogoliubovMode::new(g, k))
        .collect())
}

/// `χ′(g) = −Σ_{k>0} f_k(g)`.
pub fn chi_prime(g: f64, n_sites: usize) -> Result<f64> {
    let terms: Vec<f64> = modes(g, n_sites)?
        .iter()
        .map(|m| -mode_response_of(m))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `χ″(g) = Σ_{k>0} [2 f_k cos θ_k / ε_k − f_k²/2 − sin²θ_k / (2ε_k²)]`.
pub fn chi_double_prime(g: f64, n_sites: usize) -> Result<f64> {
    let terms: Vec<f64> = modes(g, n_sites)?
        .iter()
        .map(|m| {
            let f = mode_response_of(m);
            let e = m.energy;
            2.0 * f * m.cos_theta / e - 0.5 * f * f - m.sin_theta * m.sin_theta / (2.0 * e * e)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

fn laplacian_term(a: &BogoliubovMode, b: &BogoliubovMode) -> f64 {
    let (fa, fb) = (mode_response_of(a), mode_response_of(b));
    let (ea, eb) = (a.energy, b.energy);
    let sum = ea + eb;
    (-ea * eb * fa * fb
        + sum * (fb * a.cos_theta + fa * b.cos_theta)
        + (a.cos_theta * b.cos_theta - 1.0))
        / (sum * sum)
}

/// `∇²u(ḡ) = (2/N) Σ_{p₁,p₂>0} [−ε₁ε₂f₁f₂ + (ε₁+ε₂)(f₂cos θ₁ + f₁cos θ₂)
/// + cos θ₁ cos θ₂ − 1] / (ε₁+ε₂)²`, the i.i.d. contraction of the Hessian.
pub fn laplacian_u(g_bar: f64, n_sites: usize) -> Result<f64> {
    let modes = modes(g_bar, n_sites)?;
    let rows: Vec<f64> = modes
        .iter()
        .map(|a| {
            let row: Vec<f64> = modes.iter().map(|b| laplacian_term(a, b)).collect();
            pairwise_sum(&row)
        })
        .collect();
    Ok(2.0 / n_sites as f64 * pairwise_sum(&rows))
}

/// `∫∫_{(0,π)²} F(p₁, p₂)` for the Laplacian integrand `F`; the large-N
/// Laplacian is `N/(2π²)` times this.
pub fn laplacian_integral(g_bar: f64) -> Result<f64> {
    validate_coupling(g_bar)?;
    let scale = (1.0 - g_bar).abs();
    let mut points = vec![0.0];
    if scale > 0.0 && scale < 0.5 {
        points.push(scale);
    }
    points.push(PI);
    let inner = |p1: f64| {
        let a = BogoliubovMode::new(g_bar, p1);
        integrate_with_breakpoints(
            |p2| laplacian_term(&a, &BogoliubovMode::new(g_bar, p2)),
            &points,
            0.1 * CROSSOVER_QUADRATURE_TOL,
        )
        .map_or(f64::NAN, |e| e.value)
    };
    Ok(integrate_with_breakpoints(inner, &points, CROSSOVER_QUADRATURE_TOL)?.value)
}

/// Large-N field at which `∇²u` changes sign (risk-averse below,
/// risk-seeking above), bisected on `[0.95, 0.999]`.
pub fn laplacian_crossover_thermodynamic() -> Result<f64> {
    let (lo, hi) = CROSSOVER_BRACKET;
    bisect(laplacian_integral, lo, hi, CROSSOVER_TOL)
}

/// Field at which the finite-N `∇²u` changes sign inside `[lo, hi]`.
pub fn laplacian_crossover(n_sites: usize, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bisect(|g| laplacian_u(g, n_sites), lo, hi, tol)
}

/// Second derivatives `∂²u/∂g_j∂g_l` at a uniform field, which depend only
/// on the ring separation `d = (j − l) mod N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianKernel {
    pub base_coupling: f64,
    pub n_sites: usize,
    pub kernel: Vec<f64>,
}

impl HessianKernel {
    /// `H_{jl}` for zero-based site indices.
    pub fn entry(&self, j: usize, l: usize) -> f64 {
        let n = self.n_sites;
        self.kernel[(j + n - l) % n]
    }

    /// The full `N × N` Hessian.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_sites, self.n_sites, |j, l| self.entry(j, l))
    }

    /// `Σ_{j,l} H_{jl} = N Σ_d h(d)`.
    pub fn total(&self) -> f64 {
        self.n_sites as f64 * pairwise_sum(&self.kernel)
    }

    /// `Σ_j H_{jj} = N h(0)`.
    pub fn trace(&self) -> f64 {
        self.n_sites as f64 * self.kernel[0]
    }
}

/// Pair quantities of two positive momenta that do not depend on the
/// separation.
struct PairWeights {
    sum_index: usize,
    diff_index: usize,
    plus: f64,
    minus: f64,
}

/// Utility Hessian kernel at the uniform field `g_bar`.
///
/// For momenta `p₁, p₂ > 0` with `t = tan((θ(0⁺) − θ)/2)`,
/// `S± = sin²((θ₂ ± θ₁)/2)` and `c± = cos((p₁ ± p₂) d)`, the separation-`d`
/// entry is `(2/N²) Σ [T₁ + T₂ − T₃]` with
///
/// * `T₁ = t₁t₂ (S₋c₊ − S₊c₋) / (ε₁+ε₂)²`
/// * `T₂ = [sin(θ₂−θ₁)(t₂/ε₂ − t₁/ε₁) c₊ + sin(θ₂+θ₁)(t₂/ε₂ + t₁/ε₁) c₋] / (2(ε₁+ε₂))`
/// * `T₃ = (S₋c₊ + S₊c₋) / (ε₁+ε₂)²`
///
/// The product term `f₁f₂` of the winning-probability expansion is the
/// square of the first variation and does not belong to the utility.
pub fn hessian_kernel(g_bar: f64, n_sites: usize) -> Result<HessianKernel> {
    let modes = modes(g_bar, n_sites)?;
    let n = n_sites;
    let half = n / 2;
    // cos(j π / N) for j = 0 … 2N − 1; every (p₁ ± p₂) d is a multiple of π/N.
    let cos_table: Vec<f64> = (0..2 * n)
        .map(|j| (j as f64 * PI / n as f64).cos())
        .collect();

    let data: Vec<(f64, f64, f64)> = modes
        .iter()
        .map(|m| {
            let theta = m.theta();
            let t = (-m.half_angle_offset()).tan();
            (theta, t, m.energy)
        })
        .collect();

    let mut pairs = Vec::with_capacity(half * half);
    for (m1, &(th1, t1, e1)) in data.iter().enumerate() {
        for (m2, &(th2, t2, e2)) in data.iter().enumerate() {
            let sum = e1 + e2;
            let s_minus = (0.5 * (th2 - th1)).sin().powi(2);
            let s_plus = (0.5 * (th2 + th1)).sin().powi(2);
            let (r1, r2) = (t1 / e1, t2 / e2);
            let inv_sq = 1.0 / (sum * sum);
            let t1_plus = t1 * t2 * s_minus * inv_sq;
            let t1_minus = -t1 * t2 * s_plus * inv_sq;
            let t2_plus = (th2 - th1).sin() * (r2 - r1) / (2.0 * sum);
            let t2_minus = (th2 + th1).sin() * (r2 + r1) / (2.0 * sum);
            let t3_plus = s_minus * inv_sq;
            let t3_minus = s_plus * inv_sq;
            pairs.push(PairWeights {
                // p₁ + p₂ = 2(m₁ + m₂ + 1) π/N, p₁ − p₂ = 2(m₁ − m₂) π/N
                sum_index: 2 * (m1 + m2 + 1),
                diff_index: (2 * n + 2 * m1 - 2 * m2) % (2 * n),
                plus: t1_plus + t2_plus - t3_plus,
                minus: t1_minus + t2_minus - t3_minus,
            });
        }
    }

    let norm = 2.0 / (n * n) as f64;
    let kernel = (0..n)
        .map(|d| {
            let terms: Vec<f64> = pairs
                .iter()
                .map(|p| {
                    p.plus * cos_table[(p.sum_index * d) % (2 * n)]
                        + p.minus * cos_table[(p.diff_index * d) % (2 * n)]
                })
                .collect();
            norm * pairwise_sum(&terms)
        })
        .collect();

    Ok(HessianKernel {
        base_coupling: g_bar,
        n_sites,
        kernel,
    })
}

/// How site separation enters an exponential correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMode {
    /// `|j − l|`, ignoring the ring closure.
    #[default]
    Linear,
    /// `min(|j − l|, N − |j − l|)`.
    Ring,
}

impl DistanceMode {
    pub fn distance(self, j: usize, l: usize, n_sites: usize) -> usize {
        let d = j.abs_diff(l);
        match self {
            DistanceMode::Linear => d,
            DistanceMode::Ring => d.min(n_sites - d),
        }
    }
}

/// Correlation structure of the coupling disorder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorrelationKind {
    /// Every site shifts by the same amount.
    Perfect,
    /// Independent sites.
    Iid,
    /// Correlation `e^{−distance/ξ}`.
    Exponential { xi: f64, distance: DistanceMode },
}

impl CorrelationKind {
    fn validate(&self) -> Result<()> {
        if let CorrelationKind::Exponential { xi, .. } = self {
            if !(xi.is_finite() && *xi > 0.0) {
                return Err(Error::invalid(format!(
                    "correlation length must be positive and finite, got {xi}"
                )));
            }
        }
        Ok(())
    }

    /// Correlation coefficient of sites `j` and `l`.
    pub fn correlation(&self, j: usize, l: usize, n_sites: usize) -> f64 {
        match *self {
            CorrelationKind::Perfect => 1.0,
            CorrelationKind::Iid => {
                if j == l {
                    1.0
                } else {
                    0.0
                }
            }
            CorrelationKind::Exponential { xi, distance } => {
                (-(distance.distance(j, l, n_sites) as f64) / xi).exp()
            }
        }
    }
}

/// Covariance `C = σ² R` of the coupling fluctuations, with `R` the
/// correlation matrix (unit diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    sigma: f64,
    kind: CorrelationKind,
    correlation: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(kind: CorrelationKind, sigma: f64, n_sites: usize) -> Result<Self> {
        kind.validate()?;
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "disorder strength must be finite and non-negative, got {sigma}"
            )));
        }
        if n_sites == 0 {
            return Err(Error::invalid("covariance needs at least one site"));
        }
        let correlation = DMatrix::from_fn(n_sites, n_sites, |j, l| kind.correlation(j, l, n_sites));
        Ok(Self {
            sigma,
            kind,
            correlation,
        })
    }

    pub fn perfect(sigma: f64, n_sites: usize) -> Result<Self> {
        Self::new(CorrelationKind::Perfect, sigma, n_sites)
    }

    pub fn iid(sigma: f64, n_sites: usize) -> Result<Self> {
        Self::new(CorrelationKind::Iid, sigma, n_sites)
    }

    pub fn exponential(sigma: f64, n_sites: usize, xi: f64, distance: DistanceMode) -> Result<Self> {
        Self::new(CorrelationKind::Exponential { xi, distance }, sigma, n_sites)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }

    pub fn n_sites(&self) -> usize {
        self.correlation.nrows()
    }

    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.correlation
    }

    pub fn entries(&self) -> DMatrix<f64> {
        &self.correlation * (self.sigma * self.sigma)
    }

    /// A matrix `L` with `L Lᵀ = C`. Cholesky when `C` is positive
    /// definite; otherwise eigenvalues in `[−1e−10, 0)` are truncated to zero.
    pub fn factor(&self) -> Result<DMatrix<f64>> {
        let r = &self.correlation;
        let root = match r.clone().cholesky() {
            Some(chol) => chol.l(),
            None => {
                let eig = r.clone().symmetric_eigen();
                let lowest = eig.eigenvalues.min();
                if lowest < -PSD_TOLERANCE {
                    return Err(Error::numerical(format!(
                        "covariance is not positive semidefinite (eigenvalue {lowest:e})"
                    )));
                }
                let roots = DVector::from_iterator(
                    r.nrows(),
                    eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
                );
                eig.eigenvectors * DMatrix::from_diagonal(&roots)
            }
        };
        Ok(root * self.sigma)
    }
}

/// Leading-order disorder response of the utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondVariationReport {
    pub base_coupling: f64,
    pub n_sites: usize,
    pub sigma: f64,
    pub kind: CorrelationKind,
    /// `δu⁽²⁾ = ½ Σ C_{jl} H_{jl}`.
    pub delta_u2: f64,
    /// `δu⁽²⁾ / (N σ²)`, independent of `σ`.
    pub rescaled: f64,
}

impl SecondVariationReport {
    fn from_rescaled(g_bar: f64, n_sites: usize, sigma: f64, kind: CorrelationKind, rescaled: f64) -> Self {
        Self {
            base_coupling: g_bar,
            n_sites,
            sigma,
            kind,
            delta_u2: rescaled * n_sites as f64 * sigma * sigma,
            rescaled,
        }
    }
}

/// Contract an already computed kernel with a covariance.
pub fn contract(kernel: &HessianKernel, covariance: &CovarianceMatrix) -> Result<SecondVariationReport> {
    let n = kernel.n_sites;
    if covariance.n_sites() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: covariance.n_sites(),
        });
    }
    let r = covariance.correlation();
    let rows: Vec<f64> = (0..n)
        .map(|j| {
            let row: Vec<f64> = (0..n).map(|l| r[(j, l)] * kernel.entry(j, l)).collect();
            pairwise_sum(&row)
        })
        .collect();
    let rescaled = 0.5 * pairwise_sum(&rows) / n as f64;
    Ok(SecondVariationReport::from_rescaled(
        kernel.base_coupling,
        n,
        covariance.sigma(),
        covariance.kind(),
        rescaled,
    ))
}

/// `δu⁽²⁾ = ½ Σ_{j,l} C_{jl} h((j − l) mod N)` through the Hessian kernel.
pub fn second_variation(g_bar: f64, n_sites: usize, covariance: &CovarianceMatrix) -> Result<SecondVariationReport> {
    if covariance.n_sites() != n_sites {
        return Err(Error::DimensionMismatch {
            expected: n_sites,
            actual: covariance.n_sites(),
        });
    }
    contract(&hessian_kernel(g_bar, n_sites)?, covariance)
}

/// Second variation by the one-dimensional closed forms: `χ″/(2N)` for
/// perfect correlation, `∇²u/(2N)` for i.i.d. disorder. Exponential
/// correlations have no such form and fall back to the kernel.
pub fn second_variation_closed_form(
    g_bar: f64,
    n_sites: usize,
    kind: CorrelationKind,
    sigma: f64,
) -> Result<SecondVariationReport> {
    let half_n = 2.0 * n_sites as f64;
    let rescaled = match kind {
        CorrelationKind::Perfect => chi_double_prime(g_bar, n_sites)? / half_n,
        CorrelationKind::Iid => laplacian_u(g_bar, n_sites)? / half_n,
        CorrelationKind::Exponential { .. } => {
            let covariance = CovarianceMatrix::new(kind, sigma, n_sites)?;
            return second_variation(g_bar, n_sites, &covariance);
        }
    };
    Ok(SecondVariationReport::from_rescaled(g_bar, n_sites, sigma, kind, rescaled))
}

/// `δu⁽¹⁾ = (Σ_j δg_j / N) χ′(ḡ)`.
pub fn first_variation(g_bar: f64, n_sites: usize, delta_g: &[f64]) -> Result<f64> {
    if delta_g.len() != n_sites {
        return Err(Error::DimensionMismatch {
            expected: n_sites,
            actual: delta_g.len(),
        });
    }
    let mean = pairwise_sum(delta_g) / n_sites as f64;
    if mean == 0.0 {
        validate_coupling(g_bar)?;
        validate_sites(n_sites)?;
        return Ok(0.0);
    }
    Ok(mean * chi_prime(g_bar, n_sites)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parity_game::utility_clean;

    fn chi(g: f64, n: usize) -> f64 {
        utility_clean(g, n).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn mode_response_at_critical_point() {
        let k = PI / 2.0;
        assert!((mode_response(1.0, k) - 0.5 * (2f64.sqrt() - 1.0)).abs() < 1e-14);
        for &k in &[0.1f64, 0.7, 2.0, 3.0] {
            let expected = 0.5 * (1.0 / (0.5 * k).sin() - 1.0);
            assert!((mode_response(1.0, k) - expected).abs() < 1e-12);
        }
        assert!(mode_response(1e-12, 1.0).abs() < 1e-10);
    }

    #[test]
    fn mode_response_is_minus_single_mode_derivative() {
        let (g, k, h) = (0.5, PI / 3.0, 1e-5);
        let mode_chi = |g: f64| 2.0 * BogoliubovMode::new(g, k).half_angle_offset().cos().ln();
        let fd = -(mode_chi(g + h) - mode_chi(g - h)) / (2.0 * h);
        assert!((fd - mode_response(g, k)).abs() < 1e-6);
    }

    #[test]
    fn chi_derivatives_match_finite_differences() {
        for &g in &[0.5, 0.8, 1.0, 1.3, 2.0] {
            let h = 1e-5;
            let fd1 = (chi(g + h, 40) - chi(g - h, 40)) / (2.0 * h);
            assert!(rel(chi_prime(g, 40).unwrap(), fd1) < 1e-6, "chi' at {g}");

            let second = |h: f64| (chi(g + h, 40) - 2.0 * chi(g, 40) + chi(g - h, 40)) / (h * h);
            let h = 1e-3;
            let fd2 = (4.0 * second(h / 2.0) - second(h)) / 3.0;
            assert!(rel(chi_double_prime(g, 40).unwrap(), fd2) < 1e-4, "chi'' at {g}");
        }
        assert!(chi_prime(1e-9, 40).unwrap().abs() < 1e-6);
        assert!(chi_double_prime(1e-6, 40).unwrap() < 0.0);
    }

    #[test]
    fn laplacian_signs() {
        assert!(laplacian_u(1.6, 40).unwrap() > 0.0);
        assert!(laplacian_u(0.5, 40).unwrap() < 0.0);
    }

    #[test]
    fn kernel_contractions_match_closed_forms() {
        for &(g, n) in &[(0.5, 12), (0.8, 12), (1.0, 20), (1.6, 40), (2.5, 16)] {
            let kernel = hessian_kernel(g, n).unwrap();
            let chi2 = chi_double_prime(g, n).unwrap();
            let lap = laplacian_u(g, n).unwrap();
            assert!((kernel.total() - chi2).abs() < 1e-8 * chi2.abs().max(1.0), "sum g={g} n={n}");
            assert!((kernel.trace() - lap).abs() < 1e-8 * lap.abs().max(1.0), "trace g={g} n={n}");
            for d in 1..n {
                assert!((kernel.kernel[d] - kernel.kernel[n - d]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn kernel_reference_values() {
        let kernel = hessian_kernel(0.8, 12).unwrap();
        assert!((kernel.kernel[0] + 0.10239).abs() < 1e-4, "{}", kernel.kernel[0]);
        assert!((kernel.kernel[1] + 0.12512).abs() < 1e-4, "{}", kernel.kernel[1]);
    }

    #[test]
    fn second_variation_reductions() {
        let (g, n, sigma) = (0.7, 24, 0.03);
        let perfect = second_variation(g, n, &CovarianceMatrix::perfect(sigma, n).unwrap()).unwrap();
        let expected = 0.5 * sigma * sigma * chi_double_prime(g, n).unwrap();
        assert!((perfect.delta_u2 - expected).abs() < 1e-8 * expected.abs());
        let closed = second_variation_closed_form(g, n, CorrelationKind::Perfect, sigma).unwrap();
        assert!(rel(closed.rescaled, perfect.rescaled) < 1e-8);

        let iid = second_variation(g, n, &CovarianceMatrix::iid(sigma, n).unwrap()).unwrap();
        let expected = 0.5 * sigma * sigma * laplacian_u(g, n).unwrap();
        assert!((iid.delta_u2 - expected).abs() < 1e-8 * expected.abs());
        assert!(rel(iid.rescaled * n as f64 * sigma * sigma, iid.delta_u2) < 1e-12);
    }

    #[test]
    fn sign_structure_at_forty_sites() {
        for kind in [CorrelationKind::Perfect, CorrelationKind::Iid] {
            for &g in &[0.3, 0.5, 0.7] {
                assert!(second_variation_closed_form(g, 40, kind, 0.01).unwrap().delta_u2 < 0.0);
            }
            for &g in &[1.2, 1.6, 2.0] {
                assert!(second_variation_closed_form(g, 40, kind, 0.01).unwrap().delta_u2 > 0.0);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let c = CovarianceMatrix::iid(0.1, 10).unwrap();
        assert!(matches!(
            second_variation(0.5, 12, &c),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(first_variation(0.5, 12, &[0.0; 10]).is_err());
    }

    #[test]
    fn first_variation_cases() {
        assert_eq!(first_variation(0.9, 16, &[0.0; 16]).unwrap(), 0.0);
        let zero_mean: Vec<f64> = (0..16).map(|j| if j % 2 == 0 { 0.01 } else { -0.01 }).collect();
        assert_eq!(first_variation(0.9, 16, &zero_mean).unwrap(), 0.0);
        for &h in &[1e-3, 5e-4] {
            let predicted = first_variation(0.9, 16, &[h; 16]).unwrap();
            let actual = chi(0.9 + h, 16) - chi(0.9, 16);
            let curvature = chi_double_prime(0.9, 16).unwrap();
            let residual = (actual - predicted) / (h * h);
            assert!((residual - 0.5 * curvature).abs() < 0.05 * curvature.abs());
        }
    }

    #[test]
    fn covariance_factors_reproduce_entries() {
        let n = 16;
        for c in [
            CovarianceMatrix::perfect(0.2, n).unwrap(),
            CovarianceMatrix::iid(0.2, n).unwrap(),
            CovarianceMatrix::exponential(0.2, n, 3.0, DistanceMode::Linear).unwrap(),
            CovarianceMatrix::exponential(0.2, n, 3.0, DistanceMode::Ring).unwrap(),
            CovarianceMatrix::exponential(0.2, n, 1e6 * n as f64, DistanceMode::Linear).unwrap(),
        ] {
            let l = c.factor().unwrap();
            let diff = &l * l.transpose() - c.entries();
            assert!(diff.amax() < 1e-9, "{:?}: {}", c.kind(), diff.amax());
            for j in 0..n {
                assert!((c.entries()[(j, j)] - 0.04).abs() < 1e-15);
            }
        }
        assert!(CovarianceMatrix::exponential(0.1, 8, 0.0, DistanceMode::Linear).is_err());
        assert!(CovarianceMatrix::iid(-0.1, 8).is_err());
    }

    #[test]
    fn linear_and_ring_distances() {
        assert_eq!(DistanceMode::Linear.distance(0, 9, 10), 9);
        assert_eq!(DistanceMode::Ring.distance(0, 9, 10), 1);
        assert_eq!(DistanceMode::Ring.distance(2, 7, 10), 5);
    }

    #[test]
    fn finite_size_laplacian_root_approaches_thermodynamic() {
        let root_40 = laplacian_crossover(40, 0.9, 1.0 - 1e-9, 1e-8).unwrap();
        assert!((root_40 - 0.97286).abs() < 1e-4, "{root_40}");
        let integral_low = laplacian_integral(0.95).unwrap();
        let integral_high = laplacian_integral(0.999).unwrap();
        assert!(integral_low < 0.0 && integral_high > 0.0);
    }
}
