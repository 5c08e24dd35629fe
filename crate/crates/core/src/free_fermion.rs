//! Free-fermion solution of the periodic transverse-field Ising ring.
//!
//! After the Jordan–Wigner map `X_j = 1 − 2 c_j† c_j`, the Hamiltonian
//! `−Σ Z_j Z_{j+1} − Σ g_j X_j` (even-parity sector, antiperiodic fermions)
//! is the quadratic form `Ψ† H Ψ` with `Ψ = (c, c†)` and
//! `H = [[A, B], [−B, −A]]`. Every ground state is represented by a
//! [`FermionTransform`], the `(U, V)` blocks of the unitary that maps the
//! site fermions to quasiparticles, and overlaps between two such states
//! are `|det(U_l† U_r + V_l† V_r)|`.
//!
//! Only even `N ≥ 4` is supported.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{log_abs_det, unitarity_defect};

/// Overlaps may exceed one by at most this much before we call it a bug.
pub const OVERLAP_EXCESS_TOLERANCE: f64 = 1e-8;

/// Transverse fields `g_1, …, g_N` of a ring with an even number of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingVector(Vec<f64>);

impl CouplingVector {
    /// Rejects odd or short chains and any field that is not strictly
    /// positive and finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_sites(values.len())?;
        if let Some((site, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, g)| !(g.is_finite() && **g > 0.0))
        {
            return Err(Error::NonPositiveCoupling { site, value });
        }
        Ok(Self(values))
    }

    /// All sites at the same field `g`.
    pub fn uniform(g: f64, n_sites: usize) -> Result<Self> {
        Self::new(vec![g; n_sites])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn validate_sites(n_sites: usize) -> Result<()> {
    if n_sites < 4 || n_sites % 2 != 0 {
        return Err(Error::invalid(format!(
            "the fermionic solution needs an even number of sites N >= 4 (got {n_sites}); odd chains are not supported"
        )));
    }
    Ok(())
}

pub(crate) fn validate_coupling(g: f64) -> Result<()> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::invalid(format!(
            "transverse field must be positive and finite, got {g}"
        )));
    }
    Ok(())
}

/// Positive antiperiodic momenta `π/N, 3π/N, …, (N−1)π/N`.
pub fn allowed_wavenumbers(n_sites: usize) -> Result<Vec<f64>> {
    validate_sites(n_sites)?;
    Ok(positive_momenta(n_sites))
}

/// Same as [`allowed_wavenumbers`] without the `N ≥ 4` check; also used by
/// the large-N sums, which accept `N = 2`.
pub(crate) fn positive_momenta(n_sites: usize) -> Vec<f64> {
    (0..n_sites / 2)
        .map(|m| (2 * m + 1) as f64 * PI / n_sites as f64)
        .collect()
}

/// One momentum pair `±k` of the clean chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovMode {
    pub k: f64,
    pub sin_theta: f64,
    pub cos_theta: f64,
    /// Quasiparticle energy `ε_k = √(1 + g² − 2g cos k)`.
    pub energy: f64,
}

impl BogoliubovMode {
    /// Mode at field `g`. Accepts any `k`, including the endpoints.
    pub fn new(g: f64, k: f64) -> Self {
        let half_sin = (0.5 * k).sin();
        // (1 − g)² + 4 g sin²(k/2) avoids cancellation near g = 1, k = 0.
        let energy = ((1.0 - g) * (1.0 - g) + 4.0 * g * half_sin * half_sin).sqrt();
        let g_minus_cos = (g - 1.0) + 2.0 * half_sin * half_sin;
        Self {
            k,
            sin_theta: k.sin() / energy,
            cos_theta: g_minus_cos / energy,
            energy,
        }
    }

    /// The `g → 0⁺` limit, taken analytically: `cos θ = −cos k`,
    /// `sin θ = sin k`, `ε = 1`.
    pub fn reference(k: f64) -> Self {
        Self {
            k,
            sin_theta: k.sin(),
            cos_theta: -k.cos(),
            energy: 1.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.sin_theta.atan2(self.cos_theta)
    }

    /// `θ_k(0⁺) = π − k` for `k ∈ (0, π)`.
    pub fn reference_theta(&self) -> f64 {
        PI - self.k
    }

    /// `(θ_k(g) − θ_k(0⁺)) / 2`, always inside `(−π/2, π/2)`.
    pub fn half_angle_offset(&self) -> f64 {
        0.5 * (self.theta() - self.reference_theta())
    }
}

/// Bogoliubov data of the clean ring at field `g`, one entry per positive
/// allowed momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovSpectrum {
    pub coupling: f64,
    pub modes: Vec<BogoliubovMode>,
}

impl BogoliubovSpectrum {
    pub fn wavenumbers(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.k)
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.energy)
    }
}

pub fn bogoliubov_spectrum(g: f64, n_sites: usize) -> Result<BogoliubovSpectrum> {
    validate_coupling(g)?;
    let modes = allowed_wavenumbers(n_sites)?
        .into_iter()
        .map(|k| BogoliubovMode::new(g, k))
        .collect();
    Ok(BogoliubovSpectrum { coupling: g, modes })
}

/// `(U, V)` blocks of `Q = [[U, V*], [V, U*]]`, columns ordered by
/// ascending quasiparticle energy.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTransform {
    u: DMatrix<Complex64>,
    v: DMatrix<Complex64>,
    energies: Vec<f64>,
}

impl FermionTransform {
    fn from_columns(
        n: usize,
        mut columns: Vec<(f64, Vec<Complex64>, Vec<Complex64>)>,
    ) -> Self {
        columns.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut u = DMatrix::zeros(n, n);
        let mut v = DMatrix::zeros(n, n);
        let mut energies = Vec::with_capacity(n);
        for (col, (energy, u_col, v_col)) in columns.into_iter().enumerate() {
            for row in 0..n {
                u[(row, col)] = u_col[row];
                v[(row, col)] = v_col[row];
            }
            energies.push(energy);
        }
        Self { u, v, energies }
    }

    pub fn n_sites(&self) -> usize {
        self.u.nrows()
    }

    pub fn u_block(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    pub fn v_block(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    /// Non-negative quasiparticle energies, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `−Σ_μ ε_μ`, the energy of the quasiparticle vacuum.
    pub fn ground_energy(&self) -> f64 {
        -self.energies.iter().sum::<f64>()
    }

    /// The full `2N × 2N` unitary `[[U, V*], [V, U*]]`.
    pub fn q_matrix(&self) -> DMatrix<Complex64> {
        let n = self.n_sites();
        let mut q = DMatrix::zeros(2 * n, 2 * n);
        q.view_mut((0, 0), (n, n)).copy_from(&self.u);
        q.view_mut((0, n), (n, n)).copy_from(&self.v.map(|z| z.conj()));
        q.view_mut((n, 0), (n, n)).copy_from(&self.v);
        q.view_mut((n, n), (n, n)).copy_from(&self.u.map(|z| z.conj()));
        q
    }

    /// `max |Q†Q − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.q_matrix())
    }
}

/// Real-space transform of the clean ring built from momentum modes:
/// Fourier transform `c_j = e^{−iπ/4}/√N Σ_k e^{ikj} c_k` followed by the
/// Bogoliubov rotation with the given per-mode angles.
fn momentum_space_transform(n: usize, mode_at: impl Fn(f64) -> BogoliubovMode) -> FermionTransform {
    let norm = 1.0 / (n as f64).sqrt();
    let u_phase = Complex64::from_polar(norm, -FRAC_PI_4);
    let v_phase = Complex64::from_polar(norm, FRAC_PI_4);
    let mut columns = Vec::with_capacity(n);
    for k_pos in positive_momenta(n) {
        let mode = mode_at(k_pos);
        let theta = mode.theta();
        for (k, th) in [(k_pos, theta), (-k_pos, -theta)] {
            let (s, c) = (0.5 * th).sin_cos();
            let mut u_col = Vec::with_capacity(n);
            let mut v_col = Vec::with_capacity(n);
            for j in 1..=n {
                let wave = Complex64::from_polar(1.0, k * j as f64);
                u_col.push(u_phase * wave * c);
                v_col.push(v_phase * wave * s);
            }
            columns.push((mode.energy, u_col, v_col));
        }
    }
    FermionTransform::from_columns(n, columns)
}

/// Transform of the `g → 0⁺` even-parity ground state, i.e. |GHZ⁺⟩, built
/// from the analytic limit of the Bogoliubov angles.
pub fn reference_transform_g0(n_sites: usize) -> Result<FermionTransform> {
    validate_sites(n_sites)?;
    Ok(momentum_space_transform(n_sites, BogoliubovMode::reference))
}

/// Transform of the clean ground state at field `g`.
pub fn uniform_transform(g: f64, n_sites: usize) -> Result<FermionTransform> {
    validate_coupling(g)?;
    validate_sites(n_sites)?;
    Ok(momentum_space_transform(n_sites, |k| BogoliubovMode::new(g, k)))
}

/// The real blocks `A` (symmetric) and `B` (antisymmetric) of the Nambu
/// Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct NambuMatrices {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl NambuMatrices {
    pub fn n_sites(&self) -> usize {
        self.a.nrows()
    }

    pub fn a_block(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b_block(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `H = [[A, B], [−B, −A]]`. With `A` symmetric and `B` antisymmetric
    /// this is real symmetric.
    pub fn assembled(&self) -> DMatrix<f64> {
        let n = self.n_sites();
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&self.a);
        h.view_mut((0, n), (n, n)).copy_from(&self.b);
        h.view_mut((n, 0), (n, n)).copy_from(&(-&self.b));
        h.view_mut((n, n), (n, n)).copy_from(&(-&self.a));
        h
    }
}

pub fn build_nambu(g: &CouplingVector) -> NambuMatrices {
    let n = g.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for (j, &gj) in g.values().iter().enumerate() {
        a[(j, j)] = gj;
    }
    for j in 0..n - 1 {
        a[(j, j + 1)] = -0.5;
        a[(j + 1, j)] = -0.5;
        b[(j, j + 1)] = -0.5;
        b[(j + 1, j)] = 0.5;
    }
    // Even-parity (antiperiodic) closing bond.
    a[(n - 1, 0)] = 0.5;
    a[(0, n - 1)] = 0.5;
    b[(n - 1, 0)] = 0.5;
    b[(0, n - 1)] = -0.5;
    NambuMatrices { a, b }
}

const SOLVER_MAX_ITER: usize = 10_000;

/// Diagonalize the Nambu Hamiltonian through the SVD of `M = A + B`.
///
/// Writing `φ = u + v` and `ψ = u − v`, the eigenproblem `H (u, v) = ε (u, v)`
/// becomes `M φ = ε ψ`, `Mᵀ ψ = ε φ`, so the singular triplets of `M` give
/// the positive-energy eigenvectors directly and their particle-hole
/// partners `(v*, u*)` by construction. Each `ψ` is rebuilt as `M φ/|M φ|`
/// from its right vector, which keeps the pair consistent inside nearly
/// degenerate singular subspaces.
pub fn diagonalize_nambu(m: &NambuMatrices) -> Result<FermionTransform> {
    let n = m.n_sites();
    let sum = &m.a + &m.b;
    let svd = sum
        .clone()
        .try_svd(true, true, f64::EPSILON, SOLVER_MAX_ITER)
        .ok_or_else(|| Error::numerical("SVD of the Nambu block did not converge"))?;
    let left = svd.u.as_ref().expect("requested left singular vectors");
    let right_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let columns = (0..n)
        .map(|i| {
            let energy = svd.singular_values[i];
            let phi_col = right_t.row(i).transpose();
            let mut psi_col = &sum * &phi_col;
            let norm = psi_col.norm();
            if norm > 1e-8 {
                psi_col /= norm;
            } else {
                psi_col = left.column(i).into_owned();
            }
            let (u_col, v_col) = (0..n)
                .map(|row| {
                    let phi = phi_col[row];
                    let psi = psi_col[row];
                    (
                        Complex64::new(0.5 * (phi + psi), 0.0),
                        Complex64::new(0.5 * (phi - psi), 0.0),
                    )
                })
                .unzip();
            (energy, u_col, v_col)
        })
        .collect();
    Ok(FermionTransform::from_columns(n, columns))
}

/// Diagonalize the full `2N × 2N` symmetric Nambu matrix and keep the
/// positive half of the spectrum. Slower than [`diagonalize_nambu`]; kept as
/// an independent route for verification.
pub fn diagonalize_nambu_symmetric(m: &NambuMatrices) -> Result<FermionTransform> {
    let n = m.n_sites();
    let eig = m
        .assembled()
        .try_symmetric_eigen(f64::EPSILON, SOLVER_MAX_ITER)
        .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let columns = order[n..]
        .iter()
        .map(|&i| {
            let vec = eig.eigenvectors.column(i);
            let u_col = (0..n).map(|r| Complex64::new(vec[r], 0.0)).collect();
            let v_col = (0..n).map(|r| Complex64::new(vec[n + r], 0.0)).collect();
            (eig.eigenvalues[i], u_col, v_col)
        })
        .collect();
    Ok(FermionTransform::from_columns(n, columns))
}

fn overlap_matrix(left: &FermionTransform, right: &FermionTransform) -> Result<DMatrix<Complex64>> {
    if left.n_sites() != right.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: left.n_sites(),
            actual: right.n_sites(),
        });
    }
    Ok(left.u.adjoint() * &right.u + left.v.adjoint() * &right.v)
}

fn checked_log_overlap(log_value: f64) -> Result<f64> {
    if log_value.is_nan() {
        return Err(Error::numerical("overlap determinant is NaN"));
    }
    if log_value > OVERLAP_EXCESS_TOLERANCE.ln_1p() {
        return Err(Error::numerical(format!(
            "overlap {} exceeds one beyond tolerance",
            log_value.exp()
        )));
    }
    Ok(log_value.min(0.0))
}

/// `ln |⟨left|right⟩|²`, finite even when the overlap underflows.
pub fn log_overlap_squared(left: &FermionTransform, right: &FermionTransform) -> Result<f64> {
    checked_log_overlap(log_abs_det(&overlap_matrix(left, right)?)?)
}

/// `|⟨left|right⟩|² = |det(U_l† U_r + V_l† V_r)|`, clamped to `[0, 1]`.
pub fn overlap_squared(left: &FermionTransform, right: &FermionTransform) -> Result<f64> {
    Ok(log_overlap_squared(left, right)?.exp())
}

/// Precomputed |GHZ⁺⟩ reference for repeated overlaps at one system size.
#[derive(Debug, Clone)]
pub struct GhzReference {
    u_adj: DMatrix<Complex64>,
    v_adj: DMatrix<Complex64>,
}

impl GhzReference {
    pub fn new(n_sites: usize) -> Result<Self> {
        let reference = reference_transform_g0(n_sites)?;
        Ok(Self {
            u_adj: reference.u.adjoint(),
            v_adj: reference.v.adjoint(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.u_adj.nrows()
    }

    /// `ln |⟨GHZ⁺|ψ(g)⟩|²`.
    pub fn log_overlap_squared(&self, g: &CouplingVector) -> Result<f64> {
        if g.len() != self.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites(),
                actual: g.len(),
            });
        }
        let ground = diagonalize_nambu(&build_nambu(g))?;
        let m = &self.u_adj * &ground.u + &self.v_adj * &ground.v;
        checked_log_overlap(log_abs_det(&m)?)
    }

    pub fn overlap_squared(&self, g: &CouplingVector) -> Result<f64> {
        Ok(self.log_overlap_squared(g)?.exp())
    }
}

/// `|⟨GHZ⁺|ψ(g)⟩|²` for the ground state of the disordered ring.
pub fn ghz_overlap_squared(g: &CouplingVector) -> Result<f64> {
    GhzReference::new(g.len())?.overlap_squared(g)
}

/// `ln |⟨GHZ⁺|ψ(g)⟩|²`.
pub fn log_ghz_overlap_squared(g: &CouplingVector) -> Result<f64> {
    GhzReference::new(g.len())?.log_overlap_squared(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `Π_{k>0} cos²((θ_k(g) − θ_k(0⁺))/2)` evaluated mode by mode.
    fn product_formula(g: f64, n: usize) -> f64 {
        positive_momenta(n)
            .into_iter()
            .map(|k| BogoliubovMode::new(g, k).half_angle_offset().cos().powi(2))
            .product()
    }

    fn random_couplings(n: usize, seed: u64) -> CouplingVector {
        // Small LCG; only used to vary inputs.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let values = (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                0.2 + 2.8 * ((state >> 11) as f64 / (1u64 << 53) as f64)
            })
            .collect();
        CouplingVector::new(values).unwrap()
    }

    #[test]
    fn wavenumbers_for_small_rings() {
        let k4 = allowed_wavenumbers(4).unwrap();
        assert_eq!(k4.len(), 2);
        assert!((k4[0] - PI / 4.0).abs() < 1e-15 && (k4[1] - 3.0 * PI / 4.0).abs() < 1e-15);
        let k6 = allowed_wavenumbers(6).unwrap();
        for (got, m) in k6.iter().zip([1.0, 3.0, 5.0]) {
            assert!((got - m * PI / 6.0).abs() < 1e-15);
        }
        let k40 = allowed_wavenumbers(40).unwrap();
        assert_eq!(k40.len(), 20);
        assert!((k40[19] - 39.0 * PI / 40.0).abs() < 1e-15);
        assert!(k40.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn odd_or_short_chains_rejected() {
        for n in [0, 2, 3, 5, 7] {
            let err = allowed_wavenumbers(n).unwrap_err();
            assert!(err.to_string().contains("even"), "{err}");
        }
    }

    #[test]
    fn coupling_vector_validation() {
        assert!(CouplingVector::new(vec![1.0; 4]).is_ok());
        assert!(matches!(
            CouplingVector::new(vec![1.0, 0.0, 1.0, 1.0]),
            Err(Error::NonPositiveCoupling { site: 1, .. })
        ));
        assert!(CouplingVector::new(vec![1.0, -0.5, 1.0, 1.0]).is_err());
        assert!(CouplingVector::new(vec![1.0, f64::NAN, 1.0, 1.0]).is_err());
        assert!(CouplingVector::new(vec![1.0; 5]).is_err());
    }

    #[test]
    fn bogoliubov_mode_values() {
        let m = BogoliubovMode::new(1.0, PI / 2.0);
        let r = 0.5f64.sqrt();
        assert!((m.energy - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.cos_theta - r).abs() < 1e-15 && (m.sin_theta - r).abs() < 1e-15);

        let m = BogoliubovMode::new(2.0, PI);
        assert!((m.energy - 3.0).abs() < 1e-15);
        assert!((m.cos_theta - 1.0).abs() < 1e-15 && m.sin_theta.abs() < 1e-15);

        for k in positive_momenta(10) {
            let tiny = BogoliubovMode::new(1e-12, k);
            let limit = BogoliubovMode::reference(k);
            assert!((tiny.energy - 1.0).abs() < 1e-11);
            assert!((tiny.cos_theta - limit.cos_theta).abs() < 1e-11);
            assert!((tiny.sin_theta - limit.sin_theta).abs() < 1e-11);
            assert!((limit.theta() - limit.reference_theta()).abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_invariants() {
        for &g in &[0.1, 0.9, 1.0, 1.7, 5.0] {
            let s = bogoliubov_spectrum(g, 16).unwrap();
            for m in &s.modes {
                assert!((m.sin_theta.powi(2) + m.cos_theta.powi(2) - 1.0).abs() < 1e-12);
                assert!(m.energy > 0.0);
            }
        }
        assert!(bogoliubov_spectrum(0.0, 8).is_err());
        assert!(bogoliubov_spectrum(-1.0, 8).is_err());
    }

    #[test]
    fn reference_transform_is_unitary_and_self_overlapping() {
        let r4 = reference_transform_g0(4).unwrap();
        assert!(r4.unitarity_defect() < 1e-12);
        let r8 = reference_transform_g0(8).unwrap();
        assert!((overlap_squared(&r8, &r8).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_transform_diagonalizes_nambu_matrix() {
        for &g in &[0.3, 1.0, 2.5] {
            let n = 8;
            let t = uniform_transform(g, n).unwrap();
            let h = build_nambu(&CouplingVector::uniform(g, n).unwrap())
                .assembled()
                .map(|x| Complex64::new(x, 0.0));
            let q = t.q_matrix();
            let d = q.adjoint() * h * &q;
            for r in 0..2 * n {
                for c in 0..2 * n {
                    let expected = match (r == c, r < n) {
                        (true, true) => t.energies()[r],
                        (true, false) => -t.energies()[r - n],
                        _ => 0.0,
                    };
                    assert!((d[(r, c)] - Complex64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn uniform_overlaps_follow_product_formula() {
        for &n in &[4usize, 8, 12, 20, 40] {
            let reference = reference_transform_g0(n).unwrap();
            for &g in &[0.1, 0.5, 1.0, 1.5, 3.0] {
                let clean = uniform_transform(g, n).unwrap();
                let via_fourier = overlap_squared(&reference, &clean).unwrap();
                let via_nambu = ghz_overlap_squared(&CouplingVector::uniform(g, n).unwrap()).unwrap();
                let expected = product_formula(g, n);
                assert!((via_fourier - expected).abs() < 1e-10, "n={n} g={g}");
                assert!((via_nambu - expected).abs() < 1e-10, "n={n} g={g}");
            }
        }
        let t = uniform_transform(0.5, 20).unwrap();
        assert!((overlap_squared(&t, &t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nambu_entries() {
        let m = build_nambu(&CouplingVector::uniform(1.0, 4).unwrap());
        let a = m.a_block();
        let b = m.b_block();
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(1, 2)], -0.5);
        assert_eq!(a[(2, 1)], -0.5);
        assert_eq!(a[(0, 3)], 0.5);
        assert_eq!(a[(3, 0)], 0.5);
        assert_eq!(a[(0, 2)], 0.0);
        assert_eq!(b[(1, 2)], -0.5);
        assert_eq!(b[(2, 1)], 0.5);
        assert_eq!(b[(3, 0)], 0.5);
        assert_eq!(b[(0, 3)], -0.5);
        assert_eq!(a.transpose(), *a);
        assert_eq!(b.transpose(), -b);
        let h = m.assembled();
        assert_eq!(h.transpose(), h);
        let again = build_nambu(&CouplingVector::new(vec![2.0 + 0.0; 4]).unwrap());
        assert_eq!(again, build_nambu(&CouplingVector::uniform(2.0, 4).unwrap()));
    }

    #[test]
    fn clean_nambu_energies_match_dispersion() {
        let g = 0.7;
        let t = diagonalize_nambu(&build_nambu(&CouplingVector::uniform(g, 8).unwrap())).unwrap();
        let mut expected: Vec<f64> = bogoliubov_spectrum(g, 8)
            .unwrap()
            .energies()
            .flat_map(|e| [e, e])
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in t.energies().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn both_diagonalization_routes_agree() {
        for seed in 0..6 {
            let g = random_couplings(10, seed);
            let m = build_nambu(&g);
            let fast = diagonalize_nambu(&m).unwrap();
            let slow = diagonalize_nambu_symmetric(&m).unwrap();
            assert!(fast.unitarity_defect() < 1e-10);
            assert!(slow.unitarity_defect() < 1e-10);
            for (a, b) in fast.energies().iter().zip(slow.energies()) {
                assert!((a - b).abs() < 1e-10);
            }
            let reference = reference_transform_g0(10).unwrap();
            let o_fast = overlap_squared(&reference, &fast).unwrap();
            let o_slow = overlap_squared(&reference, &slow).unwrap();
            assert!((o_fast - o_slow).abs() < 1e-10);
            // Same state, possibly different quasiparticle bases.
            assert!((overlap_squared(&fast, &slow).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn routes_agree_on_nearly_degenerate_spectrum() {
        let mut values = vec![1.6; 12];
        values[3] -= 5e-4;
        values[7] += 5e-4;
        let g = CouplingVector::new(values).unwrap();
        let m = build_nambu(&g);
        let reference = reference_transform_g0(12).unwrap();
        let fast = log_overlap_squared(&reference, &diagonalize_nambu(&m).unwrap()).unwrap();
        let slow = log_overlap_squared(&reference, &diagonalize_nambu_symmetric(&m).unwrap()).unwrap();
        assert!((fast - slow).abs() < 1e-13, "{fast} vs {slow}");
    }

    #[test]
    fn particle_hole_pairing_of_nambu_spectrum() {
        let g = random_couplings(12, 42);
        let h = build_nambu(&g).assembled();
        let mut eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let n2 = eig.len();
        for i in 0..n2 {
            assert!((eig[i] + eig[n2 - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn overlap_dimension_mismatch() {
        let a = reference_transform_g0(4).unwrap();
        let b = reference_transform_g0(6).unwrap();
        assert!(matches!(
            overlap_squared(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ghz_overlap_decreases_with_field() {
        let grid: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&g| ghz_overlap_squared(&CouplingVector::uniform(g, 12).unwrap()).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        let tiny = ghz_overlap_squared(&CouplingVector::uniform(1e-9, 12).unwrap()).unwrap();
        assert!((tiny - 1.0).abs() < 1e-12);
    }
}
