//! Parity-game quantities: classical bound, BBT winning probability, the
//! log-bias-ratio utility and its per-player density.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_fermion::{
    positive_momenta, validate_coupling, validate_sites, BogoliubovMode, CouplingVector,
    GhzReference,
};
use crate::quadrature::{bisect, integrate_with_breakpoints, Estimate};

/// Winning probability of random guessing.
pub const RANDOM_GUESS_PROBABILITY: f64 = 0.5;

/// Density of the GHZ state, `(ln 2)/2`.
pub const STRONG_ADVANTAGE_DENSITY: f64 = LN_2 / 2.0;

/// Half-width of the band around `(ln 2)/2` that counts as strong advantage.
pub const STRONG_ADVANTAGE_BAND: f64 = 1e-9;

const DENSITY_QUADRATURE_TOL: f64 = 1e-12;
const BOUNDARY_BRACKET: (f64, f64) = (1.4, 1.6);
const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdvantageClass {
    Strong,
    Weak,
    None,
}

fn ceil_half(n_players: usize) -> usize {
    n_players.div_ceil(2)
}

fn validate_players(n_players: usize) -> Result<()> {
    if n_players < 3 {
        return Err(Error::invalid(format!(
            "the parity game needs at least 3 players, got {n_players}"
        )));
    }
    Ok(())
}

/// Optimal classical winning probability `1/2 + 2^{−⌈N/2⌉}`.
pub fn classical_bound(n_players: usize) -> Result<f64> {
    validate_players(n_players)?;
    Ok(0.5 + 0.5f64.powi(ceil_half(n_players) as i32))
}

/// BBT winning probability `½(1 + |⟨GHZ⁺|ψ⟩|² − |⟨GHZ⁻|ψ⟩|²)`.
pub fn quantum_win_probability(overlap_plus_sq: f64, overlap_minus_sq: f64) -> Result<f64> {
    for (name, x) in [("GHZ+", overlap_plus_sq), ("GHZ-", overlap_minus_sq)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!(
                "squared {name} overlap must lie in [0, 1], got {x}"
            )));
        }
    }
    if overlap_plus_sq + overlap_minus_sq > 1.0 + 1e-9 {
        return Err(Error::invalid(format!(
            "GHZ overlaps sum to {} > 1",
            overlap_plus_sq + overlap_minus_sq
        )));
    }
    Ok(0.5 * (1.0 + overlap_plus_sq - overlap_minus_sq))
}

/// Utility of an even-parity state from `ln |⟨GHZ⁺|ψ⟩|²`.
pub fn utility_from_log_overlap(log_overlap_plus_sq: f64, n_players: usize) -> f64 {
    (ceil_half(n_players) as f64 - 1.0) * LN_2 + log_overlap_plus_sq
}

/// `u = ln(2^{⌈N/2⌉−1} |⟨GHZ⁺|ψ⟩|²)` for an even-parity state; `−∞` for a
/// state orthogonal to |GHZ⁺⟩.
pub fn utility_from_overlap(overlap_plus_sq: f64, n_players: usize) -> Result<f64> {
    validate_players(n_players)?;
    if !(0.0..=1.0).contains(&overlap_plus_sq) {
        return Err(Error::invalid(format!(
            "squared overlap must lie in [0, 1], got {overlap_plus_sq}"
        )));
    }
    Ok(utility_from_log_overlap(overlap_plus_sq.ln(), n_players))
}

/// Utility of the clean ground state, summed mode by mode:
/// `(⌈N/2⌉−1) ln 2 + 2 Σ_{k>0} ln cos((θ_k(g) − θ_k(0⁺))/2)`.
pub fn utility_clean(g: f64, n_sites: usize) -> Result<f64> {
    validate_coupling(g)?;
    validate_sites(n_sites)?;
    let modes: f64 = positive_momenta(n_sites)
        .into_iter()
        .map(|k| 2.0 * BogoliubovMode::new(g, k).half_angle_offset().cos().ln())
        .sum();
    Ok(utility_from_log_overlap(modes, n_sites))
}

/// Utility of the disordered ground state `ψ(g)`.
pub fn utility(g: &CouplingVector) -> Result<f64> {
    let log_overlap = GhzReference::new(g.len())?.log_overlap_squared(g)?;
    Ok(utility_from_log_overlap(log_overlap, g.len()))
}

/// `(1/2π) ln(1 + (1 − g cos k)/ε_k)`, written so that the `g > 1`,
/// `k → 0` zero of the argument is computed without cancellation.
fn density_integrand(g: f64, k: f64) -> f64 {
    let mode = BogoliubovMode::new(g, k);
    if mode.energy == 0.0 {
        return 0.0;
    }
    let a = 1.0 - g * k.cos();
    let numerator = if a >= 0.0 {
        mode.energy + a
    } else {
        let s = g * k.sin();
        s * s / (mode.energy - a)
    };
    (numerator / mode.energy).ln() / (2.0 * PI)
}

/// Large-N utility density
/// `b(g) = ∫₀^π dk/2π ln(1 + (1 − g cos k)/√(1 + g² − 2g cos k))`.
///
/// The integrand develops a kink at `g = 1` (and a log singularity at
/// `k = 0` for `g > 1`), so near the critical point the interval is split
/// at `k ≈ |1 − g|`.
pub fn advantage_density(g: f64) -> Result<f64> {
    Ok(advantage_density_estimate(g)?.value)
}

/// [`advantage_density`] together with its quadrature error estimate.
pub fn advantage_density_estimate(g: f64) -> Result<Estimate> {
    validate_coupling(g)?;
    let mut points = vec![0.0];
    let scale = (1.0 - g).abs();
    if scale > 0.0 && scale < 0.5 {
        points.push(scale);
    }
    points.push(PI);
    integrate_with_breakpoints(|k| density_integrand(g, k), &points, DENSITY_QUADRATURE_TOL)
}

/// Unique zero `g_*` of [`advantage_density`], by bisection on `[1.4, 1.6]`.
pub fn find_advantage_boundary() -> Result<f64> {
    let (lo, hi) = BOUNDARY_BRACKET;
    bisect(advantage_density, lo, hi, BOUNDARY_TOL)
}

/// Advantage class of a utility density.
pub fn classify(density: f64) -> AdvantageClass {
    if density.is_nan() || density <= 0.0 {
        AdvantageClass::None
    } else if density >= STRONG_ADVANTAGE_DENSITY - STRONG_ADVANTAGE_BAND {
        AdvantageClass::Strong
    } else {
        AdvantageClass::Weak
    }
}

/// Game summary for one even-parity resource state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub n_players: usize,
    pub p_quantum: f64,
    pub p_classical_opt: f64,
    pub p_random: f64,
    /// May be `-inf`, serialized as `null`.
    pub utility: f64,
    pub density: f64,
    pub advantage_class: AdvantageClass,
}

impl UtilityReport {
    /// Report for an even-parity state with the given `|⟨GHZ⁺|ψ⟩|²`
    /// (its GHZ⁻ overlap vanishes by parity).
    pub fn from_overlap(overlap_plus_sq: f64, n_players: usize) -> Result<Self> {
        let utility = utility_from_overlap(overlap_plus_sq, n_players)?;
        let density = utility / n_players as f64;
        Ok(Self {
            n_players,
            p_quantum: quantum_win_probability(overlap_plus_sq, 0.0)?,
            p_classical_opt: classical_bound(n_players)?,
            p_random: RANDOM_GUESS_PROBABILITY,
            utility,
            density,
            advantage_class: classify(density),
        })
    }

    /// Report for the ground state of the ring with fields `g`.
    pub fn for_couplings(g: &CouplingVector) -> Result<Self> {
        let overlap = GhzReference::new(g.len())?.overlap_squared(g)?;
        Self::from_overlap(overlap, g.len())
    }
}
