//! Brute-force ground truth for small rings: the 2^N-dimensional
//! Hamiltonian, its ground state, GHZ overlaps, a literal simulation of the
//! parity game, and finite-difference derivatives of the utility.
//!
//! Site `j` (1-based) is bit `j − 1` of a basis index, and bit value 1 means
//! the `Z = −1` state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::free_fermion::CouplingVector;
use crate::parity_game::utility_from_overlap;

/// Largest ring the dense oracle accepts.
pub const MAX_QUBITS: usize = 12;

/// Ground states whose in-sector gap is below this are rejected.
pub const DEGENERACY_GAP: f64 = 1e-10;

const NORM_TOLERANCE: f64 = 1e-12;
const RITZ_RESIDUAL: f64 = 1e-12;

/// A normalized state on `n_qubits ≤ 12` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    amplitudes: Vec<Complex64>,
    n_qubits: usize,
}

impl DenseState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "state length {len} is not a power of two"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq.sqrt() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "state is not normalized (norm {})",
                norm_sq.sqrt()
            )));
        }
        Ok(Self {
            amplitudes,
            n_qubits,
        })
    }

    /// Normalizes `amplitudes` first.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(amplitudes)
    }

    /// `(|0…0⟩ + sign |1…1⟩)/√2`.
    pub fn ghz(n_qubits: usize, sign: f64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amplitudes[(1 << n_qubits) - 1] = Complex64::new(sign * std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(amplitudes)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        *amplitudes
            .get_mut(index)
            .ok_or_else(|| Error::invalid(format!("basis index {index} out of range")))? =
            Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `⟨ψ| Π_j X_j |ψ⟩`.
    pub fn parity(&self) -> f64 {
        let mask = self.amplitudes.len() - 1;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| (a.conj() * self.amplitudes[i ^ mask]).re)
            .sum()
    }
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::invalid(format!(
            "dense states support 2 to {MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Diagonal of `−Σ_j Z_j Z_{j+1}` on the periodic ring.
fn bond_energies(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|x| {
            (0..n)
                .map(|j| {
                    let same = ((x >> j) & 1) == ((x >> ((j + 1) % n)) & 1);
                    if same {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .sum()
        })
        .collect()
}

/// `H v` for `H = −Σ_j Z_j Z_{j+1} − Σ_j g_j X_j` with periodic closure.
pub fn apply_hamiltonian(g: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = g.len();
    check_qubits(n)?;
    if v.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            actual: v.len(),
        });
    }
    let diag = bond_energies(n);
    Ok(apply_with_diagonal(g, &diag, v))
}

fn apply_with_diagonal(g: &[f64], diag: &[f64], v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|x| {
            let flips: f64 = g
                .iter()
                .enumerate()
                .map(|(j, &gj)| gj * v[x ^ (1 << j)])
                .sum();
            diag[x] * v[x] - flips
        })
        .collect()
}

/// The full `2^N × 2^N` Hamiltonian matrix; for small test sizes.
pub fn dense_hamiltonian(g: &[f64]) -> Result<DMatrix<f64>> {
    let n = g.len();
    check_qubits(n)?;
    let dim = 1usize << n;
    let diag = bond_energies(n);
    let mut h = DMatrix::from_diagonal(&DVector::from_vec(diag));
    for x in 0..dim {
        for (j, &gj) in g.iter().enumerate() {
            h[(x ^ (1 << j), x)] -= gj;
        }
    }
    Ok(h)
}

/// Ground state of the ring in the even sector `Π_j X_j = +1`, with its
/// energy and the gap to the next even-sector level.
#[derive(Debug, Clone)]
pub struct DenseGroundState {
    pub state: DenseState,
    pub energy: f64,
    pub gap: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_even(v: &mut [f64]) {
    let mask = v.len() - 1;
    for x in 0..v.len() / 2 {
        let y = x ^ mask;
        let avg = 0.5 * (v[x] + v[y]);
        v[x] = avg;
        v[y] = avg;
    }
}

/// Lowest even-parity eigenvector of the ring Hamiltonian by Lanczos with
/// full reorthogonalization.
///
/// For strictly positive fields the global ground state is even, and
/// working in that sector keeps the exponentially small GHZ⁺/GHZ⁻ splitting
/// at weak field from spoiling convergence.
pub fn dense_ground_state(g: &CouplingVector) -> Result<DenseGroundState> {
    let fields = g.values();
    let n = fields.len();
    check_qubits(n)?;
    let dim = 1usize << n;
    let sector_dim = dim / 2;
    let diag = bond_energies(n);

    // Deterministic, generic start vector.
    let mut start: Vec<f64> = (0..dim)
        .map(|x| 1.0 + 0.5 * ((x as f64 * 0.618_033_988_749_895).fract() - 0.5))
        .collect();
    project_even(&mut start);
    let norm = dot(&start, &start).sqrt();
    start.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let max_steps = sector_dim.min(400);

    loop {
        let current = basis.last().expect("basis starts non-empty");
        let mut w = apply_with_diagonal(fields, &diag, current);
        project_even(&mut w);
        let alpha = dot(&w, current);
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).sqrt();
        let m = alphas.len();
        let exhausted = beta <= 1e-13 || m >= max_steps;
        if !exhausted && m % 8 != 0 {
            betas.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
            continue;
        }

        let tri = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = tri.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let residual = |i: usize| (beta * eig.eigenvectors[(m - 1, order[i])]).abs();
        let converged = m >= 2 && residual(0) < RITZ_RESIDUAL && residual(1) < RITZ_RESIDUAL;

        if converged || exhausted {
            if m < 2 && sector_dim > 1 {
                return Err(Error::numerical("Lanczos subspace collapsed after one step"));
            }
            if !converged && m < sector_dim {
                return Err(Error::numerical(format!(
                    "Lanczos did not converge in {m} steps (residual {:e})",
                    residual(0)
                )));
            }
            let energy = eig.eigenvalues[order[0]];
            let gap = if m >= 2 {
                eig.eigenvalues[order[1]] - energy
            } else {
                f64::INFINITY
            };
            if gap < DEGENERACY_GAP {
                return Err(Error::NearDegenerate { gap });
            }
            let coeffs = eig.eigenvectors.column(order[0]);
            let mut psi = vec![0.0; dim];
            for (c, b) in coeffs.iter().zip(&basis) {
                psi.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
            }
            let largest = psi
                .iter()
                .copied()
                .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
            let scale = largest.signum() / dot(&psi, &psi).sqrt();
            let amplitudes = psi.iter().map(|&x| Complex64::new(scale * x, 0.0)).collect();
            return Ok(DenseGroundState {
                state: DenseState::new(amplitudes)?,
                energy,
                gap,
            });
        }

        betas.push(beta);
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(w);
    }
}

/// `(|⟨GHZ⁺|ψ⟩|², |⟨GHZ⁻|ψ⟩|²)`.
pub fn ghz_overlaps(state: &DenseState) -> (f64, f64) {
    let first = state.amplitudes[0];
    let last = state.amplitudes[state.amplitudes.len() - 1];
    ((first + last).norm_sqr() / 2.0, (first - last).norm_sqr() / 2.0)
}

/// In-place fast Walsh–Hadamard transform, normalized to be unitary.
fn hadamard_all(v: &mut [Complex64]) {
    let len = v.len();
    let mut half = 1;
    while half < len {
        for block in (0..len).step_by(2 * half) {
            for i in block..block + half {
                let (a, b) = (v[i], v[i + half]);
                v[i] = a + b;
                v[i + half] = a - b;
            }
        }
        half *= 2;
    }
    let scale = (len as f64).sqrt().recip();
    v.iter_mut().for_each(|x| *x *= scale);
}

/// Winning probability of the BBT protocol on `state`, averaged uniformly
/// over all `2^{N−1}` promise inputs.
///
/// Player `j` applies `diag(1, i^{a_j})`, then a Hadamard, and outputs its Z
/// measurement `b_j`. The team wins when `Σ b_j ≡ (Σ a_j)/2 (mod 2)`.
pub fn simulate_bbt(state: &DenseState) -> Result<f64> {
    let n = state.n_qubits;
    if n < 3 {
        return Err(Error::invalid(format!(
            "the parity game needs at least 3 players, got {n}"
        )));
    }
    let dim = 1usize << n;
    let powers_of_i = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut total = 0.0;
    let mut n_inputs = 0usize;
    let mut work = vec![Complex64::new(0.0, 0.0); dim];
    for a in 0..dim {
        let weight = a.count_ones() as usize;
        if weight % 2 != 0 {
            continue;
        }
        let target = (weight / 2) % 2;
        for (x, slot) in work.iter_mut().enumerate() {
            let exponent = (a & x).count_ones() as usize % 4;
            *slot = state.amplitudes[x] * powers_of_i[exponent];
        }
        hadamard_all(&mut work);
        total += work
            .iter()
            .enumerate()
            .filter(|(b, _)| (b.count_ones() as usize) % 2 == target)
            .map(|(_, amp)| amp.norm_sqr())
            .sum::<f64>();
        n_inputs += 1;
    }
    Ok(total / n_inputs as f64)
}

/// Utility of the dense ground state, for cross-checking the
/// determinant route.
pub fn dense_utility(g: &CouplingVector) -> Result<f64> {
    let ground = dense_ground_state(g)?;
    let (plus, _) = ghz_overlaps(&ground.state);
    utility_from_overlap(plus.min(1.0), g.len())
}

fn checked<F>(f: &F, values: Vec<f64>) -> Result<f64>
where
    F: Fn(&CouplingVector) -> Result<f64>,
{
    let g = CouplingVector::new(values)?;
    let value = f(&g)?;
    if !value.is_finite() {
        return Err(Error::numerical(format!(
            "non-finite utility {value} at a finite-difference stencil point"
        )));
    }
    Ok(value)
}

fn validate_step(step: f64) -> Result<()> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {step}")));
    }
    Ok(())
}

/// Central-difference gradient of `f` at `g0`.
pub fn numerical_gradient<F>(f: F, g0: &CouplingVector, step: f64) -> Result<Vec<f64>>
where
    F: Fn(&CouplingVector) -> Result<f64>,
{
    validate_step(step)?;
    let base = g0.values();
    (0..base.len())
        .map(|j| {
            let mut plus = base.to_vec();
            let mut minus = base.to_vec();
            plus[j] += step;
            minus[j] -= step;
            Ok((checked(&f, plus)? - checked(&f, minus)?) / (2.0 * step))
        })
        .collect()
}

fn hessian_at_step<F>(f: &F, base: &[f64], centre: f64, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&CouplingVector) -> Result<f64>,
{
    let n = base.len();
    let shifted = |moves: &[(usize, f64)]| {
        let mut v = base.to_vec();
        for &(j, d) in moves {
            v[j] += d;
        }
        checked(f, v)
    };
    let mut hess = DMatrix::zeros(n, n);
    for j in 0..n {
        let second = (shifted(&[(j, h)])? - 2.0 * centre + shifted(&[(j, -h)])?) / (h * h);
        hess[(j, j)] = second;
        for l in (j + 1)..n {
            let mixed = (shifted(&[(j, h), (l, h)])? - shifted(&[(j, h), (l, -h)])?
                - shifted(&[(j, -h), (l, h)])?
                + shifted(&[(j, -h), (l, -h)])?)
                / (4.0 * h * h);
            hess[(j, l)] = mixed;
            hess[(l, j)] = mixed;
        }
    }
    Ok(hess)
}

/// Central-difference Hessian of `f` at `g0`, Richardson-extrapolated from
/// steps `step` and `step/2`.
pub fn numerical_hessian<F>(f: F, g0: &CouplingVector, step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&CouplingVector) -> Result<f64>,
{
    validate_step(step)?;
    let base = g0.values();
    let centre = checked(&f, base.to_vec())?;
    let coarse = hessian_at_step(&f, base, centre, step)?;
    let fine = hessian_at_step(&f, base, centre, 0.5 * step)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}
