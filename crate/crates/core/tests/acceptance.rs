//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ising_parity::asymptotics::critical_scaling;
use ising_parity::disorder::{expected_utility, DisorderEnsemble, DisorderKind};
use ising_parity::free_fermion::{ghz_overlap_squared, CouplingVector};
use ising_parity::oracle::{dense_ground_state, numerical_hessian, simulate_bbt, DenseState};
use ising_parity::parity_game::{advantage_density, find_advantage_boundary, utility, utility_clean};
use ising_parity::perturbation::{
    chi_double_prime, chi_prime, contract, hessian_kernel, laplacian_crossover_thermodynamic,
    second_variation_closed_form, CorrelationKind, CovarianceMatrix, DistanceMode,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn e2s<T>(r: ising_parity::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Overlaps with GHZ± straight from the amplitudes of the all-0 and all-1
/// basis states.
fn ghz_projections(amplitudes: &[Complex64]) -> (f64, f64) {
    let a0 = amplitudes[0];
    let a1 = amplitudes[amplitudes.len() - 1];
    ((a0 + a1).norm_sqr() / 2.0, (a0 - a1).norm_sqr() / 2.0)
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DenseState {
    let dim = 1usize << n;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    // Weight the GHZ components so o⁺ and o⁻ span their full range.
    let w = rng.random_range(0.0..(dim as f64).sqrt() * 2.0);
    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    amps[0] += w;
    amps[dim - 1] += w * phase;
    DenseState::normalized(amps).expect("nonzero state")
}

fn bbt_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [4, 6, 8, 10] {
        for _ in 0..50 {
            let state = random_state(n, &mut rng);
            let (plus, minus) = ghz_projections(state.amplitudes());
            let expected = 0.5 * (1.0 + plus - minus);
            let observed = e2s(simulate_bbt(&state))?;
            worst = worst.max((observed - expected).abs());
            count += 1;
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e} > 1e-10"))?;
    Ok(format!("{count} states, max deviation {worst:.1e}"))
}

fn determinant_vs_dense() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [4, 6, 8, 10, 12] {
        for _ in 0..4 {
            let g = e2s(CouplingVector::new((0..n).map(|_| rng.random_range(0.2..3.0)).collect()))?;
            let ground = e2s(dense_ground_state(&g))?;
            let (plus, _) = ghz_projections(ground.state.amplitudes());
            let det = e2s(ghz_overlap_squared(&g))?;
            worst = worst.max((det - plus).abs());
            count += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e} > 1e-9"))?;
    Ok(format!("{count} coupling vectors, max deviation {worst:.1e}"))
}

fn advantage_boundary() -> Outcome {
    let g = e2s(find_advantage_boundary())?;
    ensure((g - 1.506).abs() <= 1e-3, || format!("boundary {g}"))?;
    Ok(format!("g* = {g:.7}"))
}

fn strong_advantage_limit() -> Outcome {
    let b = e2s(advantage_density(1e-4))?;
    let dev = (b - LN_2 / 2.0).abs();
    ensure(dev <= 1e-6, || format!("b(1e-4) = {b}, deviation {dev:e}"))?;
    Ok(format!("b(1e-4) = {b:.9}, deviation {dev:.1e}"))
}

fn critical_scaling_200() -> Outcome {
    let n = 200usize;
    let nf = n as f64;
    let r = e2s(critical_scaling(n))?;
    let chi2_rel = (r.chi2_critical_exact / (-nf * nf / 8.0) - 1.0).abs();
    ensure(chi2_rel <= 0.1, || format!("χ″(1) = {} off by {chi2_rel:.3}", r.chi2_critical_exact))?;
    let rescaled = e2s(second_variation_closed_form(1.0, n, CorrelationKind::Perfect, 1.0))?.rescaled;
    let sv_rel = (rescaled / (-nf / 16.0) - 1.0).abs();
    ensure(sv_rel <= 0.1, || format!("rescaled second variation {rescaled} off by {sv_rel:.3}"))?;
    let mut worst = 0.0f64;
    for m in [8, 40, 200] {
        let assembled = e2s(critical_scaling(m))?.chi2_critical_exact;
        let direct = e2s(chi_double_prime(1.0, m))?;
        worst = worst.max((assembled - direct).abs() / direct.abs());
    }
    ensure(worst <= 1e-8, || format!("assembly vs direct sum {worst:e}"))?;
    Ok(format!(
        "χ″(1) {:.1} ({:.1}% from −N²/8), rescaled {:.3} ({:.1}% from −N/16), assembly {worst:.0e}",
        r.chi2_critical_exact,
        100.0 * chi2_rel,
        rescaled,
        100.0 * sv_rel
    ))
}

fn laplacian_crossover() -> Outcome {
    let g = e2s(laplacian_crossover_thermodynamic())?;
    ensure((g - 0.9902).abs() <= 5e-4, || format!("crossover at {g}"))?;
    Ok(format!("sign change at g = {g:.5}"))
}

fn perturbation_vs_finite_differences() -> Outcome {
    let n = 40;
    let chi = |g: f64| utility_clean(g, n).expect("valid field");
    let mut worst1 = 0.0f64;
    let mut worst2 = 0.0f64;
    for g in [0.5, 0.8, 1.3, 2.0] {
        let h = 1e-5;
        let fd1 = (chi(g + h) - chi(g - h)) / (2.0 * h);
        let second = |h: f64| (chi(g + h) - 2.0 * chi(g) + chi(g - h)) / (h * h);
        let fd2 = (4.0 * second(5e-4) - second(1e-3)) / 3.0;
        worst1 = worst1.max((e2s(chi_prime(g, n))? / fd1 - 1.0).abs());
        worst2 = worst2.max((e2s(chi_double_prime(g, n))? / fd2 - 1.0).abs());
    }
    ensure(worst1 <= 1e-4 && worst2 <= 1e-4, || format!("χ′ rel {worst1:e}, χ″ rel {worst2:e}"))?;

    let n = 12;
    let mut worst_h = 0.0f64;
    for g_bar in [0.8, 1.6] {
        let g0 = e2s(CouplingVector::uniform(g_bar, n))?;
        let numerical = e2s(numerical_hessian(utility, &g0, 1e-3))?;
        let kernel = e2s(hessian_kernel(g_bar, n))?;
        for j in 0..n {
            for l in 0..n {
                let exact = kernel.entry(j, l);
                worst_h = worst_h.max((numerical[(j, l)] - exact).abs() / exact.abs());
            }
        }
    }
    ensure(worst_h <= 1e-3, || format!("Hessian kernel rel {worst_h:e}"))?;
    Ok(format!("χ′ {worst1:.1e}, χ″ {worst2:.1e}, Hessian {worst_h:.1e} (relative)"))
}

fn second_variation_monte_carlo() -> Outcome {
    let n = 40;
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for (ci, kind) in [CorrelationKind::Perfect, CorrelationKind::Iid].into_iter().enumerate() {
        for g_bar in [0.5, 1.6] {
            for (si, sigma) in [0.01, 0.02, 0.04].into_iter().enumerate() {
                let ensemble = e2s(DisorderEnsemble::new(g_bar, n, DisorderKind::gaussian(kind, sigma)))?;
                let seed = 1000 + 100 * ci as u64 + 10 * si as u64 + (g_bar * 10.0) as u64;
                let r = e2s(expected_utility(&ensemble, 20_000, seed))?;
                let predicted = e2s(second_variation_closed_form(g_bar, n, kind, sigma))?.delta_u2;
                let z = (r.shift() - predicted).abs() / r.stderr;
                worst = worst.max(z);
                if z > 3.0 {
                    lines.push(format!(
                        "{kind:?} ḡ={g_bar} σ={sigma}: shift {:.3e} vs {predicted:.3e}, {z:.2} stderr",
                        r.shift()
                    ));
                }
            }
        }
    }
    ensure(lines.is_empty(), || lines.join("; "))?;
    Ok(format!("12 points, worst deviation {worst:.2} stderr"))
}

fn disorder_induced_advantage() -> Outcome {
    let n = 40;
    let kind = DisorderKind::UniformIid { width: 2.0 };
    let b_clean = e2s(advantage_density(1.6))?;
    ensure((b_clean + 0.022).abs() <= 1e-3, || format!("b(1.6) = {b_clean}"))?;

    let at_16 = e2s(expected_utility(&e2s(DisorderEnsemble::new(1.6, n, kind))?, 50_000, 16))?;
    let at_155 = e2s(expected_utility(&e2s(DisorderEnsemble::new(1.55, n, kind))?, 50_000, 155))?;
    let (e16, e155) = (at_16.mean_density, at_155.mean_density);
    ensure((e16 - 0.001).abs() <= 2e-3, || format!("E[b] at 1.6 = {e16}"))?;
    ensure(e16 > b_clean && b_clean < 0.0, || "no upward shift across the boundary".into())?;
    ensure((e155 - 0.015).abs() <= 3e-3, || format!("E[b] at 1.55 = {e155}"))?;
    Ok(format!(
        "b(1.6) = {b_clean:.4}, E[b](1.6) = {e16:.4} ± {:.4}, E[b](1.55) = {e155:.4} ± {:.4}",
        at_16.stderr / n as f64,
        at_155.stderr / n as f64
    ))
}

fn correlation_interpolation() -> Outcome {
    let n = 40;
    let nf = n as f64;
    let fields: Vec<f64> = (1..=30).map(|i| i as f64 / 10.0).filter(|g| (g - 1.0).abs() >= 0.05).collect();
    let log_ratios: Vec<f64> = (-12..=12).map(|i| i as f64 * 0.25).collect();
    let far: Vec<f64> = (-16..=16).map(|i| i as f64 * 0.5).collect();

    let covariances = |ratios: &[f64]| -> Result<Vec<CovarianceMatrix>, String> {
        ratios
            .iter()
            .map(|r| e2s(CovarianceMatrix::exponential(1.0, n, nf * r.exp(), DistanceMode::Linear)))
            .collect()
    };
    let grid = covariances(&log_ratios)?;
    let extended = covariances(&far)?;

    let mut failures = Vec::new();
    for &g in &fields {
        let perfect = e2s(second_variation_closed_form(g, n, CorrelationKind::Perfect, 1.0))?.rescaled;
        let iid = e2s(second_variation_closed_form(g, n, CorrelationKind::Iid, 1.0))?.rescaled;
        let (lo, hi) = (perfect.min(iid), perfect.max(iid));
        let slack = 1e-12 * (hi - lo).abs().max(perfect.abs());
        let kernel = e2s(hessian_kernel(g, n))?;
        for (r, c) in log_ratios.iter().zip(&grid) {
            let v = e2s(contract(&kernel, c))?.rescaled;
            if v < lo - slack || v > hi + slack {
                failures.push(format!("g={g} ln(ξ/N)={r}: {v} outside [{lo}, {hi}]"));
            }
        }
        let curve: Vec<f64> = extended
            .iter()
            .map(|c| contract(&kernel, c).map(|r| r.rescaled))
            .collect::<ising_parity::Result<_>>()
            .map_err(|e| e.to_string())?;
        let toward_perfect = (perfect - iid).signum();
        if curve.windows(2).any(|w| (w[1] - w[0]) * toward_perfect < -slack) {
            failures.push(format!("g={g}: not monotone in ξ"));
        }
        let span = (perfect - iid).abs();
        let (first, last) = (curve[0], curve[curve.len() - 1]);
        if (first - iid).abs() > 1e-2 * span || (last - perfect).abs() > 1e-2 * span {
            failures.push(format!("g={g}: ends {first}, {last} miss limits {iid}, {perfect}"));
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} fields × {} correlation lengths", fields.len(), log_ratios.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "parity game simulation equals ½(1+o⁺−o⁻)", budget: Duration::from_secs(120), run: bbt_theorem },
        Criterion { id: 2, name: "determinant overlap equals dense overlap", budget: Duration::from_secs(120), run: determinant_vs_dense },
        Criterion { id: 3, name: "advantage boundary g* = 1.506 ± 0.001", budget: Duration::from_secs(1), run: advantage_boundary },
        Criterion { id: 4, name: "strong-advantage limit b → ln2/2", budget: Duration::from_secs(1), run: strong_advantage_limit },
        Criterion { id: 5, name: "critical scaling at N = 200", budget: Duration::from_secs(5), run: critical_scaling_200 },
        Criterion { id: 6, name: "Laplacian crossover g = 0.9902 ± 0.0005", budget: Duration::from_secs(30), run: laplacian_crossover },
        Criterion { id: 7, name: "perturbation theory vs finite differences", budget: Duration::from_secs(180), run: perturbation_vs_finite_differences },
        Criterion { id: 8, name: "Monte Carlo shift vs second variation", budget: Duration::from_secs(600), run: second_variation_monte_carlo },
        Criterion { id: 9, name: "disorder-induced advantage at ḡ = 1.6 and 1.55", budget: Duration::from_secs(300), run: disorder_induced_advantage },
        Criterion { id: 10, name: "correlated curves interpolate between limits", budget: Duration::from_secs(600), run: correlation_interpolation },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget of {:?}", c.budget)),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] {:>2} {}: {} ({:.2}s)",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
