//! Self-check suite behind `ising-parity verify`: oracle equivalence,
//! finite differences, contraction consistency and asymptotics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{critical_scaling, dchi_dg_thermodynamic};
use crate::disorder::{expected_utility, DisorderEnsemble, DisorderKind};
use crate::error::Result;
use crate::free_fermion::{ghz_overlap_squared, CouplingVector};
use crate::oracle::{dense_ground_state, ghz_overlaps, numerical_hessian, simulate_bbt, DenseState};
use crate::parity_game::{
    advantage_density, find_advantage_boundary, quantum_win_probability, utility, utility_clean,
    STRONG_ADVANTAGE_DENSITY,
};
use crate::perturbation::{
    chi_double_prime, chi_prime, hessian_kernel, laplacian_crossover_thermodynamic, laplacian_u,
    second_variation_closed_form, CorrelationKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

/// One verified property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub module: String,
    pub operation: String,
    pub inputs: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    /// Record `|observed − expected| ≤ tolerance`.
    fn close(&mut self, module: &str, operation: &str, inputs: String, observed: Result<f64>, expected: f64, tolerance: f64) {
        let check = match observed {
            Ok(observed) => Check {
                module: module.into(),
                operation: operation.into(),
                inputs,
                observed,
                expected,
                tolerance,
                passed: (observed - expected).abs() <= tolerance,
                error: None,
            },
            Err(e) => Check {
                module: module.into(),
                operation: operation.into(),
                inputs,
                observed: f64::NAN,
                expected,
                tolerance,
                passed: false,
                error: Some(e.to_string()),
            },
        };
        self.checks.push(check);
    }

    /// Record a relative comparison.
    fn relative(&mut self, module: &str, operation: &str, inputs: String, observed: Result<f64>, expected: f64, rel: f64) {
        self.close(module, operation, inputs, observed, expected, rel * expected.abs());
    }
}

/// Run the suite. `Fast` stays well under a minute; `Full` adds the
/// largest dense rings, the thermodynamic crossover and a Monte Carlo check.
pub fn run(level: Level) -> Report {
    let mut s = Suite { checks: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let dense_sizes: &[usize] = match level {
        Level::Fast => &[4, 6, 8],
        Level::Full => &[4, 6, 8, 10, 12],
    };

    for &n in dense_sizes {
        for trial in 0..3 {
            let g = CouplingVector::new((0..n).map(|_| rng.random_range(0.2..3.0)).collect())
                .expect("fields are positive");
            let inputs = format!("n={n} trial={trial} g={:?}", g.values());
            match dense_ground_state(&g) {
                Ok(ground) => {
                    let (plus, minus) = ghz_overlaps(&ground.state);
                    s.close("free_fermion", "ghz_overlap_squared", inputs.clone(), ghz_overlap_squared(&g), plus, 1e-9);
                    let formula = quantum_win_probability(plus.min(1.0), minus.min(1.0)).unwrap_or(f64::NAN);
                    s.close("oracle", "simulate_bbt", inputs, simulate_bbt(&ground.state), formula, 1e-10);
                }
                Err(e) => s.close("oracle", "dense_ground_state", inputs, Err(e), 0.0, 0.0),
            }
        }
    }
    for sign in [1.0, -1.0] {
        let expected = if sign > 0.0 { 1.0 } else { 0.0 };
        let state = DenseState::ghz(4, sign);
        s.close(
            "oracle",
            "simulate_bbt",
            format!("ghz sign={sign} n=4"),
            state.and_then(|st| simulate_bbt(&st)),
            expected,
            1e-12,
        );
    }

    let chi = |g: f64| utility_clean(g, 40).unwrap_or(f64::NAN);
    for &g in &[0.5, 0.8, 1.3, 2.0] {
        let h = 1e-5;
        let fd1 = (chi(g + h) - chi(g - h)) / (2.0 * h);
        s.relative("perturbation", "chi_prime", format!("g={g} n=40"), chi_prime(g, 40), fd1, 1e-4);
        let second = |h: f64| (chi(g + h) - 2.0 * chi(g) + chi(g - h)) / (h * h);
        let fd2 = (4.0 * second(5e-4) - second(1e-3)) / 3.0;
        s.relative("perturbation", "chi_double_prime", format!("g={g} n=40"), chi_double_prime(g, 40), fd2, 1e-4);
    }

    for &(g, n) in &[(0.5, 12), (1.6, 40)] {
        let inputs = format!("g={g} n={n}");
        match hessian_kernel(g, n) {
            Ok(kernel) => {
                let chi2 = chi_double_prime(g, n).unwrap_or(f64::NAN);
                let lap = laplacian_u(g, n).unwrap_or(f64::NAN);
                s.relative("perturbation", "hessian_kernel.total", inputs.clone(), Ok(kernel.total()), chi2, 1e-8);
                s.relative("perturbation", "hessian_kernel.trace", inputs, Ok(kernel.trace()), lap, 1e-8);
            }
            Err(e) => s.close("perturbation", "hessian_kernel", inputs, Err(e), 0.0, 0.0),
        }
    }

    let (g_bar, n) = (0.8, 12);
    let g0 = CouplingVector::uniform(g_bar, n).expect("uniform field is valid");
    match (numerical_hessian(utility, &g0, 1e-3), hessian_kernel(g_bar, n)) {
        (Ok(hess), Ok(kernel)) => {
            for d in 0..=n / 2 {
                let exact = kernel.kernel[d];
                s.relative("perturbation", "hessian_kernel", format!("g={g_bar} n={n} d={d}"), Ok(hess[(0, d)]), exact, 1e-3);
            }
        }
        (Err(e), _) | (_, Err(e)) => s.close("oracle", "numerical_hessian", format!("g={g_bar} n={n}"), Err(e), 0.0, 0.0),
    }

    for &n in &[8, 40, 200] {
        let direct = chi_double_prime(1.0, n).unwrap_or(f64::NAN);
        s.relative(
            "asymptotics",
            "critical_scaling",
            format!("n={n}"),
            critical_scaling(n).map(|r| r.chi2_critical_exact),
            direct,
            1e-8,
        );
    }
    let n = 200.0;
    s.relative("asymptotics", "critical_scaling.chi2", "n=200".into(), critical_scaling(200).map(|r| r.chi2_critical_exact), -n * n / 8.0, 0.1);
    for &g in &[0.5, 1.5] {
        let finite = chi_prime(g, 2000).map(|v| v / 2000.0);
        s.relative("asymptotics", "dchi_dg_thermodynamic", format!("g={g} n=2000"), finite, dchi_dg_thermodynamic(g).unwrap_or(f64::NAN), 1e-3);
    }

    s.close("parity_game", "find_advantage_boundary", String::new(), find_advantage_boundary(), 1.506, 1e-3);
    s.close("parity_game", "advantage_density", "g=1e-4".into(), advantage_density(1e-4), STRONG_ADVANTAGE_DENSITY, 1e-6);

    if level == Level::Full {
        s.close("perturbation", "laplacian_crossover_thermodynamic", String::new(), laplacian_crossover_thermodynamic(), 0.9902, 5e-4);
        let (g, n, sigma) = (0.5, 40, 0.02);
        let inputs = format!("g={g} n={n} sigma={sigma} kind=perfect samples=20000");
        let predicted = second_variation_closed_form(g, n, CorrelationKind::Perfect, sigma).map(|r| r.delta_u2);
        let mc = DisorderEnsemble::new(g, n, DisorderKind::GaussianPerfect { sigma })
            .and_then(|e| expected_utility(&e, 20_000, 7));
        match (mc, predicted) {
            (Ok(r), Ok(p)) => s.close("disorder", "expected_utility", inputs, Ok(r.shift()), p, 3.0 * r.stderr),
            (Err(e), _) | (_, Err(e)) => s.close("disorder", "expected_utility", inputs, Err(e), 0.0, 0.0),
        }
    }

    Report { level, checks: s.checks }
}
