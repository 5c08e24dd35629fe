//! Disorder ensembles for the transverse fields, a reproducible sampler and
//! Monte Carlo estimates of the expected utility.
//!
//! Sample `i` of a run with seed `s` draws from ChaCha8 stream `i` of seed
//! `s`, so results do not depend on how samples are spread over threads.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_fermion::{validate_coupling, validate_sites, CouplingVector, GhzReference};
use crate::linalg::pairwise_sum;
use crate::parity_game::{utility_clean, utility_from_log_overlap};
use crate::perturbation::{second_variation_closed_form, CorrelationKind, CovarianceMatrix, DistanceMode};

/// Bins of the histogram attached to every Monte Carlo result.
pub const DEFAULT_BINS: usize = 101;

/// Half-width of the histogram range in sample standard deviations.
pub const HISTOGRAM_HALF_WIDTH: f64 = 5.0;

/// Redraws allowed for a single sample under [`PositivityPolicy::RejectSample`].
pub const MAX_REDRAWS: usize = 1000;

/// Shape of the coupling fluctuations `δg = g − ḡ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisorderKind {
    GaussianIid { sigma: f64 },
    GaussianCorrelated { sigma: f64, xi: f64, distance: DistanceMode },
    GaussianPerfect { sigma: f64 },
    /// Independent uniform draws from `[ḡ − W/2, ḡ + W/2]`.
    UniformIid { width: f64 },
}

impl DisorderKind {
    /// Standard deviation of each `δg_j`; `W/(2√3)` for the uniform kind.
    pub fn sigma(&self) -> f64 {
        match *self {
            DisorderKind::GaussianIid { sigma }
            | DisorderKind::GaussianCorrelated { sigma, .. }
            | DisorderKind::GaussianPerfect { sigma } => sigma,
            DisorderKind::UniformIid { width } => width / (2.0 * 3f64.sqrt()),
        }
    }

    /// Correlation structure, shared by the Gaussian and uniform kinds.
    pub fn correlation(&self) -> CorrelationKind {
        match *self {
            DisorderKind::GaussianIid { .. } | DisorderKind::UniformIid { .. } => CorrelationKind::Iid,
            DisorderKind::GaussianPerfect { .. } => CorrelationKind::Perfect,
            DisorderKind::GaussianCorrelated { xi, distance, .. } => {
                CorrelationKind::Exponential { xi, distance }
            }
        }
    }

    /// Gaussian kind with the given correlation structure.
    pub fn gaussian(correlation: CorrelationKind, sigma: f64) -> Self {
        match correlation {
            CorrelationKind::Perfect => DisorderKind::GaussianPerfect { sigma },
            CorrelationKind::Iid => DisorderKind::GaussianIid { sigma },
            CorrelationKind::Exponential { xi, distance } => {
                DisorderKind::GaussianCorrelated { sigma, xi, distance }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (name, value) = match *self {
            DisorderKind::UniformIid { width } => ("width", width),
            _ => ("sigma", self.sigma()),
        };
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::invalid(format!(
                "disorder {name} must be finite and non-negative, got {value}"
            )));
        }
        if let DisorderKind::GaussianCorrelated { xi, .. } = *self {
            if !(xi.is_finite() && xi > 0.0) {
                return Err(Error::invalid(format!(
                    "correlation length must be positive and finite, got {xi}"
                )));
            }
        }
        Ok(())
    }
}

/// What to do with a realization that has some `g_j ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityPolicy {
    /// Draw again and count the rejection.
    #[default]
    RejectSample,
    /// Abort the whole run.
    RejectRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderEnsemble {
    pub mean: f64,
    pub n_sites: usize,
    pub kind: DisorderKind,
    pub positivity_policy: PositivityPolicy,
}

impl DisorderEnsemble {
    pub fn new(mean: f64, n_sites: usize, kind: DisorderKind) -> Result<Self> {
        validate_coupling(mean)?;
        validate_sites(n_sites)?;
        kind.validate()?;
        Ok(Self {
            mean,
            n_sites,
            kind,
            positivity_policy: PositivityPolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: PositivityPolicy) -> Self {
        self.positivity_policy = policy;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.kind.sigma()
    }

    pub fn sampler(&self) -> Result<Sampler> {
        Sampler::new(*self)
    }
}

/// Draws realizations of one ensemble; holds the covariance factor.
#[derive(Debug, Clone)]
pub struct Sampler {
    ensemble: DisorderEnsemble,
    factor: Option<DMatrix<f64>>,
}

impl Sampler {
    pub fn new(ensemble: DisorderEnsemble) -> Result<Self> {
        let factor = match ensemble.kind {
            DisorderKind::GaussianCorrelated { .. } => Some(
                CovarianceMatrix::new(ensemble.kind.correlation(), ensemble.sigma(), ensemble.n_sites)?
                    .factor()?,
            ),
            _ => None,
        };
        Ok(Self { ensemble, factor })
    }

    pub fn ensemble(&self) -> &DisorderEnsemble {
        &self.ensemble
    }

    /// One unconstrained draw of `δg`.
    pub fn fluctuation<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.ensemble.n_sites;
        match self.ensemble.kind {
            DisorderKind::GaussianIid { sigma } => (0..n)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            DisorderKind::GaussianPerfect { sigma } => {
                let shift = sigma * rng.sample::<f64, _>(StandardNormal);
                vec![shift; n]
            }
            DisorderKind::GaussianCorrelated { .. } => {
                let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
                let factor = self.factor.as_ref().expect("correlated sampler has a factor");
                (factor * z).iter().copied().collect()
            }
            DisorderKind::UniformIid { width } => (0..n)
                .map(|_| width * (rng.random::<f64>() - 0.5))
                .collect(),
        }
    }

    /// A positive realization and the number of draws rejected on the way.
    pub fn sample_counting<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(CouplingVector, usize)> {
        for rejected in 0..=MAX_REDRAWS {
            let values: Vec<f64> = self
                .fluctuation(rng)
                .into_iter()
                .map(|d| self.ensemble.mean + d)
                .collect();
            match values.iter().position(|&g| g <= 0.0) {
                None => return Ok((CouplingVector::new(values)?, rejected)),
                Some(site) => {
                    if self.ensemble.positivity_policy == PositivityPolicy::RejectRun {
                        return Err(Error::NonPositiveCoupling {
                            site,
                            value: values[site],
                        });
                    }
                }
            }
        }
        Err(Error::numerical(format!(
            "no positive realization in {} draws; the ensemble is misconfigured",
            MAX_REDRAWS + 1
        )))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CouplingVector> {
        Ok(self.sample_counting(rng)?.0)
    }
}

/// The generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform-bin histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bins spanning `mean ± 5 sd` of `values`; values outside land in the
    /// edge bins so that the counts always sum to `values.len()`.
    pub fn auto(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("a histogram needs at least one bin"));
        }
        if values.is_empty() {
            return Err(Error::invalid("cannot bin an empty sample"));
        }
        let (mean, sd) = mean_and_sd(values);
        let mut half = HISTOGRAM_HALF_WIDTH * sd;
        if half <= 0.0 {
            half = 1e-12 * mean.abs().max(1.0);
        }
        let (lo, hi) = (mean - half, mean + half);
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let idx = ((v - lo) / width).floor();
            let idx = if idx.is_nan() { 0.0 } else { idx.clamp(0.0, (bins - 1) as f64) };
            counts[idx as usize] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (pairwise_sum(&squares) / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub ensemble: DisorderEnsemble,
    /// Per-site standard deviation; `W/(2√3)` for uniform disorder.
    pub sigma: f64,
    /// Samples with a finite utility, the ones entering the statistics.
    pub n_samples: usize,
    /// Positivity redraws plus samples with zero overlap.
    pub n_rejected: usize,
    pub mean_utility: f64,
    pub stderr: f64,
    pub mean_density: f64,
    pub clean_utility: f64,
    pub clean_density: f64,
    /// Distribution of `(u(g) − u(ḡ))/N`.
    pub histogram: Histogram,
    pub seed: u64,
}

impl MonteCarloResult {
    /// `E[u] − u(ḡ)`.
    pub fn shift(&self) -> f64 {
        self.mean_utility - self.clean_utility
    }
}

/// Utilities of `n_samples` independent realizations, in sample order,
/// with the positivity redraw count of each.
pub fn sample_utilities(ensemble: &DisorderEnsemble, n_samples: usize, seed: u64) -> Result<Vec<(f64, usize)>> {
    let sampler = ensemble.sampler()?;
    let n = ensemble.n_sites;
    let reference = GhzReference::new(n)?;
    (0..n_samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let (g, redraws) = sampler.sample_counting(&mut rng)?;
            let log_overlap = reference.log_overlap_squared(&g)?;
            Ok((utility_from_log_overlap(log_overlap, n), redraws))
        })
        .collect()
}

/// Monte Carlo estimate of `E[u(g)]` with a 101-bin histogram.
pub fn expected_utility(ensemble: &DisorderEnsemble, n_samples: usize, seed: u64) -> Result<MonteCarloResult> {
    expected_utility_binned(ensemble, n_samples, seed, DEFAULT_BINS)
}

/// [`expected_utility`] with a custom number of histogram bins.
pub fn expected_utility_binned(
    ensemble: &DisorderEnsemble,
    n_samples: usize,
    seed: u64,
    bins: usize,
) -> Result<MonteCarloResult> {
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let draws = sample_utilities(ensemble, n_samples, seed)?;
    let redraws: usize = draws.iter().map(|d| d.1).sum();
    let finite: Vec<f64> = draws.iter().map(|d| d.0).filter(|u| u.is_finite()).collect();
    let zero_overlap = draws.len() - finite.len();
    if finite.is_empty() {
        return Err(Error::AllRejected(n_samples));
    }
    let n = ensemble.n_sites as f64;
    let (mean, sd) = mean_and_sd(&finite);
    let clean = utility_clean(ensemble.mean, ensemble.n_sites)?;
    let shifts: Vec<f64> = finite.iter().map(|u| (u - clean) / n).collect();
    Ok(MonteCarloResult {
        ensemble: *ensemble,
        sigma: ensemble.sigma(),
        n_samples: finite.len(),
        n_rejected: redraws + zero_overlap,
        mean_utility: mean,
        stderr: sd / (finite.len() as f64).sqrt(),
        mean_density: mean / n,
        clean_utility: clean,
        clean_density: clean / n,
        histogram: Histogram::auto(&shifts, bins)?,
        seed,
    })
}

/// One point of a disorder-strength scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub sigma: f64,
    /// Sampled `E[u] − u(ḡ)`.
    pub shift: f64,
    pub stderr: f64,
    /// Analytic `δu⁽²⁾`.
    pub predicted: f64,
    pub n_rejected: usize,
}

/// Sampled `E[u] − u(ḡ)` against the second-variation prediction over a
/// grid of Gaussian disorder strengths.
pub fn second_variation_scan(
    mean: f64,
    n_sites: usize,
    correlation: CorrelationKind,
    sigmas: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    let prediction = second_variation_closed_form(mean, n_sites, correlation, 1.0)?;
    sigmas
        .iter()
        .map(|&sigma| {
            let ensemble = DisorderEnsemble::new(mean, n_sites, DisorderKind::gaussian(correlation, sigma))?;
            let result = expected_utility(&ensemble, n_samples, seed)?;
            Ok(ScanRow {
                sigma,
                shift: result.shift(),
                stderr: result.stderr,
                predicted: prediction.rescaled * n_sites as f64 * sigma * sigma,
                n_rejected: result.n_rejected,
            })
        })
        .collect()
}

/// Per-size distribution of `(u(g) − u(ḡ))/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub n_sites: usize,
    /// `(E[u] − u(ḡ))/N`.
    pub mean_shift: f64,
    pub stderr: f64,
    pub histogram: Histogram,
}

/// Histograms of the per-site utility shift for each ring size, with the
/// disorder kind and mean field held fixed.
pub fn histogram_experiment(
    mean: f64,
    kind: DisorderKind,
    sizes: &[usize],
    n_samples: usize,
    bins: usize,
    seed: u64,
) -> Result<Vec<HistogramRow>> {
    sizes
        .iter()
        .map(|&n| {
            let ensemble = DisorderEnsemble::new(mean, n, kind)?;
            let result = expected_utility_binned(&ensemble, n_samples, seed, bins)?;
            Ok(HistogramRow {
                n_sites: n,
                mean_shift: result.shift() / n as f64,
                stderr: result.stderr / n as f64,
                histogram: result.histogram,
            })
        })
        .collect()
}

/// Slope of `ln|y|` against `ln x` by least squares.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("log-log fit needs two or more paired points"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    if lx.iter().chain(&ly).any(|v| !v.is_finite()) {
        return Err(Error::invalid("log-log fit needs positive x and non-zero y"));
    }
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}
