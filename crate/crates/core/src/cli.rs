//! Command-line interface: argument types, dispatch and file output.
//!
//! Every command serializes its own arguments into the header of the file
//! it writes, and `rerun` replays a command from such a header.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::critical_scaling;
use crate::disorder::{
    expected_utility_binned, histogram_experiment, second_variation_scan, DisorderEnsemble,
    DisorderKind, PositivityPolicy,
};
use crate::error::{Error, Result};
use crate::output::{json_document, read_config, write_atomic, Cell, Table};
use crate::parity_game::advantage_density;
use crate::perturbation::{
    contract, hessian_kernel, second_variation_closed_form, CorrelationKind, CovarianceMatrix,
    DistanceMode,
};
use crate::verify::{self, Level};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "ising-parity",
    version,
    about = "Parity-game advantage of transverse-field Ising ground states",
    after_help = "Set RAYON_NUM_THREADS to limit the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Large-N utility density b(g) on a grid.
    BCurve(BCurveArgs),
    /// Rescaled second variation δu⁽²⁾/(Nσ²) for a correlation kind.
    SecondVariation(SecondVariationArgs),
    /// Monte Carlo average of the utility over disorder.
    Montecarlo(MonteCarloArgs),
    /// Critical-point mode sums and curvature against their asymptotics.
    CriticalScaling(CriticalScalingArgs),
    /// Run the self-check suite.
    Verify(VerifyArgs),
    /// Replay the command recorded in an output file's header.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecondVariationKind {
    Perfect,
    Iid,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    GaussianIid,
    GaussianPerfect,
    GaussianCorrelated,
    UniformIid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    #[default]
    RejectSample,
    RejectRun,
}

impl From<Policy> for PositivityPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::RejectSample => PositivityPolicy::RejectSample,
            Policy::RejectRun => PositivityPolicy::RejectRun,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    #[default]
    Linear,
    Ring,
}

impl From<Distance> for DistanceMode {
    fn from(d: Distance) -> Self {
        match d {
            Distance::Linear => DistanceMode::Linear,
            Distance::Ring => DistanceMode::Ring,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BCurveArgs {
    #[arg(long, default_value_t = 0.01)]
    pub g_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub g_max: f64,
    /// Number of intervals; the grid has steps + 1 points.
    #[arg(long, default_value_t = 299)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SecondVariationArgs {
    #[arg(long, value_enum, default_value_t = SecondVariationKind::Perfect)]
    pub kind: SecondVariationKind,
    /// Ring sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "40")]
    pub n: Vec<usize>,
    /// Fields: a comma list or start:stop:step.
    #[arg(long, default_value = "0.1:3.0:0.05")]
    pub g: String,
    /// Correlation lengths for the exponential kind (list or range).
    #[arg(long)]
    pub xi: Option<String>,
    /// Alternatively, values of ln(ξ/N) (list or range).
    #[arg(long, allow_hyphen_values = true)]
    pub log_xi_ratio: Option<String>,
    #[arg(long, value_enum, default_value_t = Distance::Linear)]
    pub distance: Distance,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MonteCarloArgs {
    #[arg(long, value_enum, default_value_t = EnsembleKind::UniformIid)]
    pub kind: EnsembleKind,
    /// Ring sizes; several sizes produce one histogram per size.
    #[arg(long, value_delimiter = ',', default_value = "40")]
    pub n: Vec<usize>,
    /// Mean field ḡ.
    #[arg(long, default_value_t = 1.6)]
    pub g: f64,
    /// Standard deviations; several values produce a scan (Gaussian kinds).
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    /// Full width W of uniform disorder, σ = W/(2√3).
    #[arg(long)]
    pub width: Option<f64>,
    /// Correlation length of the correlated Gaussian kind.
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long, value_enum, default_value_t = Distance::Linear)]
    pub distance: Distance,
    #[arg(long, default_value_t = 50_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 101)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = Policy::RejectSample)]
    pub policy: Policy,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CriticalScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,100,200,400,800,1600")]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Level::Fast)]
    pub level: Level,
    /// Write the machine-readable report here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    /// An output file written by this tool.
    pub file: PathBuf,
    /// Write to this path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// Short human-readable summary for stderr.
    pub summary: String,
    /// Main output when no `--out` path was given.
    pub stdout: Option<String>,
}

/// Parse `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::invalid(format!("cannot parse grid '{spec}': {what}"));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad("expected start:stop:step"));
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad("need step > 0 and stop ≥ start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| start + i as f64 * step).collect()
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
            .collect::<Result<_>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

fn emit_table(table: &Table, config: &Value, format: Format, out: Option<&Path>) -> Result<Option<String>> {
    let text = match format {
        Format::Csv => table.to_csv(config),
        Format::Json => serde_json::to_string_pretty(&table.to_json(config))? + "\n",
    };
    emit_text(text, out)
}

fn emit_text(text: String, out: Option<&Path>) -> Result<Option<String>> {
    match out {
        Some(path) => {
            write_atomic(path, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn config_of(command: &Command, derived: Option<Value>) -> Result<Value> {
    let mut config = serde_json::to_value(command)?;
    if let (Some(derived), Value::Object(map)) = (derived, &mut config) {
        map.insert("derived".into(), derived);
    }
    Ok(config)
}

/// Execute one command.
pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::BCurve(a) => b_curve(command, a),
        Command::SecondVariation(a) => second_variation_cmd(command, a),
        Command::Montecarlo(a) => montecarlo(command, a),
        Command::CriticalScaling(a) => critical_scaling_cmd(command, a),
        Command::Verify(a) => verify_cmd(a),
        Command::Rerun(a) => rerun(a),
    }
}

/// Map an error to the process exit code.
pub fn exit_code(error: &Error) -> i32 {
    if error.is_configuration() {
        EXIT_INVALID_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

fn ok(summary: String, stdout: Option<String>) -> Result<Outcome> {
    Ok(Outcome {
        exit_code: EXIT_OK,
        summary,
        stdout,
    })
}

fn b_curve(command: &Command, a: &BCurveArgs) -> Result<Outcome> {
    if a.steps == 0 || !(a.g_min > 0.0 && a.g_max > a.g_min) {
        return Err(Error::invalid("need 0 < g-min < g-max and steps ≥ 1"));
    }
    let mut table = Table::new("b-curve", &["g", "b"]);
    let mut crossing = None;
    let mut previous: Option<(f64, f64)> = None;
    for i in 0..=a.steps {
        let g = a.g_min + (a.g_max - a.g_min) * i as f64 / a.steps as f64;
        let b = advantage_density(g)?;
        if let Some((g0, b0)) = previous {
            if crossing.is_none() && b0 > 0.0 && b <= 0.0 {
                crossing = Some(g0 + (g - g0) * b0 / (b0 - b));
            }
        }
        previous = Some((g, b));
        table.push(vec![g.into(), b.into()]);
    }
    let stdout = emit_table(&table, &config_of(command, None)?, a.format, a.out.as_deref())?;
    let summary = match crossing {
        Some(g) => format!("b(g) changes sign near g = {g:.4}"),
        None => "b(g) does not change sign on this grid".to_string(),
    };
    ok(summary, stdout)
}

fn second_variation_cmd(command: &Command, a: &SecondVariationArgs) -> Result<Outcome> {
    let fields = parse_grid(&a.g)?;
    let mut table = Table::new("second-variation", &["n", "g", "xi", "rescaled"]);
    for &n in &a.n {
        match a.kind {
            SecondVariationKind::Perfect | SecondVariationKind::Iid => {
                let (kind, xi) = if a.kind == SecondVariationKind::Perfect {
                    (CorrelationKind::Perfect, f64::INFINITY)
                } else {
                    (CorrelationKind::Iid, 0.0)
                };
                for &g in &fields {
                    let report = second_variation_closed_form(g, n, kind, 1.0)?;
                    table.push(vec![n.into(), g.into(), xi.into(), report.rescaled.into()]);
                }
            }
            SecondVariationKind::Exponential => {
                let xis: Vec<f64> = match (&a.xi, &a.log_xi_ratio) {
                    (Some(x), None) => parse_grid(x)?,
                    (None, Some(r)) => parse_grid(r)?.iter().map(|r| n as f64 * r.exp()).collect(),
                    _ => {
                        return Err(Error::invalid(
                            "exponential kind needs exactly one of --xi and --log-xi-ratio",
                        ))
                    }
                };
                let covariances: Vec<CovarianceMatrix> = xis
                    .iter()
                    .map(|&xi| CovarianceMatrix::exponential(1.0, n, xi, a.distance.into()))
                    .collect::<Result<_>>()?;
                for &g in &fields {
                    let kernel = hessian_kernel(g, n)?;
                    for (xi, c) in xis.iter().zip(&covariances) {
                        let report = contract(&kernel, c)?;
                        table.push(vec![n.into(), g.into(), (*xi).into(), report.rescaled.into()]);
                    }
                }
            }
        }
    }
    let rows = table.rows.len();
    let stdout = emit_table(&table, &config_of(command, None)?, a.format, a.out.as_deref())?;
    ok(format!("wrote {rows} second-variation rows"), stdout)
}

fn ensemble_kind(a: &MonteCarloArgs, sigma: f64) -> Result<DisorderKind> {
    Ok(match a.kind {
        EnsembleKind::GaussianIid => DisorderKind::GaussianIid { sigma },
        EnsembleKind::GaussianPerfect => DisorderKind::GaussianPerfect { sigma },
        EnsembleKind::GaussianCorrelated => DisorderKind::GaussianCorrelated {
            sigma,
            xi: a
                .xi
                .ok_or_else(|| Error::invalid("gaussian-correlated needs --xi"))?,
            distance: a.distance.into(),
        },
        EnsembleKind::UniformIid => DisorderKind::UniformIid {
            width: 2.0 * 3f64.sqrt() * sigma,
        },
    })
}

/// Disorder strengths as standard deviations, with the width conversion
/// recorded when one happened.
fn resolve_sigmas(a: &MonteCarloArgs) -> Result<(Vec<f64>, Option<Value>)> {
    match (a.sigma.is_empty(), a.width) {
        (false, None) => Ok((a.sigma.clone(), None)),
        (true, Some(w)) if a.kind == EnsembleKind::UniformIid => {
            let sigma = w / (2.0 * 3f64.sqrt());
            Ok((vec![sigma], Some(json!({ "width": w, "sigma": sigma, "relation": "sigma = W/(2*sqrt(3))" }))))
        }
        (true, Some(_)) => Err(Error::invalid("--width applies to the uniform-iid kind only")),
        (false, Some(_)) => Err(Error::invalid("give either --sigma or --width, not both")),
        (true, None) => Err(Error::invalid("need --sigma (or --width for uniform-iid)")),
    }
}

fn montecarlo(command: &Command, a: &MonteCarloArgs) -> Result<Outcome> {
    let (sigmas, derived) = resolve_sigmas(a)?;
    let config = config_of(command, derived)?;
    if a.n.is_empty() {
        return Err(Error::invalid("need at least one ring size"));
    }
    if sigmas.len() > 1 && a.n.len() > 1 {
        return Err(Error::invalid("scan either over --sigma or over --n, not both"));
    }

    if sigmas.len() > 1 {
        let correlation = match a.kind {
            EnsembleKind::UniformIid => {
                return Err(Error::invalid("sigma scans need a Gaussian kind"))
            }
            _ => ensemble_kind(a, 1.0)?.correlation(),
        };
        let rows = second_variation_scan(a.g, a.n[0], correlation, &sigmas, a.samples, a.seed)?;
        let mut table = Table::new("montecarlo-scan", &["sigma", "shift", "stderr", "predicted", "n_rejected"]);
        for r in &rows {
            table.push(vec![r.sigma.into(), r.shift.into(), r.stderr.into(), r.predicted.into(), r.n_rejected.into()]);
        }
        let stdout = emit_table(&table, &config, a.format, a.out.as_deref())?;
        return ok(format!("scanned {} disorder strengths", rows.len()), stdout);
    }

    let kind = ensemble_kind(a, sigmas[0])?;
    if a.n.len() > 1 {
        let rows = histogram_experiment(a.g, kind, &a.n, a.samples, a.bins, a.seed)?;
        let mut table = Table::new(
            "montecarlo-histograms",
            &["n", "mean_shift", "stderr", "bin_lo", "bin_hi", "count"],
        );
        for r in &rows {
            for (i, &count) in r.histogram.counts.iter().enumerate() {
                table.push(vec![
                    r.n_sites.into(),
                    r.mean_shift.into(),
                    r.stderr.into(),
                    r.histogram.edges[i].into(),
                    r.histogram.edges[i + 1].into(),
                    Cell::Int(count as i64),
                ]);
            }
        }
        let stdout = emit_table(&table, &config, a.format, a.out.as_deref())?;
        return ok(format!("histograms for {} ring sizes", rows.len()), stdout);
    }

    let ensemble = DisorderEnsemble::new(a.g, a.n[0], kind)?.with_policy(a.policy.into());
    let result = expected_utility_binned(&ensemble, a.samples, a.seed, a.bins)?;
    let doc = serde_json::to_string_pretty(&json_document("montecarlo", &config, &result)?)? + "\n";
    if let Some(path) = &a.out {
        let mut hist = Table::new("montecarlo-histogram", &["bin_lo", "bin_hi", "count"]);
        for (i, &count) in result.histogram.counts.iter().enumerate() {
            hist.push(vec![
                result.histogram.edges[i].into(),
                result.histogram.edges[i + 1].into(),
                Cell::Int(count as i64),
            ]);
        }
        write_atomic(&histogram_path(path), &hist.to_csv(&config))?;
    }
    let stdout = emit_text(doc, a.out.as_deref())?;
    ok(
        format!(
            "E[b] = {:.6} ± {:.6}, b(ḡ) = {:.6}, {} samples, {} rejected",
            result.mean_density,
            result.stderr / a.n[0] as f64,
            result.clean_density,
            result.n_samples,
            result.n_rejected
        ),
        stdout,
    )
}

/// `<out>.histogram.csv` next to a Monte Carlo JSON file.
pub fn histogram_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".histogram.csv");
    PathBuf::from(name)
}

fn critical_scaling_cmd(command: &Command, a: &CriticalScalingArgs) -> Result<Outcome> {
    let mut table = Table::new(
        "critical-scaling",
        &[
            "n",
            "s1_exact",
            "s1_asymptotic",
            "s2_exact",
            "s2_asymptotic",
            "chi2_critical_exact",
            "chi2_critical_asymptotic",
            "rescaled_sv_critical",
            "rescaled_sv_asymptotic",
        ],
    );
    for &n in &a.n {
        let r = critical_scaling(n)?;
        table.push(vec![
            n.into(),
            r.s1_exact.into(),
            r.s1_asymptotic.into(),
            r.s2_exact.into(),
            r.s2_asymptotic.into(),
            r.chi2_critical_exact.into(),
            r.chi2_critical_asymptotic.into(),
            r.rescaled_sv_critical.into(),
            r.rescaled_sv_asymptotic.into(),
        ]);
    }
    let stdout = emit_table(&table, &config_of(command, None)?, a.format, a.out.as_deref())?;
    ok(format!("critical scaling for {} ring sizes", a.n.len()), stdout)
}

fn verify_cmd(a: &VerifyArgs) -> Result<Outcome> {
    let report = verify::run(a.level);
    let failures = report.failures();
    let mut summary = String::new();
    for c in &report.checks {
        summary.push_str(&format!(
            "[{}] {}::{} {} observed={:e} expected={:e} tol={:e}{}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.operation,
            c.inputs,
            c.observed,
            c.expected,
            c.tolerance,
            c.error.as_ref().map(|e| format!(" error={e}")).unwrap_or_default()
        ));
    }
    summary.push_str(&format!("{} checks, {} failed", report.checks.len(), failures.len()));
    let doc = serde_json::to_string_pretty(&json!({
        "passed": report.passed(),
        "level": report.level,
        "failures": failures,
        "n_checks": report.checks.len(),
    }))? + "\n";
    if let Some(path) = &a.out {
        write_atomic(path, &doc)?;
    }
    Ok(Outcome {
        exit_code: if report.passed() { EXIT_OK } else { EXIT_VERIFICATION },
        summary,
        stdout: Some(doc),
    })
}

fn rerun(a: &RerunArgs) -> Result<Outcome> {
    let contents = std::fs::read_to_string(&a.file)?;
    let mut config = read_config(&contents)?;
    if let Value::Object(map) = &mut config {
        map.remove("derived");
    }
    let mut command: Command = serde_json::from_value(config)
        .map_err(|e| Error::invalid(format!("unreadable recorded configuration: {e}")))?;
    if let Some(out) = &a.out {
        let target = Some(out.clone());
        match &mut command {
            Command::BCurve(c) => c.out = target,
            Command::SecondVariation(c) => c.out = target,
            Command::Montecarlo(c) => c.out = target,
            Command::CriticalScaling(c) => c.out = target,
            Command::Verify(c) => c.out = target,
            Command::Rerun(_) => return Err(Error::invalid("recorded command is itself a rerun")),
        }
    }
    run(&command)
}
