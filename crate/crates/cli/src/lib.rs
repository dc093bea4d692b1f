//! `mqubit`: reproducible command-line runs of the monitored-qubit library.
//!
//! Each command is a pure function of its arguments and input files. The
//! artifact it writes embeds a [`Provenance`] record (tool and library
//! versions, the full command configuration, seeds, resolved model, input
//! digests), and `mqubit replay` regenerates the artifact byte for byte from
//! that record alone.

mod artifact;
mod error;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use monitored_qubit::accessibility::{catalog_check, dimension, CATALOG_SEED};
use monitored_qubit::distributions::calibration::{calibrate_clock, CalibrationSetting, ClockCalibration};
use monitored_qubit::distributions::ks::KsResult;
use monitored_qubit::distributions::{
    compare_samples, coordinate_samples, pdf_hen_phi, pdf_hon_chi, ClosedFormDistribution, DistributionCase, DistributionParams,
};
use monitored_qubit::invariants::{confinement_check, ConfinementReport, InvariantKind};
use monitored_qubit::sde::{preset, simulate_ensemble_with, Ensemble, Preset, SimOptions, DEFAULT_DT, DEFAULT_HORIZON};
use monitored_qubit::{BlochVector, DensityMatrix, ModelSpec};
use serde::{Deserialize, Serialize};

pub use artifact::{read_ensemble, read_provenance, sha256_hex, Artifact, Body, InputDigest, Provenance};
pub use error::{CliError, Result, EXIT_INVALID, EXIT_IO, EXIT_NON_CONVERGENCE};

/// Latitude of the default start: a pure state just above the equator.
pub const DEFAULT_START_LATITUDE: f64 = 0.2;

#[derive(Debug, Parser)]
#[command(name = "mqubit", version, about = "Simulate, verify and classify continuously monitored qubit dynamics")]
pub struct Cli {
    /// Directory for artifacts written without --out.
    #[arg(long, global = true, env = "MQUBIT_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Integrate the stochastic master equation for an ensemble of trajectories.
    Simulate(SimulateArgs),
    /// Compare an invariant along trajectories with its evolution law.
    VerifyInvariant(VerifyArgs),
    /// Tabulate a closed-form density.
    Distribution(DistributionArgs),
    /// Kolmogorov–Smirnov distance between an ensemble and a closed-form density.
    Compare(CompareArgs),
    /// Dimension of the deterministically evolving support of a model.
    Accessibility(AccessibilityArgs),
    /// Run every classification fixture.
    Catalog(CatalogArgs),
    /// Fit the clock factor between simulation time and a density's own time.
    CalibrateClock(CalibrateArgs),
    /// Regenerate an artifact from its provenance and check it is identical.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Model JSON file: {"hamiltonian": M, "channels": [{"operator": M, "efficiency": η}]},
    /// matrices as [[[re, im], [re, im]], [[re, im], [re, im]]].
    #[arg(long, conflicts_with = "preset")]
    pub model: Option<PathBuf>,
    /// Standard setup: HeH, HeN, HoH or HoN.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    /// Detection efficiency of the preset's channels.
    #[arg(long, default_value_t = 1.0, conflicts_with = "model")]
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    /// Euler–Maruyama step.
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    /// Simulated time.
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: f64,
    /// Number of trajectories.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Base seed; trajectory i draws from a seed derived from (seed, i).
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Start state as Bloch components "x,y,z" [default: the pure state at latitude 0.2 on the x–z meridian].
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    /// Store every stride-th step; the final state is always stored.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Output CSV [default: <out-dir>/traj.csv].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Invariant: B_heh, C_hen, B_hoh, C_hon or F_hon [default: the one of the preset].
    #[arg(long)]
    pub kind: Option<String>,
    /// Ensemble written by `simulate`; without it an ensemble is simulated from the flags below.
    #[arg(long, conflicts_with_all = ["model", "preset", "eta", "dt", "horizon", "n", "seed", "start", "stride"])]
    pub ensemble: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Include the predicted and observed invariant paths of every trajectory.
    #[arg(long)]
    pub paths: bool,
    /// Output JSON [default: <out-dir>/report.json].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DistributionArgs {
    /// heh-theta, heh-w, hen-phi, hen-latitude, hon-chi or hon-chi-singular.
    #[arg(long, value_parser = parse_case)]
    pub case: DistributionCase,
    /// Detection efficiency.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Start state "x,y,z"; sets every initial constant at once.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["theta0", "w0", "phi0", "c0", "chi0"])]
    pub start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub w0: Option<f64>,
    #[arg(long)]
    pub phi0: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub chi0: Option<f64>,
    /// Time since the start, converted to the density's clock with the calibrated factor.
    #[arg(long, required_unless_present = "tau", conflicts_with = "tau")]
    pub t: Option<f64>,
    /// Time in the density's own clock.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Clock factor, overriding the calibration.
    #[arg(long, conflicts_with = "tau")]
    pub kappa: Option<f64>,
    /// Clock calibration file [default: the calibration shipped with the library].
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Evaluation grid "a:b:n" [default: 200 points between the 1e-4 and 1 − 1e-4 quantiles].
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Evaluate the truncated Laguerre series instead of the resummed kernel (hen-phi, hon-chi).
    #[arg(long)]
    pub series: bool,
    /// Output CSV [default: <out-dir>/pdf.csv].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long, value_parser = parse_case)]
    pub case: DistributionCase,
    /// Ensemble written by `simulate`.
    #[arg(long)]
    pub ensemble: PathBuf,
    /// Clock factor, overriding the calibration.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Clock calibration file [default: the calibration shipped with the library].
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Output JSON [default: <out-dir>/ks.json].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AccessibilityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Random interior points per draw.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output JSON [default: <out-dir>/verdict.json].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CatalogArgs {
    /// Output JSON [default: <out-dir>/catalog_report.json].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CalibrateArgs {
    #[arg(long, value_parser = parse_case)]
    pub case: DistributionCase,
    /// Trajectories [default: 10000].
    #[arg(long)]
    pub n: Option<usize>,
    /// Step [default: 1e-5].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated time [default: per case].
    #[arg(long)]
    pub t: Option<f64>,
    /// Base seed [default: 20240601].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Calibration to extend [default: the calibration shipped with the library].
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Output JSON [default: <out-dir>/clock_calibration.json].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Artifact to regenerate.
    #[arg(long)]
    pub artifact: PathBuf,
    /// Where to write the regenerated copy [default: <out-dir>/replay-<name>].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse().map_err(|e: monitored_qubit::Error| e.to_string())
}

fn parse_case(s: &str) -> std::result::Result<DistributionCase, String> {
    s.parse().map_err(|e: monitored_qubit::Error| e.to_string())
}

pub fn parse_bloch(s: &str) -> Result<BlochVector> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Vec<f64> = parts.iter().map(|p| p.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| CliError::invalid(format!("start {s:?}: expected \"x,y,z\"")))?;
    match nums[..] {
        [x, y, z] => Ok(BlochVector::new(x, y, z)?),
        _ => Err(CliError::invalid(format!("start {s:?}: expected three components"))),
    }
}

/// `(a, b, n)` from "a:b:n", n ≥ 2 points with a < b.
pub fn parse_grid(s: &str) -> Result<(f64, f64, usize)> {
    let bad = || CliError::invalid(format!("grid {s:?}: expected \"a:b:n\" with a < b and n ≥ 2"));
    let p: Vec<&str> = s.split(':').collect();
    if p.len() != 3 {
        return Err(bad());
    }
    let a: f64 = p[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = p[1].trim().parse().map_err(|_| bad())?;
    let n: usize = p[2].trim().parse().map_err(|_| bad())?;
    if !(a < b) || n < 2 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn grid_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn start_state(start: &Option<String>) -> Result<BlochVector> {
    match start {
        Some(s) => parse_bloch(s),
        None => Ok(BlochVector::from_latitude(DEFAULT_START_LATITUDE, 0.0, 1.0)),
    }
}

/// Model named by `--model` or `--preset`, with the digest of a model file.
fn resolve_model(m: &ModelArgs) -> Result<(ModelSpec, Option<InputDigest>)> {
    match (&m.model, m.preset) {
        (Some(path), _) => {
            let bytes = artifact::read_file(path)?;
            let text = std::str::from_utf8(&bytes).map_err(|_| CliError::invalid(format!("{} is not UTF-8", path.display())))?;
            Ok((ModelSpec::from_json(text)?, Some(InputDigest::of(path, &bytes))))
        }
        (None, Some(p)) => Ok((preset(p, m.eta)?, None)),
        (None, None) => Err(CliError::invalid("one of --model or --preset is required")),
    }
}

/// The single efficiency shared by every channel.
fn common_efficiency(model: &ModelSpec) -> Result<f64> {
    let first = model.channels.first().ok_or_else(|| CliError::invalid("model has no channels"))?.efficiency;
    if model.channels.iter().any(|c| c.efficiency != first) {
        return Err(CliError::invalid("channels differ in efficiency; invariants need one η"));
    }
    Ok(first)
}

fn load_calibration(path: &Option<PathBuf>) -> Result<(ClockCalibration, Option<InputDigest>)> {
    match path {
        None => Ok((ClockCalibration::committed(), None)),
        Some(p) => {
            let bytes = artifact::read_file(p)?;
            let cal = serde_json::from_slice(&bytes).map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?;
            Ok((cal, Some(InputDigest::of(p, &bytes))))
        }
    }
}

impl Command {
    /// File name used when no `--out` is given.
    pub fn default_file_name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "traj.csv",
            Command::VerifyInvariant(_) => "report.json",
            Command::Distribution(_) => "pdf.csv",
            Command::Compare(_) => "ks.json",
            Command::Accessibility(_) => "verdict.json",
            Command::Catalog(_) => "catalog_report.json",
            Command::CalibrateClock(_) => "clock_calibration.json",
            Command::Replay(_) => "replay",
        }
    }

    pub fn out(&self) -> Option<&Path> {
        match self {
            Command::Simulate(a) => a.out.as_deref(),
            Command::VerifyInvariant(a) => a.out.as_deref(),
            Command::Distribution(a) => a.out.as_deref(),
            Command::Compare(a) => a.out.as_deref(),
            Command::Accessibility(a) => a.out.as_deref(),
            Command::Catalog(a) => a.out.as_deref(),
            Command::CalibrateClock(a) => a.out.as_deref(),
            Command::Replay(a) => a.out.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfinementSummary {
    pub trajectories: usize,
    pub mean_normalized_max: f64,
    pub mean_normalized_rms: f64,
    pub worst_normalized_max: f64,
    pub pole_hits: usize,
}

impl ConfinementSummary {
    pub fn of(reports: &[ConfinementReport]) -> Self {
        let n = reports.len() as f64;
        Self {
            trajectories: reports.len(),
            mean_normalized_max: reports.iter().map(|r| r.normalized_max).sum::<f64>() / n,
            mean_normalized_rms: reports.iter().map(|r| r.normalized_rms).sum::<f64>() / n,
            worst_normalized_max: reports.iter().map(|r| r.normalized_max).fold(0.0, f64::max),
            pole_hits: reports.iter().filter(|r| r.pole_hit).count(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ConfinementOutput {
    kind: InvariantKind,
    eta: f64,
    summary: ConfinementSummary,
    reports: Vec<ConfinementReport>,
}

#[derive(Debug, Clone, Serialize)]
struct CompareOutput {
    case: DistributionCase,
    start: BlochVector,
    t_sim: f64,
    kappa: f64,
    tau: f64,
    params: DistributionParams,
    ks: KsResult,
}

fn simulate(args: &SimulateArgs, prov: &mut Provenance) -> Result<Body> {
    let (model, digest) = resolve_model(&args.model)?;
    let ens = run_ensemble(&model, &args.run)?;
    prov.seeds = vec![args.run.seed];
    prov.inputs.extend(digest);
    prov.model = Some(model);
    Ok(Body::Csv(artifact::ensemble_csv(&ens)?))
}

fn run_ensemble(model: &ModelSpec, run: &RunArgs) -> Result<Ensemble> {
    if run.n == 0 {
        return Err(CliError::invalid("--n must be at least 1"));
    }
    if run.stride == 0 {
        return Err(CliError::invalid("--stride must be at least 1"));
    }
    let rho0 = DensityMatrix::from_bloch(start_state(&run.start)?)?;
    let opts = SimOptions { record_stride: run.stride, substeps: 1 };
    Ok(simulate_ensemble_with(model, &rho0, run.dt, run.horizon, run.n, run.seed, opts)?)
}

fn verify_invariant(args: &VerifyArgs, prov: &mut Provenance) -> Result<Body> {
    let (ens, preset_used) = match &args.ensemble {
        Some(path) => {
            let (source, ens, digest) = read_ensemble(path)?;
            prov.inputs.push(digest);
            let Command::Simulate(s) = source.command else { unreachable!("read_ensemble checks the command") };
            (ens, s.model.preset.filter(|_| s.model.model.is_none()))
        }
        None => {
            let (model, digest) = resolve_model(&args.model)?;
            prov.inputs.extend(digest);
            let ens = run_ensemble(&model, &args.run)?;
            (ens, args.model.preset.filter(|_| args.model.model.is_none()))
        }
    };
    prov.seeds = vec![ens.base_seed];
    let eta = common_efficiency(&ens.model)?;
    prov.model = Some(ens.model.clone());
    let kind = match (&args.kind, preset_used) {
        (Some(k), _) => InvariantKind::parse(k)?,
        (None, Some(p)) => InvariantKind::for_preset(p),
        (None, None) => return Err(CliError::invalid("--kind is required for custom models")),
    };
    let mut reports = ens.trajectories.iter().map(|t| confinement_check(t, kind, eta)).collect::<monitored_qubit::Result<Vec<_>>>()?;
    let summary = ConfinementSummary::of(&reports);
    if !args.paths {
        for r in &mut reports {
            r.predicted_path.clear();
            r.observed_path.clear();
        }
    }
    json_body(&ConfinementOutput { kind, eta, summary, reports })
}

fn distribution_params(args: &DistributionArgs) -> Result<DistributionParams> {
    if let Some(s) = &args.start {
        return Ok(DistributionParams::from_start(args.case, parse_bloch(s)?, args.eta)?);
    }
    let mut p = DistributionParams { eta: args.eta, ..Default::default() };
    p.theta0 = args.theta0.unwrap_or(p.theta0);
    p.w0 = args.w0.unwrap_or(p.w0);
    p.phi0 = args.phi0.unwrap_or(p.phi0);
    p.c0 = args.c0.unwrap_or(p.c0);
    p.chi0 = args.chi0.unwrap_or(p.chi0);
    Ok(p)
}

fn distribution(args: &DistributionArgs, prov: &mut Provenance) -> Result<Body> {
    let params = distribution_params(args)?;
    let tau = match (args.tau, args.t) {
        (Some(tau), _) => tau,
        (None, Some(t)) => {
            let kappa = match args.kappa {
                Some(k) => k,
                None => {
                    let (cal, digest) = load_calibration(&args.calibration)?;
                    prov.inputs.extend(digest);
                    cal.kappa(args.case)?
                }
            };
            kappa * t
        }
        (None, None) => return Err(CliError::invalid("one of --t or --tau is required")),
    };
    let dist = ClosedFormDistribution::new(args.case, params, tau)?;
    let (a, b, n) = match &args.grid {
        Some(g) => parse_grid(g)?,
        None => (dist.quantile(1e-4)?, dist.quantile(1.0 - 1e-4)?, 200),
    };
    let p = params;
    let pdf = |x: f64| -> Result<f64> {
        if !args.series {
            return Ok(dist.pdf(x));
        }
        Ok(match args.case {
            DistributionCase::HenPhi => pdf_hen_phi(x, tau, p.phi0, p.c0, p.eta, 0, p.n_max)?,
            DistributionCase::HonChi => pdf_hon_chi(x, tau, p.chi0, p.c0, p.eta, p.n_max)?,
            other => return Err(CliError::invalid(format!("--series applies to hen-phi and hon-chi, not {other}"))),
        })
    };
    let mut text = format!("# tau: {tau}\nx,pdf\n");
    for x in grid_points(a, b, n) {
        text.push_str(&format!("{x},{}\n", pdf(x)?));
    }
    Ok(Body::Csv(text))
}

fn compare(args: &CompareArgs, prov: &mut Provenance) -> Result<Body> {
    let (source, ens, digest) = read_ensemble(&args.ensemble)?;
    prov.inputs.push(digest);
    let Command::Simulate(s) = source.command else { unreachable!("read_ensemble checks the command") };
    let preset_used = s.model.preset.filter(|_| s.model.model.is_none());
    match preset_used {
        Some(p) if args.case.presets().contains(&p) => {}
        Some(p) => return Err(CliError::invalid(format!("{} does not describe {p} ensembles", args.case))),
        None => return Err(CliError::invalid("compare needs an ensemble simulated from a preset")),
    }
    let eta = common_efficiency(&ens.model)?;
    let start = ens.trajectories[0].initial().state;
    if ens.trajectories.iter().any(|t| t.initial().state != start) {
        return Err(CliError::invalid("trajectories start from different states"));
    }
    let t_sim = ens.trajectories[0].last().time;
    let kappa = match args.kappa {
        Some(k) => k,
        None => {
            let (cal, d) = load_calibration(&args.calibration)?;
            prov.inputs.extend(d);
            cal.kappa(args.case)?
        }
    };
    prov.seeds = vec![ens.base_seed];
    prov.model = Some(ens.model.clone());
    let params = DistributionParams::from_start(args.case, start, eta)?;
    let dist = ClosedFormDistribution::at_sim_time(args.case, params, t_sim, kappa)?;
    let samples = coordinate_samples(&ens.final_states(), args.case.coordinate(), eta)?;
    let ks = compare_samples(&dist, &samples)?;
    json_body(&CompareOutput { case: args.case, start, t_sim, kappa, tau: dist.tau, params, ks })
}

fn accessibility(args: &AccessibilityArgs, prov: &mut Provenance) -> Result<Body> {
    let (model, digest) = resolve_model(&args.model)?;
    prov.inputs.extend(digest);
    prov.seeds = vec![args.seed];
    let verdict = dimension(&model, args.samples, args.seed)?;
    prov.model = Some(model);
    json_body(&verdict)
}

fn catalog(prov: &mut Provenance) -> Result<Body> {
    prov.seeds = vec![CATALOG_SEED];
    json_body(&catalog_check()?)
}

fn calibrate(args: &CalibrateArgs, prov: &mut Provenance) -> Result<Body> {
    let mut setting = CalibrationSetting::standard(args.case);
    setting.n = args.n.unwrap_or(setting.n);
    setting.dt = args.dt.unwrap_or(setting.dt);
    setting.t_sim = args.t.unwrap_or(setting.t_sim);
    setting.seed = args.seed.unwrap_or(setting.seed);
    let (mut cal, digest) = load_calibration(&args.base)?;
    prov.inputs.extend(digest);
    prov.seeds = vec![setting.seed];
    prov.model = Some(preset(setting.preset, setting.eta)?);
    cal.upsert(calibrate_clock(&setting)?);
    json_body(&cal)
}

fn json_body(payload: &impl Serialize) -> Result<Body> {
    Ok(Body::Json(serde_json::to_value(payload).map_err(|e| CliError::invalid(format!("serialising output: {e}")))?))
}

/// Runs a command without touching its output path.
pub fn execute(command: &Command) -> Result<Artifact> {
    let mut recorded = command.clone();
    clear_out(&mut recorded);
    let mut prov = Provenance::new(recorded);
    let body = match command {
        Command::Simulate(a) => simulate(a, &mut prov)?,
        Command::VerifyInvariant(a) => verify_invariant(a, &mut prov)?,
        Command::Distribution(a) => distribution(a, &mut prov)?,
        Command::Compare(a) => compare(a, &mut prov)?,
        Command::Accessibility(a) => accessibility(a, &mut prov)?,
        Command::Catalog(_) => catalog(&mut prov)?,
        Command::CalibrateClock(a) => calibrate(a, &mut prov)?,
        Command::Replay(_) => return Err(CliError::invalid("replay does not produce its own artifact")),
    };
    Ok(Artifact { provenance: prov, body })
}

fn clear_out(c: &mut Command) {
    match c {
        Command::Simulate(a) => a.out = None,
        Command::VerifyInvariant(a) => a.out = None,
        Command::Distribution(a) => a.out = None,
        Command::Compare(a) => a.out = None,
        Command::Accessibility(a) => a.out = None,
        Command::Catalog(a) => a.out = None,
        Command::CalibrateClock(a) => a.out = None,
        Command::Replay(a) => a.out = None,
    }
}

/// Regenerates the artifact at `path` from its provenance. Fails when the
/// tool version or an input file differs from the recorded one.
pub fn regenerate(path: &Path) -> Result<(Vec<u8>, Vec<u8>)> {
    let original = artifact::read_file(path)?;
    let prov = artifact::provenance_from_bytes(&original, path)?;
    let (version, library) = (env!("CARGO_PKG_VERSION"), monitored_qubit::VERSION);
    if prov.tool != artifact::TOOL || prov.version != version || prov.library_version != library {
        return Err(CliError::invalid(format!(
            "{} was written by {} {} (library {}); this is {} {version} (library {library})",
            path.display(),
            prov.tool,
            prov.version,
            prov.library_version,
            artifact::TOOL,
        )));
    }
    for input in &prov.inputs {
        let bytes = artifact::read_file(&input.path)?;
        if sha256_hex(&bytes) != input.sha256 {
            return Err(CliError::invalid(format!("input {} changed since the artifact was written", input.path.display())));
        }
    }
    let regenerated = execute(&prov.command)?.to_bytes();
    Ok((original, regenerated))
}

fn output_path(cli: &Cli) -> PathBuf {
    match (&cli.command, cli.command.out()) {
        (_, Some(p)) => p.to_path_buf(),
        (Command::Replay(r), None) => {
            let name = r.artifact.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "artifact".into());
            cli.out_dir.join(format!("replay-{name}"))
        }
        (c, None) => cli.out_dir.join(c.default_file_name()),
    }
}

/// Runs the parsed command line and returns the path written.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let out = output_path(cli);
    match &cli.command {
        Command::Replay(r) => {
            let (original, regenerated) = regenerate(&r.artifact)?;
            artifact::write_file(&out, &regenerated)?;
            if original != regenerated {
                return Err(CliError::invalid(format!("regenerated artifact {} differs from {}", out.display(), r.artifact.display())));
            }
        }
        command => artifact::write_file(&out, &execute(command)?.to_bytes())?,
    }
    Ok(out)
}
