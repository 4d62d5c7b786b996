//! The `bictx` command line.
//!
//! Exit codes: 0 success (or a non-bi-contextual verdict), 1 a self-check
//! failed, 2 bad input or usage, 3 bi-contextual verdict. Commands that
//! write to `--out` also write `<out>.manifest.json` recording everything
//! needed to replay the run.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::behavior::Behavior;
use crate::decision::{decide_single, DecisionReport, Verdict};
use crate::error::{Error, Result};
use crate::oracle::{
    bisect_violation_boundary, enumerate_deterministic, flip_brackets, grid_feasibility, random_agreement, OracleConfig,
};
use crate::quantum::{ideal_behavior, sample_all, verify_mermin_peres, OutcomeCounts, ProductState, QubitState};
use crate::stats::{ideal_report, propagate_uncertainty, CountTable, UncertainReport};
use crate::sweeps::{run_region, run_sweep, write_region_csv, write_sweep_csv, Param, RegionSpec, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BICONTEXTUAL: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "bictx",
    version,
    about = "Bi-contextuality tests for two independent sources measured in three settings"
)]
pub struct Cli {
    /// Worker threads for sweeps, region scans, the oracle and the bootstrap.
    /// Results do not depend on this value.
    #[arg(long, global = true, env = "BICTX_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Decide a behavior given as JSON (file path or `-` for stdin).
    Decide(DecideArgs),
    /// Sample the three settings of a symmetric product state and analyse the counts.
    Simulate(SimulateArgs),
    /// Sweep theta or phi at a fixed value of the other angle; CSV output.
    Sweep(SweepArgs),
    /// Classify qubit states over the Bloch ball or sphere; CSV output.
    Region(RegionArgs),
    /// Brute-force cross-checks of the decision procedure.
    Oracle(OracleArgs),
    /// Verify the Mermin-Peres square algebra.
    Mpsquare(OutArgs),
    /// Analyse measured counts (JSON counts or per-shot CSV).
    Ingest(IngestArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Write the result here instead of stdout, with a manifest alongside.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DecideArgs {
    pub behavior: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Polar angle in [0, pi/2]; accepts forms like `pi/4` or `0.785`.
    #[arg(long, value_parser = parse_angle)]
    pub theta: f64,
    #[arg(long, value_parser = parse_angle)]
    pub phi: f64,
    /// Shots per setting; 0 reports exact statistics.
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Which angle stays fixed; its value comes from `--theta` or `--phi`.
    #[arg(long, value_enum)]
    pub fixed: Param,
    #[arg(long, value_parser = parse_angle)]
    pub theta: Option<f64>,
    #[arg(long, value_parser = parse_angle)]
    pub phi: Option<f64>,
    /// Range of the varying angle as `lo,hi`. Defaults to [0, pi] for phi and
    /// [0, pi/2] for theta.
    #[arg(long, value_parser = parse_range)]
    pub range: Option<(f64, f64)>,
    #[arg(long, default_value_t = crate::sweeps::DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::sweeps::DEFAULT_SWEEP_RESAMPLES)]
    pub resamples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct RegionArgs {
    /// Grid points per axis (ball) or angular divisions (sphere).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Scan pure states on the sphere instead of the full ball.
    #[arg(long)]
    pub surface_only: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
#[group(id = "mode", required = true, multiple = false, args = ["random", "behavior", "bisect"])]
pub struct OracleArgs {
    /// Compare the grid search with the analytic verdict on this many random behaviors.
    #[arg(long)]
    pub random: Option<usize>,
    /// Run every oracle on one behavior file.
    #[arg(long)]
    pub behavior: Option<PathBuf>,
    /// Locate verdict flips along theta at fixed `--phi`.
    #[arg(long)]
    pub bisect: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_angle)]
    pub phi: Option<f64>,
    /// Bracket `lo,hi` for `--bisect`; without it all flips in [0, pi/2] are located.
    #[arg(long, value_parser = parse_range)]
    pub range: Option<(f64, f64)>,
    #[arg(long, default_value_t = OracleConfig::default().grid_points)]
    pub grid_points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// `.csv` files are read as per-shot records, anything else as JSON counts.
    pub counts: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

/// Parses a number or a multiple of pi such as `pi`, `pi/4`, `3pi/4`,
/// `3*pi/4` or `-pi/2`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{s:?} is not finite"))
        };
    }
    let lower = t.to_ascii_lowercase();
    let Some(at) = lower.find("pi") else {
        return Err(format!("{s:?} is neither a number nor a multiple of pi"));
    };
    let coeff = lower[..at].trim_end_matches('*').trim();
    let coeff = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| format!("bad coefficient in {s:?}"))?,
    };
    let rest = lower[at + 2..].trim();
    let div = if rest.is_empty() {
        1.0
    } else {
        let d = rest
            .strip_prefix('/')
            .ok_or_else(|| format!("unexpected {rest:?} in {s:?}"))?;
        d.trim().parse::<f64>().map_err(|_| format!("bad divisor in {s:?}"))?
    };
    if div == 0.0 {
        return Err(format!("division by zero in {s:?}"));
    }
    Ok(coeff * std::f64::consts::PI / div)
}

/// Parses `lo,hi` where each end is accepted by [`parse_angle`].
pub fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("range {s:?} must look like lo,hi"))?;
    let (lo, hi) = (parse_angle(lo)?, parse_angle(hi)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("range {s:?} must have lo < hi"))
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'static str,
    pub parameters: &'a Cli,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub outputs: Vec<PathBuf>,
    #[serde(rename = "durationSeconds")]
    pub duration_seconds: f64,
}

/// Where a command's main output goes.
enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    fn new(out: &OutArgs) -> Self {
        out.out.clone().map_or(Sink::Stdout, Sink::File)
    }

    fn write_with(&self, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match self {
            Sink::Stdout => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                f(&mut lock)?;
                lock.flush()?;
            }
            Sink::File(p) => {
                let mut w = BufWriter::new(File::create(p)?);
                f(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }

    fn write_json<T: Serialize>(&self, value: &T) -> Result<()> {
        self.write_with(|w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn path(&self) -> Option<&Path> {
        match self {
            Sink::Stdout => None,
            Sink::File(p) => Some(p),
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_end(&mut buf)?;
    } else {
        File::open(path)?.read_to_end(&mut buf)?;
    }
    Ok(buf)
}

fn read_behavior(path: &Path) -> Result<Behavior> {
    Ok(serde_json::from_slice(&read_input(path)?)?)
}

fn verdict_code(v: Verdict) -> i32 {
    if v.is_bicontextual() {
        EXIT_BICONTEXTUAL
    } else {
        EXIT_OK
    }
}

#[derive(Serialize)]
struct SimulateOutput {
    theta: f64,
    phi: f64,
    shots: u64,
    seed: u64,
    counts: Vec<OutcomeCounts>,
    report: UncertainReport,
}

#[derive(Serialize)]
struct BehaviorOracleOutput {
    analytic: DecisionReport,
    grid: crate::oracle::GridResult,
    deterministic: Option<crate::oracle::Decomposition>,
    agree: bool,
}

#[derive(Serialize)]
struct BisectOutput {
    phi: f64,
    brackets: Vec<(f64, f64)>,
    flips: Vec<f64>,
    tolerance: f64,
}

fn simulate(a: &SimulateArgs) -> Result<(SimulateOutput, Verdict)> {
    let state = ProductState::symmetric(QubitState::new(a.theta, a.phi)?);
    let (counts, report) = if a.shots == 0 {
        (Vec::new(), ideal_report(&ideal_behavior(a.theta, a.phi)?, a.seed))
    } else {
        let counts = sample_all(&state, a.shots, a.seed)?;
        let table = CountTable::from_outcome_counts(&counts)?;
        (counts.to_vec(), propagate_uncertainty(&table, a.resamples, a.seed)?)
    };
    let verdict = report.verdict;
    Ok((
        SimulateOutput {
            theta: a.theta,
            phi: a.phi,
            shots: a.shots,
            seed: a.seed,
            counts,
            report,
        },
        verdict,
    ))
}

fn sweep_spec(a: &SweepArgs) -> Result<SweepSpec> {
    let fixed_value = match a.fixed {
        Param::Theta => a.theta,
        Param::Phi => a.phi,
    }
    .ok_or_else(|| {
        Error::Input(format!(
            "--fixed {0} needs --{0}",
            if a.fixed == Param::Theta { "theta" } else { "phi" }
        ))
    })?;
    let mut spec = SweepSpec::ideal(a.fixed, fixed_value);
    if let Some((lo, hi)) = a.range {
        spec.lo = lo;
        spec.hi = hi;
    }
    spec.steps = a.steps;
    spec.shots = a.shots;
    spec.seed = a.seed;
    spec.resamples = a.resamples;
    spec.validate()?;
    Ok(spec)
}

/// Runs one parsed command; returns the exit code.
fn execute(cli: &Cli) -> Result<(i32, Option<u64>, Vec<PathBuf>)> {
    let mut outputs = Vec::new();
    let mut record = |s: &Sink| {
        if let Some(p) = s.path() {
            outputs.push(p.to_path_buf());
        }
    };
    let (code, seed) = match &cli.command {
        Command::Decide(a) => {
            let b = read_behavior(&a.behavior)?;
            let rep = decide_single(&b);
            let sink = Sink::new(&a.out);
            sink.write_json(&rep)?;
            record(&sink);
            (verdict_code(rep.verdict), None)
        }
        Command::Simulate(a) => {
            let (out, verdict) = simulate(a)?;
            let sink = Sink::new(&a.out);
            sink.write_json(&out)?;
            record(&sink);
            (verdict_code(verdict), Some(a.seed))
        }
        Command::Sweep(a) => {
            let spec = sweep_spec(a)?;
            let rows = run_sweep(&spec)?;
            let sink = Sink::new(&a.out);
            sink.write_with(|w| write_sweep_csv(&rows, w))?;
            record(&sink);
            (EXIT_OK, Some(a.seed))
        }
        Command::Region(a) => {
            let mut spec = if a.surface_only {
                RegionSpec::sphere()
            } else {
                RegionSpec::ball()
            };
            if let Some(r) = a.resolution {
                spec.resolution = r;
            }
            let rows = run_region(&spec)?;
            let sink = Sink::new(&a.out);
            sink.write_with(|w| write_region_csv(&rows, w))?;
            record(&sink);
            (EXIT_OK, None)
        }
        Command::Oracle(a) => {
            let cfg = OracleConfig {
                grid_points: a.grid_points,
                ..OracleConfig::default()
            };
            cfg.validate()?;
            let sink = Sink::new(&a.out);
            let code = if let Some(n) = a.random {
                let summary = random_agreement(n, a.seed, &cfg);
                sink.write_json(&summary)?;
                if summary.passed() {
                    EXIT_OK
                } else {
                    EXIT_CHECK_FAILED
                }
            } else if let Some(path) = &a.behavior {
                let b = read_behavior(path)?;
                let analytic = decide_single(&b);
                let grid = grid_feasibility(&b, &cfg);
                let deterministic = enumerate_deterministic(&b);
                let non_bc = analytic.verdict == Verdict::NonBiContextual;
                let agree = grid.feasible == non_bc && deterministic.is_some() == non_bc;
                let verdict = analytic.verdict;
                sink.write_json(&BehaviorOracleOutput {
                    analytic,
                    grid,
                    deterministic,
                    agree,
                })?;
                if agree {
                    verdict_code(verdict)
                } else {
                    EXIT_CHECK_FAILED
                }
            } else {
                let phi = a.phi.ok_or_else(|| Error::Input("--bisect needs --phi".into()))?;
                let brackets = match a.range {
                    Some(r) => vec![r],
                    None => flip_brackets(phi, 0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI / 200.0)?,
                };
                let flips = brackets
                    .iter()
                    .map(|&(lo, hi)| bisect_violation_boundary(phi, lo, hi, &cfg))
                    .collect::<Result<Vec<_>>>()?;
                sink.write_json(&BisectOutput {
                    phi,
                    brackets,
                    flips,
                    tolerance: cfg.bisection_tol,
                })?;
                EXIT_OK
            };
            record(&sink);
            (code, a.random.map(|_| a.seed))
        }
        Command::Mpsquare(a) => {
            let rep = verify_mermin_peres();
            let sink = Sink::new(a);
            sink.write_json(&rep)?;
            record(&sink);
            (if rep.ok { EXIT_OK } else { EXIT_CHECK_FAILED }, None)
        }
        Command::Ingest(a) => {
            let table = CountTable::from_path(&a.counts)?;
            let rep = propagate_uncertainty(&table, a.resamples, a.seed)?;
            let sink = Sink::new(&a.out);
            sink.write_json(&rep)?;
            record(&sink);
            (verdict_code(rep.verdict), Some(a.seed))
        }
    };
    Ok((code, seed, outputs))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Decide(_) => "decide",
        Command::Simulate(_) => "simulate",
        Command::Sweep(_) => "sweep",
        Command::Region(_) => "region",
        Command::Oracle(_) => "oracle",
        Command::Mpsquare(_) => "mpsquare",
        Command::Ingest(_) => "ingest",
    }
}

fn run_parsed(cli: &Cli) -> Result<i32> {
    let start = Instant::now();
    let (code, seed, outputs) = execute(cli)?;
    for out in &outputs {
        let manifest = RunManifest {
            command: command_name(&cli.command),
            parameters: cli,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: outputs.clone(),
            duration_seconds: start.elapsed().as_secs_f64(),
        };
        let mut w = BufWriter::new(File::create(manifest_path(out))?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(code)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::Input("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Input(format!("cannot start {n} threads: {e}")))
            .and_then(|pool| pool.install(|| run_parsed(&cli))),
        None => run_parsed(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bictx: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("nan").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0,pi").unwrap(), (0.0, PI));
        assert!(parse_range("1,0").is_err());
        assert!(parse_range("1").is_err());
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(
            manifest_path(Path::new("/tmp/a.csv")),
            PathBuf::from("/tmp/a.csv.manifest.json")
        );
    }
}
