//! Argument parsing and exit-code policy.
//!
//! Exit codes: 0 success, 1 verification failures, 2 input or validation
//! error, 3 solver non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use decolab_core::discord::{BasisOptimizerConfig, MeasureId};
use decolab_core::states::{random_state, RandomKind};
use decolab_core::theorems::VerificationReport;
use serde::Serialize;

use crate::commands::{self, DEFAULT_MEASURE_SAMPLES};
use crate::ensemble::instance_rng;
use crate::formats;
use crate::suites::{self, EnsembleSpec, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "decolab", version, about = "Decoherence, discord and information-location toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one discord measure on a bipartite state file.
    Measure(MeasureArgs),
    /// Run a verification suite over a seeded random ensemble.
    Verify(VerifyArgs),
    /// Tabulate quantities along a parameter grid as CSV.
    Scan(ScanArgs),
    /// Write seeded random states as state files.
    Random(RandomArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    /// Seed for every stochastic routine.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random restarts of the basis optimizer.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// Optimizer convergence tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Iteration cap per optimizer run.
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
}

impl OptimizerArgs {
    fn config(&self) -> BasisOptimizerConfig {
        BasisOptimizerConfig { restarts: self.restarts, max_iters: self.max_iters, tolerance: self.tolerance, seed: self.seed }
    }
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// State file with exactly two factors.
    #[arg(long)]
    pub state: PathBuf,
    /// Measure id, e.g. deficit, geometric, min_entropy, two_way_vn.
    #[arg(long, value_parser = parse_measure)]
    pub measure: MeasureId,
    /// Class samples for the complementarity measures.
    #[arg(long, default_value_t = DEFAULT_MEASURE_SAMPLES)]
    pub samples: usize,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Number of random instances.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Factor dimensions, comma separated; the last factor is the purifier.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Random rank-one information types per state.
    #[arg(long, default_value_t = 1)]
    pub bases: usize,
    /// Coarse-grained information types per state.
    #[arg(long, default_value_t = 0)]
    pub coarse: usize,
    /// Class samples for Monte Carlo averages.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Random unbiased bases per uncertainty or channel check.
    #[arg(long, default_value_t = 5)]
    pub mu_bases: usize,
    /// Random mixtures per state for the mixed-strategy check.
    #[arg(long, default_value_t = 20)]
    pub mixtures: usize,
    /// Channel files to check instead of the built-in phase-flip sweep.
    #[arg(long)]
    pub channel: Vec<PathBuf>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Interferometer,
    PhaseFlip,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Built-in family; otherwise give --state or --channel.
    #[arg(long, value_enum, conflicts_with_all = ["state", "channel"])]
    pub family: Option<Family>,
    /// State file, scanned along (1 - t) rho + t I/d.
    #[arg(long, conflicts_with = "channel")]
    pub state: Option<PathBuf>,
    /// Channel file, scanned along (1 - t) id + t E.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Measures for state scans, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_measure, default_value = "deficit")]
    pub quantity: Vec<MeasureId>,
    /// Grid as `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub grid: String,
    /// Class samples for sampled columns.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    /// Factor dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Kind::GinibreMixed)]
    pub kind: Kind,
    /// Rank of mixed states (full rank by default).
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; states go to stdout as JSON lines when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    HaarPure,
    GinibreMixed,
}

fn parse_measure(s: &str) -> Result<MeasureId, String> {
    MeasureId::from_name(s).ok_or_else(|| {
        let known: Vec<&str> = MeasureId::ALL.iter().map(|m| m.name()).collect();
        format!("unknown measure {s:?}; expected one of {}", known.join(", "))
    })
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_INPUT, message: message.to_string() }
    }

    fn numeric(e: decolab_core::Error) -> Self {
        let code = match e {
            decolab_core::Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }

    fn io(path: Option<&Path>, e: std::io::Error) -> Self {
        let target = path.map_or("stdout".to_string(), |p| p.display().to_string());
        Self::input(format!("{target}: {e}"))
    }
}

/// Run a parsed command and return its exit code.
pub fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Measure(a) => measure(a),
        Command::Verify(a) => verify(a),
        Command::Scan(a) => scan(a),
        Command::Random(a) => random(a),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let mut w = crate::output::sink(path).map_err(|e| Failure::io(path, e))?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| Failure::io(path, e))
}

fn measure(a: MeasureArgs) -> Result<i32, Failure> {
    let rho = formats::read_state(&a.state).map_err(Failure::input)?;
    if rho.dims().len() != 2 {
        return Err(Failure::input(format!("{}.dims: a bipartite state needs exactly two factors, got {:?}", a.state.display(), rho.dims())));
    }
    let cfg = a.optimizer.config();
    let report = commands::measure(&rho, a.measure, &cfg, a.samples).map_err(Failure::numeric)?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
        Format::Csv => commands::report_table(&report).to_csv(),
    };
    write_out(a.out.as_deref(), &text)?;
    if report.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("optimizer did not converge for {}", a.measure.name());
        Ok(EXIT_NO_CONVERGENCE)
    }
}

#[derive(Serialize)]
struct ReportLine<'a> {
    suite: &'static str,
    instance: usize,
    #[serde(flatten)]
    report: &'a VerificationReport,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    suite: &'static str,
    instance: usize,
    error: &'a str,
}

#[derive(Serialize)]
struct Summary {
    suite: &'static str,
    instances: usize,
    reports: usize,
    passed: usize,
    failed: usize,
    errors: usize,
    all_passed: bool,
}

fn verify(a: VerifyArgs) -> Result<i32, Failure> {
    let mut spec = EnsembleSpec::new(a.suite, a.count, a.optimizer.seed);
    if let Some(dims) = a.dims {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Failure::input(format!("--dims: invalid factor dimensions {dims:?}")));
        }
        let needed = match a.suite {
            Suite::Channels => 1,
            Suite::Eq20 => 2,
            _ => 2,
        };
        if dims.len() < needed || (a.suite == Suite::Eq20 && dims.len() != 2) {
            return Err(Failure::input(format!("--dims: suite {} cannot use dims {dims:?}", a.suite.name())));
        }
        spec.dims = dims;
    }
    spec.bases = a.bases;
    spec.coarse = a.coarse;
    spec.samples = a.samples;
    spec.mu_bases = a.mu_bases;
    spec.mixtures = a.mixtures;
    spec.optimizer = a.optimizer.config();
    if !a.channel.is_empty() && a.suite != Suite::Channels {
        return Err(Failure::input("--channel applies to the channels suite only"));
    }

    let results = if a.channel.is_empty() {
        suites::run(a.suite, &spec)
    } else {
        let chans = a.channel.iter().map(|p| formats::read_channel(p)).collect::<Result<Vec<_>, _>>().map_err(Failure::input)?;
        crate::ensemble::run(chans.len(), spec.seed, |i, rng| suites::channel_reports(&chans[i], &spec, rng))
    };

    let mut w = crate::output::sink(a.out.as_deref()).map_err(|e| Failure::io(a.out.as_deref(), e))?;
    let suite = a.suite.name();
    let (mut passed, mut failed, mut errors) = (0, 0, 0);
    let mut line = |text: String| writeln!(w, "{text}").map_err(|e| Failure::io(a.out.as_deref(), e));
    for (instance, result) in results.iter().enumerate() {
        match result {
            Ok(reports) => {
                for report in reports {
                    if report.passed {
                        passed += 1;
                    } else {
                        failed += 1;
                    }
                    line(serde_json::to_string(&ReportLine { suite, instance, report }).expect("reports serialize"))?;
                }
            }
            Err(e) => {
                errors += 1;
                line(serde_json::to_string(&ErrorLine { suite, instance, error: &e.to_string() }).expect("errors serialize"))?;
            }
        }
    }
    let all_passed = failed == 0 && errors == 0;
    let summary = Summary { suite, instances: results.len(), reports: passed + failed, passed, failed, errors, all_passed };
    line(serde_json::json!({ "summary": summary }).to_string())?;
    drop(line);
    w.flush().map_err(|e| Failure::io(a.out.as_deref(), e))?;
    Ok(if all_passed { EXIT_OK } else { EXIT_FAILED })
}

fn scan(a: ScanArgs) -> Result<i32, Failure> {
    let grid = commands::parse_grid(&a.grid).map_err(|e| Failure::input(format!("--grid: {e}")))?;
    let seed = a.optimizer.seed;
    let table = if let Some(family) = a.family {
        match family {
            Family::Interferometer => commands::scan_interferometer(&grid, a.samples, seed),
            Family::PhaseFlip => commands::scan_phase_flip(&grid, a.samples, seed),
        }
    } else if let Some(path) = &a.state {
        let rho = formats::read_state(path).map_err(Failure::input)?;
        if rho.dims().len() != 2 {
            return Err(Failure::input(format!("{}.dims: a bipartite state needs exactly two factors, got {:?}", path.display(), rho.dims())));
        }
        commands::scan_state(&rho, &a.quantity, &grid, &a.optimizer.config(), a.samples)
    } else if let Some(path) = &a.channel {
        let ch = formats::read_channel(path).map_err(Failure::input)?;
        commands::scan_channel(&ch, &grid, a.samples, seed)
    } else {
        return Err(Failure::input("scan needs --family, --state or --channel"));
    }
    .map_err(Failure::numeric)?;
    let text = match a.format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|r| {
                    let obj = table.header.iter().zip(r).map(|(h, c)| {
                        let v = match c {
                            crate::output::Cell::Num(x) => serde_json::json!(x),
                            crate::output::Cell::Text(s) => serde_json::json!(s),
                        };
                        (h.clone(), v)
                    });
                    serde_json::Value::Object(obj.collect())
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
        }
    };
    write_out(a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn random(a: RandomArgs) -> Result<i32, Failure> {
    if a.dims.is_empty() || a.dims.contains(&0) {
        return Err(Failure::input(format!("--dims: invalid factor dimensions {:?}", a.dims)));
    }
    let kind = match a.kind {
        Kind::HaarPure => RandomKind::HaarPure,
        Kind::GinibreMixed => RandomKind::GinibreMixed,
    };
    let states = (0..a.count)
        .map(|i| random_state(kind, &a.dims, a.rank, &mut instance_rng(a.seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::numeric)?;
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::io(Some(dir), e))?;
            for (i, rho) in states.iter().enumerate() {
                let path = dir.join(format!("state_{i:04}.json"));
                write_out(Some(&path), &(formats::state_to_string(rho) + "\n"))?;
            }
        }
        None => {
            let text: String = states
                .iter()
                .map(|rho| serde_json::to_string(&formats::StateJson::from_state(rho)).expect("states serialize") + "\n")
                .collect();
            write_out(None, &text)?;
        }
    }
    Ok(EXIT_OK)
}
