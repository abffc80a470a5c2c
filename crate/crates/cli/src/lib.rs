//! Command-line surface: argument types, dispatch, and the `verify` battery.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use necklace_core::fibration::{euler_number, fibration_data, identity_checks, is_fibred, Fibred};
use necklace_core::minkowski::form;
use necklace_core::necklace::{build_config, gram_coefficient, ppt_check, region_membership};
use necklace_core::oracle::{
    euler_via_angle_tracking, ideal_point_on_corner, solve_system64, trace_string, write_samples_csv, OracleConfig,
};
use necklace_core::report::{self, parse_ratio, write_certificate, write_certificates, Format};
use necklace_core::scalar::{Precision, Real, DEFAULT_START_BITS};
use necklace_core::search::{certify_bundle, enumerate, solve_system, BundleCertificate, CertifyOptions};
use necklace_core::Error;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNCERTIFIED: i32 = 3;

/// Residual below which a traced string counts as closed.
pub const CLOSURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "necklace", version, about = "Certified right-angled necklace polyhedra and their disc bundles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify one triple and print its certificate.
    Check(TripleArgs),
    /// Certify every triple up to a bound.
    Search(SearchArgs),
    /// Trace a string and the rotation angle along the deformation path.
    Trace(TraceArgs),
    /// Run the full identity battery and oracle cross-checks for one triple.
    Verify(TripleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Starting working precision; doubled on undecided comparisons up to 1024.
    #[arg(long, env = "NECKLACE_PRECISION_BITS", default_value_t = DEFAULT_START_BITS)]
    pub precision_bits: u32,
    /// Oracle samples along the path (default 16 n).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TripleArgs {
    #[arg(long)]
    pub k: i64,
    #[arg(long)]
    pub m: i64,
    #[arg(long)]
    pub n: i64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Largest even n to enumerate (at least 8).
    #[arg(long)]
    pub n_max: i64,
    /// Keep only feasible triples with this ratio, written `p/q`.
    #[arg(long)]
    pub ratio_filter: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub k: i64,
    #[arg(long)]
    pub m: i64,
    #[arg(long)]
    pub n: i64,
    /// Trace at this point instead of the solution (requires --x2).
    #[arg(long, requires = "x2")]
    pub x1: Option<f64>,
    #[arg(long, requires = "x1")]
    pub x2: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
    #[error("invalid argument: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Domain(_)) => EXIT_USAGE,
            CliError::Core(Error::Undecided(_)) => EXIT_UNCERTIFIED,
            _ => EXIT_FAILURE,
        }
    }
}

impl CommonArgs {
    fn options(&self, oracle: bool) -> CertifyOptions {
        CertifyOptions {
            policy: Precision::starting_at(self.precision_bits),
            oracle,
            samples: self.samples,
        }
    }

    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    fn sink<'a>(&self, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
        Ok(match &self.output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(stdout),
        })
    }

    fn check_samples(&self, n: i64) -> Result<(), CliError> {
        match self.samples {
            Some(s) if s < 16 * n as usize => Err(CliError::Usage(format!("--samples must be at least 16 n = {}", 16 * n))),
            _ => Ok(()),
        }
    }
}

/// Runs one command, writing artifacts to `stdout` or `--output`, and returns the exit status.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Check(a) => {
            a.common.check_samples(a.n)?;
            let cert = certify_bundle(a.k, a.m, a.n, a.common.options(true))?;
            let mut out = a.common.sink(stdout)?;
            write_certificate(&cert, a.common.format.into(), &mut out)?;
            out.flush()?;
            Ok(if cert.certified { EXIT_OK } else { EXIT_UNCERTIFIED })
        }
        Command::Search(a) => {
            let filter = a
                .ratio_filter
                .as_deref()
                .map(parse_ratio)
                .transpose()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            a.common.check_samples(a.n_max)?;
            let certs = enumerate(a.n_max, filter, a.common.options(true), a.common.workers())?;
            let mut out = a.common.sink(stdout)?;
            write_certificates(&certs, a.common.format.into(), &mut out)?;
            out.flush()?;
            Ok(if certs.iter().all(|c| c.certified) { EXIT_OK } else { EXIT_UNCERTIFIED })
        }
        Command::Trace(a) => {
            a.common.check_samples(a.n)?;
            let report = trace(a)?;
            let mut out = a.common.sink(stdout)?;
            match a.common.format {
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut out, &report.summary).map_err(|e| Error::Output(e.to_string()))?;
                    writeln!(out)?;
                }
                OutputFormat::Csv => write_samples_csv(&report.samples, &mut out)?,
            }
            out.flush()?;
            Ok(EXIT_OK)
        }
        Command::Verify(a) => {
            a.common.check_samples(a.n)?;
            let battery = verify(a.k, a.m, a.n, a.common.options(true))?;
            let mut out = a.common.sink(stdout)?;
            match a.common.format {
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut out, &battery).map_err(|e| Error::Output(e.to_string()))?;
                    writeln!(out)?;
                }
                OutputFormat::Csv => {
                    writeln!(out, "check,passed")?;
                    for c in &battery.checks {
                        writeln!(out, "\"{}\",{}", c.name.replace('"', "\"\""), c.passed)?;
                    }
                }
            }
            out.flush()?;
            Ok(if battery.passed { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub k: i64,
    pub m: i64,
    pub n: i64,
    pub x1: f64,
    pub x2: f64,
    pub steps: usize,
    pub closure_residual: f64,
    pub closed: bool,
    pub oracle_euler: i64,
}

pub struct TraceReport {
    pub summary: TraceSummary,
    pub samples: Vec<necklace_core::oracle::TrackSample>,
}

pub fn trace(a: &TraceArgs) -> Result<TraceReport, CliError> {
    necklace_core::necklace::validate_triple(a.k, a.m, a.n)?;
    let (x1, x2) = match (a.x1, a.x2) {
        (Some(x1), Some(x2)) => (x1, x2),
        _ => solve_system64(a.k, a.m, a.n)?,
    };
    let cfg = OracleConfig::new(a.k, a.m, a.n, x1, x2)?;
    let q0 = ideal_point_on_corner(&cfg, 0)?;
    let string = trace_string(&cfg, &q0);
    let samples = a.common.samples.unwrap_or(16 * a.n as usize);
    let tracking = euler_via_angle_tracking(a.k, a.m, a.n, (x1, x2), samples)?;
    Ok(TraceReport {
        summary: TraceSummary {
            k: a.k,
            m: a.m,
            n: a.n,
            x1,
            x2,
            steps: string.steps,
            closure_residual: string.closure_residual,
            closed: string.closure_residual < CLOSURE_TOLERANCE,
            oracle_euler: tracking.count,
        },
        samples: tracking.samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub k: i64,
    pub m: i64,
    pub n: i64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Exact identities at the solution, certificate invariants, and agreement
/// with the floating-point oracle.
pub fn verify(k: i64, m: i64, n: i64, opts: CertifyOptions) -> Result<VerifyReport, CliError> {
    let policy = opts.policy;
    let mut checks: Vec<(String, bool)> = Vec::new();
    let cert = certify_bundle(k, m, n, CertifyOptions { oracle: true, ..opts })?;
    checks.push(("certificate is certified".into(), cert.certified));
    checks.push(("triple is feasible".into(), cert.feasible));
    let (x1, x2) = solve_system(k, m, n, policy)?;
    let region = region_membership(k, m, n, &x1, &x2, policy)?;
    checks.push(("solution lies in the open region".into(), region.inside && region.certified));
    if region.inside {
        let cfg = build_config(k, m, n, x1.clone(), x2.clone(), policy)?;
        checks.extend(necklace_identities(&cfg));
        let ppt = ppt_check(&cfg)?;
        checks.push(("<p_i,p_{i+1}> = 0 for all i".into(), ppt.neighbours_orthogonal == Some(true)));
        checks.push(("(tau_{i+1} tau_i)^2 = 1 for all i".into(), ppt.pair_relations == Some(true)));
        let data = fibration_data(&cfg)?;
        checks.extend(identity_checks(&cfg, &data, policy)?);
        checks.push(("rotation cos at the solution is c_k".into(), (&data.cos_a - cfg.c(k)).is_zero()));
        checks.push(("fibred with index k".into(), is_fibred(&cfg, policy)? == Fibred::Exact(k)));
        let euler = euler_number(k, m, n, (&x1, &x2), policy)?;
        checks.push(("Euler number is m - k".into(), euler.value == m - k));
        checks.push(("oracle Euler number agrees".into(), cert.oracle_euler == Some(euler.value)));
        let (fx1, fx2) = solve_system64(k, m, n)?;
        let ocfg = OracleConfig::new(k, m, n, fx1, fx2)?;
        let residual = trace_string(&ocfg, &ideal_point_on_corner(&ocfg, 0)?).closure_residual;
        checks.push(("string closes at the solution".into(), residual < CLOSURE_TOLERANCE));
    }
    checks.extend(certificate_invariants(&cert));
    let checks: Vec<CheckOutcome> = checks.into_iter().map(|(name, passed)| CheckOutcome { name, passed }).collect();
    Ok(VerifyReport {
        k,
        m,
        n,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn necklace_identities(cfg: &necklace_core::necklace::NecklaceConfig) -> Vec<(String, bool)> {
    let n = cfg.n;
    let unit = (0..n).all(|i| (form(cfg.p(i), cfg.p(i)) + Real::one()).is_zero());
    let gram = (0..n).all(|i| (i..n).all(|j| (form(cfg.p(i), cfg.p(j)) - gram_coefficient(cfg, j - i)).is_zero()));
    vec![
        ("r^n = 1".into(), cfg.r.power(n as u32).is_identity()),
        ("r preserves the form".into(), cfg.r.preserves_form()),
        ("<p_i,p_i> + 1 = 0 for all i".into(), unit),
        ("closed-form g_i matches the Gram matrix".into(), gram),
        ("g_1 = 0".into(), cfg.g(1).is_zero()),
    ]
}

fn certificate_invariants(c: &BundleCertificate) -> Vec<(String, bool)> {
    use num_rational::Ratio;
    let n = c.n;
    let mut out = vec![
        ("chi_orbifold = n/4 - n/2 + 1".into(), c.chi_orbifold == Ratio::new(n, 4) - Ratio::new(n, 2) + 1),
        ("chi_manifold = 4 chi_orbifold".into(), Ratio::from_integer(c.chi_manifold) == c.chi_orbifold * 4),
        ("chi_manifold = 2 - 2 genus".into(), c.chi_manifold == 2 - 2 * c.genus),
    ];
    if let Some(ep) = c.e_p {
        out.push(("eM = 4 eP".into(), c.e_m == Some(4 * ep)));
        out.push((
            "ratio = |eM / chi_manifold|".into(),
            c.ratio == Some(Ratio::new((4 * ep).abs(), c.chi_manifold.abs())),
        ));
    }
    let record = report::CertificateRecord::from(c);
    let round_trip = serde_json::to_string(&record)
        .ok()
        .and_then(|s| serde_json::from_str::<report::CertificateRecord>(&s).ok());
    out.push(("certificate survives a JSON round trip".into(), round_trip.as_ref() == Some(&record)));
    out
}
