//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::ser::Formatter;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::family::FamilyId;
use crate::oracle::{brute_enumerate, verify_bijection, verify_sampler};
use crate::pat::{pat, pat_generic};
use crate::perm::Permutation;
use crate::rng::stream;
use crate::stats::{clt_sample, gamma_sq, limit_order_restriction, normality_report};
use crate::tree::{format_jumps, parse_jumps};
use crate::walk::{solve_pq, PermutationSampler, SamplerKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Fast,
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerArg {
    Cycle,
    Rejection,
}

impl From<SamplerArg> for SamplerKind {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Cycle => SamplerKind::Cycle,
            SamplerArg::Rejection => SamplerKind::Rejection,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gentree", version, about = "Generating trees, conditioned walks and pattern statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Family identifier, e.g. av123 or av1423-4123.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Permutation size.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Number of replicates.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Number of Monte-Carlo trials.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Pattern in one-line notation.
    #[arg(long, global = true)]
    pub pattern: Option<String>,
    /// Colored jumps, e.g. "-2,+1B,+1T".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub jumps: Option<String>,
    /// Truncation depth for jump sums.
    #[arg(long, global = true, default_value_t = 40)]
    pub truncation: i64,
    /// Base seed; falls back to GENTREE_SEED, then 0.
    #[arg(long, global = true, env = "GENTREE_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Members or level counts of a family.
    Enumerate,
    /// Uniform random permutations, one per line.
    Sample {
        #[arg(long, value_enum, default_value_t = SamplerArg::Cycle)]
        sampler: SamplerArg,
    },
    /// Tilted step law of the family.
    SolvePq,
    /// Pattern induced by a tuple of colored jumps.
    Pat {
        #[arg(long, value_enum, default_value_t = Route::Fast)]
        route: Route,
    },
    /// Probability that i.i.d. jumps induce the pattern.
    Mu,
    /// All limit-theorem constants of the pattern.
    Gamma,
    /// Normalized pattern counts of uniform permutations.
    CltCheck,
    /// Pattern law of the limiting rooted order around the root.
    LimitOrder {
        #[arg(long, default_value_t = 1)]
        radius: usize,
    },
    /// Bijection and sampler checks against brute-force enumeration.
    Verify {
        #[arg(long, value_enum, default_value_t = SamplerArg::Cycle)]
        sampler: SamplerArg,
    },
}

/// Everything that determines the primary output.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub family: Option<FamilyId>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub trials: Option<u64>,
    pub pattern: Option<Permutation>,
    pub jumps: Option<String>,
    pub truncation: i64,
    pub seed: u64,
    pub format: Format,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let family = cli.family.as_deref().map(str::parse).transpose()?;
        let pattern = cli.pattern.as_deref().map(str::parse).transpose()?;
        let format = cli.format.unwrap_or(match cli.command {
            Command::Enumerate | Command::Sample { .. } | Command::Pat { .. } => Format::Text,
            Command::LimitOrder { .. } => Format::Csv,
            _ => Format::Json,
        });
        Ok(RunConfig {
            command: cli.command.clone(),
            family,
            n: cli.n,
            reps: cli.reps,
            trials: cli.trials,
            pattern,
            jumps: cli.jumps.clone(),
            truncation: cli.truncation,
            seed: cli.seed.unwrap_or(0),
            format,
        })
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn family(&self) -> Result<FamilyId> {
        self.family.ok_or_else(|| Error::Config("--family is required".into()))
    }

    fn n(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::Config("--n is required".into()))
    }

    fn pattern(&self) -> Result<&Permutation> {
        self.pattern.as_ref().ok_or_else(|| Error::Config("--pattern is required".into()))
    }
}

/// JSON numbers with 17 significant digits.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_sig17(value).as_bytes())
    }
}

/// Decimal form with 17 significant digits, in scientific notation when
/// the exponent is outside `[-5, 16]`.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=16).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).expect("value serializes");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: String,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: Meta<'a>,
    result: T,
}

/// Output being assembled, with its format.
enum Output {
    Json(String),
    Lines(String),
}

fn meta(cfg: &RunConfig) -> Meta<'_> {
    Meta { tool: "gentree", version: VERSION, config_hash: cfg.hash(), config: cfg }
}

fn json<T: Serialize>(cfg: &RunConfig, result: T) -> Output {
    let mut s = to_json(&Envelope { meta: meta(cfg), result });
    s.push('\n');
    Output::Json(s)
}

fn text_header(cfg: &RunConfig) -> String {
    format!("# gentree {VERSION} config {}\n", cfg.hash())
}

/// Parses `argv` and runs the command, returning the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return 0;
                }
                _ => 1,
            };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    if let Some(t) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let cfg = RunConfig::from_cli(cli)?;
    let (out, side) = dispatch(&cfg, cli)?;
    let body = match out {
        Output::Json(s) => s,
        Output::Lines(s) if cli.out.is_some() => text_header(&cfg) + &s,
        Output::Lines(s) => s,
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, body)?;
            if let Some(extra) = side {
                stdout.write_all(extra.as_bytes())?;
            }
        }
        None => {
            stdout.write_all(body.as_bytes())?;
            if let Some(extra) = side {
                stdout.write_all(extra.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Primary output plus an optional report that always goes to standard
/// output.
fn dispatch(cfg: &RunConfig, cli: &Cli) -> Result<(Output, Option<String>)> {
    match &cfg.command {
        Command::Enumerate => enumerate(cfg).map(|o| (o, None)),
        Command::Sample { sampler } => sample(cfg, (*sampler).into()).map(|o| (o, None)),
        Command::SolvePq => solve(cfg).map(|o| (o, None)),
        Command::Pat { route } => pattern_of_jumps(cfg, *route).map(|o| (o, None)),
        Command::Mu | Command::Gamma => {
            let w = solve_pq(cfg.family()?.spec())?;
            let stats = gamma_sq(&w, cfg.pattern()?, cfg.truncation)?;
            Ok((json(cfg, stats), None))
        }
        Command::CltCheck => clt_check(cfg, cli),
        Command::LimitOrder { radius } => limit_order(cfg, *radius).map(|o| (o, None)),
        Command::Verify { sampler } => verify(cfg, (*sampler).into()).map(|o| (o, None)),
    }
}

fn enumerate(cfg: &RunConfig) -> Result<Output> {
    let n = cfg.n()?;
    let families: Vec<FamilyId> = match cfg.family {
        Some(f) => vec![f],
        None => FamilyId::ALL.to_vec(),
    };
    match cfg.format {
        Format::Csv => {
            let mut s = String::from("n,family,count\n");
            for size in 1..=n {
                for &f in &families {
                    let _ = writeln!(s, "{size},{f},{}", brute_enumerate(f.spec(), size)?.count);
                }
            }
            Ok(Output::Lines(s))
        }
        Format::Text => Ok(Output::Lines(brute_enumerate(cfg.family()?.spec(), n)?.to_lines())),
        Format::Json => Ok(json(cfg, brute_enumerate(cfg.family()?.spec(), n)?)),
    }
}

fn sample(cfg: &RunConfig, kind: SamplerKind) -> Result<Output> {
    let family = cfg.family()?;
    let n = cfg.n()?;
    let reps = cfg.reps.unwrap_or(1);
    let sampler = PermutationSampler::with_kind(family, n, kind)?;
    let mut s = String::new();
    for r in 0..reps as u64 {
        let mut rng = stream(cfg.seed, r);
        let _ = writeln!(s, "{}", sampler.sample(&mut rng)?);
    }
    match cfg.format {
        Format::Json => {
            let perms: Vec<&str> = s.lines().collect();
            Ok(json(cfg, perms))
        }
        _ => Ok(Output::Lines(s)),
    }
}

fn solve(cfg: &RunConfig) -> Result<Output> {
    let w = solve_pq(cfg.family()?.spec())?;
    let table = w.table(1e-17);
    match cfg.format {
        Format::Csv | Format::Text => {
            let mut s = String::from("y,alpha,colors\n");
            for (&(y, a), &(_, c)) in table.alpha.iter().zip(&table.colors) {
                let _ = writeln!(s, "{y},{},{c}", format_sig17(a));
            }
            Ok(Output::Lines(s))
        }
        Format::Json => Ok(json(cfg, table)),
    }
}

#[derive(Serialize)]
struct PatResult {
    jumps: String,
    pattern: Permutation,
    route: Route,
}

fn pattern_of_jumps(cfg: &RunConfig, route: Route) -> Result<Output> {
    let spec = cfg.family()?.spec();
    let raw = cfg.jumps.as_deref().ok_or_else(|| Error::Config("--jumps is required".into()))?;
    let js = parse_jumps(raw)?;
    let p = match route {
        Route::Fast => pat(spec, &js)?,
        Route::Generic => pat_generic(spec, &js)?,
    };
    match cfg.format {
        Format::Json => Ok(json(cfg, PatResult { jumps: format_jumps(&js), pattern: p, route })),
        _ => Ok(Output::Lines(format!("{p}\n"))),
    }
}

fn clt_check(cfg: &RunConfig, cli: &Cli) -> Result<(Output, Option<String>)> {
    let family = cfg.family()?;
    let pi = cfg.pattern()?;
    let n = cfg.n()?;
    let reps = cfg.reps.unwrap_or(1000);
    let w = solve_pq(family.spec())?;
    let stats = gamma_sq(&w, pi, cfg.truncation)?;
    let values = clt_sample(family, pi, n, reps, stats.mu.mid(), cfg.seed)?;
    let report = normality_report(family, pi, n, stats.mu.mid(), stats.gamma2.mid(), &values, cfg.seed);
    let mut csv = String::from("rep,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(csv, "{i},{}", format_sig17(*v));
    }
    #[derive(Serialize)]
    struct Report<'a> {
        report: &'a crate::stats::NormalityReport,
        stats: &'a crate::stats::PatternStats,
    }
    let Output::Json(rep) = json(cfg, Report { report: &report, stats: &stats }) else {
        unreachable!()
    };
    if cli.out.is_some() {
        Ok((Output::Lines(csv), Some(rep)))
    } else {
        Ok((Output::Json(rep), None))
    }
}

fn limit_order(cfg: &RunConfig, radius: usize) -> Result<Output> {
    let w = solve_pq(cfg.family()?.spec())?;
    let trials = cfg.trials.unwrap_or(100_000);
    let pmf = limit_order_restriction(&w, radius, trials, cfg.seed)?;
    match cfg.format {
        Format::Json => {
            let rows: Vec<(String, f64)> = pmf.iter().map(|(p, &q)| (p.to_string(), q)).collect();
            Ok(json(cfg, rows))
        }
        _ => {
            let mut s = String::from("pattern,probability\n");
            for (p, q) in &pmf {
                let _ = writeln!(s, "{p},{}", format_sig17(*q));
            }
            Ok(Output::Lines(s))
        }
    }
}

#[derive(Serialize)]
struct VerifyResult {
    bijection: crate::oracle::BijectionReport,
    sampler: Option<crate::oracle::ChiSquareReport>,
    passed: bool,
}

fn verify(cfg: &RunConfig, kind: SamplerKind) -> Result<Output> {
    let family = cfg.family()?;
    let n = cfg.n()?;
    let bijection = verify_bijection(family.spec(), n)?;
    let sampler = match cfg.trials {
        Some(t) => Some(verify_sampler(family, n, t, kind, cfg.seed)?),
        None => None,
    };
    let passed = bijection.passed && sampler.as_ref().is_none_or(|s| s.p_value > 0.01);
    let counterexample = bijection.counterexample.clone();
    let out = json(cfg, VerifyResult { bijection, sampler, passed });
    if !passed {
        return Err(Error::Inconsistent {
            index: 0,
            reason: counterexample.unwrap_or_else(|| "sampler chi-square p-value below 0.01".into()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("gentree").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn worked_example_pattern() {
        let (code, out, _) = run_str(&["pat", "--family", "av1423-4123", "--jumps", "-2,+1B,+1B,+1T,+1T,-7"]);
        assert_eq!(code, 0);
        assert_eq!(out, "421563\n");
    }

    #[test]
    fn trivial_samples() {
        let (code, out, _) = run_str(&["sample", "--family", "av123", "--n", "1", "--reps", "3", "--seed", "7"]);
        assert_eq!(code, 0);
        assert_eq!(out, "1\n1\n1\n");
    }

    #[test]
    fn error_codes() {
        let (code, _, err) = run_str(&["sample", "--family", "av999", "--n", "3"]);
        assert_eq!(code, 1);
        assert!(err.contains("av999"));
        let (code, _, err) = run_str(&["sample", "--family", "famB", "--n", "3"]);
        assert_eq!(code, 1);
        assert!(err.contains("infeasible"));
        let (code, _, _) = run_str(&["enumerate", "--family", "av123", "--n", "13"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_str(&["frobnicate"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_sig17(0.25), "0.25000000000000000");
        assert_eq!(format_sig17(2.0), "2.0000000000000000");
        assert_eq!(format_sig17(1e-20), "9.9999999999999995e-21");
        assert_eq!(format_sig17(-0.5).parse::<f64>().unwrap(), -0.5);
        let x = std::f64::consts::PI;
        assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn hash_ignores_threads_and_output() {
        let a = Cli::try_parse_from(["g", "sample", "--family", "av123", "--n", "4", "--threads", "1"]).unwrap();
        let b = Cli::try_parse_from(["g", "sample", "--family", "av123", "--n", "4", "--out", "x"]).unwrap();
        let ha = RunConfig::from_cli(&a).unwrap().hash();
        assert_eq!(ha, RunConfig::from_cli(&b).unwrap().hash());
        let c = Cli::try_parse_from(["g", "sample", "--family", "av123", "--n", "5"]).unwrap();
        assert_ne!(ha, RunConfig::from_cli(&c).unwrap().hash());
    }
}
