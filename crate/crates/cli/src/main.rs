#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod input;
mod report;

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use expsum::roots::DEFAULT_TOLERANCE;
use expsum::sync::pairs_from_split;
use expsum::{
    add_strong_terms, analyze, claim_check, irr_evaluate, irr_solve, pick_sync_point,
    split_shared_mi, sync_at_point, AdjustSide, ClaimConfig, ExpSum, ExpTerm, PointKind,
    ResidualSide,
};

use input::{parse_terms, parse_window, InputDocument, Subject};
use report::{emit_csv, Report, ReportDocument, SyncReport};

/// Largest number of rows `sample` will produce.
const MAX_SAMPLES: usize = 10_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "expsum",
    version,
    about = "Roots, pair functions and IRR for sums of exponentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Roots, extrema, inflections and asymptotes of a sum.
    Analyze {
        input: PathBuf,
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Synchronize the pairs found in a sum at one characteristic point.
    Sync {
        input: PathBuf,
        #[arg(long, value_parser = parse_point)]
        point: PointKind,
        /// Sync point; by default the one leaving only pi residuals.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<f64>,
        /// Which coefficient of each pair is rewritten.
        #[arg(long, value_enum, default_value_t = Side::Pi)]
        side: Side,
        /// Amount held back from the pi coefficient before it is split.
        #[arg(long, default_value_t = 0.0)]
        d: f64,
    },
    /// Split the one negative term of a sum among its positive terms.
    Split {
        input: PathBuf,
        #[arg(long, value_parser = parse_point)]
        point: PointKind,
        /// Strong terms to add afterwards, as `c:t,c:t`.
        #[arg(long, allow_hyphen_values = true)]
        strong: Option<String>,
    },
    /// Every rate solving a cash-flow schedule's IRR equation.
    Irr {
        input: PathBuf,
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Measure the published root and extremum bounds on random or given sums.
    Claimcheck {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Falls back to the input's seed, then EXPSUM_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_terms: Option<u64>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate a sum (or a schedule's E(R)) on a grid, as CSV.
    Sample {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        derivative: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Pi,
    Mi,
}

fn parse_point(text: &str) -> Result<PointKind, String> {
    match text {
        "zero" => Ok(PointKind::Zero),
        "extremum" => Ok(PointKind::Extremum),
        "inflection" => Ok(PointKind::Inflection),
        other => other
            .parse::<u32>()
            .map(PointKind::from_order)
            .map_err(|_| {
                format!("expected zero, extremum, inflection or a derivative order, got {other:?}")
            }),
    }
}

#[derive(Debug)]
enum CliError {
    /// Unreadable or malformed input, or flags that make no sense together.
    Input(String),
    /// The mathematics refused the input.
    Math(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Math(_) => 3,
        }
    }

    fn math(e: impl std::fmt::Display) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<input::InputError> for CliError {
    fn from(e: input::InputError) -> Self {
        CliError::Input(e.0)
    }
}

fn read_input(path: &Path) -> Result<(String, InputDocument), CliError> {
    let source = path.display().to_string();
    let text = if path == Path::new("-") {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Input(format!("<stdin>: {e}")))?;
        text
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{source}: {e}")))?
    };
    let doc = InputDocument::parse(&source, &text)?;
    Ok((source, doc))
}

fn tolerance(flag: Option<f64>, doc: Option<&InputDocument>) -> Result<f64, CliError> {
    let tol = flag
        .or_else(|| doc.and_then(|d| d.tol))
        .unwrap_or(DEFAULT_TOLERANCE);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Input(format!("--tol {tol} must be positive")));
    }
    Ok(tol)
}

fn document(doc: InputDocument, report: Report) -> Result<String, CliError> {
    ReportDocument::new(Some(doc), report)
        .to_json()
        .map_err(CliError::math)
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Analyze { input, window, tol } => {
            let (source, doc) = read_input(&input)?;
            let sum = match doc.subject(&source)? {
                Subject::Sum(s) => s,
                Subject::Schedule(s) => expsum::schedule_to_expsum(&s).map_err(CliError::math)?,
            };
            let tol = tolerance(tol, Some(&doc))?;
            let report = analyze(&sum, window.or(doc.window()), tol).map_err(CliError::math)?;
            document(doc, Report::Analyze(report))
        }
        Command::Sync {
            input,
            point,
            at,
            side,
            d,
        } => {
            let (source, doc) = read_input(&input)?;
            let sum = doc.sum(&source)?;
            let report = synchronize(&sum, point, at, side, d)?;
            document(doc, Report::Sync(report))
        }
        Command::Split {
            input,
            point,
            strong,
        } => {
            let (source, doc) = read_input(&input)?;
            let sum = doc.sum(&source)?;
            let strong = match strong {
                Some(text) => parse_terms(&text)
                    .map_err(|e| CliError::Input(format!("--strong: {e}")))?
                    .into_iter()
                    .map(|(c, t)| ExpTerm::new(c, t))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Input(format!("--strong: {e}")))?,
                None => Vec::new(),
            };
            let (negative, positive): (Vec<ExpTerm<f64>>, Vec<ExpTerm<f64>>) =
                sum.terms().iter().partition(|t| t.coefficient() < 0.0);
            let [mi] = negative[..] else {
                return Err(CliError::Math(format!(
                    "split needs exactly one negative term, found {}",
                    negative.len()
                )));
            };
            let mut result = split_shared_mi(&positive, mi, point).map_err(CliError::math)?;
            if !strong.is_empty() {
                result = add_strong_terms(&result, &strong, point).map_err(CliError::math)?;
            }
            document(doc, Report::Split(result))
        }
        Command::Irr { input, window, tol } => {
            let (source, doc) = read_input(&input)?;
            let schedule = doc.schedule(&source)?;
            let tol = tolerance(tol, Some(&doc))?;
            let solution =
                irr_solve(&schedule, window.or(doc.window()), tol).map_err(CliError::math)?;
            document(doc, Report::Irr(solution))
        }
        Command::Claimcheck {
            trials,
            seed,
            max_terms,
            input,
            tol,
        } => {
            let doc = match input {
                Some(path) => {
                    let (source, doc) = read_input(&path)?;
                    Some((doc.sum(&source)?, doc))
                }
                None => None,
            };
            let mut config = ClaimConfig::<f64> {
                trials: trials as usize,
                tol: tolerance(tol, doc.as_ref().map(|d| &d.1))?,
                ..ClaimConfig::default()
            };
            config.seed = match seed.or_else(|| doc.as_ref().and_then(|d| d.1.seed)) {
                Some(s) => s,
                None => env_seed()?,
            };
            if let Some(m) = max_terms {
                config.generator.max_terms = m as usize;
                config.generator.min_terms = config.generator.min_terms.min(m as usize);
            }
            let input = doc.map(|(sum, doc)| {
                config.instances = vec![sum];
                config.window = doc.window();
                doc
            });
            let reports = claim_check(&config);
            ReportDocument::new(input, Report::Claimcheck(reports))
                .to_json()
                .map_err(CliError::math)
        }
        Command::Sample {
            input,
            from,
            to,
            step,
            derivative,
        } => {
            let (source, doc) = read_input(&input)?;
            let grid = grid(from, to, step)?;
            let samples = match doc.subject(&source)? {
                Subject::Sum(sum) => {
                    let d = sum.derivative(derivative);
                    grid.into_iter()
                        .map(|k| d.evaluate(k).map(|v| (k, v)))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(CliError::math)?
                }
                Subject::Schedule(s) => {
                    if derivative != 0 {
                        return Err(CliError::Input(
                            "--derivative applies to sums, not schedules".into(),
                        ));
                    }
                    grid.into_iter()
                        .map(|r| irr_evaluate(&s, r).map(|v| (r, v)))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(CliError::math)?
                }
            };
            Ok(emit_csv(&samples))
        }
    }
}

fn env_seed() -> Result<u64, CliError> {
    match std::env::var("EXPSUM_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|e| CliError::Input(format!("EXPSUM_SEED={text:?}: {e}"))),
        Err(_) => Ok(0),
    }
}

/// `from, from + step, ...` up to `to`.
fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite()) || from > to {
        return Err(CliError::Input(format!(
            "--from {from} --to {to} must be finite with from <= to"
        )));
    }
    if from == to {
        return Ok(vec![from]);
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Input(format!("--step {step} must be positive")));
    }
    let intervals = ((to - from) / step * (1.0 + 1e-12)).floor();
    if !(intervals < MAX_SAMPLES as f64) {
        return Err(CliError::Input(format!(
            "--step {step} gives more than {MAX_SAMPLES} samples"
        )));
    }
    Ok((0..=intervals as usize)
        .map(|i| from + step * i as f64)
        .collect())
}

/// Pairs the largest-base positive term with every negative term of smaller
/// base (high pairs); failing that, the smallest-base positive term with
/// every negative term of larger base (low pairs). Other terms are left
/// unpaired.
fn synchronize(
    sum: &ExpSum<f64>,
    point: PointKind,
    at: Option<f64>,
    side: Side,
    d: f64,
) -> Result<SyncReport, CliError> {
    let terms = sum.terms();
    let positive = |i: &usize| terms[*i].coefficient() > 0.0;
    let high = (0..terms.len()).find(positive).map(|p| {
        let mi: Vec<usize> = (p + 1..terms.len())
            .filter(|&i| terms[i].coefficient() < 0.0)
            .collect();
        (p, mi)
    });
    let low = (0..terms.len()).rev().find(positive).map(|p| {
        let mi: Vec<usize> = (0..p).filter(|&i| terms[i].coefficient() < 0.0).collect();
        (p, mi)
    });
    let (pi, mi) = high
        .filter(|(_, mi)| !mi.is_empty())
        .or(low.filter(|(_, mi)| !mi.is_empty()))
        .ok_or_else(|| {
            CliError::Math("no positive term has a negative term to pair with".into())
        })?;
    let mi_terms: Vec<ExpTerm<f64>> = mi.iter().map(|&i| terms[i]).collect();
    let pairs = pairs_from_split(terms[pi], &mi_terms, d).map_err(CliError::math)?;
    let k0 = match at {
        Some(k) => k,
        None => {
            pick_sync_point(&pairs, point, ResidualSide::PiResiduals).map_err(CliError::math)?
        }
    };
    let adjust = match side {
        Side::Pi => AdjustSide::PiSide,
        Side::Mi => AdjustSide::MiSide,
    };
    let result = sync_at_point(&pairs, point, k0, adjust).map_err(CliError::math)?;
    let unpaired = (0..terms.len())
        .filter(|i| *i != pi && !mi.contains(i))
        .map(|i| terms[i])
        .collect();
    Ok(SyncReport {
        pairs,
        unpaired,
        result,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(text) => {
            let mut out = io::stdout().lock();
            if out
                .write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (CliError::Input(msg) | CliError::Math(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
