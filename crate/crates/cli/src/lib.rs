//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use segdesc_core::analysis::Analyzer;
use segdesc_core::io::{bundled, export_hasse, render_report, run_analysis, AnalysisRequest, ProblemDocument, ReportFormat};
use segdesc_core::rational::parse_rational;
use segdesc_core::{Error, Policy, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "segdesc", version, about = "Consistency, robustness and explanation analyses for additive ranking models")]
pub struct Cli {
    /// Strictness margin, e.g. 0.01 or 1/100
    #[arg(long, global = true, value_parser = epsilon_arg)]
    pub epsilon: Option<Rational>,

    /// Suppression of derived inequalities during elimination
    #[arg(long, global = true, value_enum)]
    pub redundancy: Option<Redundancy>,

    #[arg(long, global = true, value_enum, env = "SEGDESC_FORMAT", default_value = "text")]
    pub format: Format,

    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Redundancy {
    None,
    Dup,
    Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Problem document (JSON), CSV table, or a bundled dataset name
    pub file: String,

    /// Preferences file accompanying a CSV table
    #[arg(long)]
    pub preferences: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Consistency verdict with contradiction explanations
    Check {
        #[command(flatten)]
        input: Input,
        /// Enumerate every contradiction instead of stopping at the first
        #[arg(long)]
        explain_all: bool,
    },
    /// Range of every model variable
    Bounds {
        #[command(flatten)]
        input: Input,
    },
    /// Necessary and possible preference relations
    Relations {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        necessary: bool,
        #[arg(long)]
        possible: bool,
        /// Single pair `i,k` by name or 1-based position
        #[arg(long, value_parser = pair_arg)]
        pair: Option<[String; 2]>,
        /// Print the necessary relation's Hasse diagram as Graphviz
        #[arg(long, conflicts_with = "pair")]
        hasse: bool,
    },
    /// Minimal comparison subsets that alone make `i` necessarily preferred to `k`
    Reduct {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = pair_arg)]
        pair: [String; 2],
    },
    /// Maximal comparison subsets under which `i` becomes possibly preferred to `k`
    Construct {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = pair_arg)]
        pair: [String; 2],
    },
    /// Minimal criteria subsets that keep the comparisons consistent
    CriteriaReducts {
        #[command(flatten)]
        input: Input,
    },
    /// Full labelled elimination system
    Trace {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        explain_all: bool,
    },
    /// Start the HTTP service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Session snapshot file, loaded at start and written on shutdown
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

fn epsilon_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn pair_arg(s: &str) -> Result<[String; 2], String> {
    match s.split_once(',') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => Ok([a.trim().into(), b.trim().into()]),
        _ => Err(format!("expected `i,k`, got `{s}`")),
    }
}

/// Reads a problem from disk, falling back to the bundled datasets.
pub fn load_document(input: &Input) -> Result<ProblemDocument, Error> {
    let path = Path::new(&input.file);
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| Error::Parse { location: p.display().to_string(), message: e.to_string() })
    };
    if !path.exists() {
        return match bundled(&input.file) {
            Some(text) => ProblemDocument::from_json(text),
            None => Err(Error::Parse { location: input.file.clone(), message: "no such file or bundled dataset".into() }),
        };
    }
    let text = read(path)?;
    match &input.preferences {
        Some(prefs) => ProblemDocument::from_csv(&text, &read(prefs)?),
        None if path.extension().is_some_and(|e| e == "csv") => Err(Error::Parse {
            location: input.file.clone(),
            message: "a CSV table needs --preferences".into(),
        }),
        None => ProblemDocument::from_json(&text),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Inconsistent
        | Error::Contradictory
        | Error::RelationNotNecessary(..)
        | Error::RelationAlreadyPossible(..) => EXIT_INFEASIBLE,
        _ => EXIT_USAGE,
    }
}

fn policy(r: Redundancy) -> Policy {
    match r {
        Redundancy::None => Policy::KeepAll,
        Redundancy::Dup => Policy::DropDuplicates,
        Redundancy::Bounds => Policy::BoundsMethod,
    }
}

/// Builds the analyzer for a subcommand's input with the global overrides.
pub fn analyzer(cli: &Cli, input: &Input) -> Result<Analyzer, Error> {
    let mut doc = load_document(input)?;
    if let Some(e) = &cli.epsilon {
        doc.epsilon = e.clone();
    }
    Analyzer::with_policy(&doc.to_problem()?, cli.redundancy.map(policy))
}

/// Report bytes for an analysis subcommand; `None` for `serve`.
pub fn execute(cli: &Cli) -> Result<Option<Vec<u8>>, Error> {
    let format = match cli.format {
        Format::Text => ReportFormat::Text,
        Format::Json => ReportFormat::Structured,
    };
    let (input, request) = match &cli.command {
        Command::Serve { .. } => return Ok(None),
        Command::Relations { input, hasse: true, .. } => {
            let m = analyzer(cli, input)?.relation_matrices()?;
            return Ok(Some(export_hasse(&m).into_bytes()));
        }
        Command::Check { input, explain_all } => (input, AnalysisRequest::Check { explain_all: *explain_all }),
        Command::Bounds { input } => (input, AnalysisRequest::Bounds),
        Command::Relations { input, necessary, possible, pair, .. } => (
            input,
            AnalysisRequest::Relations { necessary: *necessary, possible: *possible, pair: pair.clone() },
        ),
        Command::Reduct { input, pair } => (input, AnalysisRequest::Reduct { pair: pair.clone() }),
        Command::Construct { input, pair } => (input, AnalysisRequest::Construct { pair: pair.clone() }),
        Command::CriteriaReducts { input } => (input, AnalysisRequest::CriteriaReducts),
        Command::Trace { input, explain_all } => (input, AnalysisRequest::Trace { explain_all: *explain_all }),
    };
    let report = run_analysis(&analyzer(cli, input)?, &request)?;
    Ok(Some(render_report(&report, format)))
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    if let Command::Serve { port, snapshot } = &cli.command {
        let options = segdesc_service::ServeOptions { port: *port, snapshot: snapshot.clone() };
        return match segdesc_service::run(options) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_USAGE
            }
        };
    }
    let bytes = match execute(&cli) {
        Ok(Some(b)) => b,
        Ok(None) => return EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.output {
        Some(p) => std::fs::write(p, &bytes),
        None => stdout.write_all(&bytes),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cli_main(std::iter::once("segdesc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn pair_argument() {
        assert_eq!(pair_arg("a14, a1").unwrap(), ["a14".to_string(), "a1".to_string()]);
        assert!(pair_arg("a14").is_err());
        assert!(pair_arg(",a1").is_err());
    }

    #[test]
    fn bogus_epsilon_is_a_usage_error() {
        let (code, _, err) = run(&["check", "sales-manager", "--epsilon", "bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--epsilon"));
    }

    #[test]
    fn unknown_subcommand_prints_usage() {
        let (code, _, err) = run(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn inconsistent_input_fails_analyses_that_need_feasibility() {
        let (code, _, err) = run(&["bounds", "sales-manager-iter1"]);
        assert_eq!(code, EXIT_INFEASIBLE);
        assert!(err.contains("inconsistent"));
        let (code, out, _) = run(&["check", "sales-manager-iter1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("verdict: infeasible"));
    }

    #[test]
    fn bounds_policy_cannot_enumerate() {
        let (code, _, err) = run(&["check", "sales-manager-iter1", "--explain-all", "--redundancy", "bounds"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("BOUNDS_METHOD"));
    }
}
