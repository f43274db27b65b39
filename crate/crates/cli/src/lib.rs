//! Command-line driver: translate FLA programs, check CSP# models, verify the
//! built-in corpus and export it for use with other tools.
//!
//! Exit codes: 0 success, 2 input error, 3 translation error, 4 property
//! violation or unmet corpus expectation, 5 resource limit.

mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use flcsp_core::checker::{CheckError, Checker, ExploreOptions, Outcome, DEFAULT_STATE_LIMIT};
use flcsp_core::corpus::{all_cases, load_case, load_mutants, CorpusCase, ExpectedEffect};
use flcsp_core::cspir::{compare_structural, parse_model, print_model, Assertion, CspModel};
use flcsp_core::translate::{translate_source, PipelineError, TranslationConfig};

pub use report::{ExplorationSummary, RunReport, TranslationStatus, VerdictSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_TRANSLATION: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;
pub const EXIT_RESOURCE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "flcsp", version, about = "Translate FLA programs to CSP# and model-check them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Translate a restricted Python FLA program into a CSP# model.
    Translate(TranslateArgs),
    /// Check the assertions of a CSP# model.
    Check(CheckArgs),
    /// Translate, check and mutate every corpus case against its expectations.
    VerifyCorpus(VerifyCorpusArgs),
    /// Write a corpus case (source, config, golden model, mutants) to a directory.
    Export(ExportArgs),
}

#[derive(Debug, clap::Args)]
struct TranslateArgs {
    /// Python source file.
    input: PathBuf,
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of nodes (overrides `NoNodes`)
    #[arg(long)]
    no_nodes: Option<i64>,
    /// Number of training iterations (overrides `NoIterations`)
    #[arg(long)]
    no_iterations: Option<i64>,
    /// Server node index for centralized programs (overrides `FlSrvId`)
    #[arg(long)]
    fl_srv_id: Option<i64>,
    /// Capacity expression of `nodeChannels` (default `NoNodes-1`).
    #[arg(long)]
    node_channel_capacity: Option<String>,
    /// Extra constant, `NAME=EXPR`.
    #[arg(long = "define", value_name = "NAME=EXPR")]
    defines: Vec<String>,
    /// Channel capacity of a FIFO list, `LIST=EXPR`.
    #[arg(long = "fifo", value_name = "LIST=EXPR")]
    fifos: Vec<String>,
    /// Python name to CSP# constant, `pyName=CspName`.
    #[arg(long = "name", value_name = "PY=CSP")]
    names: Vec<String>,
    /// Name of the system process.
    #[arg(long)]
    system: Option<String>,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AssertFilter {
    All,
    Deadlockfree,
    Reaches,
    Liveness,
}

#[derive(Debug, clap::Args)]
struct CheckArgs {
    /// CSP# model file.
    model: PathBuf,
    /// Which assertions to check
    #[arg(long = "assert", value_enum, default_value = "all")]
    assert: AssertFilter,
    /// Give up after storing this many states
    #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
    state_limit: usize,
    /// Expand components from last to first.
    #[arg(long)]
    reverse: bool,
}

#[derive(Debug, clap::Args)]
struct VerifyCorpusArgs {
    /// Only this case.
    #[arg(long = "case")]
    case: Option<String>,
    /// Give up after storing this many states
    #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
    state_limit: usize,
}

#[derive(Debug, clap::Args)]
struct ExportArgs {
    /// Corpus case: `centralized` or `decentralized`
    case: String,
    /// Directory to write into (created if missing)
    out_dir: PathBuf,
    /// Write into a non-empty directory, replacing files of the same name.
    #[arg(long)]
    force: bool,
}

/// A failure that ends a command with the given exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Translation(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Input(_) => EXIT_INPUT,
            CliError::Translation(_) => EXIT_TRANSLATION,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Translate(a) => cmd_translate(&a, out),
        Command::Check(a) => cmd_check(&a, out),
        Command::VerifyCorpus(a) => {
            let opts = ExploreOptions {
                state_limit: a.state_limit,
                ..Default::default()
            };
            verify_corpus_with(a.case.as_deref(), &opts, &translate_case, out)
        }
        Command::Export(a) => cmd_export(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

/// Configuration text from the file and the flags; flags are appended as
/// `key = value` lines, so a key given both ways is a duplicate.
fn config_text(a: &TranslateArgs) -> Result<String, CliError> {
    let mut text = match &a.config {
        Some(p) => read(p)?,
        None => String::new(),
    };
    text.push('\n');
    let mut line = |k: &str, v: &str| text.push_str(&format!("{k} = {v}\n"));
    if let Some(n) = a.no_nodes {
        line("NoNodes", &n.to_string());
    }
    if let Some(n) = a.no_iterations {
        line("NoIterations", &n.to_string());
    }
    if let Some(n) = a.fl_srv_id {
        line("FlSrvId", &n.to_string());
    }
    if let Some(c) = &a.node_channel_capacity {
        line("NodeChannelCapacity", c);
    }
    if let Some(s) = &a.system {
        line("System", s);
    }
    for (prefix, items) in [("define", &a.defines), ("fifo", &a.fifos), ("name", &a.names)] {
        for item in items {
            let Some((k, v)) = item.split_once('=') else {
                return Err(CliError::Input(format!("--{prefix} expects NAME=VALUE, got `{item}`")));
            };
            line(&format!("{prefix}.{}", k.trim()), v.trim());
        }
    }
    Ok(text)
}

fn cmd_translate(a: &TranslateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let src = read(&a.input)?;
    let cfg = TranslationConfig::parse(&config_text(a)?)
        .map_err(|e| CliError::Translation(format!("config: {e}")))?;
    let model = translate_source(&src, &cfg).map_err(|e| match e {
        PipelineError::Frontend(f) => CliError::Input(format!("{}: {f}", a.input.display())),
        PipelineError::Translate(t) => CliError::Translation(format!("{}: {t}", a.input.display())),
    })?;
    let text = print_model(&model);
    match &a.output {
        Some(p) => {
            write_file(p, &text)?;
            let mut report = RunReport::new("translate", vec![a.input.display().to_string()]);
            report.translation = Some(TranslationStatus {
                ok: true,
                message: Some(format!("wrote {}", p.display())),
            });
            let _ = writeln!(out, "{}", report.to_json());
        }
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

fn selected(model: &CspModel, f: AssertFilter) -> Vec<Assertion> {
    model
        .assertions
        .iter()
        .filter(|a| match f {
            AssertFilter::All => true,
            AssertFilter::Deadlockfree => matches!(a, Assertion::DeadlockFree { .. }),
            AssertFilter::Reaches => matches!(a, Assertion::Reaches { .. }),
            AssertFilter::Liveness => matches!(a, Assertion::AlwaysEventually { .. }),
        })
        .cloned()
        .collect()
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = read(&a.model)?;
    let model = parse_model(&text).map_err(|e| CliError::Input(format!("{}: {e}", a.model.display())))?;
    let assertions = selected(&model, a.assert);
    if assertions.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no matching assertions in the model",
            a.model.display()
        )));
    }
    let opts = ExploreOptions {
        state_limit: a.state_limit,
        reverse_components: a.reverse,
        ..Default::default()
    };
    let mut report = RunReport::new("check", vec![a.model.display().to_string()]);
    let checker = Checker::new(&model).map_err(|e| CliError::Input(format!("{}: {e}", a.model.display())))?;
    match checker.verify(&assertions, &opts) {
        Ok(r) => report.set_results(&r),
        Err(e @ CheckError::StateLimitExceeded { .. }) => report.fail(EXIT_RESOURCE, e.to_string()),
        Err(e) => report.fail(EXIT_INPUT, e.to_string()),
    }
    let _ = writeln!(out, "{}", report.to_json());
    Ok(report.exit_code)
}

/// Translation step of `verify-corpus`; replaceable for testing.
pub type CaseTranslator = dyn Fn(&CorpusCase) -> Result<CspModel, PipelineError>;

fn translate_case(case: &CorpusCase) -> Result<CspModel, PipelineError> {
    translate_source(case.source, &case.config)
}

struct Row {
    case: String,
    item: String,
    expected: String,
    actual: String,
    code: i32,
}

/// Runs `verify-corpus` with `translator` in place of the built-in
/// translation, printing one table row per expectation.
pub fn verify_corpus_with(
    filter: Option<&str>,
    opts: &ExploreOptions,
    translator: &CaseTranslator,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let cases = match filter {
        Some(name) => vec![load_case(name).map_err(|e| CliError::Input(e.to_string()))?],
        None => all_cases(),
    };
    let mut rows = Vec::new();
    let mut mutant_count = 0;
    for case in &cases {
        let row = |item: &str, expected: &str, actual: String, code: i32| Row {
            case: case.name.to_string(),
            item: item.to_string(),
            expected: expected.to_string(),
            actual,
            code,
        };
        let golden = parse_model(case.golden).map_err(|e| CliError::Input(format!("{} golden: {e}", case.name)))?;
        rows.push(match translator(case) {
            Ok(m) => {
                let eq = compare_structural(&m, &golden);
                match eq.first_difference {
                    None => row("translation", "equals golden", "equals golden".into(), EXIT_OK),
                    Some(d) => row("translation", "equals golden", format!("differs at {d}"), EXIT_VIOLATION),
                }
            }
            Err(e) => row("translation", "equals golden", format!("error: {e}"), EXIT_TRANSLATION),
        });

        let checker = Checker::new(&golden).map_err(|e| CliError::Input(e.to_string()))?;
        let assertions: Vec<Assertion> = case.expected_verdicts.iter().map(|(a, _)| a.clone()).collect();
        match checker.verify(&assertions, opts) {
            Ok(r) => {
                for ((a, want), v) in case.expected_verdicts.iter().zip(&r.verdicts) {
                    let ok = v.outcome == *want;
                    rows.push(row(
                        &a.to_string(),
                        outcome_name(*want),
                        format!("{} ({} states)", outcome_name(v.outcome), v.states),
                        if ok { EXIT_OK } else { EXIT_VIOLATION },
                    ));
                }
            }
            Err(e) => rows.push(row("golden assertions", "holds", e.to_string(), code_of(&e))),
        }

        for (spec, (name, text)) in case.mutants.iter().zip(load_mutants(case)) {
            mutant_count += 1;
            let item = format!("mutant {name}");
            let parsed = parse_model(&text);
            rows.push(match (spec.expected_effect, parsed) {
                (ExpectedEffect::ParseError { line }, Err(e)) => {
                    let ok = e.line() == Some(line);
                    row(&item, &format!("parse error at line {line}"), e.to_string(), if ok { EXIT_OK } else { EXIT_VIOLATION })
                }
                (ExpectedEffect::ParseError { line }, Ok(_)) => {
                    row(&item, &format!("parse error at line {line}"), "parses".into(), EXIT_VIOLATION)
                }
                (ExpectedEffect::PropertyViolation, Err(e)) => {
                    row(&item, "violation", format!("parse error: {e}"), EXIT_VIOLATION)
                }
                (ExpectedEffect::PropertyViolation, Ok(m)) => {
                    let (actual, code) = check_mutant(&m, opts);
                    row(&item, "violation", actual, code)
                }
            });
        }
    }

    let width = |f: &dyn Fn(&Row) -> usize, title: &str| rows.iter().map(f).max().unwrap_or(0).max(title.len());
    let wc = width(&|r| r.case.len(), "case");
    let wi = width(&|r| r.item.len(), "item");
    let we = width(&|r| r.expected.len(), "expected");
    let _ = writeln!(out, "{:<wc$}  {:<wi$}  {:<we$}  {:<4}  actual", "case", "item", "expected", "ok");
    for r in &rows {
        let ok = if r.code == EXIT_OK { "yes" } else { "NO" };
        let _ = writeln!(out, "{:<wc$}  {:<wi$}  {:<we$}  {:<4}  {}", r.case, r.item, r.expected, ok, r.actual);
    }
    let failed = rows.iter().filter(|r| r.code != EXIT_OK).count();
    let _ = writeln!(
        out,
        "{} case(s), {} mutant(s), {}",
        cases.len(),
        mutant_count,
        if failed == 0 {
            "all expectations met".to_string()
        } else {
            format!("{failed} expectation(s) not met")
        }
    );
    // Unmet expectations outrank resource limits.
    let code = rows
        .iter()
        .map(|r| r.code)
        .filter(|&c| c != EXIT_OK)
        .min_by_key(|&c| if c == EXIT_RESOURCE { 1 } else { 0 })
        .unwrap_or(EXIT_OK);
    Ok(code)
}

/// Checks a logical mutant: at least one assertion must be violated with a
/// trace that replays.
fn check_mutant(m: &CspModel, opts: &ExploreOptions) -> (String, i32) {
    let checker = match Checker::new(m) {
        Ok(c) => c,
        Err(e) => return (e.to_string(), EXIT_VIOLATION),
    };
    match checker.verify(&m.assertions, opts) {
        Ok(r) => {
            let violated: Vec<String> = r
                .verdicts
                .iter()
                .filter(|v| v.outcome == Outcome::Violated)
                .filter(|v| checker.confirm(v).unwrap_or(false))
                .map(|v| v.assertion.to_string())
                .collect();
            if violated.is_empty() {
                ("no replayable violation".into(), EXIT_VIOLATION)
            } else {
                (format!("violated: {}", violated.join("; ")), EXIT_OK)
            }
        }
        Err(e) => (e.to_string(), code_of(&e)),
    }
}

fn code_of(e: &CheckError) -> i32 {
    match e {
        CheckError::StateLimitExceeded { .. } => EXIT_RESOURCE,
        _ => EXIT_VIOLATION,
    }
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Holds => "holds",
        Outcome::Violated => "violated",
        Outcome::Undecided => "undecided",
    }
}

fn cmd_export(a: &ExportArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let case = load_case(&a.case).map_err(|e| CliError::Input(e.to_string()))?;
    if a.out_dir.exists() {
        let mut entries = fs::read_dir(&a.out_dir).map_err(|source| CliError::Io {
            path: a.out_dir.clone(),
            source,
        })?;
        if entries.next().is_some() && !a.force {
            return Err(CliError::Input(format!(
                "{} is not empty (use --force to write into it)",
                a.out_dir.display()
            )));
        }
    } else {
        fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io {
            path: a.out_dir.clone(),
            source,
        })?;
    }
    let mut files = vec![
        ("source.py".to_string(), case.source.to_string()),
        ("config.cfg".to_string(), case.config_text.to_string()),
        ("golden.csp".to_string(), case.golden.to_string()),
    ];
    for (name, text) in load_mutants(&case) {
        files.push((format!("mutant-{name}.csp"), text));
    }
    for (name, text) in &files {
        let path = a.out_dir.join(name);
        write_file(&path, text)?;
        let _ = writeln!(out, "{}", path.display());
    }
    Ok(EXIT_OK)
}
