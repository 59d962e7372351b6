//! Command-line front end. [`run`] is the whole program; `main` only wires it
//! to the process's streams and exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::ScoringError;
use crate::golden::{golden_records, verify_paper};
use crate::ingest::{load_records, parse_document, Severity, ValidationIssue};
use crate::model::{
    EvaluationRecord, InterpretabilityMode, MissingGroupPolicy, Note, Pillar, ReliabilityReport,
    ScoringPolicy, Weights,
};
use crate::report::{
    render_leaderboard, render_robustness_table, round_display, DisplayFormat, SortOrder,
};
use crate::scoring::{score_all, score_detector};
use crate::sensitivity::{
    compare_missing_policies, default_weight_sets, render_policy_deltas, render_weight_sweep,
    weight_sweep,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "detrel",
    version,
    about = "Four-pillar reliability scores for deepfake detectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score records and print one JSON line per detector.
    Score {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Render the leaderboard or the robustness table.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, value_enum, default_value_t = TableArg::Leaderboard)]
        table: TableArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Markdown)]
        format: FormatArg,
        #[arg(long, value_enum, default_value_t = SortArg::Input)]
        sort: SortArg,
    },
    /// Check record files and list every issue found.
    Validate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Compare missing-group policies or sweep pillar weights.
    Sensitivity {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, value_enum, default_value_t = AnalysisArg::Policies)]
        analysis: AnalysisArg,
        /// Weight set for the sweep, as w1,w2,w3,w4 (repeatable). Defaults to
        /// equal weights followed by each pillar alone.
        #[arg(long = "sweep", value_name = "W1,W2,W3,W4")]
        sweep: Vec<String>,
        #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
        format: FormatArg,
    },
    /// Recompute the embedded reference dataset and compare with the published tables.
    VerifyPaper,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Record file (object or array) or directory of *.json files. Repeatable.
    #[arg(long, value_name = "PATH")]
    input: Vec<PathBuf>,
    /// Use the embedded reference dataset.
    #[arg(long)]
    golden: bool,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    #[arg(long, value_enum, default_value_t = PolicyArg::ZeroFill)]
    policy: PolicyArg,
    /// Pillar weights for T,R,I,E.
    #[arg(long, value_name = "W1,W2,W3,W4")]
    weights: Option<String>,
    /// Reject interpretability values outside their band.
    #[arg(long)]
    strict_interpretability: bool,
    /// Decimal places for displayed values.
    #[arg(long, default_value_t = 2)]
    places: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    ZeroFill,
    Renormalize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Markdown,
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SortArg {
    Input,
    Scg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableArg {
    Leaderboard,
    Robustness,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AnalysisArg {
    Policies,
    Weights,
}

impl From<FormatArg> for DisplayFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Markdown => DisplayFormat::Markdown,
            FormatArg::Csv => DisplayFormat::Csv,
            FormatArg::Jsonl => DisplayFormat::JsonLines,
        }
    }
}

/// Outcome of a command other than success.
enum Failure {
    Usage(String),
    Failed(String),
}

impl PolicyArgs {
    fn to_policy(&self) -> Result<ScoringPolicy, Failure> {
        let weights = match &self.weights {
            Some(s) => Weights::parse(s).map_err(|e| Failure::Usage(e.to_string()))?,
            None => Weights::EQUAL,
        };
        Ok(ScoringPolicy {
            missing_group: match self.policy {
                PolicyArg::ZeroFill => MissingGroupPolicy::ZeroFill,
                PolicyArg::Renormalize => MissingGroupPolicy::Renormalize,
            },
            weights,
            interpretability_mode: if self.strict_interpretability {
                InterpretabilityMode::Strict
            } else {
                InterpretabilityMode::Lenient
            },
            rounding: self.places,
        })
    }
}

impl InputArgs {
    fn check(&self) -> Result<(), Failure> {
        if self.input.is_empty() && !self.golden {
            return Err(Failure::Usage(
                "no input: pass --input PATH or --golden".to_string(),
            ));
        }
        Ok(())
    }

    fn load(&self) -> Result<Vec<EvaluationRecord>, Failure> {
        self.check()?;
        let mut records = if self.golden {
            golden_records()
        } else {
            Vec::new()
        };
        if !self.input.is_empty() {
            let loaded = load_records(&self.input).map_err(|e| Failure::Failed(e.to_string()))?;
            records.extend(loaded);
        }
        if let Some(dup) = first_duplicate(&records) {
            return Err(Failure::Failed(format!(
                "DuplicateDetector: {dup:?} appears more than once"
            )));
        }
        Ok(records)
    }
}

fn first_duplicate(records: &[EvaluationRecord]) -> Option<&str> {
    let mut seen = std::collections::HashSet::new();
    records
        .iter()
        .map(EvaluationRecord::detector)
        .find(|d| !seen.insert(*d))
}

/// JSON object written by `score` for one report.
pub fn report_json(r: &ReliabilityReport) -> Value {
    let places = r.policy.rounding;
    let mut display = Map::new();
    for p in Pillar::ALL {
        display.insert(
            p.symbol().into(),
            round_display(r.pillars.get(p), places).into(),
        );
    }
    display.insert("SCG".into(), round_display(r.scg, places).into());
    json!({
        "detector": r.detector,
        "metric": r.metric,
        "T": r.pillars.transferability,
        "R": r.pillars.robustness,
        "I": r.pillars.interpretability,
        "E": r.pillars.efficiency,
        "scg": r.scg,
        "scg_display": round_display(r.scg, places),
        "display": display,
        "group_means": {
            "compression": r.group_means[0],
            "noise": r.group_means[1],
            "adversarial": r.group_means[2],
        },
        "notes": r.pillars.notes,
        "warnings": r.pillars.notes.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
        "policy": r.policy,
    })
}

/// Field path a note refers to, for validation output.
fn note_path(note: &Note) -> String {
    match note {
        Note::EmptyGroup { group } => format!("robustness.{}", group.key()),
        Note::EfficiencyOverride { .. } => "efficiency_override".to_string(),
        Note::InterpretabilityOutOfBand { .. } => "interpretability.value".to_string(),
    }
}

/// Issues a parsed record raises when scored under `policy`.
pub fn record_issues(record: &EvaluationRecord, policy: &ScoringPolicy) -> Vec<ValidationIssue> {
    match score_detector(record, policy) {
        Ok(report) => report
            .pillars
            .notes
            .iter()
            .map(|n| ValidationIssue::warning(note_path(n), n.to_string()))
            .collect(),
        Err(e) => {
            let path = match e.root() {
                ScoringError::EmptyRunSet => "transferability",
                ScoringError::AllGroupsEmpty => "robustness",
                ScoringError::OutOfBand { .. } => "interpretability.value",
                _ => "",
            };
            vec![ValidationIssue::error(path, e.to_string())]
        }
    }
}

fn issue_line(source: &str, detector: Option<&str>, issue: &ValidationIssue) -> String {
    let severity = match issue.severity {
        Severity::Error => "error",
        Severity::Warning => "warning",
    };
    let who = detector.map(|d| format!(" [{d}]")).unwrap_or_default();
    format!("{severity}: {source}{who}: {issue}")
}

fn validate_files(
    files: &[PathBuf],
    policy: &ScoringPolicy,
    out: &mut dyn Write,
) -> std::io::Result<usize> {
    let mut errors = 0;
    let mut seen: Vec<(String, String)> = Vec::new();
    for file in files {
        let source = file.display().to_string();
        let parsed = fs::read_to_string(file)
            .map_err(|e| vec![ValidationIssue::error("", e.to_string())])
            .and_then(|text| parse_document(&text).map_err(|e| e.issues()));
        let records = match parsed {
            Ok(records) => records,
            Err(issues) => {
                for issue in &issues {
                    writeln!(out, "{}", issue_line(&source, None, issue))?;
                }
                errors += issues.len().max(1);
                continue;
            }
        };
        for r in &records {
            if let Some((_, other)) = seen.iter().find(|(d, _)| d == r.detector()) {
                let issue = ValidationIssue::error(
                    "detector",
                    format!("duplicate detector name, also defined in {other}"),
                );
                writeln!(out, "{}", issue_line(&source, Some(r.detector()), &issue))?;
                errors += 1;
            }
            seen.push((r.detector().to_string(), source.clone()));
            for issue in record_issues(r, policy) {
                if issue.severity == Severity::Error {
                    errors += 1;
                }
                writeln!(out, "{}", issue_line(&source, Some(r.detector()), &issue))?;
            }
        }
    }
    Ok(errors)
}

fn expand_inputs(paths: &[PathBuf]) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut in_dir: Vec<PathBuf> = fs::read_dir(p)
                .into_iter()
                .flatten()
                .flatten()
                .map(|e| e.path())
                .filter(|f| f.is_file() && f.extension().is_some_and(|e| e == "json"))
                .collect();
            in_dir.sort();
            files.extend(in_dir);
        } else {
            files.push(p.clone());
        }
    }
    files
}

fn scoring_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Failed(e.to_string())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure::Failed(format!("cannot write output: {e}"));
    match command {
        Command::Score { input, policy } => {
            let policy = policy.to_policy()?;
            let records = input.load()?;
            let reports = score_all(&records, &policy).map_err(scoring_failure)?;
            for r in &reports {
                writeln!(out, "{}", report_json(r)).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Report {
            input,
            policy,
            table,
            format,
            sort,
        } => {
            let policy = policy.to_policy()?;
            let records = input.load()?;
            let reports = score_all(&records, &policy).map_err(scoring_failure)?;
            let text = match table {
                TableArg::Leaderboard => {
                    let sort = match sort {
                        SortArg::Input => SortOrder::InputOrder,
                        SortArg::Scg => SortOrder::ByScgDesc,
                    };
                    render_leaderboard(&reports, format.into(), sort)
                }
                TableArg::Robustness => render_robustness_table(&reports, format.into()),
            }
            .map_err(scoring_failure)?;
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Validate { input, policy } => {
            let policy = policy.to_policy()?;
            input.check()?;
            let mut errors = 0;
            if input.golden {
                for r in golden_records() {
                    for issue in record_issues(&r, &policy) {
                        if issue.severity == Severity::Error {
                            errors += 1;
                        }
                        writeln!(
                            out,
                            "{}",
                            issue_line("<golden>", Some(r.detector()), &issue)
                        )
                        .map_err(io)?;
                    }
                }
            }
            let files = expand_inputs(&input.input);
            errors += validate_files(&files, &policy, out).map_err(io)?;
            writeln!(out, "{errors} error(s)").map_err(io)?;
            Ok(if errors == 0 { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Sensitivity {
            input,
            policy,
            analysis,
            sweep,
            format,
        } => {
            let policy = policy.to_policy()?;
            let weight_sets = if sweep.is_empty() {
                default_weight_sets()
            } else {
                sweep
                    .iter()
                    .map(|s| Weights::parse(s).map_err(|e| Failure::Usage(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let records = input.load()?;
            let text = match analysis {
                AnalysisArg::Policies => {
                    let deltas =
                        compare_missing_policies(&records, &policy).map_err(scoring_failure)?;
                    render_policy_deltas(&deltas, format.into(), policy.rounding)
                }
                AnalysisArg::Weights => {
                    let sweep =
                        weight_sweep(&records, &weight_sets, &policy).map_err(scoring_failure)?;
                    render_weight_sweep(&sweep, format.into(), policy.rounding)
                }
            }
            .map_err(scoring_failure)?;
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::VerifyPaper => {
            let v = verify_paper().map_err(scoring_failure)?;
            for c in &v.checks {
                writeln!(out, "{c}").map_err(io)?;
            }
            for d in &v.discrepancies {
                let tag = if d.expected { "FLAG" } else { "UNEXPECTED" };
                writeln!(
                    out,
                    "{tag} {} {}: {}",
                    d.detector,
                    d.pillar.symbol(),
                    d.detail
                )
                .map_err(io)?;
            }
            for (d, p) in &v.missing {
                writeln!(
                    out,
                    "MISSING {d} {}: expected discrepancy was not flagged",
                    p.symbol()
                )
                .map_err(io)?;
            }
            for m in &v.metric_mismatches {
                writeln!(out, "FAIL metric {m}").map_err(io)?;
            }
            let passed = v.checks.iter().filter(|c| c.passed()).count();
            let expected = v.discrepancies.iter().filter(|d| d.expected).count();
            writeln!(
                out,
                "{passed}/{} cells match; {} discrepancies flagged ({expected} expected)",
                v.checks.len(),
                v.discrepancies.len()
            )
            .map_err(io)?;
            Ok(if v.passed() { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

/// Runs the program on `args` (including the program name). Output goes to
/// `out`, diagnostics to `err`; the return value is the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Failed(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}
