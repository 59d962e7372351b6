//! Reading and writing evaluation records as JSON documents.
//!
//! A record document looks like:
//!
//! ```json
//! {
//!   "detector": "CFM",
//!   "metric": "AUC",
//!   "transferability": [{"label": "Celeb-DF", "score": 0.84}],
//!   "robustness": {
//!     "compression": [{"label": "c23", "score": 0.93}],
//!     "noise": [{"label": "gaussian", "score": 0.80}],
//!     "adversarial": []
//!   },
//!   "interpretability": {"band": "basic_visualizations", "value": 0.5},
//!   "param_count": 19000000
//! }
//! ```
//!
//! Exactly one of `param_count` and `efficiency_override` must be present.
//! Missing robustness groups are read as empty; unknown keys are rejected.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::IngestError;
use crate::model::{
    in_unit_interval, EfficiencySource, EvaluationRecord, InterpretabilityBand,
    InterpretabilityRating, MetricKind, PerturbationGroup, RobustnessSet, ScoreRun,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

/// A single problem found in an input document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    /// Dotted field path, e.g. `robustness.noise[1].score`. Empty for the document root.
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn error(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn warning(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() {
            "<document>"
        } else {
            &self.path
        };
        write!(f, "{path}: {}", self.message)
    }
}

const TOP_LEVEL_KEYS: [&str; 7] = [
    "detector",
    "metric",
    "transferability",
    "robustness",
    "interpretability",
    "param_count",
    "efficiency_override",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum IssueKind {
    Schema,
    Conflict,
    Range,
}

/// Accumulates issues while walking a document.
#[derive(Default)]
struct Checker {
    issues: Vec<(IssueKind, ValidationIssue)>,
}

impl Checker {
    fn push(&mut self, kind: IssueKind, path: &str, message: impl Into<String>) {
        self.issues
            .push((kind, ValidationIssue::error(path, message)));
    }

    fn schema(&mut self, path: &str, message: impl Into<String>) {
        self.push(IssueKind::Schema, path, message);
    }

    fn range(&mut self, path: &str, message: impl Into<String>) {
        self.push(IssueKind::Range, path, message);
    }

    fn object<'a>(&mut self, value: &'a Value, path: &str) -> Option<&'a Map<String, Value>> {
        let obj = value.as_object();
        if obj.is_none() {
            self.schema(
                path,
                format!("expected an object, found {}", type_name(value)),
            );
        }
        obj
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, allowed: &[&str], path: &str) {
        for key in obj.keys().filter(|k| !allowed.contains(&k.as_str())) {
            self.schema(&join(path, key), format!("unknown field {key:?}"));
        }
    }

    fn required<'a>(
        &mut self,
        obj: &'a Map<String, Value>,
        key: &str,
        path: &str,
    ) -> Option<&'a Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.schema(&join(path, key), format!("missing required field {key:?}"));
        }
        v
    }

    fn string<'a>(&mut self, value: &'a Value, path: &str) -> Option<&'a str> {
        let s = value.as_str();
        if s.is_none() {
            self.schema(
                path,
                format!("expected a string, found {}", type_name(value)),
            );
        }
        s
    }

    fn non_empty_string(&mut self, value: &Value, path: &str) -> Option<String> {
        let s = self.string(value, path)?;
        if s.trim().is_empty() {
            self.range(path, "must not be empty");
            return None;
        }
        Some(s.to_string())
    }

    fn unit_number(&mut self, value: &Value, path: &str) -> Option<f64> {
        let Some(x) = value.as_f64() else {
            self.schema(
                path,
                format!("expected a number, found {}", type_name(value)),
            );
            return None;
        };
        if !in_unit_interval(x) {
            self.range(path, format!("{x} is outside [0, 1]"));
            return None;
        }
        Some(x)
    }

    fn runs(&mut self, value: &Value, path: &str) -> Option<Vec<ScoreRun>> {
        let Some(items) = value.as_array() else {
            self.schema(
                path,
                format!("expected an array, found {}", type_name(value)),
            );
            return None;
        };
        let mut runs = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            let item_path = format!("{path}[{i}]");
            match self.run(item, &item_path) {
                Some(r) => runs.push(r),
                None => ok = false,
            }
        }
        ok.then_some(runs)
    }

    fn run(&mut self, value: &Value, path: &str) -> Option<ScoreRun> {
        let obj = self.object(value, path)?;
        self.unknown_keys(obj, &["label", "score"], path);
        let label = self
            .required(obj, "label", path)
            .and_then(|v| self.non_empty_string(v, &join(path, "label")));
        let score = self
            .required(obj, "score", path)
            .and_then(|v| self.unit_number(v, &join(path, "score")));
        ScoreRun::new(label?, score?).ok()
    }

    fn robustness(&mut self, value: &Value, path: &str) -> Option<RobustnessSet> {
        let obj = self.object(value, path)?;
        let keys = PerturbationGroup::ALL.map(PerturbationGroup::key);
        self.unknown_keys(obj, &keys, path);
        let mut groups: [Option<Vec<ScoreRun>>; 3] = [None, None, None];
        for g in PerturbationGroup::ALL {
            groups[g.index()] = match obj.get(g.key()) {
                Some(v) => self.runs(v, &join(path, g.key())),
                None => Some(Vec::new()),
            };
        }
        let [c, n, a] = groups;
        Some(RobustnessSet::from_runs(c?, n?, a?))
    }

    fn interpretability(&mut self, value: &Value, path: &str) -> Option<InterpretabilityRating> {
        let obj = self.object(value, path)?;
        self.unknown_keys(obj, &["band", "value"], path);
        let band_path = join(path, "band");
        let band = self
            .required(obj, "band", path)
            .and_then(|v| self.string(v, &band_path))
            .and_then(|s| {
                let band = InterpretabilityBand::from_key(s);
                if band.is_none() {
                    let expected: Vec<_> = InterpretabilityBand::ALL.map(|b| b.key()).to_vec();
                    self.schema(
                        &band_path,
                        format!(
                            "unknown band {s:?}, expected one of {}",
                            expected.join(", ")
                        ),
                    );
                }
                band
            });
        let v = self
            .required(obj, "value", path)
            .and_then(|v| self.unit_number(v, &join(path, "value")));
        InterpretabilityRating::new(band?, v?).ok()
    }

    fn param_count(&mut self, value: &Value, path: &str) -> Option<u64> {
        if let Some(p) = value.as_u64() {
            return Some(p);
        }
        match value {
            Value::Number(n) if n.as_i64().is_some_and(|p| p < 0) => {
                self.range(path, format!("{n} is negative"));
            }
            Value::Number(n) if n.as_f64().is_some_and(|f| f.fract() == 0.0 && f > 0.0) => {
                self.range(path, format!("{n} is too large"));
            }
            _ => self.schema(
                path,
                format!(
                    "expected a non-negative integer, found {}",
                    type_name(value)
                ),
            ),
        }
        None
    }

    fn finish(self) -> IngestError {
        let min = self.issues.iter().map(|(k, _)| *k).min();
        let issues: Vec<_> = self.issues.into_iter().map(|(_, i)| i).collect();
        match min {
            Some(IssueKind::Schema) => IngestError::Schema(issues),
            Some(IssueKind::Conflict) => IngestError::Conflict(issues),
            Some(IssueKind::Range) => IngestError::Range(issues),
            None => IngestError::Schema(vec![ValidationIssue::error("", "invalid document")]),
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn syntax_error(e: serde_json::Error) -> IngestError {
    IngestError::Syntax(vec![ValidationIssue::error(
        "",
        format!("malformed JSON: {e}"),
    )])
}

/// Builds a record from an already-parsed JSON value.
pub fn record_from_value(value: &Value) -> Result<EvaluationRecord, IngestError> {
    let mut c = Checker::default();
    let Some(obj) = c.object(value, "") else {
        return Err(c.finish());
    };
    c.unknown_keys(obj, &TOP_LEVEL_KEYS, "");

    let detector = c
        .required(obj, "detector", "")
        .and_then(|v| c.non_empty_string(v, "detector"));
    let metric = c
        .required(obj, "metric", "")
        .and_then(|v| c.string(v, "metric"))
        .and_then(|s| {
            let m = MetricKind::parse(s);
            if m.is_none() {
                c.schema(
                    "metric",
                    format!("unknown metric {s:?}, expected \"AUC\" or \"ACC\""),
                );
            }
            m
        });
    let transfer = c
        .required(obj, "transferability", "")
        .and_then(|v| c.runs(v, "transferability"));
    let robustness = c
        .required(obj, "robustness", "")
        .and_then(|v| c.robustness(v, "robustness"));
    let interpretability = c
        .required(obj, "interpretability", "")
        .and_then(|v| c.interpretability(v, "interpretability"));

    let efficiency = match (obj.get("param_count"), obj.get("efficiency_override")) {
        (Some(_), Some(_)) => {
            c.push(
                IssueKind::Conflict,
                "efficiency_override",
                "param_count and efficiency_override are mutually exclusive",
            );
            None
        }
        (Some(p), None) => c
            .param_count(p, "param_count")
            .map(EfficiencySource::ParamCount),
        (None, Some(o)) => c
            .unit_number(o, "efficiency_override")
            .map(EfficiencySource::Override),
        (None, None) => {
            c.schema(
                "param_count",
                "one of param_count or efficiency_override is required",
            );
            None
        }
    };

    if !c.issues.is_empty() {
        return Err(c.finish());
    }
    match (
        detector,
        metric,
        transfer,
        robustness,
        interpretability,
        efficiency,
    ) {
        (Some(d), Some(m), Some(t), Some(r), Some(i), Some(e)) => {
            EvaluationRecord::new(d, m, t, r, i, e).map_err(|err| {
                IngestError::Range(vec![ValidationIssue::error("", err.to_string())])
            })
        }
        _ => Err(c.finish()),
    }
}

/// Parses one record document.
pub fn parse_record(text: &str) -> Result<EvaluationRecord, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(syntax_error)?;
    record_from_value(&value)
}

/// Like [`parse_record`] but accepts arbitrary bytes; invalid UTF-8 is a syntax error.
pub fn parse_record_bytes(bytes: &[u8]) -> Result<EvaluationRecord, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        IngestError::Syntax(vec![ValidationIssue::error(
            "",
            format!("invalid UTF-8: {e}"),
        )])
    })?;
    parse_record(text)
}

fn annotate(index: usize, e: IngestError) -> IngestError {
    IngestError::Document {
        index,
        source: Box::new(e),
    }
}

/// Fails on the first detector name seen twice (case-sensitive).
fn check_unique(records: &[EvaluationRecord]) -> Result<(), IngestError> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        if let Some(&first) = seen.get(r.detector()) {
            return Err(IngestError::DuplicateDetector {
                name: r.detector().to_string(),
                first,
                second: i,
                issues: vec![ValidationIssue::error(
                    "detector",
                    format!("duplicate detector name {:?}", r.detector()),
                )],
            });
        }
        seen.insert(r.detector(), i);
    }
    Ok(())
}

/// Parses several record documents, keeping input order.
pub fn parse_suite<S: AsRef<str>>(texts: &[S]) -> Result<Vec<EvaluationRecord>, IngestError> {
    let records = texts
        .iter()
        .enumerate()
        .map(|(i, t)| parse_record(t.as_ref()).map_err(|e| annotate(i, e)))
        .collect::<Result<Vec<_>, _>>()?;
    check_unique(&records)?;
    Ok(records)
}

/// Parses a document holding either one record object or an array of them.
pub fn parse_document(text: &str) -> Result<Vec<EvaluationRecord>, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(syntax_error)?;
    match &value {
        Value::Array(items) => {
            let records = items
                .iter()
                .enumerate()
                .map(|(i, v)| record_from_value(v).map_err(|e| annotate(i, e)))
                .collect::<Result<Vec<_>, _>>()?;
            check_unique(&records)?;
            Ok(records)
        }
        _ => record_from_value(&value).map(|r| vec![r]),
    }
}

fn runs_value(runs: &[ScoreRun]) -> Value {
    Value::Array(
        runs.iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("label".into(), Value::from(r.label()));
                m.insert("score".into(), Value::from(r.score()));
                Value::Object(m)
            })
            .collect(),
    )
}

/// Canonical JSON value of a record. Object keys are sorted and every
/// robustness group is present, empty or not.
pub fn record_to_value(record: &EvaluationRecord) -> Value {
    let mut m = Map::new();
    m.insert("detector".into(), Value::from(record.detector()));
    m.insert("metric".into(), Value::from(record.metric().as_str()));
    m.insert("transferability".into(), runs_value(record.transfer_runs()));

    let mut rob = Map::new();
    for g in record.robustness().groups() {
        rob.insert(g.group().key().into(), runs_value(g.runs()));
    }
    m.insert("robustness".into(), Value::Object(rob));

    let rating = record.interpretability();
    let mut interp = Map::new();
    interp.insert("band".into(), Value::from(rating.band().key()));
    interp.insert("value".into(), Value::from(rating.value()));
    m.insert("interpretability".into(), Value::Object(interp));

    match record.efficiency() {
        EfficiencySource::ParamCount(p) => m.insert("param_count".into(), Value::from(p)),
        EfficiencySource::Override(v) => m.insert("efficiency_override".into(), Value::from(v)),
    };
    Value::Object(m)
}

/// Canonical text form of a record: pretty-printed, sorted keys, shortest
/// round-trip float rendering, trailing newline.
pub fn serialize_record(record: &EvaluationRecord) -> String {
    let mut s = serde_json::to_string_pretty(&record_to_value(record))
        .expect("serializing a JSON value cannot fail");
    s.push('\n');
    s
}

/// Serializes several records as one array document.
pub fn serialize_suite(records: &[EvaluationRecord]) -> String {
    let values: Vec<Value> = records.iter().map(record_to_value).collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(values))
        .expect("serializing a JSON value cannot fail");
    s.push('\n');
    s
}

/// `*.json` files of a directory, sorted by file name.
fn json_files(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let io_err = |e: std::io::Error| IngestError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads records from files and directories. A directory contributes its
/// `*.json` files in name order; a file may hold one record or an array.
/// Detector names must be unique across everything loaded.
pub fn load_records<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<EvaluationRecord>, IngestError> {
    let mut files = Vec::new();
    for p in paths {
        let p = p.as_ref();
        if p.is_dir() {
            files.extend(json_files(p)?);
        } else {
            files.push(p.to_path_buf());
        }
    }
    let mut records = Vec::new();
    for file in &files {
        let name = file.display().to_string();
        let text = fs::read_to_string(file).map_err(|e| IngestError::Io {
            path: name.clone(),
            message: e.to_string(),
        })?;
        let parsed = parse_document(&text).map_err(|e| IngestError::File {
            path: name,
            source: Box::new(e),
        })?;
        records.extend(parsed);
    }
    check_unique(&records)?;
    Ok(records)
}
