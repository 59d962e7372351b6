//! Rendering reports as robustness tables and leaderboards.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::{MissingGroupPolicy, Note, PerturbationGroup, Pillar, ReliabilityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplayFormat {
    Markdown,
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortOrder {
    #[default]
    InputOrder,
    /// Highest SCG first, ties broken by detector name ascending.
    ByScgDesc,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("EmptyReportSet: nothing to render")]
    EmptyReportSet,
}

/// Placeholder for an untested group when the policy does not zero-fill.
pub const NOT_TESTED: &str = "—";

/// Rounds `x` half-up to `places` decimals.
///
/// Works on the shortest decimal representation that round-trips to `x`, so a
/// value printed as `0.565` rounds to `0.57` even though the nearest double is
/// slightly below it. The result does not depend on the platform's libm.
pub fn round_display(x: f64, places: u32) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let places = places as usize;
    let negative = x.is_sign_negative() && x != 0.0;
    // Display for f64 is the shortest round-trip form and never uses exponents.
    let repr = format!("{}", x.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((repr.as_str(), ""));

    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let int_len = digits.len();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.extend(frac.iter().take(places));
    digits.resize(int_len + places, 0);

    if frac.get(places).is_some_and(|&d| d >= 5) {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }

    let split = digits.len() - places;
    let mut out = String::with_capacity(digits.len() + 2);
    if negative && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    out.extend(digits[..split].iter().map(|&d| char::from(b'0' + d)));
    if places > 0 {
        out.push('.');
        out.extend(digits[split..].iter().map(|&d| char::from(b'0' + d)));
    }
    out
}

/// Orders reports by SCG descending, then detector name ascending.
pub fn compare_by_scg(a: &ReliabilityReport, b: &ReliabilityReport) -> Ordering {
    b.scg
        .total_cmp(&a.scg)
        .then_with(|| a.detector.cmp(&b.detector))
}

fn ordered(reports: &[ReliabilityReport], sort: SortOrder) -> Vec<&ReliabilityReport> {
    let mut rows: Vec<&ReliabilityReport> = reports.iter().collect();
    if sort == SortOrder::ByScgDesc {
        rows.sort_by(|a, b| compare_by_scg(a, b));
    }
    rows
}

/// Plain table model shared by the text renderers.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    footnotes: Vec<String>,
}

fn escape_markdown(cell: &str) -> String {
    cell.replace('|', "\\|")
}

pub(crate) fn markdown_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let line = |cells: &[String]| {
        let escaped: Vec<String> = cells.iter().map(|c| escape_markdown(c)).collect();
        format!("| {} |\n", escaped.join(" | "))
    };
    out.push_str(&line(header));
    let sep: Vec<String> = (0..header.len())
        .map(|i| if i == 0 { ":---" } else { "---:" }.to_string())
        .collect();
    out.push_str(&line(&sep));
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

pub(crate) fn csv_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)
        .expect("writing to a Vec cannot fail");
    for row in rows {
        w.write_record(row).expect("writing to a Vec cannot fail");
    }
    let bytes = w.into_inner().expect("flushing a Vec cannot fail");
    String::from_utf8(bytes).expect("csv input was UTF-8")
}

pub(crate) fn json_lines(objects: impl IntoIterator<Item = Value>) -> String {
    let mut out = String::new();
    for obj in objects {
        out.push_str(&obj.to_string());
        out.push('\n');
    }
    out
}

impl Table {
    fn render(&self, format: DisplayFormat) -> String {
        match format {
            DisplayFormat::Markdown => {
                let mut out = markdown_table(&self.header, &self.rows);
                if !self.footnotes.is_empty() {
                    out.push('\n');
                    for f in &self.footnotes {
                        out.push_str(f);
                        out.push('\n');
                    }
                }
                out
            }
            DisplayFormat::Csv => csv_table(&self.header, &self.rows),
            DisplayFormat::JsonLines => unreachable!("JSON lines are rendered from reports"),
        }
    }
}

fn group_cell(report: &ReliabilityReport, group: PerturbationGroup) -> String {
    match report.group_means[group.index()] {
        Some(m) => round_display(m, report.policy.rounding),
        None => match report.policy.missing_group {
            MissingGroupPolicy::ZeroFill => round_display(0.0, report.policy.rounding),
            MissingGroupPolicy::Renormalize => NOT_TESTED.to_string(),
        },
    }
}

/// Per-group means and R for each report.
pub fn render_robustness_table(
    reports: &[ReliabilityReport],
    format: DisplayFormat,
) -> Result<String, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::EmptyReportSet);
    }
    if format == DisplayFormat::JsonLines {
        return Ok(json_lines(reports.iter().map(|r| {
            let places = r.policy.rounding;
            let means: Vec<Value> = r.group_means.iter().map(|m| json!(m)).collect();
            json!({
                "detector": r.detector,
                "metric": r.metric,
                "missing_group": r.policy.missing_group,
                "score_comp": means[0],
                "score_perturb": means[1],
                "score_adv": means[2],
                "r": r.pillars.robustness,
                "display": {
                    "score_comp": group_cell(r, PerturbationGroup::Compression),
                    "score_perturb": group_cell(r, PerturbationGroup::Noise),
                    "score_adv": group_cell(r, PerturbationGroup::Adversarial),
                    "r": round_display(r.pillars.robustness, places),
                },
            })
        })));
    }
    let header = match format {
        DisplayFormat::Markdown => [
            "Method",
            "Metric",
            "Score_comp",
            "Score_perturb",
            "Score_adv",
            "R",
        ],
        _ => [
            "method",
            "metric",
            "score_comp",
            "score_perturb",
            "score_adv",
            "r",
        ],
    };
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.detector.clone(),
                r.metric.to_string(),
                group_cell(r, PerturbationGroup::Compression),
                group_cell(r, PerturbationGroup::Noise),
                group_cell(r, PerturbationGroup::Adversarial),
                round_display(r.pillars.robustness, r.policy.rounding),
            ]
        })
        .collect();
    let table = Table {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows,
        footnotes: Vec::new(),
    };
    Ok(table.render(format))
}

/// Short flag name used in the CSV `flags` column.
fn flag_name(note: &Note) -> Option<String> {
    let pillar = note.marked_pillar()?;
    let what = match note {
        Note::EfficiencyOverride {
            on_scale: false, ..
        } => "override-off-scale",
        Note::EfficiencyOverride { .. } => "override",
        Note::InterpretabilityOutOfBand { .. } => "out-of-band",
        Note::EmptyGroup { .. } => return None,
    };
    Some(format!("{}:{what}", pillar.symbol()))
}

/// T, R, I, E and SCG for each report. Cells whose value is backed by a
/// warning (efficiency override, out-of-band interpretability) carry a
/// footnote marker in Markdown and a `flags` entry in CSV.
pub fn render_leaderboard(
    reports: &[ReliabilityReport],
    format: DisplayFormat,
    sort: SortOrder,
) -> Result<String, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::EmptyReportSet);
    }
    let rows = ordered(reports, sort);

    if format == DisplayFormat::JsonLines {
        return Ok(json_lines(rows.iter().enumerate().map(|(i, r)| {
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
                "position": i + 1,
                "detector": r.detector,
                "metric": r.metric,
                "T": r.pillars.transferability,
                "R": r.pillars.robustness,
                "I": r.pillars.interpretability,
                "E": r.pillars.efficiency,
                "SCG": r.scg,
                "display": display,
                "notes": r.pillars.notes.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            })
        })));
    }

    let markdown = format == DisplayFormat::Markdown;
    let mut footnotes = Vec::new();
    let mut body = Vec::with_capacity(rows.len());
    for r in &rows {
        let places = r.policy.rounding;
        let mut cells = vec![r.detector.clone(), r.metric.to_string()];
        for p in Pillar::ALL {
            let mut cell = round_display(r.pillars.get(p), places);
            if markdown {
                for note in r
                    .pillars
                    .notes
                    .iter()
                    .filter(|n| n.marked_pillar() == Some(p))
                {
                    footnotes.push(format!(
                        "[^{}]: {} {}: {note}",
                        footnotes.len() + 1,
                        r.detector,
                        p.symbol()
                    ));
                    let _ = write!(cell, "[^{}]", footnotes.len());
                }
            }
            cells.push(cell);
        }
        cells.push(round_display(r.scg, places));
        if !markdown {
            let flags: Vec<String> = r.pillars.notes.iter().filter_map(flag_name).collect();
            cells.push(flags.join(";"));
        }
        body.push(cells);
    }

    let header: Vec<String> = if markdown {
        ["Method", "Metric", "T", "R", "I", "E", "SCG"]
    } else {
        ["method", "metric", "t", "r", "i", "e", "scg"]
    }
    .iter()
    .map(|s| s.to_string())
    .chain((!markdown).then(|| "flags".to_string()))
    .collect();

    Ok(Table {
        header,
        rows: body,
        footnotes,
    }
    .render(format))
}
