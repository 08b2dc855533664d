//! Kill analysis: parse detector reports (SARIF 2.1.0 or tabular CSV),
//! optionally subtract a baseline run, then decide which seeded mutants a
//! detector flagged by matching findings against the mutation log.
//!
//! Matching is deterministic and greedy: candidate (record, finding) pairs
//! within the line-drift window are ordered by distance, then mutant id,
//! then finding order, and each record and finding is consumed at most once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeder::MutationRecord;
use crate::taxonomy::Registry;

/// Default line-drift tolerance between a finding and a seeded span.
pub const DEFAULT_DRIFT: usize = 3;

// ---------------------------------------------------------------------------
// Findings
// ---------------------------------------------------------------------------

/// One detector alarm, normalized from SARIF or CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorFinding {
    pub rule_id: String,
    pub message: String,
    /// Forward-slash path as reported (possibly absolute).
    pub file: String,
    pub start_line: usize,
    pub end_line: usize,
}

/// Findings plus per-entry parse diagnostics (skipped results/rows).
#[derive(Debug, Default)]
pub struct ParsedReport {
    pub findings: Vec<DetectorFinding>,
    pub diagnostics: Vec<String>,
}

fn normalize_path(raw: &str) -> String {
    let mut s = raw.replace('\\', "/");
    if let Some(rest) = s.strip_prefix("file://") {
        s = rest.to_string();
    }
    while let Some(rest) = s.strip_prefix("./") {
        s = rest.to_string();
    }
    s
}

// ---------------------------------------------------------------------------
// SARIF
// ---------------------------------------------------------------------------

// Only the fields we read; SARIF logs carry plenty more.
#[derive(Deserialize)]
struct SarifLog {
    #[serde(default)]
    runs: Option<Vec<SarifRun>>,
}

#[derive(Deserialize)]
struct SarifRun {
    #[serde(default)]
    results: Option<Vec<SarifResult>>,
}

#[derive(Deserialize)]
struct SarifResult {
    #[serde(rename = "ruleId", default)]
    rule_id: Option<String>,
    #[serde(default)]
    message: Option<SarifMessage>,
    #[serde(default)]
    locations: Option<Vec<SarifLocation>>,
}

#[derive(Deserialize)]
struct SarifMessage {
    #[serde(default)]
    text: Option<String>,
}

#[derive(Deserialize)]
struct SarifLocation {
    #[serde(rename = "physicalLocation", default)]
    physical: Option<SarifPhysical>,
}

#[derive(Deserialize)]
struct SarifPhysical {
    #[serde(rename = "artifactLocation", default)]
    artifact: Option<SarifArtifact>,
    #[serde(default)]
    region: Option<SarifRegion>,
}

#[derive(Deserialize)]
struct SarifArtifact {
    #[serde(default)]
    uri: Option<String>,
}

#[derive(Deserialize)]
struct SarifRegion {
    #[serde(rename = "startLine", default)]
    start_line: Option<usize>,
    #[serde(rename = "endLine", default)]
    end_line: Option<usize>,
}

/// Parse a SARIF 2.1.0 report. Results lacking a physical location or a
/// region become diagnostics rather than findings; a log without runs is a
/// shape error.
pub fn parse_sarif(path: &Path) -> Result<ParsedReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
    let log: SarifLog =
        serde_json::from_str(&text).map_err(|e| Error::json(path.to_path_buf(), e))?;
    let runs = log.runs.unwrap_or_default();
    if runs.is_empty() {
        return Err(Error::ReportShape {
            path: path.to_path_buf(),
            detail: "SARIF log has no runs".into(),
        });
    }
    let mut parsed = ParsedReport::default();
    for (run_idx, run) in runs.into_iter().enumerate() {
        for (idx, result) in run.results.unwrap_or_default().into_iter().enumerate() {
            let tag = format!("run {run_idx} result {idx}");
            let rule_id = result.rule_id.unwrap_or_else(|| "<unknown>".into());
            let message = result
                .message
                .and_then(|m| m.text)
                .unwrap_or_default();
            let location = result
                .locations
                .unwrap_or_default()
                .into_iter()
                .find_map(|l| l.physical);
            let Some(physical) = location else {
                parsed
                    .diagnostics
                    .push(format!("{tag}: no physical location"));
                continue;
            };
            let Some(uri) = physical.artifact.and_then(|a| a.uri) else {
                parsed.diagnostics.push(format!("{tag}: no artifact uri"));
                continue;
            };
            let Some(region) = physical.region else {
                parsed.diagnostics.push(format!("{tag}: no region"));
                continue;
            };
            let Some(start_line) = region.start_line else {
                parsed.diagnostics.push(format!("{tag}: no startLine"));
                continue;
            };
            parsed.findings.push(DetectorFinding {
                rule_id,
                message,
                file: normalize_path(&uri),
                start_line,
                end_line: region.end_line.unwrap_or(start_line).max(start_line),
            });
        }
    }
    Ok(parsed)
}

// ---------------------------------------------------------------------------
// Tabular (CSV)
// ---------------------------------------------------------------------------

/// Header names mapping a tabular report onto finding fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMap {
    pub file: String,
    pub line: String,
    pub rule: String,
    #[serde(default)]
    pub message: Option<String>,
    #[serde(default)]
    pub end_line: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

impl Default for ColumnMap {
    fn default() -> ColumnMap {
        ColumnMap {
            file: "file".into(),
            line: "line".into(),
            rule: "rule".into(),
            message: Some("message".into()),
            end_line: None,
            delimiter: ',',
        }
    }
}

impl ColumnMap {
    pub fn load(path: &Path) -> Result<ColumnMap> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.to_path_buf(), e))
    }
}

/// Parse a delimited report with a header row. Rows with unparseable line
/// numbers become diagnostics. A message column that is configured but
/// missing from the header is tolerated (empty messages); the file, line,
/// and rule columns are required.
pub fn parse_tabular(path: &Path, map: &ColumnMap) -> Result<ParsedReport> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(map.delimiter as u8)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::ReportShape {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::ReportShape {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?
        .clone();
    let index_of = |name: &str| headers.iter().position(|h| h.trim() == name);
    let file_idx = index_of(&map.file).ok_or_else(|| Error::MissingColumn(map.file.clone()))?;
    let line_idx = index_of(&map.line).ok_or_else(|| Error::MissingColumn(map.line.clone()))?;
    let rule_idx = index_of(&map.rule).ok_or_else(|| Error::MissingColumn(map.rule.clone()))?;
    let message_idx = map.message.as_deref().and_then(index_of);
    let end_idx = map.end_line.as_deref().and_then(index_of);

    let mut parsed = ParsedReport::default();
    for (row_number, row) in reader.records().enumerate() {
        let tag = format!("row {}", row_number + 2); // 1-based, after header
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                parsed.diagnostics.push(format!("{tag}: {e}"));
                continue;
            }
        };
        let field = |idx: usize| row.get(idx).unwrap_or("").trim().to_string();
        let line_text = field(line_idx);
        let Ok(start_line) = line_text.parse::<usize>() else {
            parsed
                .diagnostics
                .push(format!("{tag}: line `{line_text}` is not a number"));
            continue;
        };
        let end_line = match end_idx {
            Some(idx) => field(idx).parse::<usize>().unwrap_or(start_line),
            None => start_line,
        };
        parsed.findings.push(DetectorFinding {
            rule_id: field(rule_idx),
            message: message_idx.map(field).unwrap_or_default(),
            file: normalize_path(&field(file_idx)),
            start_line,
            end_line: end_line.max(start_line),
        });
    }
    Ok(parsed)
}

// ---------------------------------------------------------------------------
// Report loading front door
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Sarif,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s.to_ascii_lowercase().as_str() {
            "sarif" => Ok(ReportFormat::Sarif),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::UnknownOperator(format!(
                "report format `{other}` (expected sarif|csv)"
            ))),
        }
    }
}

/// Infer the format from the file extension when not given explicitly.
pub fn infer_format(path: &Path) -> Result<ReportFormat> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("sarif") | Some("json") => Ok(ReportFormat::Sarif),
        Some("csv") | Some("tsv") | Some("txt") => Ok(ReportFormat::Csv),
        _ => Err(Error::ReportShape {
            path: path.to_path_buf(),
            detail: "cannot infer report format from extension; pass --format".into(),
        }),
    }
}

pub fn load_report(
    path: &Path,
    format: Option<ReportFormat>,
    map: &ColumnMap,
) -> Result<ParsedReport> {
    let format = match format {
        Some(f) => f,
        None => infer_format(path)?,
    };
    match format {
        ReportFormat::Sarif => parse_sarif(path),
        ReportFormat::Csv => parse_tabular(path, map),
    }
}

// ---------------------------------------------------------------------------
// Baseline subtraction
// ---------------------------------------------------------------------------

/// Remove findings already present in a baseline run over the unmutated
/// project. A mutated-run finding is absorbed when the baseline has an
/// unconsumed finding with the same rule and file within `drift` lines
/// (insertions shift pre-existing alarms downward). Multiset semantics:
/// each baseline finding absorbs at most one mutated finding.
pub fn baseline_diff(
    mutated: Vec<DetectorFinding>,
    baseline: &[DetectorFinding],
    drift: usize,
) -> Vec<DetectorFinding> {
    let mut pool: BTreeMap<(String, String), Vec<(usize, bool)>> = BTreeMap::new();
    for finding in baseline {
        pool.entry((finding.rule_id.clone(), finding.file.clone()))
            .or_default()
            .push((finding.start_line, false));
    }
    let mut remaining = Vec::new();
    for finding in mutated {
        let key = (finding.rule_id.clone(), finding.file.clone());
        let absorbed = pool.get_mut(&key).and_then(|candidates| {
            candidates
                .iter_mut()
                .filter(|(line, used)| {
                    !used && finding.start_line.abs_diff(*line) <= drift
                })
                .min_by_key(|(line, _)| finding.start_line.abs_diff(*line))
        });
        match absorbed {
            Some(slot) => slot.1 = true,
            None => remaining.push(finding),
        }
    }
    remaining
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MatchOptions {
    /// Maximum distance in lines between a finding and a seeded span.
    pub drift: usize,
    /// Keep only findings whose rule id equals one of these (case-insensitive).
    pub rule_filter: Option<Vec<String>>,
}

impl Default for MatchOptions {
    fn default() -> MatchOptions {
        MatchOptions {
            drift: DEFAULT_DRIFT,
            rule_filter: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KillMatch {
    pub record: MutationRecord,
    pub finding: DetectorFinding,
    /// 0 when the finding line falls inside the seeded span.
    pub distance: usize,
}

#[derive(Debug, Serialize)]
pub struct KillReport {
    pub total_records: usize,
    pub killed: Vec<KillMatch>,
    pub unkilled: Vec<MutationRecord>,
    /// Findings that matched no record — noise, or alarms the baseline
    /// should have absorbed.
    pub unmatched_findings: Vec<DetectorFinding>,
    pub kill_ratio: f64,
}

fn file_matches(finding_file: &str, record_file: &str) -> bool {
    finding_file == record_file || finding_file.ends_with(&format!("/{record_file}"))
}

fn span_distance(record: &MutationRecord, line: usize) -> usize {
    if line >= record.start_line && line <= record.end_line {
        0
    } else {
        line.abs_diff(record.start_line)
            .min(line.abs_diff(record.end_line))
    }
}

/// Decide killed/unkilled per record. Greedy nearest-first assignment with
/// ties broken by mutant id then finding order; each finding kills at most
/// one record and vice versa.
pub fn match_findings(
    records: &[MutationRecord],
    findings: &[DetectorFinding],
    opts: &MatchOptions,
) -> Result<KillReport> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let findings: Vec<&DetectorFinding> = findings
        .iter()
        .filter(|f| match &opts.rule_filter {
            Some(rules) => rules.iter().any(|r| r.eq_ignore_ascii_case(&f.rule_id)),
            None => true,
        })
        .collect();

    let mut candidates: Vec<(usize, &str, usize, usize)> = Vec::new();
    for (f_idx, finding) in findings.iter().enumerate() {
        for (r_idx, record) in records.iter().enumerate() {
            if !file_matches(&finding.file, &record.file) {
                continue;
            }
            let distance = span_distance(record, finding.start_line);
            if distance <= opts.drift {
                candidates.push((distance, record.mutant_id.as_str(), f_idx, r_idx));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(b.1)).then(a.2.cmp(&b.2)));

    let mut record_taken = vec![false; records.len()];
    let mut finding_taken = vec![false; findings.len()];
    let mut killed = Vec::new();
    for (distance, _, f_idx, r_idx) in candidates {
        if record_taken[r_idx] || finding_taken[f_idx] {
            continue;
        }
        record_taken[r_idx] = true;
        finding_taken[f_idx] = true;
        killed.push(KillMatch {
            record: records[r_idx].clone(),
            finding: findings[f_idx].clone(),
            distance,
        });
    }
    killed.sort_by(|a, b| a.record.mutant_id.cmp(&b.record.mutant_id));

    let unkilled = records
        .iter()
        .enumerate()
        .filter(|(i, _)| !record_taken[*i])
        .map(|(_, r)| r.clone())
        .collect();
    let unmatched_findings = findings
        .iter()
        .enumerate()
        .filter(|(i, _)| !finding_taken[*i])
        .map(|(_, f)| (*f).clone())
        .collect();
    let kill_ratio = killed.len() as f64 / records.len() as f64;
    Ok(KillReport {
        total_records: records.len(),
        killed,
        unkilled,
        unmatched_findings,
        kill_ratio,
    })
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Operator,
    Case,
    Cluster,
    Scope,
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupBy::Operator => "operator",
            GroupBy::Case => "case",
            GroupBy::Cluster => "cluster",
            GroupBy::Scope => "scope",
        })
    }
}

impl FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<GroupBy> {
        match s.to_ascii_lowercase().as_str() {
            "operator" => Ok(GroupBy::Operator),
            "case" => Ok(GroupBy::Case),
            "cluster" => Ok(GroupBy::Cluster),
            "scope" => Ok(GroupBy::Scope),
            other => Err(Error::UnknownOperator(format!(
                "group key `{other}` (expected operator|case|cluster|scope)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub key: String,
    pub total: usize,
    pub killed: usize,
    pub ratio: f64,
}

/// Aggregate a kill report by operator, case, cluster, or scope. Cluster
/// grouping needs the registry to resolve case → cluster.
pub fn summarize(
    report: &KillReport,
    group: GroupBy,
    registry: Option<&Registry>,
) -> Result<Vec<SummaryRow>> {
    let key_of = |record: &MutationRecord| -> Result<String> {
        Ok(match group {
            GroupBy::Operator => record.operator_id.to_string(),
            GroupBy::Case => record.case_id.clone(),
            GroupBy::Scope => record.scope.to_string(),
            GroupBy::Cluster => {
                let registry = registry.ok_or_else(|| {
                    Error::UnknownCluster("<cluster grouping needs a registry>".into())
                })?;
                registry.case(&record.case_id)?.cluster.clone()
            }
        })
    };
    let mut rows: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for kill in &report.killed {
        let entry = rows.entry(key_of(&kill.record)?).or_default();
        entry.0 += 1;
        entry.1 += 1;
    }
    for record in &report.unkilled {
        rows.entry(key_of(record)?).or_default().0 += 1;
    }
    Ok(rows
        .into_iter()
        .map(|(key, (total, killed))| SummaryRow {
            key,
            total,
            killed,
            ratio: killed as f64 / total as f64,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
