//! Data reliability scoring.
//!
//! A record batch is checked against a [`QualitySchema`] on four factors:
//!
//! | factor       | unit    | violation                                         |
//! |--------------|---------|---------------------------------------------------|
//! | completeness | item    | required item missing, or record missing from batch |
//! | accuracy     | item    | value outside its range or with too many decimals |
//! | consistency  | item    | value does not parse as its type or match its format |
//! | timeliness   | record  | arrival strictly after the due time               |
//!
//! Each factor scores `1 - violations / total`. An empty denominator scores
//! 1 and records a warning.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::composition::{combine, CombinedValue, CombinerMode};
use crate::error::{Error, Result};

pub const ARRIVAL_COLUMN: &str = "arrival_time";
pub const DUE_COLUMN: &str = "due_time";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldType {
    Integer,
    Real,
    Text,
    Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub field_type: FieldType,
    /// Inclusive `[lo, hi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    /// Maximum number of decimal places.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    /// Regular expression the whole value must match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default = "default_required")]
    pub required: bool,
}

fn default_required() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaSpec {
    fields: Vec<FieldSpec>,
    #[serde(default)]
    expected_record_count: Option<u64>,
    /// Maximum latency in seconds between the reference field and arrival.
    #[serde(default)]
    deadline_seconds: Option<f64>,
    /// Timestamp field the deadline is measured from.
    #[serde(default)]
    reference_field: Option<String>,
}

/// Expected shape of a record batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SchemaSpec", into = "SchemaSpec")]
pub struct QualitySchema {
    fields: Vec<FieldSpec>,
    expected_record_count: Option<u64>,
    deadline_seconds: Option<f64>,
    reference_field: Option<String>,
    #[serde(skip)]
    patterns: Vec<Option<Regex>>,
}

impl TryFrom<SchemaSpec> for QualitySchema {
    type Error = Error;

    fn try_from(spec: SchemaSpec) -> Result<Self> {
        QualitySchema::new(
            spec.fields,
            spec.expected_record_count,
            spec.deadline_seconds,
            spec.reference_field,
        )
    }
}

impl From<QualitySchema> for SchemaSpec {
    fn from(s: QualitySchema) -> Self {
        SchemaSpec {
            fields: s.fields,
            expected_record_count: s.expected_record_count,
            deadline_seconds: s.deadline_seconds,
            reference_field: s.reference_field,
        }
    }
}

impl QualitySchema {
    pub fn new(
        fields: Vec<FieldSpec>,
        expected_record_count: Option<u64>,
        deadline_seconds: Option<f64>,
        reference_field: Option<String>,
    ) -> Result<Self> {
        let mut names = HashSet::new();
        let mut patterns = Vec::with_capacity(fields.len());
        for f in &fields {
            if f.name.is_empty() || f.name == ARRIVAL_COLUMN || f.name == DUE_COLUMN {
                return Err(Error::Schema(format!("invalid field name `{}`", f.name)));
            }
            if !names.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate field `{}`", f.name)));
            }
            if let Some([lo, hi]) = f.range {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(Error::Schema(format!(
                        "field `{}`: range [{lo}, {hi}] is empty",
                        f.name
                    )));
                }
            }
            let pattern = f
                .format
                .as_deref()
                .map(|p| Regex::new(&format!("^(?:{p})$")))
                .transpose()
                .map_err(|e| {
                    Error::Schema(format!("field `{}`: bad format pattern: {e}", f.name))
                })?;
            patterns.push(pattern);
        }
        if let Some(d) = deadline_seconds {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::Schema(format!(
                    "deadline_seconds must be >= 0, got {d}"
                )));
            }
            if reference_field.is_none() {
                return Err(Error::Schema(
                    "deadline_seconds needs a reference_field".into(),
                ));
            }
        }
        if let Some(r) = &reference_field {
            match fields.iter().find(|f| &f.name == r) {
                Some(f) if f.field_type == FieldType::Timestamp => {}
                Some(_) => {
                    return Err(Error::Schema(format!(
                        "reference field `{r}` is not a timestamp"
                    )))
                }
                None => {
                    return Err(Error::Schema(format!(
                        "reference field `{r}` is not declared"
                    )))
                }
            }
        }
        Ok(QualitySchema {
            fields,
            expected_record_count,
            deadline_seconds,
            reference_field,
            patterns,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Schema(format!("at `{}`: {}", e.path(), e.inner())))
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    fn required_count(&self) -> u64 {
        self.fields.iter().filter(|f| f.required).count() as u64
    }
}

/// Seconds since the Unix epoch, from a plain number or an RFC 3339 string.
pub fn parse_timestamp(raw: &str) -> Option<f64> {
    let s = raw.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    chrono::DateTime::parse_from_rfc3339(s)
        .ok()
        .map(|t| t.timestamp() as f64 + f64::from(t.timestamp_subsec_nanos()) * 1e-9)
}

fn parses_as(raw: &str, ty: FieldType) -> bool {
    let s = raw.trim();
    match ty {
        FieldType::Integer => s.parse::<i64>().is_ok(),
        FieldType::Real => s.parse::<f64>().map(f64::is_finite).unwrap_or(false),
        FieldType::Text => true,
        FieldType::Timestamp => parse_timestamp(s).is_some(),
    }
}

/// Digits after the decimal point, ignoring any exponent part.
pub fn decimal_places(raw: &str) -> usize {
    let mantissa = raw.trim().split(['e', 'E']).next().unwrap_or("");
    mantissa
        .split_once('.')
        .map(|(_, frac)| frac.chars().filter(char::is_ascii_digit).count())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    /// Field values; `None` is a missing item.
    pub values: BTreeMap<String, Option<String>>,
    pub arrival_time: f64,
    pub due_time: Option<f64>,
}

impl Record {
    fn value(&self, field: &str) -> Option<&str> {
        self.values.get(field).and_then(|v| v.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordBatch {
    pub records: Vec<Record>,
}

impl RecordBatch {
    /// Reads a comma-separated file with a header row. The header must name
    /// `arrival_time` and every schema field; `due_time` is optional. Empty
    /// cells are missing items.
    pub fn load_csv(path: &Path, schema: &QualitySchema) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, schema)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, schema: &QualitySchema) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Records(e.to_string()))?
            .clone();
        let declared: HashSet<&str> = schema.fields.iter().map(|f| f.name.as_str()).collect();
        for h in headers.iter() {
            if h != ARRIVAL_COLUMN && h != DUE_COLUMN && !declared.contains(h) {
                return Err(Error::Records(format!(
                    "column `{h}` is not declared in the schema"
                )));
            }
        }
        let col = |name: &str| headers.iter().position(|h| h == name);
        let arrival_col = col(ARRIVAL_COLUMN)
            .ok_or_else(|| Error::Records(format!("header lacks `{ARRIVAL_COLUMN}`")))?;
        let due_col = col(DUE_COLUMN);
        let mut field_cols = Vec::with_capacity(schema.fields.len());
        for f in &schema.fields {
            let c = col(&f.name)
                .ok_or_else(|| Error::Records(format!("header lacks schema field `{}`", f.name)))?;
            field_cols.push((f.name.clone(), c));
        }

        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| Error::Records(e.to_string()))?;
            let line = row.position().map_or(0, |p| p.line());
            let cell = |c: usize| row.get(c).filter(|s| !s.is_empty());
            let arrival_time = cell(arrival_col).and_then(parse_timestamp).ok_or_else(|| {
                Error::Records(format!("line {line}: missing or invalid arrival_time"))
            })?;
            let due_time = match due_col.and_then(cell) {
                Some(s) => Some(parse_timestamp(s).ok_or_else(|| {
                    Error::Records(format!("line {line}: invalid due_time `{s}`"))
                })?),
                None => None,
            };
            let values = field_cols
                .iter()
                .map(|(name, c)| (name.clone(), cell(*c).map(str::to_owned)))
                .collect();
            records.push(Record {
                values,
                arrival_time,
                due_time,
            });
        }
        Ok(RecordBatch { records })
    }
}

/// One factor's score together with its counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorScore {
    pub score: f64,
    pub violations: u64,
    pub total: u64,
    pub warning: Option<String>,
}

impl FactorScore {
    fn from_counts(violations: u64, total: u64, empty_warning: &str) -> Self {
        if total == 0 {
            return FactorScore {
                score: 1.0,
                violations: 0,
                total: 0,
                warning: Some(empty_warning.to_owned()),
            };
        }
        let violations = violations.min(total);
        FactorScore {
            score: (total - violations) as f64 / total as f64,
            violations,
            total,
            warning: None,
        }
    }
}

pub fn completeness(batch: &RecordBatch, schema: &QualitySchema) -> FactorScore {
    let required: Vec<&str> = schema
        .fields
        .iter()
        .filter(|f| f.required)
        .map(|f| f.name.as_str())
        .collect();
    let received = batch.records.len() as u64;
    let expected_records = received.max(schema.expected_record_count.unwrap_or(0));
    let absent_records = expected_records - received;
    let missing_items = batch
        .records
        .iter()
        .map(|r| required.iter().filter(|f| r.value(f).is_none()).count() as u64)
        .sum::<u64>();
    FactorScore::from_counts(
        missing_items + absent_records * schema.required_count(),
        expected_records * schema.required_count(),
        "completeness: no required items expected",
    )
}

pub fn accuracy(batch: &RecordBatch, schema: &QualitySchema) -> FactorScore {
    let mut checked = 0;
    let mut violations = 0;
    for f in schema
        .fields
        .iter()
        .filter(|f| f.range.is_some() || f.precision.is_some())
    {
        for raw in batch.records.iter().filter_map(|r| r.value(&f.name)) {
            checked += 1;
            let out_of_range = f.range.is_some_and(|[lo, hi]| {
                let v = match f.field_type {
                    FieldType::Timestamp => parse_timestamp(raw),
                    _ => raw.trim().parse::<f64>().ok(),
                };
                !v.is_some_and(|v| lo <= v && v <= hi)
            });
            let too_precise = f
                .precision
                .is_some_and(|p| decimal_places(raw) > p as usize);
            violations += u64::from(out_of_range || too_precise);
        }
    }
    FactorScore::from_counts(
        violations,
        checked,
        "accuracy: no range or precision checks apply",
    )
}

pub fn consistency(batch: &RecordBatch, schema: &QualitySchema) -> FactorScore {
    let mut present = 0;
    let mut mismatches = 0;
    for (f, pattern) in schema.fields.iter().zip(&schema.patterns) {
        for raw in batch.records.iter().filter_map(|r| r.value(&f.name)) {
            present += 1;
            let ok =
                parses_as(raw, f.field_type) && pattern.as_ref().map_or(true, |p| p.is_match(raw));
            mismatches += u64::from(!ok);
        }
    }
    FactorScore::from_counts(mismatches, present, "consistency: no items present")
}

/// Records arriving strictly after their due time are late. The due time is
/// the record's own `due_time`, else the reference field plus the schema
/// deadline.
pub fn timeliness(batch: &RecordBatch, schema: &QualitySchema) -> FactorScore {
    let due = |r: &Record| {
        r.due_time.or_else(|| {
            let deadline = schema.deadline_seconds?;
            let reference = r.value(schema.reference_field.as_deref()?)?;
            parse_timestamp(reference).map(|t| t + deadline)
        })
    };
    let mut with_due = 0;
    let mut late = 0;
    for r in &batch.records {
        if let Some(d) = due(r) {
            with_due += 1;
            late += u64::from(r.arrival_time > d);
        }
    }
    if with_due == 0 {
        return FactorScore::from_counts(0, 0, "timeliness: no deadlines configured");
    }
    let total = batch.records.len() as u64;
    let mut score = FactorScore::from_counts(late, total, "");
    if with_due < total {
        score.warning = Some(format!(
            "timeliness: {} record(s) without a determinable due time counted as on time",
            total - with_due
        ));
    }
    score
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityScores {
    pub completeness: FactorScore,
    pub accuracy: FactorScore,
    pub consistency: FactorScore,
    pub timeliness: FactorScore,
}

impl QualityScores {
    pub fn score(batch: &RecordBatch, schema: &QualitySchema) -> Self {
        QualityScores {
            completeness: completeness(batch, schema),
            accuracy: accuracy(batch, schema),
            consistency: consistency(batch, schema),
            timeliness: timeliness(batch, schema),
        }
    }

    /// Scores in (completeness, accuracy, consistency, timeliness) order.
    pub fn values(&self) -> [f64; 4] {
        [
            self.completeness.score,
            self.accuracy.score,
            self.consistency.score,
            self.timeliness.score,
        ]
    }

    pub fn factors(&self) -> [(&'static str, &FactorScore); 4] {
        [
            ("completeness", &self.completeness),
            ("accuracy", &self.accuracy),
            ("consistency", &self.consistency),
            ("timeliness", &self.timeliness),
        ]
    }

    pub fn warnings(&self) -> Vec<&str> {
        self.factors()
            .into_iter()
            .filter_map(|(_, f)| f.warning.as_deref())
            .collect()
    }
}

/// Combines the four factor scores. The usual mode is an equal-weight
/// [`CombinerMode::NormalizedMean`]; a literal sum ranges over [0, 4].
pub fn data_reliability(scores: &QualityScores, mode: &CombinerMode) -> Result<CombinedValue> {
    combine(&scores.values(), mode)
}
