//! Student records: CSV ingestion, validation, GPA banding and
//! discretization of the numeric attributes into categorical values.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Attribute names produced by [`discretize`], in canonical order.
pub const ATTR_CT_BAND: &str = "ct_band";
pub const ATTR_ATTENDANCE_BAND: &str = "attendance_band";
pub const ATTR_ASSIGNMENT: &str = "assignment";
pub const ATTR_LAB_PER: &str = "lab_per";
pub const ATTR_QUIZ: &str = "quiz";

/// Canonical attribute order used for tree induction (ties between equal
/// information gains are broken by this order).
pub fn attribute_names() -> Vec<String> {
    [
        ATTR_CT_BAND,
        ATTR_ATTENDANCE_BAND,
        ATTR_ASSIGNMENT,
        ATTR_LAB_PER,
        ATTR_QUIZ,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

const CSV_COLUMNS: [&str; 7] = [
    "roll",
    "gpa",
    "ct",
    "attendance",
    "assignment",
    "lab_per",
    "quiz",
];

#[derive(Debug, Error, PartialEq)]
pub enum RecordsError {
    #[error("dataset contains no data rows")]
    EmptyDataset,
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: {field} = {value} outside valid range {range}")]
    RangeViolation {
        line: u64,
        field: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("duplicate roll {roll}")]
    DuplicateRoll { roll: u32 },
    #[error("line {line}: unknown {field} value {value:?}")]
    UnknownEnumValue {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

/// Lab performance grade from the source data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabPerformance {
    Good,
    Avg,
    Bad,
}

impl LabPerformance {
    fn parse(s: &str, line: u64) -> Result<Self, RecordsError> {
        match s.to_ascii_lowercase().as_str() {
            "good" => Ok(Self::Good),
            "avg" => Ok(Self::Avg),
            "bad" => Ok(Self::Bad),
            _ => Err(RecordsError::UnknownEnumValue {
                line,
                field: "lab_per",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for LabPerformance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Good => "good",
            Self::Avg => "avg",
            Self::Bad => "bad",
        };
        f.write_str(s)
    }
}

/// Performance band a student falls into based on GPA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    High,
    Medium,
    Low,
}

impl Band {
    /// All bands in preference order (used when majority votes tie).
    pub const ALL: [Band; 3] = [Band::High, Band::Medium, Band::Low];

    /// Rank on the performance axis: Low < Medium < High.
    pub fn rank(self) -> u8 {
        match self {
            Band::Low => 0,
            Band::Medium => 1,
            Band::High => 2,
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Band::High => "High",
            Band::Medium => "Medium",
            Band::Low => "Low",
        };
        f.write_str(s)
    }
}

/// One row of the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentRecord {
    roll: u32,
    gpa: f64,
    ct: u8,
    attendance: u8,
    assignment: bool,
    lab_per: LabPerformance,
    quiz: bool,
}

impl StudentRecord {
    pub fn new(
        roll: u32,
        gpa: f64,
        ct: u8,
        attendance: u8,
        assignment: bool,
        lab_per: LabPerformance,
        quiz: bool,
    ) -> Result<Self, RecordsError> {
        if roll == 0 {
            return Err(RecordsError::OutOfRange {
                what: "roll",
                value: 0.0,
                lo: 1.0,
                hi: u32::MAX as f64,
            });
        }
        if !gpa.is_finite() || !(0.0..=4.0).contains(&gpa) {
            return Err(RecordsError::OutOfRange {
                what: "gpa",
                value: gpa,
                lo: 0.0,
                hi: 4.0,
            });
        }
        if ct > 20 {
            return Err(RecordsError::OutOfRange {
                what: "ct",
                value: ct as f64,
                lo: 0.0,
                hi: 20.0,
            });
        }
        if attendance > 10 {
            return Err(RecordsError::OutOfRange {
                what: "attendance",
                value: attendance as f64,
                lo: 0.0,
                hi: 10.0,
            });
        }
        Ok(Self {
            roll,
            gpa,
            ct,
            attendance,
            assignment,
            lab_per,
            quiz,
        })
    }

    pub fn roll(&self) -> u32 {
        self.roll
    }
    pub fn gpa(&self) -> f64 {
        self.gpa
    }
    pub fn ct(&self) -> u8 {
        self.ct
    }
    pub fn attendance(&self) -> u8 {
        self.attendance
    }
    pub fn assignment(&self) -> bool {
        self.assignment
    }
    pub fn lab_per(&self) -> LabPerformance {
        self.lab_per
    }
    pub fn quiz(&self) -> bool {
        self.quiz
    }
}

/// A validated, non-empty collection of student records with unique rolls.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<StudentRecord>,
    source_name: String,
}

impl Dataset {
    pub fn new(
        records: Vec<StudentRecord>,
        source_name: impl Into<String>,
    ) -> Result<Self, RecordsError> {
        if records.is_empty() {
            return Err(RecordsError::EmptyDataset);
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &records {
            if !seen.insert(r.roll) {
                return Err(RecordsError::DuplicateRoll { roll: r.roll });
            }
        }
        Ok(Self {
            records,
            source_name: source_name.into(),
        })
    }

    pub fn records(&self) -> &[StudentRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }
}

/// GPA thresholds separating the High / Medium / Low bands.
///
/// The Low threshold is inclusive (`gpa <= low_max` is Low), as is the
/// High one (`gpa >= high_min` is High); Medium covers the open interval
/// in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec<T: Real> {
    high_min: T,
    low_max: T,
}

impl<T: Real> BandSpec<T> {
    pub fn new(high_min: T, low_max: T) -> Result<Self, RecordsError> {
        let zero = T::zero();
        let four = T::from_f64_const(4.0);
        let ok = low_max >= zero && low_max < high_min && high_min <= four;
        if !ok {
            return Err(RecordsError::InvalidSpec(format!(
                "band thresholds must satisfy 0.00 <= low_max < high_min <= 4.00, got low_max={low_max}, high_min={high_min}"
            )));
        }
        Ok(Self { high_min, low_max })
    }

    pub fn high_min(&self) -> T {
        self.high_min
    }
    pub fn low_max(&self) -> T {
        self.low_max
    }
}

impl<T: Real> Default for BandSpec<T> {
    fn default() -> Self {
        Self {
            high_min: T::from_f64_const(3.50),
            low_max: T::from_f64_const(2.20),
        }
    }
}

/// Maps a GPA to its band. `High` wins at `high_min` and `Low` wins at
/// `low_max` (both thresholds inclusive).
pub fn gpa_to_band<T: Real>(gpa: T, spec: &BandSpec<T>) -> Result<Band, RecordsError> {
    if !gpa.is_finite() || gpa < T::zero() || gpa > T::from_f64_const(4.0) {
        return Err(RecordsError::OutOfRange {
            what: "gpa",
            value: gpa.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: 4.0,
        });
    }
    if gpa >= spec.high_min {
        Ok(Band::High)
    } else if gpa <= spec.low_max {
        Ok(Band::Low)
    } else {
        Ok(Band::Medium)
    }
}

/// One discretization bin: values up to and including `upper` get `label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bin {
    pub upper: u8,
    pub label: String,
}

/// Bins that turn the numeric CT and attendance columns into categorical
/// attribute values for tree induction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizationSpec {
    ct_bins: Vec<Bin>,
    attendance_bins: Vec<Bin>,
}

impl DiscretizationSpec {
    pub fn new(ct_bins: Vec<Bin>, attendance_bins: Vec<Bin>) -> Result<Self, RecordsError> {
        Self::validate_bins(&ct_bins, "ct", 20)?;
        Self::validate_bins(&attendance_bins, "attendance", 10)?;
        Ok(Self {
            ct_bins,
            attendance_bins,
        })
    }

    fn validate_bins(bins: &[Bin], attr: &str, max: u8) -> Result<(), RecordsError> {
        if bins.is_empty() {
            return Err(RecordsError::InvalidSpec(format!("{attr}: no bins given")));
        }
        for pair in bins.windows(2) {
            if pair[1].upper <= pair[0].upper {
                return Err(RecordsError::InvalidSpec(format!(
                    "{attr}: bin upper bounds must be strictly increasing"
                )));
            }
        }
        if bins.last().expect("non-empty").upper < max {
            return Err(RecordsError::InvalidSpec(format!(
                "{attr}: final bin upper bound must cover the maximum value {max}"
            )));
        }
        let mut labels = std::collections::BTreeSet::new();
        for b in bins {
            if !labels.insert(b.label.as_str()) {
                return Err(RecordsError::InvalidSpec(format!(
                    "{attr}: duplicate bin label {:?}",
                    b.label
                )));
            }
        }
        Ok(())
    }

    pub fn ct_bins(&self) -> &[Bin] {
        &self.ct_bins
    }
    pub fn attendance_bins(&self) -> &[Bin] {
        &self.attendance_bins
    }

    fn bin_label(bins: &[Bin], value: u8) -> &str {
        for b in bins {
            if value <= b.upper {
                return &b.label;
            }
        }
        // unreachable: the final upper bound covers the attribute maximum
        &bins.last().expect("non-empty bins").label
    }
}

impl Default for DiscretizationSpec {
    /// CT: low 0-6, mid 7-12, high 13-20. Attendance: low 0-4, mid 5-7,
    /// high 8-10.
    fn default() -> Self {
        let bin = |upper, label: &str| Bin {
            upper,
            label: label.to_string(),
        };
        Self {
            ct_bins: vec![bin(6, "low"), bin(12, "mid"), bin(20, "high")],
            attendance_bins: vec![bin(4, "low"), bin(7, "mid"), bin(10, "high")],
        }
    }
}

/// A record reduced to categorical attributes plus its class label,
/// ready for tree induction. GPA itself never appears as an attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalRecord {
    pub roll: u32,
    pub attributes: BTreeMap<String, String>,
    pub class_label: Band,
}

fn yn(flag: bool) -> String {
    if flag { "Y" } else { "N" }.to_string()
}

/// Maps every record to categorical attributes and a band class label.
pub fn discretize(
    ds: &Dataset,
    spec: &DiscretizationSpec,
    bands: &BandSpec<f64>,
) -> Vec<CategoricalRecord> {
    ds.records()
        .iter()
        .map(|r| {
            let mut attributes = BTreeMap::new();
            attributes.insert(
                ATTR_CT_BAND.to_string(),
                DiscretizationSpec::bin_label(&spec.ct_bins, r.ct()).to_string(),
            );
            attributes.insert(
                ATTR_ATTENDANCE_BAND.to_string(),
                DiscretizationSpec::bin_label(&spec.attendance_bins, r.attendance()).to_string(),
            );
            attributes.insert(ATTR_ASSIGNMENT.to_string(), yn(r.assignment()));
            attributes.insert(ATTR_LAB_PER.to_string(), r.lab_per().to_string());
            attributes.insert(ATTR_QUIZ.to_string(), yn(r.quiz()));
            let class_label = gpa_to_band(r.gpa(), bands)
                .expect("record gpa validated on construction");
            CategoricalRecord {
                roll: r.roll(),
                attributes,
                class_label,
            }
        })
        .collect()
}

/// Per-band record counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BandCounts {
    pub high: usize,
    pub medium: usize,
    pub low: usize,
}

impl BandCounts {
    pub fn get(&self, band: Band) -> usize {
        match band {
            Band::High => self.high,
            Band::Medium => self.medium,
            Band::Low => self.low,
        }
    }

    pub fn total(&self) -> usize {
        self.high + self.medium + self.low
    }

    /// Rows in High, Medium, Low order, ready for a distribution table.
    pub fn to_rows(&self) -> Vec<(String, usize)> {
        Band::ALL
            .iter()
            .map(|b| (b.to_string(), self.get(*b)))
            .collect()
    }
}

/// Counts how many records fall into each band.
pub fn band_counts(ds: &Dataset, spec: &BandSpec<f64>) -> BandCounts {
    let mut counts = BandCounts::default();
    for r in ds.records() {
        let band = gpa_to_band(r.gpa(), spec).expect("record gpa validated on construction");
        match band {
            Band::High => counts.high += 1,
            Band::Medium => counts.medium += 1,
            Band::Low => counts.low += 1,
        }
    }
    counts
}

/// Parses CSV text into a dataset.
///
/// The header must name the seven known columns (case-insensitive, any
/// order). Y/N flags are case-insensitive and lab values are lowercased
/// on ingest.
pub fn parse_csv(text: &str, source_name: impl Into<String>) -> Result<Dataset, RecordsError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| RecordsError::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();

    let mut column_index: BTreeMap<&str, usize> = BTreeMap::new();
    for (idx, name) in headers.iter().enumerate() {
        let lowered = name.to_ascii_lowercase();
        let known = CSV_COLUMNS
            .iter()
            .find(|c| **c == lowered)
            .ok_or_else(|| RecordsError::MalformedRow {
                line: 1,
                reason: format!("unknown column {name:?}"),
            })?;
        if column_index.insert(known, idx).is_some() {
            return Err(RecordsError::MalformedRow {
                line: 1,
                reason: format!("duplicate column {name:?}"),
            });
        }
    }
    for required in CSV_COLUMNS {
        if !column_index.contains_key(required) {
            return Err(RecordsError::MalformedRow {
                line: 1,
                reason: format!("missing column {required:?}"),
            });
        }
    }

    let mut records = Vec::new();
    let mut seen_rolls = std::collections::BTreeSet::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line())
                .unwrap_or(records.len() as u64 + 2);
            RecordsError::MalformedRow {
                line,
                reason: e.to_string(),
            }
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |name: &str| -> &str { &row[column_index[name]] };

        let roll = parse_number::<u32>(field("roll"), "roll", line)?;
        if roll == 0 {
            return Err(RecordsError::RangeViolation {
                line,
                field: "roll",
                value: "0".to_string(),
                range: ">= 1",
            });
        }
        let gpa = parse_number::<f64>(field("gpa"), "gpa", line)?;
        if !gpa.is_finite() || !(0.0..=4.0).contains(&gpa) {
            return Err(RecordsError::RangeViolation {
                line,
                field: "gpa",
                value: field("gpa").to_string(),
                range: "[0.00, 4.00]",
            });
        }
        let ct = parse_number::<u32>(field("ct"), "ct", line)?;
        if ct > 20 {
            return Err(RecordsError::RangeViolation {
                line,
                field: "ct",
                value: field("ct").to_string(),
                range: "[0, 20]",
            });
        }
        let attendance = parse_number::<u32>(field("attendance"), "attendance", line)?;
        if attendance > 10 {
            return Err(RecordsError::RangeViolation {
                line,
                field: "attendance",
                value: field("attendance").to_string(),
                range: "[0, 10]",
            });
        }
        let assignment = parse_flag(field("assignment"), "assignment", line)?;
        let quiz = parse_flag(field("quiz"), "quiz", line)?;
        let lab_per = LabPerformance::parse(field("lab_per"), line)?;

        if !seen_rolls.insert(roll) {
            return Err(RecordsError::DuplicateRoll { roll });
        }
        let record = StudentRecord::new(
            roll,
            gpa,
            ct as u8,
            attendance as u8,
            assignment,
            lab_per,
            quiz,
        )
        .expect("fields already range-checked");
        records.push(record);
    }

    if records.is_empty() {
        return Err(RecordsError::EmptyDataset);
    }
    Dataset::new(records, source_name)
}

fn parse_number<T: std::str::FromStr>(
    s: &str,
    field: &'static str,
    line: u64,
) -> Result<T, RecordsError> {
    s.parse().map_err(|_| RecordsError::MalformedRow {
        line,
        reason: format!("cannot parse {field} value {s:?} as a number"),
    })
}

fn parse_flag(s: &str, field: &'static str, line: u64) -> Result<bool, RecordsError> {
    match s.to_ascii_uppercase().as_str() {
        "Y" => Ok(true),
        "N" => Ok(false),
        _ => Err(RecordsError::UnknownEnumValue {
            line,
            field,
            value: s.to_string(),
        }),
    }
}

/// Serializes a dataset back to canonical CSV: fixed column order, `Y`/`N`
/// flags, lowercase lab values and shortest-round-trip GPA formatting.
pub fn to_csv(ds: &Dataset) -> String {
    let mut out = String::from("roll,gpa,ct,attendance,assignment,lab_per,quiz\n");
    for r in ds.records() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.roll(),
            r.gpa(),
            r.ct(),
            r.attendance(),
            if r.assignment() { "Y" } else { "N" },
            r.lab_per(),
            if r.quiz() { "Y" } else { "N" },
        ));
    }
    out
}
