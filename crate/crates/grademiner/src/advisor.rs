//! Instructor-facing logic: blending internal and external assessment
//! into a new grade, mapping GPA to letter grades, per-letter effort
//! recommendations, and count/percentage distribution tables.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{LabPerformance, StudentRecord};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum AdvisorError {
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("letter {letter:?} is not in the grade map")]
    UnknownLetter { letter: String },
    #[error("counts are all zero")]
    AllZero,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid grade map: {0}")]
    InvalidGradeMap(String),
}

/// Non-negative weights over the five internal-assessment components.
/// They must sum to 1.0 (within 1e-9).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalWeights<T: Real> {
    w_ct: T,
    w_attendance: T,
    w_assignment: T,
    w_lab: T,
    w_quiz: T,
}

impl<T: Real> InternalWeights<T> {
    pub fn new(
        w_ct: T,
        w_attendance: T,
        w_assignment: T,
        w_lab: T,
        w_quiz: T,
    ) -> Result<Self, AdvisorError> {
        let all = [w_ct, w_attendance, w_assignment, w_lab, w_quiz];
        if all.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(AdvisorError::InvalidWeights(
                "weights must be finite and non-negative".into(),
            ));
        }
        let sum = all.iter().fold(T::zero(), |a, w| a + *w);
        if (sum - T::one()).abs() > T::from_f64_const(1e-9) {
            return Err(AdvisorError::InvalidWeights(format!(
                "weights must sum to 1.0, got {sum}"
            )));
        }
        Ok(Self {
            w_ct,
            w_attendance,
            w_assignment,
            w_lab,
            w_quiz,
        })
    }
}

impl<T: Real> Default for InternalWeights<T> {
    /// Equal weights of 0.2 per component.
    fn default() -> Self {
        let w = T::from_f64_const(0.2);
        Self {
            w_ct: w,
            w_attendance: w,
            w_assignment: w,
            w_lab: w,
            w_quiz: w,
        }
    }
}

fn indicator<T: Real>(flag: bool) -> T {
    if flag {
        T::one()
    } else {
        T::zero()
    }
}

fn lab_value<T: Real>(lab: LabPerformance) -> T {
    match lab {
        LabPerformance::Good => T::one(),
        LabPerformance::Avg => T::from_f64_const(0.5),
        LabPerformance::Bad => T::zero(),
    }
}

/// Weighted, normalized internal-assessment score in [0, 1]: CT out of
/// 20, attendance out of 10, Y/N flags as 0/1 and lab performance as
/// good = 1.0, avg = 0.5, bad = 0.0.
pub fn internal_score<T: Real>(r: &StudentRecord, w: &InternalWeights<T>) -> T {
    w.w_ct * T::from_count(r.ct() as usize) / T::from_f64_const(20.0)
        + w.w_attendance * T::from_count(r.attendance() as usize) / T::from_f64_const(10.0)
        + w.w_assignment * indicator(r.assignment())
        + w.w_lab * lab_value(r.lab_per())
        + w.w_quiz * indicator(r.quiz())
}

/// Blends the external GPA with the internal score scaled to the 4.00
/// scale: `alpha * external + (1 - alpha) * 4 * internal`.
pub fn new_grade<T: Real>(external_gpa: T, internal: T, alpha: T) -> Result<T, AdvisorError> {
    check_range(external_gpa, "external_gpa", 0.0, 4.0)?;
    check_range(internal, "internal", 0.0, 1.0)?;
    check_range(alpha, "alpha", 0.0, 1.0)?;
    Ok(alpha * external_gpa + (T::one() - alpha) * T::from_f64_const(4.0) * internal)
}

fn check_range<T: Real>(v: T, what: &'static str, lo: f64, hi: f64) -> Result<(), AdvisorError> {
    if !v.is_finite() || v < T::from_f64_const(lo) || v > T::from_f64_const(hi) {
        return Err(AdvisorError::OutOfRange {
            what,
            value: v.to_f64().unwrap_or(f64::NAN),
            lo,
            hi,
        });
    }
    Ok(())
}

/// Letter-grade boundaries, listed from the best letter down. Each entry
/// is the lowest GPA (inclusive) that still earns that letter; the final
/// entry must reach down to 0.00 so every GPA maps somewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct GradeMap<T: Real> {
    entries: Vec<(String, T)>,
}

impl<T: Real> GradeMap<T> {
    pub fn new(entries: Vec<(String, T)>) -> Result<Self, AdvisorError> {
        if entries.is_empty() {
            return Err(AdvisorError::InvalidGradeMap("no entries".into()));
        }
        if entries.iter().any(|(_, m)| !m.is_finite()) {
            return Err(AdvisorError::InvalidGradeMap(
                "boundaries must be finite".into(),
            ));
        }
        if entries[0].1 > T::from_f64_const(4.0) {
            return Err(AdvisorError::InvalidGradeMap(
                "first boundary exceeds 4.00".into(),
            ));
        }
        for pair in entries.windows(2) {
            if pair[1].1 >= pair[0].1 {
                return Err(AdvisorError::InvalidGradeMap(
                    "boundaries must be strictly decreasing".into(),
                ));
            }
        }
        let last = entries.last().expect("non-empty").1;
        if last != T::zero() {
            return Err(AdvisorError::InvalidGradeMap(
                "final boundary must be 0.00 to cover the whole scale".into(),
            ));
        }
        let mut letters = std::collections::BTreeSet::new();
        for (letter, _) in &entries {
            if !letters.insert(letter.as_str()) {
                return Err(AdvisorError::InvalidGradeMap(format!(
                    "duplicate letter {letter:?}"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(String, T)] {
        &self.entries
    }

    pub fn contains(&self, letter: &str) -> bool {
        self.entries.iter().any(|(l, _)| l == letter)
    }
}

impl<T: Real> Default for GradeMap<T> {
    /// Uniform 0.25 steps: A+ from 3.75, A from 3.50, A- from 3.25,
    /// B+ from 3.00, B from 2.75, "below B" otherwise. A convention, not
    /// a measured fact; override it via the pipeline config.
    fn default() -> Self {
        let entry = |letter: &str, min: f64| (letter.to_string(), T::from_f64_const(min));
        Self {
            entries: vec![
                entry("A+", 3.75),
                entry("A", 3.50),
                entry("A-", 3.25),
                entry("B+", 3.00),
                entry("B", 2.75),
                entry("below B", 0.00),
            ],
        }
    }
}

/// First letter in the map whose boundary the GPA reaches.
pub fn gpa_to_letter<T: Real>(gpa: T, map: &GradeMap<T>) -> Result<&str, AdvisorError> {
    check_range(gpa, "gpa", 0.0, 4.0)?;
    for (letter, min_gpa) in &map.entries {
        if gpa >= *min_gpa {
            return Ok(letter);
        }
    }
    unreachable!("grade map covers down to 0.00")
}

/// Advisory steps, ordered from least to most intervention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StepId {
    #[serde(rename = "S-01")]
    S01,
    #[serde(rename = "S-02")]
    S02,
    #[serde(rename = "S-03")]
    S03,
    #[serde(rename = "S-04")]
    S04,
}

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepId::S01 => "S-01",
            StepId::S02 => "S-02",
            StepId::S03 => "S-03",
            StepId::S04 => "S-04",
        };
        f.write_str(s)
    }
}

/// The advisory text an instructor receives for one letter grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EffortRecommendation {
    pub step_id: StepId,
    pub text: &'static str,
}

const STEP_TEXTS: [(StepId, &str); 4] = [
    (
        StepId::S01,
        "He/She is a good student. Need not to take special care.",
    ),
    (
        StepId::S02,
        "Is not so good. Need to take care of CT & Quiz.",
    ),
    (
        StepId::S03,
        "Is a medium student. Should take care of CT,quiz and lab performance also.",
    ),
    (
        StepId::S04,
        "Is a lower standard student. Need lot of practice of his/her lesson and also take care of all the courses ct,lab,quiz ,attendance carefully.",
    ),
];

fn step_text(step: StepId) -> &'static str {
    STEP_TEXTS
        .iter()
        .find(|(s, _)| *s == step)
        .expect("every step has a text")
        .1
}

/// Maps a letter grade from the map's vocabulary to its effort
/// recommendation: A+ needs no special care, A/A- watch CT and quizzes,
/// B+/B add lab performance, and anything lower gets the full regimen.
pub fn recommend<T: Real>(
    letter: &str,
    map: &GradeMap<T>,
) -> Result<EffortRecommendation, AdvisorError> {
    if !map.contains(letter) {
        return Err(AdvisorError::UnknownLetter {
            letter: letter.to_string(),
        });
    }
    let step_id = match letter {
        "A+" => StepId::S01,
        "A" | "A-" => StepId::S02,
        "B+" | "B" => StepId::S03,
        _ => StepId::S04,
    };
    Ok(EffortRecommendation {
        step_id,
        text: step_text(step_id),
    })
}

/// One row of a distribution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow<T> {
    pub label: String,
    pub count: usize,
    pub percentage: T,
}

/// Per-class counts with percentages rounded half-up to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable<T> {
    pub rows: Vec<DistributionRow<T>>,
}

/// Turns ordered (label, count) pairs into a percentage table. Each
/// percentage is `100 * count / total` rounded half-up to two decimals.
pub fn band_distribution<T: Real>(
    counts: &[(String, usize)],
) -> Result<DistributionTable<T>, AdvisorError> {
    let total: usize = counts.iter().map(|(_, c)| c).sum();
    if total == 0 {
        return Err(AdvisorError::AllZero);
    }
    let total = T::from_count(total);
    let hundred = T::from_f64_const(100.0);
    let rows = counts
        .iter()
        .map(|(label, count)| {
            let pct = hundred * T::from_count(*count) / total;
            DistributionRow {
                label: label.clone(),
                count: *count,
                // round half-up to two decimals
                percentage: (pct * hundred).round() / hundred,
            }
        })
        .collect();
    Ok(DistributionTable { rows })
}
