//! Pipeline configuration and its JSON file format.
//!
//! The config file is a single JSON document in which every field is
//! optional; CLI flags override file values and anything still missing
//! falls back to the defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::records::Bin;
use crate::{BandSpec, GradeMap, InternalWeights, KMeansConfig, Scalar};

use super::ReportError;

/// Fully validated configuration for one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input_path: PathBuf,
    pub output_dir: PathBuf,
    pub band_spec: BandSpec,
    pub histogram_edges: Vec<Scalar>,
    pub kmeans: KMeansConfig,
    pub discretization: crate::records::DiscretizationSpec,
    pub weights: InternalWeights,
    pub alpha: Scalar,
    pub grade_map: GradeMap,
    /// Band (and cluster) on the blended new grade instead of the raw GPA.
    pub band_on_new_grade: bool,
    /// Add normalized CT and attendance as extra clustering coordinates.
    pub extended_features: bool,
}

impl PipelineConfig {
    /// Defaults: k = 3 with seed 0, thresholds 3.50/2.20, five-class
    /// histogram edges, equal internal weights and alpha = 0.5.
    pub fn with_input(input_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input_path: input_path.into(),
            output_dir: output_dir.into(),
            band_spec: BandSpec::default(),
            histogram_edges: vec![2.00, 2.20, 3.00, 3.32, 3.56, 4.00],
            kmeans: KMeansConfig::new(3, 0).expect("k >= 1"),
            discretization: crate::records::DiscretizationSpec::default(),
            weights: InternalWeights::default(),
            alpha: 0.5,
            grade_map: GradeMap::default(),
            band_on_new_grade: false,
            extended_features: false,
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.histogram_edges.len() < 2 {
            return Err(ReportError::Config(
                "histogram_edges needs at least two edges".into(),
            ));
        }
        if self.histogram_edges.iter().any(|e| !e.is_finite()) {
            return Err(ReportError::Config(
                "histogram_edges must be finite".into(),
            ));
        }
        for pair in self.histogram_edges.windows(2) {
            if pair[1] <= pair[0] {
                return Err(ReportError::Config(
                    "histogram_edges must be strictly increasing".into(),
                ));
            }
        }
        if !self.alpha.is_finite() || !(0.0..=1.0).contains(&self.alpha) {
            return Err(ReportError::Config(format!(
                "alpha must be in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// The JSON file schema: every field optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub band_spec: Option<BandSpecFile>,
    pub histogram_edges: Option<Vec<f64>>,
    pub kmeans: Option<KMeansFile>,
    pub discretization: Option<DiscretizationFile>,
    pub weights: Option<WeightsFile>,
    pub alpha: Option<f64>,
    pub grade_map: Option<Vec<GradeEntryFile>>,
    pub band_on_new_grade: Option<bool>,
    pub extended_features: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpecFile {
    pub high_min: f64,
    pub low_max: f64,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansFile {
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinFile {
    pub upper: u8,
    pub label: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationFile {
    pub ct_bins: Vec<BinFile>,
    pub attendance_bins: Vec<BinFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub ct: f64,
    pub attendance: f64,
    pub assignment: f64,
    pub lab: f64,
    pub quiz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeEntryFile {
    pub letter: String,
    pub min_gpa: f64,
}

/// Overrides supplied on the command line; they beat config-file values.
#[derive(Debug, Default, Clone)]
pub struct CliOverrides {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
}

pub fn load_partial(path: &Path) -> Result<PartialConfig, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ReportError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| ReportError::Config(format!("invalid config {}: {e}", path.display())))
}

/// Builds the validated config from defaults, config-file values and CLI
/// overrides, in increasing precedence.
pub fn resolve(
    partial: PartialConfig,
    overrides: CliOverrides,
    require_output: bool,
) -> Result<PipelineConfig, ReportError> {
    let input = overrides
        .input
        .or(partial.input)
        .ok_or_else(|| ReportError::Config("no input file: pass --input or set `input`".into()))?;
    let output_dir = match overrides.out.or(partial.output_dir) {
        Some(dir) => dir,
        None if require_output => {
            return Err(ReportError::Config(
                "no output directory: pass --out or set `output_dir`".into(),
            ))
        }
        None => PathBuf::from("."),
    };

    let mut cfg = PipelineConfig::with_input(input, output_dir);

    if let Some(b) = partial.band_spec {
        cfg.band_spec = BandSpec::new(b.high_min, b.low_max)
            .map_err(|e| ReportError::Config(e.to_string()))?;
    }
    if let Some(edges) = partial.histogram_edges {
        cfg.histogram_edges = edges;
    }
    let km = partial.kmeans.unwrap_or_default();
    let k = overrides.k.or(km.k).unwrap_or(3);
    let seed = overrides.seed.or(km.seed).unwrap_or(0);
    let mut kmeans =
        KMeansConfig::new(k, seed).map_err(|e| ReportError::Config(e.to_string()))?;
    if let Some(mi) = overrides.max_iters.or(km.max_iters) {
        kmeans = kmeans
            .with_max_iters(mi)
            .map_err(|e| ReportError::Config(e.to_string()))?;
    }
    if let Some(eps) = overrides.epsilon.or(km.epsilon) {
        kmeans = kmeans
            .with_epsilon(eps)
            .map_err(|e| ReportError::Config(e.to_string()))?;
    }
    cfg.kmeans = kmeans;

    if let Some(d) = partial.discretization {
        let to_bins = |bins: Vec<BinFile>| -> Vec<Bin> {
            bins.into_iter()
                .map(|b| Bin {
                    upper: b.upper,
                    label: b.label,
                })
                .collect()
        };
        cfg.discretization =
            crate::records::DiscretizationSpec::new(to_bins(d.ct_bins), to_bins(d.attendance_bins))
                .map_err(|e| ReportError::Config(e.to_string()))?;
    }
    if let Some(w) = partial.weights {
        cfg.weights = InternalWeights::new(w.ct, w.attendance, w.assignment, w.lab, w.quiz)
            .map_err(|e| ReportError::Config(e.to_string()))?;
    }
    if let Some(alpha) = overrides.alpha.or(partial.alpha) {
        cfg.alpha = alpha;
    }
    if let Some(entries) = partial.grade_map {
        cfg.grade_map = GradeMap::new(
            entries
                .into_iter()
                .map(|e| (e.letter, e.min_gpa))
                .collect(),
        )
        .map_err(|e| ReportError::Config(e.to_string()))?;
    }
    if let Some(flag) = partial.band_on_new_grade {
        cfg.band_on_new_grade = flag;
    }
    if let Some(flag) = partial.extended_features {
        cfg.extended_features = flag;
    }

    cfg.validate()?;
    Ok(cfg)
}
