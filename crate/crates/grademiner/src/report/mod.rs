//! Pipeline orchestration: ingest, band, cluster, discretize, induce the
//! tree, advise, and emit the report artifacts.

mod config;

pub use config::{CliOverrides, PartialConfig, PipelineConfig};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::advisor::{
    band_distribution, gpa_to_letter, internal_score, new_grade, recommend, StepId,
};
use crate::dtree::{build_tree, export_tree, TrainingView};
use crate::kmeans;
use crate::records::{self, Band, Dataset};
use crate::{DistributionTable, Scalar};

pub use config::load_partial as load_config_file;
pub use config::resolve as resolve_config;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid input {path}: {source}")]
    Input {
        path: PathBuf,
        source: records::RecordsError,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("clustering failed: {0}")]
    Cluster(kmeans::KMeansError),
    #[error("gpa {gpa} falls outside the histogram edges")]
    GpaOutsideEdges { gpa: Scalar },
    #[error("internal error: {0}")]
    Internal(String),
}

impl ReportError {
    /// Process exit code: 2 input/validation, 3 configuration, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Io { .. } | ReportError::Input { .. } => 2,
            ReportError::GpaOutsideEdges { .. } => 2,
            // a cluster count the data cannot support is an input problem
            ReportError::Cluster(kmeans::KMeansError::TooFewDistinctPoints { .. }) => 2,
            ReportError::Config(_) => 3,
            ReportError::Cluster(_) | ReportError::Internal(_) => 4,
        }
    }
}

/// Centroids, cluster sizes and convergence data from the k-means fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub k: usize,
    pub seed: u64,
    pub centroids: Vec<Vec<Scalar>>,
    pub sizes: Vec<usize>,
    pub sse: Scalar,
    pub iterations: usize,
    pub converged: bool,
}

/// One row of the per-student table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerStudentRow {
    pub roll: u32,
    pub gpa: Scalar,
    pub band: Band,
    pub cluster: usize,
    pub letter: String,
    pub new_grade: Scalar,
    pub recommendation: StepId,
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub source: String,
    pub records: usize,
    pub distribution_five_class: DistributionTable,
    pub distribution_bands: DistributionTable,
    pub cluster: ClusterSummary,
    pub tree: String,
    pub per_student: Vec<PerStudentRow>,
}

/// (attendance, gpa) pairs in input order, for the scatter data series.
pub fn scatter_series(ds: &Dataset) -> Vec<(u8, Scalar)> {
    ds.records()
        .iter()
        .map(|r| (r.attendance(), r.gpa()))
        .collect()
}

/// Bins the GPAs into half-open intervals `[e_i, e_{i+1})` (the final
/// interval is closed) and attaches percentages.
pub fn histogram_series(
    ds: &Dataset,
    edges: &[Scalar],
) -> Result<DistributionTable, ReportError> {
    if edges.len() < 2
        || edges.iter().any(|e| !e.is_finite())
        || edges.windows(2).any(|p| p[1] <= p[0])
    {
        return Err(ReportError::Config(
            "histogram edges must be strictly increasing with at least two entries".into(),
        ));
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    for r in ds.records() {
        let gpa = r.gpa();
        let mut placed = false;
        for i in 0..bins {
            let last = i == bins - 1;
            if gpa >= edges[i] && (gpa < edges[i + 1] || (last && gpa <= edges[i + 1])) {
                counts[i] += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(ReportError::GpaOutsideEdges { gpa });
        }
    }
    let labeled: Vec<(String, usize)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (format!("{:.2}-{:.2}", edges[i], edges[i + 1]), c))
        .collect();
    band_distribution(&labeled).map_err(|e| ReportError::Internal(e.to_string()))
}

/// Feature vectors for clustering: the banding grade (raw GPA, or the
/// blended new grade when `band_on_new_grade` is set), optionally
/// extended with CT/20 and attendance/10 coordinates.
pub fn feature_points(
    ds: &Dataset,
    cfg: &PipelineConfig,
    grades: &[Scalar],
) -> Result<Vec<kmeans::Point<Scalar>>, ReportError> {
    ds.records()
        .iter()
        .zip(grades)
        .map(|(r, &g)| {
            let mut coords = vec![g];
            if cfg.extended_features {
                coords.push(r.ct() as Scalar / 20.0);
                coords.push(r.attendance() as Scalar / 10.0);
            }
            kmeans::Point::new(coords).map_err(|e| ReportError::Internal(e.to_string()))
        })
        .collect()
}

/// Runs the computation: ingest, band, cluster, discretize, build the
/// tree and assemble the advisory rows. Writes nothing.
pub fn build_report(cfg: &PipelineConfig) -> Result<Report, ReportError> {
    compute(cfg).map(|(report, _)| report)
}

fn compute(cfg: &PipelineConfig) -> Result<(Report, Dataset), ReportError> {
    cfg.validate()?;
    let text = std::fs::read_to_string(&cfg.input_path).map_err(|source| ReportError::Io {
        path: cfg.input_path.clone(),
        source,
    })?;
    let source_name = cfg
        .input_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| cfg.input_path.display().to_string());
    let ds = records::parse_csv(&text, source_name.clone()).map_err(|source| {
        ReportError::Input {
            path: cfg.input_path.clone(),
            source,
        }
    })?;

    // advisory columns are seed-independent
    let mut new_grades = Vec::with_capacity(ds.len());
    let mut letters = Vec::with_capacity(ds.len());
    for r in ds.records() {
        let internal = internal_score(r, &cfg.weights);
        let blended = new_grade(r.gpa(), internal, cfg.alpha)
            .map_err(|e| ReportError::Internal(e.to_string()))?;
        let letter = gpa_to_letter(r.gpa(), &cfg.grade_map)
            .map_err(|e| ReportError::Internal(e.to_string()))?;
        new_grades.push(blended);
        letters.push(letter.to_string());
    }

    // the grade each record is banded (and clustered) on
    let banding_grades: Vec<Scalar> = if cfg.band_on_new_grade {
        new_grades.clone()
    } else {
        ds.records().iter().map(|r| r.gpa()).collect()
    };
    let bands: Vec<Band> = banding_grades
        .iter()
        .map(|&g| {
            records::gpa_to_band(g.clamp(0.0, 4.0), &cfg.band_spec)
                .map_err(|e| ReportError::Internal(e.to_string()))
        })
        .collect::<Result<_, _>>()?;

    let mut counts = records::BandCounts::default();
    for b in &bands {
        match b {
            Band::High => counts.high += 1,
            Band::Medium => counts.medium += 1,
            Band::Low => counts.low += 1,
        }
    }
    let distribution_bands =
        band_distribution(&counts.to_rows()).map_err(|e| ReportError::Internal(e.to_string()))?;
    let distribution_five_class = histogram_series(&ds, &cfg.histogram_edges)?;

    let points = feature_points(&ds, cfg, &banding_grades)?;
    let model = kmeans::fit(&points, &cfg.kmeans).map_err(ReportError::Cluster)?;
    let cluster = ClusterSummary {
        k: cfg.kmeans.k(),
        seed: cfg.kmeans.seed(),
        centroids: model
            .centroids()
            .iter()
            .map(|c| c.coords().to_vec())
            .collect(),
        sizes: model.cluster_sizes(),
        sse: model.sse(),
        iterations: model.iterations(),
        converged: model.converged(),
    };

    let mut cats = records::discretize(&ds, &cfg.discretization, &cfg.band_spec);
    if cfg.band_on_new_grade {
        for (cat, band) in cats.iter_mut().zip(&bands) {
            cat.class_label = *band;
        }
    }
    let view = TrainingView::new(cats, records::attribute_names())
        .map_err(|e| ReportError::Internal(e.to_string()))?;
    let tree = build_tree::<Scalar>(&view).map_err(|e| ReportError::Internal(e.to_string()))?;
    let tree_text = export_tree(&tree);

    let per_student = ds
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let rec = recommend(&letters[i], &cfg.grade_map)
                .map_err(|e| ReportError::Internal(e.to_string()))?;
            Ok(PerStudentRow {
                roll: r.roll(),
                gpa: r.gpa(),
                band: bands[i],
                cluster: model.assignment()[i],
                letter: letters[i].clone(),
                new_grade: new_grades[i],
                recommendation: rec.step_id,
            })
        })
        .collect::<Result<Vec<_>, ReportError>>()?;

    let report = Report {
        source: source_name,
        records: ds.len(),
        distribution_five_class,
        distribution_bands,
        cluster,
        tree: tree_text,
        per_student,
    };
    Ok((report, ds))
}

/// Runs the pipeline and writes all artifacts (`report.txt`,
/// `report.json`, `tree.json`, `scatter.csv`, `histogram.csv`,
/// `bands.csv`) to the configured output directory. Nothing is written
/// if any computation step fails.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Report, ReportError> {
    let (report, ds) = compute(cfg)?;
    write_artifacts(&report, &ds, &cfg.output_dir)?;
    Ok(report)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), ReportError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| ReportError::Io { path, source })
}

/// Writes the six report artifacts into `out_dir`.
pub fn write_artifacts(report: &Report, ds: &Dataset, out_dir: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let json = serde_json::to_string_pretty(report)
        .map_err(|e| ReportError::Internal(e.to_string()))?;
    write_file(out_dir, "report.json", &json)?;
    write_file(out_dir, "report.txt", &render_text(report))?;
    write_file(out_dir, "tree.json", &report.tree)?;

    let mut scatter = String::from("attendance,gpa\n");
    for (attendance, gpa) in scatter_series(ds) {
        let _ = writeln!(scatter, "{attendance},{gpa}");
    }
    write_file(out_dir, "scatter.csv", &scatter)?;

    let table_csv = |table: &DistributionTable, key: &str| {
        let mut out = format!("{key},count,percentage\n");
        for row in &table.rows {
            let _ = writeln!(out, "{},{},{:.2}", row.label, row.count, row.percentage);
        }
        out
    };
    write_file(
        out_dir,
        "histogram.csv",
        &table_csv(&report.distribution_five_class, "gpa_range"),
    )?;
    write_file(
        out_dir,
        "bands.csv",
        &table_csv(&report.distribution_bands, "band"),
    )?;
    Ok(())
}

/// Plain-text rendering of the report.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Student performance report - {}", report.source);
    let _ = writeln!(out, "Records: {}", report.records);

    let _ = writeln!(out, "\nGPA distribution");
    let _ = writeln!(out, "{:<12} {:>5} {:>10}", "range", "count", "percent");
    for row in &report.distribution_five_class.rows {
        let _ = writeln!(
            out,
            "{:<12} {:>5} {:>10.2}",
            row.label, row.count, row.percentage
        );
    }

    let _ = writeln!(out, "\nBand distribution");
    let _ = writeln!(out, "{:<12} {:>5} {:>10}", "band", "count", "percent");
    for row in &report.distribution_bands.rows {
        let _ = writeln!(
            out,
            "{:<12} {:>5} {:>10.2}",
            row.label, row.count, row.percentage
        );
    }

    let c = &report.cluster;
    let _ = writeln!(out, "\nK-means (k={}, seed={})", c.k, c.seed);
    for (i, (centroid, size)) in c.centroids.iter().zip(&c.sizes).enumerate() {
        let coords: Vec<String> = centroid.iter().map(|x| format!("{x:.4}")).collect();
        let _ = writeln!(out, "cluster {i}: size {size}, centroid [{}]", coords.join(", "));
    }
    let _ = writeln!(
        out,
        "sse {:.6}, iterations {}, converged {}",
        c.sse, c.iterations, c.converged
    );

    let _ = writeln!(out, "\nDecision tree (see tree.json)");
    if let Ok(tree) = crate::dtree::import_tree(&report.tree) {
        render_tree_text(&tree, 0, &mut out);
    }

    let _ = writeln!(out, "\nPer-student advice");
    let _ = writeln!(
        out,
        "{:<6} {:>5} {:<8} {:>7} {:<8} {:>9} {:<6}",
        "roll", "gpa", "band", "cluster", "letter", "new_grade", "step"
    );
    for row in &report.per_student {
        let _ = writeln!(
            out,
            "{:<6} {:>5.2} {:<8} {:>7} {:<8} {:>9.4} {:<6}",
            row.roll,
            row.gpa,
            row.band.to_string(),
            row.cluster,
            row.letter,
            row.new_grade,
            row.recommendation.to_string()
        );
    }
    out
}

fn render_tree_text(tree: &crate::dtree::TreeNode, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match tree {
        crate::dtree::TreeNode::Leaf { class } => {
            let _ = writeln!(out, "{pad}-> {class}");
        }
        crate::dtree::TreeNode::Internal {
            attribute,
            branches,
            ..
        } => {
            let _ = writeln!(out, "{pad}[{attribute}]");
            for (value, child) in branches {
                let _ = writeln!(out, "{pad} = {value}:");
                render_tree_text(child, indent + 1, out);
            }
        }
    }
}
