use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use grademiner::report::{
    self, build_report, load_config_file, render_text, resolve_config, run_pipeline,
    CliOverrides, PartialConfig, PipelineConfig, ReportError,
};

/// Band students by GPA, cluster them with k-means, and predict
/// performance bands with a decision tree.
#[derive(Parser)]
#[command(name = "grademiner", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write all report artifacts
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory the report artifacts are written to
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the k-means model and print a cluster summary as JSON
    Cluster {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Induce the decision tree and print it as JSON
    Tree {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print per-student bands, letters and recommendations as CSV
    Advise {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the assembled plain-text report
    Report {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Input CSV of student records
    #[arg(long)]
    input: Option<PathBuf>,
    /// JSON pipeline configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cluster count
    #[arg(long)]
    k: Option<usize>,
    /// Seed for centroid initialization
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration cap for the clustering loop
    #[arg(long)]
    max_iters: Option<usize>,
    /// Centroid-movement convergence tolerance
    #[arg(long)]
    epsilon: Option<f64>,
    /// Weight of the external GPA in the blended new grade
    #[arg(long)]
    alpha: Option<f64>,
}

fn make_config(
    common: &CommonArgs,
    out: Option<PathBuf>,
    require_output: bool,
) -> Result<PipelineConfig, ReportError> {
    let partial = match &common.config {
        Some(path) => load_config_file(path)?,
        None => PartialConfig::default(),
    };
    let overrides = CliOverrides {
        input: common.input.clone(),
        out,
        k: common.k,
        seed: common.seed,
        max_iters: common.max_iters,
        epsilon: common.epsilon,
        alpha: common.alpha,
    };
    resolve_config(partial, overrides, require_output)
}

fn advise_csv(report: &report::Report) -> String {
    let mut out = String::from("roll,gpa,band,cluster,letter,new_grade,step\n");
    for row in &report.per_student {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.roll, row.gpa, row.band, row.cluster, row.letter, row.new_grade,
            row.recommendation
        );
    }
    out
}

fn dispatch(cli: Cli) -> Result<(), ReportError> {
    match cli.command {
        Command::Run { common, out } => {
            let cfg = make_config(&common, out, true)?;
            let report = run_pipeline(&cfg)?;
            println!(
                "wrote report for {} records to {}",
                report.records,
                cfg.output_dir.display()
            );
            Ok(())
        }
        Command::Cluster { common } => {
            let cfg = make_config(&common, None, false)?;
            let report = build_report(&cfg)?;
            let json = serde_json::to_string_pretty(&report.cluster)
                .map_err(|e| ReportError::Internal(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
        Command::Tree { common } => {
            let cfg = make_config(&common, None, false)?;
            let report = build_report(&cfg)?;
            println!("{}", report.tree);
            Ok(())
        }
        Command::Advise { common } => {
            let cfg = make_config(&common, None, false)?;
            let report = build_report(&cfg)?;
            print!("{}", advise_csv(&report));
            Ok(())
        }
        Command::Report { common } => {
            let cfg = make_config(&common, None, false)?;
            let report = build_report(&cfg)?;
            print!("{}", render_text(&report));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
