//! Thin CLI over the `mixcal` library.
//!
//! Exit codes: 0 success, 1 invalid config/input, 2 training divergence,
//! 3 I/O failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mixcal::config::{self, ExperimentConfig};
use mixcal::data::{self, GaussianMixtureSpec};
use mixcal::error::{Error, Result};
use mixcal::export;
use mixcal::metrics::MetricReport;
use mixcal::rng::{self, Purpose};
use mixcal::{grid, train};

#[derive(Parser)]
#[command(name = "mixcal", version, about = "Mixup + ARC training and calibration toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic dataset and write it as CSV.
    GenData(GenDataArgs),
    /// Train one run from a config file and export its reports.
    Train(TrainArgs),
    /// Run every config of a grid file and export canonical results.
    Grid(GridArgs),
    /// Compute calibration metrics for a predictions CSV.
    Eval(EvalArgs),
    /// Aggregate results CSVs into a per-method summary table.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenDataArgs {
    /// Built-in generator name (`overlap2d`, `ring8`).
    #[arg(long, conflicts_with = "spec_file")]
    dataset: Option<String>,
    /// TOML file describing a custom Gaussian mixture.
    #[arg(long)]
    spec_file: Option<PathBuf>,
    /// Number of samples.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment config (TOML).
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for results.csv, reliability TSVs, and curves.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of evaluation bins.
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct GridArgs {
    /// Grid config (TOML).
    config: PathBuf,
    /// Override the grid's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Output directory for results.csv / timings.csv / failures.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of evaluation bins for every run.
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predictions CSV: C probability columns then an integer label column.
    predictions: PathBuf,
    /// Number of evaluation bins.
    #[arg(long, default_value_t = 15)]
    bins: usize,
    /// Optional directory for metrics.csv and reliability.tsv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// One or more results CSVs produced by `train` or `grid`.
    results: Vec<PathBuf>,
    /// Optional path for the summary CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_report(label: &str, report: &MetricReport) {
    println!(
        "{label}: acc {:.4}  ece {:.4}  mce {:.4}  brier {:.4}  nll {:.4}  (mean conf {:.4})",
        report.accuracy,
        report.ece,
        report.mce,
        report.brier,
        report.nll,
        report.mean_confidence()
    );
}

fn gen_data(args: &GenDataArgs) -> Result<()> {
    let spec = match (&args.dataset, &args.spec_file) {
        (Some(name), None) => GaussianMixtureSpec::by_name(name).ok_or_else(|| {
            Error::InvalidConfig(format!("unknown dataset {name:?}; try overlap2d or ring8"))
        })?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let spec: GaussianMixtureSpec =
                toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            spec.validate()?;
            spec
        }
        _ => {
            return Err(Error::InvalidConfig(
                "pass exactly one of --dataset or --spec-file".into(),
            ))
        }
    };
    let dataset = data::sample_dataset(&spec, args.n, &mut rng::stream(args.seed, Purpose::DataGen))?;
    std::fs::write(&args.out, data::dataset_to_csv(&dataset))?;
    println!(
        "wrote {} samples ({} features, {} classes) to {}",
        dataset.len(),
        dataset.dim(),
        dataset.num_classes,
        args.out.display()
    );
    Ok(())
}

fn apply_overrides(config: &mut ExperimentConfig, seed: Option<u64>, bins: Option<usize>) {
    if let Some(s) = seed {
        config.seed = Some(s);
    }
    if let Some(b) = bins {
        config.num_eval_bins = b;
    }
}

fn write_curves(result: &train::RunResult, path: &Path) -> Result<()> {
    let mut out = String::from("epoch,ce,arc,val_accuracy\n");
    for e in 0..result.curves.ce.len() {
        let arc = result
            .curves
            .arc
            .as_ref()
            .map(|a| a[e].to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{e},{},{arc},{}",
            result.curves.ce[e], result.curves.val_accuracy[e]
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut config = config::load_experiment_config(&args.config)?;
    apply_overrides(&mut config, args.seed, args.bins);
    config.validate()?;
    let result = train::run(&config)?;

    std::fs::create_dir_all(&args.out)?;
    export::export_results(std::iter::once(&result), args.out.join("results.csv"))?;
    export::export_reliability(&result.test, args.out.join("reliability_test.tsv"))?;
    export::export_reliability(&result.validation, args.out.join("reliability_val.tsv"))?;
    write_curves(&result, &args.out.join("curves.csv"))?;

    println!(
        "method {} on {} (seed {})",
        config.method.label(),
        config.dataset,
        config.seed.unwrap_or(0)
    );
    print_report("validation", &result.validation);
    print_report("test      ", &result.test);
    println!("wall time {:.2}s; artifacts in {}", result.wall_time_s, args.out.display());
    Ok(())
}

fn cmd_grid(args: &GridArgs) -> Result<()> {
    let grid_config = config::load_grid_config(&args.config)?;
    let mut configs = grid_config.expand(args.seed)?;
    for c in &mut configs {
        apply_overrides(c, None, args.bins);
    }
    let records = grid::run_grid(&configs, args.parallel)?;
    export::export_grid(&records, &args.out)?;

    let failed: Vec<&grid::GridRunRecord> =
        records.iter().filter(|r| r.outcome.is_err()).collect();
    println!(
        "{} runs complete, {} failed; results in {}",
        records.len() - failed.len(),
        failed.len(),
        args.out.display()
    );
    for record in &failed {
        if let Err(err) = &record.outcome {
            eprintln!("run {} ({}): {err}", record.index, record.config.method.label());
        }
    }
    if let Some(Err(err)) = failed.first().map(|r| &r.outcome) {
        // surface the first failure's class through the exit code
        return Err(match err {
            Error::TrainingDiverged { epoch } => Error::TrainingDiverged { epoch: *epoch },
            other => Error::InvalidInput(other.to_string()),
        });
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.predictions)?;
    let (probs, labels) = data::parse_predictions(&text)?;
    let report = mixcal::metrics::evaluate(&probs, &labels, args.bins)?;
    print_report("metrics", &report);
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        export::export_reliability(&report, dir.join("reliability.tsv"))?;
        let mut out = String::from("acc,ece,mce,brier,nll\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            report.accuracy, report.ece, report.mce, report.brier, report.nll
        );
        std::fs::write(dir.join("metrics.csv"), out)?;
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    if args.results.is_empty() {
        return Err(Error::InvalidInput("pass at least one results CSV".into()));
    }
    let mut rows = Vec::new();
    for path in &args.results {
        rows.extend(export::parse_results_csv(path)?);
    }
    let summary = export::summarize(&rows);
    print!("{}", export::format_summary_table(&summary));
    if let Some(path) = &args.out {
        export::export_summary(&summary, path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::GenData(args) => gen_data(args),
        Command::Train(args) => cmd_train(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
