//! `citykpi`: ingest KPI tables, compare classifiers, forecast series, serve the API.

use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use citykpi_core::analytics::{self, holt, ForecastResult};
use citykpi_core::pipeline::{self, Comparison};
use citykpi_core::preprocess::drop_missing;
use citykpi_core::{ColumnSchema, Dataset, KpiError, TrainConfig};
use citykpi_service::ServiceConfig;
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "citykpi", version, about = "City KPI analytics engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a CSV table to the canonical dataset JSON.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// JSON array of column schemas assigning roles and units.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Correlations, group means, histograms and outlier screens.
    Analyze {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Train all five classifiers on one shared split and compare them.
    Compare {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, env = "CITYKPI_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        test_fraction: f64,
        /// JSON file with hyperparameter overrides.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Holt linear-trend forecast of one column.
    Forecast {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        horizon: usize,
        #[arg(long, default_value_t = holt::DEFAULT_CONFIDENCE)]
        confidence: f64,
        #[arg(long, default_value_t = holt::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = holt::DEFAULT_BETA)]
        beta: f64,
        /// Emit (t, value) series JSON for plotting.
        #[arg(long, conflicts_with = "json")]
        plot_data: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value = "models")]
        models_dir: PathBuf,
        #[arg(long, env = "CITYKPI_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl From<KpiError> for CliError {
    fn from(e: KpiError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Ingest { input, schema, out, json } => ingest(&input, schema.as_deref(), &out, json),
        Command::Analyze { dataset, json } => analyze(&dataset, json),
        Command::Compare { dataset, seed, test_fraction, config, json } => {
            compare(&dataset, seed, test_fraction, config.as_deref(), json)
        }
        Command::Forecast { dataset, column, horizon, confidence, alpha, beta, plot_data, json } => {
            forecast(&dataset, &column, horizon, confidence, alpha, beta, plot_data, json)
        }
        Command::Serve { dataset, models_dir, addr, cors_origin } => {
            let config =
                ServiceConfig { addr, dataset_path: dataset, models_dir, cors_origin, ..ServiceConfig::default() };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(citykpi_service::serve(config)).map_err(|e| CliError::Data(e.to_string()))
        }
    }
}

fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let dataset = Dataset::from_json(&text)?;
    let violations = dataset.validate();
    if let Some(v) = violations.first() {
        return Err(CliError::Data(format!("{}: {v}", path.display())));
    }
    Ok(dataset)
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

#[derive(Serialize)]
struct MissingRow {
    column: String,
    role: citykpi_core::ColumnRole,
    missing: usize,
}

#[derive(Serialize)]
struct IngestSummary {
    rows: usize,
    columns: usize,
    complete_rows: usize,
    missing: Vec<MissingRow>,
}

fn ingest(input: &Path, schema: Option<&Path>, out: &Path, json: bool) -> CliResult {
    let sidecar: Option<Vec<ColumnSchema>> = schema
        .map(|p| {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
        })
        .transpose()?;
    let file = fs::File::open(input).map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let dataset = Dataset::from_csv(file, sidecar.as_deref())?;
    if let Some(v) = dataset.validate().first() {
        return Err(CliError::Data(format!("{}: {v}", input.display())));
    }
    fs::write(out, dataset.to_json()?)?;

    let complete_rows = dataset.rows.iter().filter(|r| r.iter().all(Option::is_some)).count();
    let summary = IngestSummary {
        rows: dataset.row_count(),
        columns: dataset.column_count(),
        complete_rows,
        missing: dataset
            .schema
            .iter()
            .zip(dataset.null_counts())
            .map(|(c, missing)| MissingRow { column: c.name.clone(), role: c.role, missing })
            .collect(),
    };
    if json {
        return print_json(&summary);
    }
    println!("{} rows, {} columns ({} complete rows)", summary.rows, summary.columns, summary.complete_rows);
    println!();
    let width = summary.missing.iter().map(|m| m.column.len()).max().unwrap_or(0).max(6);
    println!("{:<width$}  missing", "column");
    for m in &summary.missing {
        println!("{:<width$}  {:>7}", m.column, m.missing);
    }
    Ok(())
}

fn analyze(path: &Path, json: bool) -> CliResult {
    let dataset = read_dataset(path)?;
    let clean = drop_missing(&dataset)?;
    let report = analytics::analyze(&clean)?;
    if json {
        return print_json(&report);
    }
    let corr = &report.correlations;
    let width = corr.names.iter().map(String::len).max().unwrap_or(0).max(7);
    println!("pearson correlations ({} complete rows)", clean.row_count());
    let mut header = format!("{:<width$}", "");
    for name in &corr.names {
        let _ = write!(header, " {:>8}", truncate(name, 8));
    }
    println!("{header}");
    for (i, name) in corr.names.iter().enumerate() {
        let mut line = format!("{name:<width$}");
        for v in &corr.values[i] {
            let _ = write!(line, " {v:>8.3}");
        }
        println!("{line}");
    }
    println!();
    println!("group means by {}", report.groups.target);
    for (label, g) in &report.groups.groups {
        let means = g
            .means
            .as_ref()
            .map(|m| m.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" "))
            .unwrap_or_else(|| "empty".into());
        println!("  {label} (n={}): {means}", g.count);
    }
    println!();
    println!("outliers (1.5 IQR fences)");
    for (name, screen) in &report.outliers {
        println!(
            "  {name:<width$} [{:.3}, {:.3}] {} flagged",
            screen.lower_fence,
            screen.upper_fence,
            screen.outliers.len()
        );
    }
    Ok(())
}

fn truncate(s: &str, n: usize) -> &str {
    s.char_indices().nth(n).map_or(s, |(i, _)| &s[..i])
}

fn compare(path: &Path, seed: u64, test_fraction: f64, config: Option<&Path>, json: bool) -> CliResult {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CliError::Usage(format!("--test-fraction {test_fraction} must lie in (0, 1)")));
    }
    let config: TrainConfig = match config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => TrainConfig::default(),
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let dataset = read_dataset(path)?;
    let cmp = pipeline::compare(&dataset, seed, test_fraction, &config)?;
    if json {
        return print_json(&cmp);
    }
    print!("{}", comparison_table(&cmp));
    Ok(())
}

fn comparison_table(cmp: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "seed {}, test fraction {}, {} clean rows ({} train / {} test), threshold {}",
        cmp.seed, cmp.test_fraction, cmp.n_rows, cmp.n_train, cmp.n_test, cmp.threshold
    );
    let _ = writeln!(out, "{:<8} {:>9} {:>9} {:>9}", "model", "accuracy", "log_loss", "auc");
    for r in &cmp.rows {
        let _ = writeln!(out, "{:<8} {:>9.4} {:>9.4} {:>9}", r.model.as_str(), r.accuracy, r.log_loss, fmt_opt(r.auc));
    }
    let best: Vec<&str> = cmp.best.iter().map(|k| k.as_str()).collect();
    let _ = writeln!(out, "best: {}", best.join(", "));
    out
}

#[derive(Serialize)]
struct PlotData {
    history: Vec<(usize, f64)>,
    forecast: Vec<(usize, f64)>,
    lower: Vec<(usize, f64)>,
    upper: Vec<(usize, f64)>,
}

#[derive(Serialize)]
struct ForecastOutput<'a> {
    column: &'a str,
    n_observations: usize,
    #[serde(flatten)]
    forecast: &'a ForecastResult,
}

#[allow(clippy::too_many_arguments)]
fn forecast(
    path: &Path,
    column: &str,
    horizon: usize,
    confidence: f64,
    alpha: f64,
    beta: f64,
    plot_data: bool,
    json: bool,
) -> CliResult {
    if horizon == 0 {
        return Err(CliError::Usage("--horizon must be at least 1".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(CliError::Usage(format!("--confidence {confidence} must lie in (0, 1)")));
    }
    let dataset = read_dataset(path)?;
    let j = dataset.column_index(column).ok_or_else(|| KpiError::UnknownColumn(column.to_string()))?;
    let series: Vec<f64> = dataset.column(j).flatten().collect();
    let result = holt::holt_fit_forecast(&series, horizon, alpha, beta, confidence)?;
    let n = series.len();

    if plot_data {
        let at = |f: fn(&analytics::ForecastStep) -> f64| result.steps.iter().map(|s| (n - 1 + s.step, f(s))).collect();
        return print_json(&PlotData {
            history: series.iter().copied().enumerate().collect(),
            forecast: at(|s| s.point),
            lower: at(|s| s.lower),
            upper: at(|s| s.upper),
        });
    }
    if json {
        return print_json(&ForecastOutput { column, n_observations: n, forecast: &result });
    }
    println!(
        "{column}: {n} observations, level {:.4}, trend {:.4}, residual std {:.4}",
        result.state.level, result.state.trend, result.residual_std
    );
    println!("{:.0}% interval (z = {:.4})", result.confidence * 100.0, result.z);
    println!("{:>4} {:>12} {:>12} {:>12}", "h", "point", "lower", "upper");
    for s in &result.steps {
        println!("{:>4} {:>12.4} {:>12.4} {:>12.4}", s.step, s.point, s.lower, s.upper);
    }
    Ok(())
}
