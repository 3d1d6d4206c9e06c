//! Command-line front-end.
//!
//! Exit codes: 0 on success, 2 on data errors, 3 on model errors
//! (rank deficiency, leverage one), 1 on anything else.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_sweep, BenchOptions, SweepKind};
use crate::data_io::{
    load_csv, parse_transforms, render_line_chart, render_plots, write_bytes, write_plots,
    write_report, ReportFormat,
};
use crate::detection::{detect_with_residuals, DetectionReport};
use crate::error::Result;
use crate::monte_carlo::{
    simulate_null_t_with, ResidualMethod, SimulationConfig, DEFAULT_ALPHA, DEFAULT_NSIM,
};
use crate::regression::{
    build_design, fit_ols, studentized_residuals, studentized_residuals_oracle,
};
use crate::synth::{generate, SynthModel};

#[derive(Debug, Parser)]
#[command(
    name = "devian",
    version,
    about = "Detect abnormal observations in a Gaussian linear model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model, tabulate the null law of max |studentized residual| and flag outliers.
    Detect(DetectArgs),
    /// Measure median runtime against sample size or simulation count.
    Bench(BenchArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Response column.
    #[arg(long)]
    pub response: String,
    /// Predictor columns; an intercept is always added.
    #[arg(long, value_delimiter = ',')]
    pub predictors: Vec<String>,
    /// Risk level; defaults to 0.2.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_NSIM)]
    pub nsim: usize,
    #[arg(long, env = "DEVIAN_WORKERS", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the report.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    /// Directory for the SVG figures.
    #[arg(long)]
    pub plots: Option<PathBuf>,
    /// Use explicit leave-one-out refits instead of the deletion identities.
    #[arg(long)]
    pub oracle: bool,
    /// Column transforms, e.g. `x:square,wage:log`.
    #[arg(long)]
    pub transform: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = SweepKind::Size)]
    pub sweep: SweepKind,
    /// Sweep values; defaults depend on the sweep kind.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<usize>,
    /// Timed repetitions per point (default 200 for size, 100 for nsim).
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long, env = "DEVIAN_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Simulation count at each point of a size sweep.
    #[arg(long, default_value_t = 1_000)]
    pub nsim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Benchmark the leave-one-out refit path.
    #[arg(long)]
    pub naive: bool,
    /// Output file; `.csv` gives CSV, anything else JSON. A chart is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of rows (default 1000 for linear, 599 for wage-like).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = SynthModel::Linear)]
    pub model: SynthModel,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Detect(a) => cmd_detect(&a).map(|_| ()),
        Command::Bench(a) => cmd_bench(&a),
        Command::Synth(a) => cmd_synth(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn cmd_detect(args: &DetectArgs) -> Result<DetectionReport> {
    let alpha = args.alpha.unwrap_or_else(|| {
        eprintln!(
            "warning: using the default alpha = {DEFAULT_ALPHA}, which flags outliers at a permissive 20% family-wise level"
        );
        DEFAULT_ALPHA
    });
    let config = SimulationConfig {
        nsim: args.nsim,
        seed: args.seed,
        workers: args.workers,
        alpha,
    };
    config.validate()?;
    let method = if args.oracle {
        ResidualMethod::Oracle
    } else {
        ResidualMethod::Fast
    };

    let transforms = match &args.transform {
        Some(spec) => parse_transforms(spec)?,
        None => Vec::new(),
    };
    let data = load_csv(&args.data, &args.response, &args.predictors, &transforms)?;
    if !data.dropped_rows.is_empty() {
        eprintln!(
            "note: dropped {} row(s) with missing or non-finite values: {:?}",
            data.dropped_rows.len(),
            data.dropped_rows
        );
    }

    let design = build_design(&data.predictor_columns(), data.nrows())?;
    design.check_leave_one_out()?;
    let model = fit_ols(&design, &data.response)?;
    let residuals = match method {
        ResidualMethod::Fast => studentized_residuals(&model)?,
        ResidualMethod::Oracle => studentized_residuals_oracle(&design, &data.response)?,
    };
    let dist = simulate_null_t_with(&design, &config, method)?;
    let report = detect_with_residuals(&model, &residuals, &dist, alpha)?
        .with_rows(data.rows.clone(), data.dropped_rows.clone())?;

    if let Some(out) = &args.out {
        write_report(&report, args.format, out)?;
    }
    if let Some(dir) = &args.plots {
        write_plots(dir, &render_plots(&report, &dist))?;
    }

    println!("observations: {} (k = {})", data.nrows(), design.ncols());
    println!("T observed:   {}", report.t_obs);
    println!(
        "threshold:    {} (alpha = {alpha}, nsim = {})",
        report.threshold, report.nsim
    );
    println!("p-value:      {}", report.p_value);
    if report.has_outliers() {
        println!("outliers (data row, value, studentized residual):");
        for &i in &report.outlier_indices {
            println!(
                "  {}\t{}\t{}",
                report.row_map[i], report.response[i], report.residuals.values[i]
            );
        }
    } else {
        println!("outliers:     none");
    }
    Ok(report)
}

fn chart_path(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let mut opts = BenchOptions::new(args.sweep);
    if !args.values.is_empty() {
        opts.values = args.values.clone();
    }
    if let Some(r) = args.repeats {
        opts.repeats = r;
    }
    opts.workers = args.workers;
    opts.nsim = args.nsim;
    opts.seed = args.seed;
    if args.naive {
        opts.method = ResidualMethod::Oracle;
    }

    let record = run_sweep(&opts)?;
    println!("sweep_value\tmedian_runtime_s");
    for (x, t) in record.sweep_values.iter().zip(&record.median_runtimes_s) {
        println!("{x}\t{t:.6e}");
    }
    println!(
        "rate r = {:.4e} s/unit, b = {:.4e} s, R2 = {:.4}",
        record.fit.r, record.fit.b, record.fit.r2
    );

    if let Some(out) = &args.out {
        let is_csv = out
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let body = if is_csv {
            record.to_csv()
        } else {
            serde_json::to_string_pretty(&record)?
        };
        write_bytes(out, body.as_bytes())?;
        let xs: Vec<f64> = record.sweep_values.iter().map(|&v| v as f64).collect();
        let label = match record.sweep_kind {
            SweepKind::Size => "sample size",
            SweepKind::Nsim => "number of simulations",
        };
        let svg = render_line_chart(
            &format!("Median runtime ({} path)", record.method),
            label,
            &xs,
            &record.median_runtimes_s,
            Some((record.fit.r, record.fit.b)),
        );
        write_bytes(&chart_path(out), &svg)?;
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let n = args.n.unwrap_or_else(|| args.model.default_rows());
    let data = generate(args.model, n, args.seed)?;
    data.write_csv(&args.out)?;
    println!("wrote {} rows to {}", n, args.out.display());
    Ok(())
}
