//! Runtime scaling study: median wall-clock time of the full tabulation
//! against sample size or simulation count, and a least-squares growth rate.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::monte_carlo::{simulate_null_t_with, ResidualMethod, SimulationConfig};
use crate::regression::{
    build_design, fit_ols, studentized_residuals, studentized_residuals_oracle, DesignMatrix,
};
use crate::stats::median;
use crate::synth::{generate, SynthModel, WAGE_LIKE_ROWS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Vary the number of observations at a fixed simulation count.
    Size,
    /// Vary the simulation count on a fixed wage-like dataset.
    Nsim,
}

impl SweepKind {
    pub fn default_values(self) -> Vec<usize> {
        match self {
            SweepKind::Size => vec![100, 500, 1_000, 5_000, 10_000, 100_000],
            SweepKind::Nsim => vec![100, 500, 1_000, 5_000, 10_000, 15_000, 20_000, 25_000],
        }
    }

    pub fn default_repeats(self) -> usize {
        match self {
            SweepKind::Size => 200,
            SweepKind::Nsim => 100,
        }
    }
}

/// Least-squares line `runtime = r · x + b` with the usual diagnostics.
///
/// The slope statistics are `None` when fewer than three points are fitted
/// or the fit is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub r: f64,
    pub b: f64,
    pub r2: f64,
    pub adj_r2: Option<f64>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub rmse: f64,
}

pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
            context: "sweep values vs runtimes".into(),
        });
    }
    let m = xs.len();
    if m < 2 {
        return Err(Error::EmptyInput(
            "need at least two points to fit a rate".into(),
        ));
    }
    let mf = m as f64;
    let x_bar = xs.iter().sum::<f64>() / mf;
    let y_bar = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - x_bar) * (y - y_bar))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - y_bar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig(
            "sweep values must not all be equal".into(),
        ));
    }
    let r = sxy / sxx;
    let b = y_bar - r * x_bar;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - r * x - b).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    let rmse = (rss / mf).sqrt();

    let (adj_r2, t_stat, p_value) = if m > 2 {
        let df = mf - 2.0;
        let adj = 1.0 - (1.0 - r2) * (mf - 1.0) / df;
        let se = (rss / df / sxx).sqrt();
        if se > 0.0 {
            let t = r / se;
            let p = StudentsT::new(0.0, 1.0, df)
                .map(|d| 2.0 * d.sf(t.abs()))
                .ok();
            (Some(adj), Some(t), p)
        } else {
            (Some(adj), None, None)
        }
    } else {
        (None, None, None)
    };

    Ok(RateFit {
        r,
        b,
        r2,
        adj_r2,
        t_stat,
        p_value,
        rmse,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub sweep_kind: SweepKind,
    pub method: String,
    pub sweep_values: Vec<usize>,
    pub median_runtimes_s: Vec<f64>,
    pub repeats: usize,
    pub workers: usize,
    pub fit: RateFit,
}

impl BenchmarkRecord {
    pub fn to_csv(&self) -> String {
        // the fitted line is repeated on every row so the file stands alone
        let kind = match self.sweep_kind {
            SweepKind::Size => "size",
            SweepKind::Nsim => "nsim",
        };
        let mut out = String::from("sweep_kind,method,sweep_value,median_runtime_s,r,b\n");
        for (x, t) in self.sweep_values.iter().zip(&self.median_runtimes_s) {
            out.push_str(&format!(
                "{kind},{},{x},{t},{},{}\n",
                self.method, self.fit.r, self.fit.b
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub kind: SweepKind,
    pub values: Vec<usize>,
    pub repeats: usize,
    pub workers: usize,
    pub method: ResidualMethod,
    /// Simulation count used at every point of a size sweep.
    pub nsim: usize,
    pub seed: u64,
}

impl BenchOptions {
    pub fn new(kind: SweepKind) -> Self {
        BenchOptions {
            kind,
            values: kind.default_values(),
            repeats: kind.default_repeats(),
            workers: 1,
            method: ResidualMethod::Fast,
            nsim: 1_000,
            seed: 0,
        }
    }
}

/// One complete detection pass minus I/O: studentized residuals of the
/// observed data plus the null tabulation.
pub fn pipeline_once(
    design: &DesignMatrix,
    response: &[f64],
    config: &SimulationConfig,
    method: ResidualMethod,
) -> Result<f64> {
    let model = fit_ols(design, response)?;
    let e = match method {
        ResidualMethod::Fast => studentized_residuals(&model)?,
        ResidualMethod::Oracle => studentized_residuals_oracle(design, response)?,
    };
    let dist = simulate_null_t_with(design, config, method)?;
    Ok(dist.p_value(crate::regression::statistic_t(&e)?))
}

/// Median wall-clock seconds over `repeats` timed runs after one untimed
/// warm-up run.
pub fn median_runtime<F: FnMut() -> Result<()>>(repeats: usize, mut f: F) -> Result<f64> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    f()?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok(median(&times).expect("non-empty"))
}

fn dataset(model: SynthModel, n: usize, seed: u64) -> Result<(DesignMatrix, Vec<f64>)> {
    let data = generate(model, n, seed)?;
    let predictors: Vec<&[f64]> = data.columns[1..].iter().map(Vec::as_slice).collect();
    let design = build_design(&predictors, n)?;
    Ok((design, data.columns[0].clone()))
}

pub fn run_sweep(opts: &BenchOptions) -> Result<BenchmarkRecord> {
    if opts.values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "sweep values must be strictly increasing".into(),
        ));
    }
    let mut medians = Vec::with_capacity(opts.values.len());
    let wage = match opts.kind {
        SweepKind::Nsim => Some(dataset(SynthModel::WageLike, WAGE_LIKE_ROWS, opts.seed)?),
        SweepKind::Size => None,
    };
    for &v in &opts.values {
        let (design, response, nsim) = match &wage {
            Some((d, y)) => (d.clone(), y.clone(), v),
            None => {
                let (d, y) = dataset(SynthModel::Linear, v, opts.seed)?;
                (d, y, opts.nsim)
            }
        };
        let config = SimulationConfig {
            nsim,
            seed: opts.seed,
            workers: opts.workers,
            ..Default::default()
        };
        let t = median_runtime(opts.repeats, || {
            pipeline_once(&design, &response, &config, opts.method).map(|_| ())
        })?;
        medians.push(t);
    }
    let xs: Vec<f64> = opts.values.iter().map(|&v| v as f64).collect();
    let fit = fit_rate(&xs, &medians)?;
    Ok(BenchmarkRecord {
        sweep_kind: opts.kind,
        method: match opts.method {
            ResidualMethod::Fast => "fast".into(),
            ResidualMethod::Oracle => "naive".into(),
        },
        sweep_values: opts.values.clone(),
        median_runtimes_s: medians,
        repeats: opts.repeats,
        workers: opts.workers,
        fit,
    })
}
