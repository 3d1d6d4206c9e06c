//! Monte-Carlo tabulation of the null law of `T = max_i |ê_i|`.
//!
//! The law of the studentized residuals does not depend on the regression
//! coefficients or the noise level, only on the design, so it is enough to
//! simulate standard-normal responses.
//!
//! Every draw has its own random stream: a ChaCha8 generator seeded from the
//! master seed with the stream number set to the draw index. The sample is
//! therefore a pure function of `(design, seed, nsim)` no matter how draws
//! are scheduled across workers.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{loo_rss_is_zero, statistic_t, studentized_residuals_oracle, DesignMatrix};

/// Two-sided 95% standard normal quantile.
const Z_975: f64 = 1.959_963_984_540_054;

pub const DEFAULT_NSIM: usize = 20_000;
pub const DEFAULT_ALPHA: f64 = 0.2;
pub const MIN_NSIM: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub nsim: usize,
    pub seed: u64,
    pub workers: usize,
    pub alpha: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            nsim: DEFAULT_NSIM,
            seed: 0,
            workers: 1,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nsim < MIN_NSIM {
            return Err(Error::InvalidConfig(format!(
                "nsim must be at least {MIN_NSIM}, got {}",
                self.nsim
            )));
        }
        validate_alpha(self.alpha)?;
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// How each simulated `T` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualMethod {
    /// One fit per draw plus deletion identities.
    #[default]
    Fast,
    /// `n` explicit leave-one-out refits per draw.
    Oracle,
}

/// Sorted Monte-Carlo sample of `T` under the null for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTDistribution {
    sorted_samples: Vec<f64>,
    design_fingerprint: String,
    seed: u64,
}

impl EmpiricalTDistribution {
    /// Wraps raw draws, sorting them.
    pub fn from_samples(
        mut samples: Vec<f64>,
        design_fingerprint: impl Into<String>,
        seed: u64,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("simulated sample".into()));
        }
        if let Some(v) = samples.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "simulated statistics must be positive and finite, found {v}"
            )));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalTDistribution {
            sorted_samples: samples,
            design_fingerprint: design_fingerprint.into(),
            seed,
        })
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted_samples
    }

    pub fn design_fingerprint(&self) -> &str {
        &self.design_fingerprint
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn nsim(&self) -> usize {
        self.sorted_samples.len()
    }

    /// Order-statistic estimate of the quantile of order `1 - alpha`:
    /// the sample of rank `ceil((1 - alpha) nsim)`.
    ///
    /// # Panics
    ///
    /// If `alpha` is outside `(0, 1)`.
    pub fn quantile(&self, alpha: f64) -> f64 {
        assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
        let nsim = self.nsim();
        // the nudge keeps exact products such as 0.95 * 100 from rounding up a rank
        let rank = ((1.0 - alpha) * nsim as f64 - 1e-9).ceil() as usize;
        self.sorted_samples[rank.clamp(1, nsim) - 1]
    }

    /// `(1 + #{samples ≥ t_obs}) / (nsim + 1)`.
    pub fn p_value(&self, t_obs: f64) -> f64 {
        let below = self.sorted_samples.partition_point(|&s| s < t_obs);
        let at_or_above = self.nsim() - below;
        (1 + at_or_above) as f64 / (self.nsim() + 1) as f64
    }

    /// `(1 + #{samples > c}) / (nsim + 1)`: the Monte-Carlo mass strictly
    /// above a threshold, on the same scale as [`Self::p_value`].
    pub fn mass_above(&self, c: f64) -> f64 {
        let at_or_below = self.sorted_samples.partition_point(|&s| s <= c);
        (1 + self.nsim() - at_or_below) as f64 / (self.nsim() + 1) as f64
    }

    /// Half-width of the distribution-free 95% confidence interval for the
    /// quantile of order `1 - alpha`, from the binomial law of order
    /// statistic ranks `nsim(1-α) ± z √(nsim α (1-α))`.
    pub fn quantile_standard_error(&self, alpha: f64) -> Result<f64> {
        validate_alpha(alpha)?;
        let nsim = self.nsim();
        let n = nsim as f64;
        let center = n * (1.0 - alpha);
        let spread = Z_975 * (n * alpha * (1.0 - alpha)).sqrt();
        let lo = (center - spread).floor();
        let hi = (center + spread).ceil();
        if lo < 1.0 || hi > n {
            return Err(Error::InsufficientSamples {
                order: 1.0 - alpha,
                nsim,
            });
        }
        let (lo, hi) = (lo as usize, hi as usize);
        Ok((self.sorted_samples[hi - 1] - self.sorted_samples[lo - 1]) / 2.0)
    }
}

/// The random stream used by draw `draw` under master seed `seed`.
pub fn draw_rng(seed: u64, draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    rng
}

/// Fills `buf` with iid standard normals from draw `draw`'s stream.
pub fn standard_normal_draw(seed: u64, draw: u64, buf: &mut [f64]) {
    let mut rng = draw_rng(seed, draw);
    for v in buf.iter_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
}

struct Scratch {
    y: Vec<f64>,
    coef: Vec<f64>,
    resid: Vec<f64>,
}

struct Kernel<'a> {
    design: &'a DesignMatrix,
    inv_one_minus_h: Vec<f64>,
    df: f64,
    method: ResidualMethod,
    seed: u64,
}

impl<'a> Kernel<'a> {
    fn new(design: &'a DesignMatrix, seed: u64, method: ResidualMethod) -> Result<Self> {
        design.check_leave_one_out()?;
        Ok(Kernel {
            design,
            inv_one_minus_h: design.leverages().iter().map(|h| 1.0 / (1.0 - h)).collect(),
            df: (design.nrows() - design.ncols() - 1) as f64,
            method,
            seed,
        })
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            y: vec![0.0; self.design.nrows()],
            coef: vec![0.0; self.design.ncols()],
            resid: vec![0.0; self.design.nrows()],
        }
    }

    /// `None` when the draw has a vanishing leave-one-out variance.
    fn draw(&self, scratch: &mut Scratch, draw: u64) -> Result<Option<f64>> {
        standard_normal_draw(self.seed, draw, &mut scratch.y);
        match self.method {
            ResidualMethod::Fast => Ok(self.fast_t(scratch)),
            ResidualMethod::Oracle => match studentized_residuals_oracle(self.design, &scratch.y) {
                Ok(e) => statistic_t(&e).map(Some),
                Err(Error::ZeroResidualVariance { .. }) => Ok(None),
                Err(e) => Err(e),
            },
        }
    }

    // ê_i² = df · u_i / (rss - u_i) with u_i = r_i² / (1 - h_i) is increasing
    // in u_i, so T only needs the largest u_i.
    fn fast_t(&self, s: &mut Scratch) -> Option<f64> {
        self.design.project(&s.y, &mut s.coef, &mut s.resid);
        let mut rss = 0.0;
        let mut u_max = 0.0f64;
        for (r, w) in s.resid.iter().zip(&self.inv_one_minus_h) {
            let r2 = r * r;
            rss += r2;
            u_max = u_max.max(r2 * w);
        }
        let scale: f64 = s.y.iter().map(|v| v * v).sum();
        let rss_loo = rss - u_max;
        if loo_rss_is_zero(rss_loo, rss, scale) {
            return None;
        }
        Some((self.df * u_max / rss_loo).sqrt())
    }
}

/// Null draws of `T` for draw indices in `draws`, returned in index order.
pub fn null_draws(
    design: &DesignMatrix,
    seed: u64,
    draws: Range<u64>,
    workers: usize,
    method: ResidualMethod,
) -> Result<Vec<f64>> {
    if workers == 0 {
        return Err(Error::InvalidConfig("workers must be at least 1".into()));
    }
    let kernel = Kernel::new(design, seed, method)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;

    let start = draws.start;
    let results: Vec<Result<Option<f64>>> = pool.install(|| {
        (0..(draws.end - draws.start) as usize)
            .into_par_iter()
            .with_min_len(64)
            .map_init(
                || kernel.scratch(),
                |scratch, offset| kernel.draw(scratch, start + offset as u64),
            )
            .collect()
    });

    let mut out = Vec::with_capacity(results.len());
    for (offset, r) in results.into_iter().enumerate() {
        match r? {
            Some(t) => out.push(t),
            None => {
                return Err(Error::SimulationDegenerate {
                    draw: start + offset as u64,
                })
            }
        }
    }
    Ok(out)
}

/// Tabulates the null law of `T` for `design` with the fast residual path.
pub fn simulate_null_t(
    design: &DesignMatrix,
    config: &SimulationConfig,
) -> Result<EmpiricalTDistribution> {
    simulate_null_t_with(design, config, ResidualMethod::Fast)
}

pub fn simulate_null_t_with(
    design: &DesignMatrix,
    config: &SimulationConfig,
    method: ResidualMethod,
) -> Result<EmpiricalTDistribution> {
    config.validate()?;
    let samples = null_draws(
        design,
        config.seed,
        0..config.nsim as u64,
        config.workers,
        method,
    )?;
    EmpiricalTDistribution::from_samples(samples, design.fingerprint(), config.seed)
}
