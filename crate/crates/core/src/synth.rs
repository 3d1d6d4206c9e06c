//! Synthetic datasets for benchmarking and demos.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};

/// Noise standard deviation of the linear benchmark model.
pub const LINEAR_NOISE_SD: f64 = 2.0;
pub const LINEAR_INTERCEPT: f64 = 25.0;
pub const LINEAR_SLOPE: f64 = 3.4;
pub const WAGE_LIKE_ROWS: usize = 599;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthModel {
    /// `y = 25 + 3.4 x + ε`, `x ~ N(0, 1)`, `ε ~ N(0, 2²)`.
    Linear,
    /// Log-wage against age, years of education and number of children.
    WageLike,
}

impl SynthModel {
    pub fn response(self) -> &'static str {
        match self {
            SynthModel::Linear => "y",
            SynthModel::WageLike => "log_wage",
        }
    }

    pub fn predictors(self) -> &'static [&'static str] {
        match self {
            SynthModel::Linear => &["x"],
            SynthModel::WageLike => &["age", "education", "children"],
        }
    }

    /// Design columns including the intercept.
    pub fn ncols(self) -> usize {
        self.predictors().len() + 1
    }

    pub fn default_rows(self) -> usize {
        match self {
            SynthModel::Linear => 1000,
            SynthModel::WageLike => WAGE_LIKE_ROWS,
        }
    }
}

/// Named columns, response first.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl SyntheticData {
    pub fn nrows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.names)?;
        for i in 0..self.nrows() {
            w.write_record(self.columns.iter().map(|c| c[i].to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

pub fn generate(model: SynthModel, n: usize, seed: u64) -> Result<SyntheticData> {
    let k = model.ncols();
    if n <= k + 1 {
        return Err(Error::TooFewRows { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = std::iter::once(model.response())
        .chain(model.predictors().iter().copied())
        .map(String::from)
        .collect();

    let columns = match model {
        SynthModel::Linear => {
            let noise = Normal::new(0.0, LINEAR_NOISE_SD).expect("valid sd");
            let mut x = Vec::with_capacity(n);
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                let xi: f64 = rng.sample(rand_distr::StandardNormal);
                x.push(xi);
                y.push(LINEAR_INTERCEPT + LINEAR_SLOPE * xi + noise.sample(&mut rng));
            }
            vec![y, x]
        }
        SynthModel::WageLike => {
            let noise = Normal::new(0.0, 0.45).expect("valid sd");
            let kids = Poisson::new(1.1).expect("valid rate");
            let (mut w, mut age, mut edu, mut ch) = (
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            );
            for _ in 0..n {
                let a = rng.random_range(18..=64) as f64;
                let e = rng.random_range(8..=20) as f64;
                let c: f64 = Distribution::<f64>::sample(&kids, &mut rng).min(6.0);
                w.push(1.2 + 0.015 * a + 0.09 * e - 0.02 * c + noise.sample(&mut rng));
                age.push(a);
                edu.push(e);
                ch.push(c);
            }
            vec![w, age, edu, ch]
        }
    };
    Ok(SyntheticData { names, columns })
}
