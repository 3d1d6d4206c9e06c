//! Acceptance gate. Every criterion runs in sequence inside one test so that
//! the timing checks have the machine to themselves; each prints a single
//! PASS/FAIL line to stderr (visible without `--nocapture`).

use std::io::Write;
use std::time::Instant;

use devian::bench::{run_sweep, BenchOptions, SweepKind};
use devian::data_io::report_to_json;
use devian::monte_carlo::{null_draws, standard_normal_draw};
use devian::stats::{ks_one_sample, ks_two_sample};
use devian::{
    build_design, detect, fit_ols, simulate_null_t, simulate_null_t_with, statistic_t,
    studentized_residuals, studentized_residuals_oracle, zscore_last, DesignMatrix,
    EmpiricalTDistribution, ResidualMethod, SimulationConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, StudentsT};

const KS_LEVEL: f64 = 1e-3;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Intercept plus `k - 1` standard-normal columns.
fn random_design(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DesignMatrix {
    let cols: Vec<Vec<f64>> = (1..k).map(|_| normals(rng, n)).collect();
    build_design(&cols, n).expect("random design has full rank")
}

fn mean_response(design: &DesignMatrix, theta: &[f64]) -> Vec<f64> {
    (0..design.nrows())
        .map(|i| design.row(i).iter().zip(theta).map(|(a, b)| a * b).sum())
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut instances = 0;
    while instances < 200 {
        let k = rng.random_range(1..=6);
        let n = rng.random_range(k + 2..=60);
        let design = random_design(&mut rng, n, k);
        let mut y = normals(&mut rng, n);
        // plant a gross error in about half the instances
        if rng.random_bool(0.5) {
            let i = rng.random_range(0..n);
            y[i] += 10.0;
        }
        let fast = fit_ols(&design, &y).and_then(|m| studentized_residuals(&m));
        let oracle = studentized_residuals_oracle(&design, &y);
        match (fast, oracle) {
            (Ok(f), Ok(o)) => worst = worst.max(max_abs_diff(&f.values, &o.values)),
            (Err(_), Err(_)) => {}
            (f, o) => {
                return outcome(
                    false,
                    format!("n={n} k={k}: fast {:?} vs oracle {:?}", f.err(), o.err()),
                )
            }
        }
        instances += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 10.0,
        format!("200 instances, max |fast - oracle| = {worst:.2e}, {secs:.2} s"),
    )
}

fn invariance() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(1..=5);
        let n = rng.random_range(k + 3..=40);
        let design = random_design(&mut rng, n, k);
        let x: Vec<f64> = normals(&mut rng, n)
            .iter()
            .map(|v| 50.0 * v + 7.0)
            .collect();
        let theta: Vec<f64> = (0..k).map(|_| rng.random_range(-100.0..100.0)).collect();
        let sigma = rng.random_range(0.01..100.0);
        let shift = mean_response(&design, &theta);
        let z: Vec<f64> = x.iter().zip(&shift).map(|(a, m)| (a - m) / sigma).collect();
        let ex = studentized_residuals(&fit_ols(&design, &x).unwrap()).unwrap();
        let ez = studentized_residuals(&fit_ols(&design, &z).unwrap()).unwrap();
        worst = worst.max(max_abs_diff(&ex.values, &ez.values));
    }

    let design = random_design(&mut rng, 30, 3);
    let draws = 200_000usize;
    let config = SimulationConfig {
        nsim: draws,
        seed: 1,
        ..Default::default()
    };
    let standard = simulate_null_t(&design, &config).unwrap();
    let theta = [100.0, -5.0, 3.0];
    let sigma = 17.0;
    let mean = mean_response(&design, &theta);
    let mut y = vec![0.0; 30];
    let shifted: Vec<f64> = (0..draws as u64)
        .map(|d| {
            standard_normal_draw(2, d, &mut y);
            for (v, m) in y.iter_mut().zip(&mean) {
                *v = m + sigma * *v;
            }
            statistic_t(&studentized_residuals(&fit_ols(&design, &y).unwrap()).unwrap()).unwrap()
        })
        .collect();
    let ks = ks_two_sample(standard.sorted_samples(), &shifted);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && ks.p_value > KS_LEVEL && secs < 60.0,
        format!(
            "exact max diff {worst:.2e}; KS D={:.4} p={:.3} over 2x{draws}; {secs:.1} s",
            ks.statistic, ks.p_value
        ),
    )
}

fn marginal_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, k) in [(10, 1), (30, 3)] {
        let design = random_design(&mut rng, n, k);
        let mut y = vec![0.0; n];
        let first: Vec<f64> = (0..50_000)
            .map(|d| {
                standard_normal_draw(30 + n as u64, d, &mut y);
                studentized_residuals(&fit_ols(&design, &y).unwrap())
                    .unwrap()
                    .values[0]
            })
            .collect();
        let t = StudentsT::new(0.0, 1.0, (n - k - 1) as f64).unwrap();
        let ks = ks_one_sample(&first, |v| t.cdf(v));
        pass &= ks.p_value > KS_LEVEL;
        detail.push(format!(
            "(n={n},k={k}) D={:.4} p={:.3}",
            ks.statistic, ks.p_value
        ));
    }
    outcome(pass, detail.join("; "))
}

fn zscore_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(4..=50);
        let scale = rng.random_range(0.1..10.0);
        let series: Vec<f64> = normals(&mut rng, n).iter().map(|v| scale * v).collect();
        let z = zscore_last(&series).unwrap();
        let design = DesignMatrix::intercept_only(n).unwrap();
        let e = studentized_residuals(&fit_ols(&design, &series).unwrap()).unwrap();
        worst = worst.max((z - e.values[n - 1]).abs());
    }
    outcome(worst <= 1e-12, format!("100 series, max diff {worst:.2e}"))
}

fn level_control() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let design = random_design(&mut rng, 30, 3);
    let alpha = 0.05;
    let config = SimulationConfig {
        nsim: 20_000,
        seed: 5,
        ..Default::default()
    };
    let dist = simulate_null_t(&design, &config).unwrap();
    let mut y = vec![0.0; 30];
    let mut flagged = 0usize;
    let mut p_values = Vec::with_capacity(2000);
    for d in 0..2000 {
        standard_normal_draw(55, d, &mut y);
        let report = detect(&fit_ols(&design, &y).unwrap(), &dist, alpha).unwrap();
        flagged += report.has_outliers() as usize;
        p_values.push(report.p_value);
    }
    let rate = flagged as f64 / 2000.0;
    let band = 3.0 * (alpha * (1.0 - alpha) / 2000.0).sqrt();
    let ks = ks_one_sample(&p_values, |p| p.clamp(0.0, 1.0));
    outcome(
        (rate - alpha).abs() <= band && ks.p_value > KS_LEVEL,
        format!(
            "flag rate {rate:.4} (band {:.3}..{:.3}); p-value KS D={:.4} p={:.3}",
            alpha - band,
            alpha + band,
            ks.statistic,
            ks.p_value
        ),
    )
}

fn determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let design = random_design(&mut rng, 40, 3);
    let mut y = normals(&mut rng, 40);
    y[7] += 6.0;
    let model = fit_ols(&design, &y).unwrap();
    let runs: Vec<(Vec<u64>, String)> = [1, 2, 6]
        .iter()
        .map(|&workers| {
            let config = SimulationConfig {
                nsim: 20_000,
                seed: 9,
                workers,
                ..Default::default()
            };
            let dist = simulate_null_t(&design, &config).unwrap();
            let bits = dist.sorted_samples().iter().map(|v| v.to_bits()).collect();
            let json = report_to_json(&detect(&model, &dist, 0.05).unwrap()).unwrap();
            (bits, json)
        })
        .collect();
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(same, "workers 1, 2, 6 with seed 9, nsim 20000".into())
}

fn performance_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let design = random_design(&mut rng, 5000, 2);
    let y = normals(&mut rng, 5000);
    let config = SimulationConfig {
        nsim: 1000,
        seed: 7,
        ..Default::default()
    };

    let time = |method| {
        let start = Instant::now();
        let model = fit_ols(&design, &y).unwrap();
        let e = match method {
            ResidualMethod::Fast => studentized_residuals(&model).unwrap(),
            ResidualMethod::Oracle => studentized_residuals_oracle(&design, &y).unwrap(),
        };
        let dist = simulate_null_t_with(&design, &config, method).unwrap();
        dist.p_value(statistic_t(&e).unwrap());
        start.elapsed().as_secs_f64()
    };
    let fast = time(ResidualMethod::Fast);
    let oracle = time(ResidualMethod::Oracle);
    let speedup = oracle / fast;

    let sweep = |method| {
        let mut opts = BenchOptions::new(SweepKind::Size);
        opts.values = vec![50, 100, 200, 400];
        opts.repeats = 3;
        opts.nsim = 100;
        opts.method = method;
        run_sweep(&opts).unwrap().fit.r
    };
    let r_fast = sweep(ResidualMethod::Fast);
    let r_naive = sweep(ResidualMethod::Oracle);
    outcome(
        speedup >= 20.0 && r_fast < r_naive,
        format!(
            "n=5000 nsim=1000: fast {fast:.3} s, oracle {oracle:.1} s ({speedup:.0}x); \
             r_fast={r_fast:.3e} r_naive={r_naive:.3e} s/row"
        ),
    )
}

fn hand_values() -> Outcome {
    let d4 = DesignMatrix::intercept_only(4).unwrap();
    let sym = [-1.0, -1.0, 1.0, 1.0];
    let e_fast = studentized_residuals(&fit_ols(&d4, &sym).unwrap()).unwrap();
    let e_oracle = studentized_residuals_oracle(&d4, &sym).unwrap();
    let t = statistic_t(&e_fast).unwrap();
    let sym_ok = max_abs_diff(&e_fast.values, &sym) <= 1e-12
        && max_abs_diff(&e_oracle.values, &sym) <= 1e-12
        && (t - 1.0).abs() <= 1e-12;

    let jump = [1.0, 2.0, 3.0, 10.0];
    let f4 = studentized_residuals(&fit_ols(&d4, &jump).unwrap())
        .unwrap()
        .values[3];
    let o4 = studentized_residuals_oracle(&d4, &jump).unwrap().values[3];
    let expected = 4.0 * 3f64.sqrt();
    let jump_ok = (f4 - expected).abs() <= 1e-12 && (o4 - expected).abs() <= 1e-12;
    outcome(
        sym_ok && jump_ok,
        format!("T={t}, e4 fast={f4:.15} oracle={o4:.15} (4*sqrt3={expected:.15})"),
    )
}

fn quantile_self_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let design = random_design(&mut rng, 30, 3);
    let draws = null_draws(&design, 11, 0..200_000, 1, ResidualMethod::Fast).unwrap();
    let (a, b) = draws.split_at(100_000);
    let half = |s: &[f64]| EmpiricalTDistribution::from_samples(s.to_vec(), "", 11).unwrap();
    let (a, b) = (half(a), half(b));
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.05, 0.2] {
        let gap = (a.quantile(alpha) - b.quantile(alpha)).abs();
        let se = a
            .quantile_standard_error(alpha)
            .unwrap()
            .hypot(b.quantile_standard_error(alpha).unwrap());
        pass &= gap <= 3.0 * se;
        detail.push(format!(
            "alpha={alpha}: gap {gap:.4} vs 3 SE {:.4}",
            3.0 * se
        ));
    }
    outcome(pass, detail.join("; "))
}

#[test]
fn primary_acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("invariance", invariance),
        ("marginal law", marginal_law),
        ("z-score reduction", zscore_reduction),
        ("level control", level_control),
        ("determinism", determinism),
        ("performance ordering", performance_ordering),
        ("hand-checkable values", hand_values),
        ("quantile self-consistency", quantile_self_consistency),
    ];
    let mut failed = Vec::new();
    let mut stderr = std::io::stderr();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let line = format!("[{tag}] {}. {name}: {}\n", i + 1, o.detail);
        stderr.write_all(line.as_bytes()).unwrap();
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
