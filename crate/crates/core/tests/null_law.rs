use devian::monte_carlo::standard_normal_draw;
use devian::stats::ks_two_sample;
use devian::{
    build_design, detect, fit_ols, simulate_null_t, statistic_t, studentized_residuals,
    DesignMatrix, SimulationConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_design(seed: u64, n: usize, k: usize) -> DesignMatrix {
    // offset so a design column never equals the null draw with the same seed
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1_000_000);
    let cols: Vec<Vec<f64>> = (1..k)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    build_design(&cols, n).unwrap()
}

fn config(nsim: usize, seed: u64) -> SimulationConfig {
    SimulationConfig {
        nsim,
        seed,
        ..Default::default()
    }
}

#[test]
fn different_seeds_agree_within_standard_errors() {
    let design = random_design(1, 10, 2);
    let a = simulate_null_t(&design, &config(200_000, 1)).unwrap();
    let b = simulate_null_t(&design, &config(200_000, 2)).unwrap();
    assert_ne!(a.sorted_samples(), b.sorted_samples());
    for alpha in [0.05, 0.1, 0.2] {
        let se = a
            .quantile_standard_error(alpha)
            .unwrap()
            .hypot(b.quantile_standard_error(alpha).unwrap());
        let gap = (a.quantile(alpha) - b.quantile(alpha)).abs();
        assert!(gap <= 3.0 * se, "alpha {alpha}: gap {gap} vs se {se}");
    }
}

#[test]
fn law_is_free_of_coefficients_and_scale() {
    for (seed, n, k) in [(11, 12, 2), (12, 25, 4), (13, 40, 3)] {
        let design = random_design(seed, n, k);
        let null = simulate_null_t(&design, &config(20_000, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let theta: Vec<f64> = (0..k).map(|_| rng.random_range(-50.0..50.0)).collect();
        let sigma = rng.random_range(0.1..30.0);
        let mut y = vec![0.0; n];
        let shifted: Vec<f64> = (0..20_000)
            .map(|d| {
                standard_normal_draw(seed + 200, d, &mut y);
                for (i, v) in y.iter_mut().enumerate() {
                    let mean: f64 = design.row(i).iter().zip(&theta).map(|(a, b)| a * b).sum();
                    *v = mean + sigma * *v;
                }
                statistic_t(&studentized_residuals(&fit_ols(&design, &y).unwrap()).unwrap())
                    .unwrap()
            })
            .collect();
        let ks = ks_two_sample(null.sorted_samples(), &shifted);
        assert!(ks.p_value > 1e-3, "design {seed}: {ks:?}");
    }
}

#[test]
fn family_wise_level_at_two_alphas() {
    let design = random_design(21, 20, 3);
    let null = simulate_null_t(&design, &config(20_000, 21)).unwrap();
    let trials = 2000;
    let mut y = vec![0.0; 20];
    let stats: Vec<f64> = (0..trials)
        .map(|d| {
            standard_normal_draw(99, d, &mut y);
            statistic_t(&studentized_residuals(&fit_ols(&design, &y).unwrap()).unwrap()).unwrap()
        })
        .collect();
    for alpha in [0.05, 0.2] {
        let c = null.quantile(alpha);
        let rate = stats.iter().filter(|&&t| t > c).count() as f64 / trials as f64;
        let band = 3.0 * (alpha * (1.0 - alpha) / trials as f64).sqrt();
        assert!((rate - alpha).abs() <= band, "alpha {alpha}: rate {rate}");
    }
}

#[test]
fn p_value_at_the_quantile_is_close_to_alpha() {
    let design = random_design(31, 15, 2);
    let null = simulate_null_t(&design, &config(20_000, 31)).unwrap();
    let tol = 2.0 / (20_000f64).sqrt();
    for alpha in [0.01, 0.05, 0.2, 0.5] {
        let p = null.p_value(null.quantile(alpha));
        assert!((p - alpha).abs() <= tol, "alpha {alpha}: p {p}");
    }
}

#[test]
fn flags_agree_with_mass_above_the_threshold() {
    let design = random_design(41, 15, 2);
    let null = simulate_null_t(&design, &config(5_000, 41)).unwrap();
    let mut y = vec![0.0; 15];
    for d in 0..200 {
        standard_normal_draw(7, d, &mut y);
        y[(d % 15) as usize] += (d % 5) as f64 * 2.0;
        let alpha = 0.1;
        let report = detect(&fit_ols(&design, &y).unwrap(), &null, alpha).unwrap();
        let flagged = report.has_outliers();
        assert_eq!(flagged, report.t_obs > null.quantile(alpha));
        if flagged {
            assert!(null.mass_above(report.t_obs) <= alpha + 1.0 / 5_001.0);
        }
        for (i, e) in report.residuals.values.iter().enumerate() {
            assert_eq!(report.is_outlier(i), e.abs() > report.threshold);
        }
    }
}

#[test]
fn detection_pipeline_example() {
    let design = DesignMatrix::intercept_only(4).unwrap();
    let model = fit_ols(&design, &[0.1, -0.2, 0.05, 8.0]).unwrap();
    let null = simulate_null_t(&design, &config(20_000, 0)).unwrap();
    let report = detect(&model, &null, 0.05).unwrap();
    assert_eq!(report.outlier_indices, vec![3]);
    assert_eq!(report.outlier_values, vec![8.0]);
}
