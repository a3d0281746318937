//! Cross-module integration checks of the fitting pipeline: a single-angle
//! maximum-likelihood oracle, an end-to-end bivariate run with tail
//! probabilities against the quadrature oracle, and sample-cloud containment
//! under the theoretical gauges.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use limitset_core::copulas::{
    gauge_gaussian, gauge_student_t, nested_correlation, region_log_prob, sample, CopulaSpec,
};
use limitset_core::diagnostics::{male, sample_truncated_gamma};
use limitset_core::gauge::{fit, fit_gauge, fit_threshold, FitConfig};
use limitset_core::geometry::{decompose, linf, sample_sphere, AngleSet, PolarSample};
use limitset_core::inference::tail_probability;
use limitset_core::margins::laplace_quantile;
use limitset_core::net::{truncgamma_nll, MlpParams, TrainConfig};

fn quick_config(seed: u64) -> FitConfig {
    FitConfig {
        tau: 0.75,
        quantile_hidden: vec![16, 16],
        gauge_hidden: vec![24, 24],
        train: TrainConfig {
            epochs: 80,
            batch_size: 512,
            patience: 10,
            learning_rate: 3e-3,
            seed,
            ..TrainConfig::default()
        },
        pretrain_epochs: 40,
        pretrain_samples: 5_000,
        wset_size: 50_000,
        wset_seed: 4242,
        refresh_subsample: 5_000,
    }
}

/// Direct 2-parameter maximum likelihood for the truncated gamma over a
/// one-angle sample: coarse log-scale grid then coordinate refinement.
/// Independent of the network training path.
fn direct_truncgamma_mle(radii: &[f64], thresh: f64) -> (f64, f64) {
    let nll = |alpha: f64, rate: f64| -> f64 {
        radii
            .iter()
            .map(|&r| truncgamma_nll(r, rate, alpha, thresh).unwrap())
            .sum::<f64>()
    };
    let mut best = (f64::INFINITY, 1.0, 1.0);
    for la in -20..=30 {
        for lr in -30..=20 {
            let alpha = (la as f64 * 0.1).exp();
            let rate = (lr as f64 * 0.1).exp();
            let v = nll(alpha, rate);
            if v < best.0 {
                best = (v, alpha, rate);
            }
        }
    }
    let (mut alpha, mut rate) = (best.1, best.2);
    let mut step = 0.05;
    for _ in 0..60 {
        let mut improved = false;
        for (da, dr) in [(step, 0.0_f64), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let a2 = alpha * da.exp();
            let r2 = rate * dr.exp();
            if nll(a2, r2) < nll(alpha, rate) {
                alpha = a2;
                rate = r2;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
            if step < 1e-6 {
                break;
            }
        }
    }
    (alpha, rate)
}

#[test]
fn single_angle_gauge_matches_direct_mle() {
    // all observations share one angle; the fitted rescaled gauge there must
    // track the one-dimensional truncated-gamma MLE of the rate
    let d = 2usize;
    let w0 = [0.6, 0.8];
    let thresh = 1.2;
    let true_alpha = 2.0;
    let true_rate = 1.4;
    let n = 10_000;
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let radii: Vec<f64> = (0..n)
        .map(|_| sample_truncated_gamma(true_alpha, true_rate, thresh, &mut rng).unwrap())
        .collect();
    let (mle_alpha, mle_rate) = direct_truncgamma_mle(&radii, thresh);

    let angles = AngleSet::from_flat(
        (0..n).flat_map(|_| w0.to_vec()).collect::<Vec<f64>>(),
        d,
    )
    .unwrap();
    let polar = PolarSample {
        radii,
        angles,
        dropped_zero_rows: 0,
    };
    // constant threshold network pinned at the true threshold
    let mut qnet = MlpParams::he_init(d, &[4], &mut ChaCha20Rng::seed_from_u64(1));
    for l in qnet.layers.iter_mut() {
        l.weights.iter_mut().for_each(|w| *w = 0.0);
        l.bias.iter_mut().for_each(|b| *b = 0.0);
    }
    qnet.layers.last_mut().unwrap().bias[0] = thresh.ln();

    let mut config = quick_config(3);
    config.train.epochs = 150;
    config.train.patience = 15;
    let fitted = fit_gauge(&polar, &qnet, &config).unwrap();
    let g_at_w0 = fitted.model.rescaled_gauge(&w0);
    assert!(
        (g_at_w0 - mle_rate).abs() / mle_rate < 0.10,
        "fitted gauge {g_at_w0} vs direct MLE rate {mle_rate} (true {true_rate})"
    );
    assert!(
        (fitted.model.alpha - mle_alpha).abs() / mle_alpha < 0.25,
        "fitted alpha {} vs MLE {mle_alpha} (true {true_alpha})",
        fitted.model.alpha
    );
}

#[test]
fn bivariate_gaussian_end_to_end() {
    // full pipeline on a Gaussian copula: the fitted gauge approaches the
    // closed form, and a far joint tail probability lands within one MALE
    // unit of the quadrature oracle
    let rho = 0.5;
    let corr = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
    let spec = CopulaSpec::gaussian(corr).unwrap();
    let n = 30_000;
    let data = sample(&spec, n, 11).unwrap();
    let config = quick_config(13);
    let report = fit(&data, &config).unwrap();

    // exceedance bookkeeping
    assert!(report.exceedance_count > 0);
    assert!((report.exceedance_fraction - 0.25).abs() < 0.05);

    // ISE against the closed-form gauge on a fresh evaluation set
    let q = spec.precision().unwrap();
    let eval_angles = sample_sphere(20_000, 2, 17);
    let ise = limitset_core::diagnostics::ise(
        &|w: &[f64]| gauge_gaussian(w, &q).unwrap(),
        &report.model,
        &eval_angles,
    );
    assert!(ise < 0.5, "bivariate ISE {ise}");

    // joint upper tail at the 0.999 Laplace quantile, against quadrature
    let u999 = laplace_quantile(0.999).unwrap();
    let corner = [u999, u999];
    let true_p = region_log_prob(&spec, &corner).unwrap().exp();
    let est = tail_probability(&corner, &data, &report.model, 0.9995).unwrap();
    let male_val = male(&[true_p], &[est.probability]).unwrap();
    assert!(
        male_val < 1.0,
        "tail probability {} vs oracle {true_p}: MALE {male_val}",
        est.probability
    );
}

#[test]
fn scaled_sample_clouds_sit_inside_theoretical_limit_sets() {
    // soft containment: scaled clouds stay essentially inside the limit set
    let n = 100_000;
    let scale = (n as f64 / 2.0).ln();
    let fam = nested_correlation(3, 5).unwrap();
    let corr = fam.leading(3).unwrap();
    let q = CopulaSpec::gaussian(corr.clone()).unwrap().precision().unwrap();

    let gauss = sample(&CopulaSpec::gaussian(corr.clone()).unwrap(), n, 19).unwrap();
    let inside = gauss
        .rows_iter()
        .filter(|row| {
            let x: Vec<f64> = row.iter().map(|v| v / scale).collect();
            x.iter().all(|&v| v == 0.0) || gauge_gaussian(&x, &q).unwrap() <= 1.1
        })
        .count();
    assert!(
        inside as f64 / n as f64 >= 0.99,
        "gaussian containment {}",
        inside as f64 / n as f64
    );

    let student = sample(&CopulaSpec::student_t(corr, 1.0).unwrap(), n, 23).unwrap();
    let inside_t = student
        .rows_iter()
        .filter(|row| {
            let x: Vec<f64> = row.iter().map(|v| v / scale).collect();
            x.iter().all(|&v| v == 0.0) || gauge_student_t(&x, 1.0).unwrap() <= 1.1
        })
        .count();
    assert!(
        inside_t as f64 / n as f64 >= 0.99,
        "student containment {}",
        inside_t as f64 / n as f64
    );
}

#[test]
fn rank_transform_then_fit_equals_prefit_on_laplace_scale() {
    // the pipeline composes with the rank transform: transforming raw data
    // first and fitting equals fitting the pre-transformed matrix
    let spec = CopulaSpec::logistic(2, 0.5).unwrap();
    let laplace = sample(&spec, 1_200, 29).unwrap();
    // distort to a raw scale by strictly monotone maps
    let raw_rows: Vec<Vec<f64>> = laplace
        .rows_iter()
        .map(|row| vec![row[0].exp(), row[1].powi(3) + 2.0 * row[1]])
        .collect();
    let raw =
        limitset_core::DataMatrix::from_rows(&raw_rows, limitset_core::MarginTag::Raw).unwrap();
    let transformed = limitset_core::margins::rank_transform_to_laplace(&raw).unwrap();
    let transformed_twice =
        limitset_core::margins::rank_transform_to_laplace(&raw).unwrap();
    assert_eq!(transformed, transformed_twice);

    let mut config = quick_config(31);
    config.train.epochs = 10;
    config.pretrain_epochs = 5;
    config.wset_size = 5_000;
    config.pretrain_samples = 1_000;
    config.refresh_subsample = 1_000;
    let a = fit(&transformed, &config).unwrap();
    let b = fit(&transformed, &config).unwrap();
    assert_eq!(a.model.gauge_net, b.model.gauge_net);

    // the polar decomposition of the transformed data is well-formed
    let polar = decompose(&transformed);
    assert_eq!(polar.len(), 1_200);
    let stage1 = fit_threshold(&polar, &config).unwrap();
    for w in sample_sphere(50, 2, 37).iter_rows() {
        assert!(stage1.params.forward(w).unwrap().exp() > 0.0);
        assert!(linf(w) <= 1.0 + 1e-12);
    }
}
