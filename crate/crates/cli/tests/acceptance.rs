//! Acceptance suite: one test per criterion, each printing a `[PASS]` line
//! (run with `--nocapture` to see them). Quantitative thresholds are pinned
//! in code; the heavy Gaussian d=3 fixture is fitted once and shared.
//!
//! Criteria:
//!  1. validity of 20 fitted models across three copulas and d ∈ {2, 3, 5}
//!  2. sphere-bijection round trip at 1e-10 across d ∈ {2,…,8}
//!  3. truncated-gamma normalization by independent quadrature
//!  4. backprop vs central finite differences for all three losses
//!  5. numerical gauge oracle against the closed-form gauges
//!  6. desk-scale ISE level and sample-size trend
//!  7. desk-scale MALE against the quadrature oracle
//!  8. ADF sandwich and the independence-boundary value
//!  9. diagnostic calibration (QQ transform and return-level coverage)
//! 10. byte-for-byte determinism of a seeded end-to-end run

use once_cell::sync::Lazy;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use limitset_core::copulas::{
    gauge_gaussian, gauge_numerical_oracle, gauge_student_t, nested_correlation, region_log_prob,
    sample, CopulaSpec,
};
use limitset_core::diagnostics::{
    ise, ks_exp1, male, return_level_coverage, sample_truncated_gamma, truncgamma_qq,
};
use limitset_core::gauge::{FitConfig, FitReport};
use limitset_core::geometry::{
    kappa, kappa_inverse, linf, sample_sphere, AngleSet, PolarSample, ScalingFactors,
};
use limitset_core::inference::{adf_from_boundary, estimate_adf, tail_probability};
use limitset_core::margins::laplace_quantile;
use limitset_core::net::{
    batch_gradient, finite_difference_gradient, truncgamma_nll, MlpParams, Penalty, QuantileLoss,
    SquaredGaugeLoss, TrainConfig, TrainLoss, TrainSample, TruncGammaLoss,
};
use limitset_core::{DataMatrix, MarginTag};

// ---------------------------------------------------------------------------
// shared fixtures

fn gaussian_d3_spec() -> CopulaSpec {
    let fam = nested_correlation(3, 7).expect("family generates");
    CopulaSpec::gaussian(fam.leading(3).expect("submatrix")).expect("valid spec")
}

fn desk_config(tau: f64, seed: u64) -> FitConfig {
    FitConfig {
        tau,
        quantile_hidden: vec![32, 32, 32],
        gauge_hidden: vec![64, 64, 64],
        train: TrainConfig {
            seed,
            ..TrainConfig::default()
        },
        pretrain_epochs: 60,
        pretrain_samples: 10_000,
        wset_size: 100_000,
        wset_seed: 99,
        refresh_subsample: 8_000,
    }
}

struct Fixture {
    spec: CopulaSpec,
    data: DataMatrix,
    report: FitReport,
}

/// One n = 100,000 Gaussian d = 3 fit shared by criteria 7-9. The threshold
/// level 0.5 doubles the effective sample of the gamma stage, which favours
/// tail-probability accuracy; criterion 6 pins tau = 0.75 and runs its own
/// fits.
static GAUSS_D3: Lazy<Fixture> = Lazy::new(|| {
    let spec = gaussian_d3_spec();
    let data = sample(&spec, 100_000, 1000).expect("sampling succeeds");
    let report = limitset_core::fit(&data, &desk_config(0.5, 0)).expect("fit succeeds");
    Fixture { spec, data, report }
});

/// Fixed evaluation angle set for every d = 3 ISE.
static EVAL_D3: Lazy<AngleSet> = Lazy::new(|| sample_sphere(100_000, 3, 555));

fn fit_small(spec: &CopulaSpec, n: usize, seed: u64) -> FitReport {
    let data = sample(spec, n, 5_000 + seed).expect("sampling succeeds");
    let config = FitConfig {
        tau: 0.75,
        quantile_hidden: vec![16, 16],
        gauge_hidden: vec![16, 16],
        train: TrainConfig {
            epochs: 60,
            patience: 6,
            batch_size: 512,
            learning_rate: 3e-3,
            seed,
            ..TrainConfig::default()
        },
        pretrain_epochs: 30,
        pretrain_samples: 5_000,
        wset_size: 60_000,
        wset_seed: 71,
        refresh_subsample: 4_000,
    };
    limitset_core::fit(&data, &config).expect("small fit succeeds")
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_validity_suite() {
    let started = std::time::Instant::now();
    let fam = nested_correlation(5, 7).expect("family generates");
    let mut specs: Vec<(CopulaSpec, u64)> = Vec::new();
    for d in [2usize, 3, 5] {
        for seed in [0u64, 1] {
            let corr = fam.leading(d).expect("submatrix");
            specs.push((CopulaSpec::gaussian(corr.clone()).expect("spec"), seed));
            specs.push((CopulaSpec::student_t(corr, 1.0).expect("spec"), seed));
            specs.push((CopulaSpec::logistic(d, 0.3).expect("spec"), seed));
        }
    }
    specs.push((CopulaSpec::gaussian(fam.leading(3).unwrap()).unwrap(), 2));
    specs.push((CopulaSpec::logistic(5, 0.3).unwrap(), 2));
    assert_eq!(specs.len(), 20);

    let mut fit_time = std::time::Duration::ZERO;
    let mut check_time = std::time::Duration::ZERO;
    for (k, (spec, seed)) in specs.iter().enumerate() {
        let t0 = std::time::Instant::now();
        let report = fit_small(spec, 4_000, *seed);
        fit_time += t0.elapsed();

        let t1 = std::time::Instant::now();
        let d = spec.dim();
        // lower bound at 100,000 fresh random angles
        let probe = sample_sphere(100_000, d, 777 + k as u64);
        for w in probe.iter_rows() {
            let g = report.model.rescaled_gauge(w);
            assert!(
                g >= linf(w) - 1e-9,
                "model {k} ({:?} d={d}): gauge {g} under the sup norm {}",
                spec.kind(),
                linf(w)
            );
        }
        // componentwise boundary touch over the model's reference set
        let cloud = report.model.boundary_cloud();
        for i in 0..d {
            let max_i = cloud.chunks_exact(d).map(|p| p[i]).fold(f64::MIN, f64::max);
            let min_i = cloud.chunks_exact(d).map(|p| p[i]).fold(f64::MAX, f64::min);
            assert!(
                max_i >= 1.0 - 1e-3 && max_i <= 1.0 + 1e-9,
                "model {k}: coordinate {i} max touch {max_i}"
            );
            assert!(
                min_i <= -1.0 + 1e-3 && min_i >= -1.0 - 1e-9,
                "model {k}: coordinate {i} min touch {min_i}"
            );
        }
        check_time += t1.elapsed();
    }
    assert!(
        check_time.as_secs_f64() < 300.0,
        "validity checks took {check_time:?}, budget is five minutes beyond fitting"
    );
    println!(
        "[PASS] criterion 1: validity suite on 20 models (fits {:.1?}, checks {:.1?}, total {:.1?})",
        fit_time,
        check_time,
        started.elapsed()
    );
}

#[test]
fn criterion_02_kappa_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    let mut tested = 0usize;
    for d in 2..=8usize {
        let angles = sample_sphere(1_429, d, 31 + d as u64);
        for w in angles.iter_rows() {
            let mut b = ScalingFactors::unit(d);
            for i in 0..d {
                b.b_upper[i] = rng.gen_range(0.05..5.0);
                b.b_lower[i] = -rng.gen_range(0.05..5.0);
            }
            let back = kappa_inverse(&kappa(w, &b), &b);
            for i in 0..d {
                worst = worst.max((back[i] - w[i]).abs());
            }
            tested += 1;
        }
    }
    assert!(tested >= 10_000);
    assert!(worst < 1e-10, "worst round-trip error {worst}");
    println!("[PASS] criterion 2: kappa round trip on {tested} pairs, max error {worst:.3e}");
}

/// Adaptive Simpson quadrature, the independent route for criterion 3.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = rule(f, a, m);
        let right = rule(f, m, b);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    recurse(f, a, b, rule(f, a, b), tol, depth)
}

#[test]
fn criterion_03_truncated_gamma_normalization() {
    let alphas = [0.5, 1.0, 2.0, 4.0, 8.0];
    let rates = [0.2, 0.7, 1.0, 2.5, 5.0];
    let thresholds = [0.0, 0.3, 1.0, 2.5, 5.0];
    let mut worst = 0.0_f64;
    for &alpha in &alphas {
        for &rate in &rates {
            for &thresh in &thresholds {
                // substituting r = thresh + s^2 regularizes the shape < 1
                // endpoint singularity and keeps the quadrature independent
                // of the likelihood implementation
                let density = |s: f64| {
                    let r = thresh + s * s;
                    (-truncgamma_nll(r, rate, alpha, thresh).unwrap()).exp() * 2.0 * s
                };
                // upper integration bound: where all but ~1e-13 of the
                // conditional mass lies
                let far = limitset_core::special::inv_reg_gamma_lower(alpha, 1.0 - 1e-13)
                    .unwrap()
                    / rate;
                let upper = (thresh + 1.0).max(far) + 10.0 / rate;
                let mass = simpson(&density, 0.0, (upper - thresh).sqrt(), 1e-10, 40);
                worst = worst.max((mass - 1.0).abs());
                assert!(
                    (mass - 1.0).abs() < 1e-6,
                    "density mass {mass} at (alpha {alpha}, rate {rate}, thresh {thresh})"
                );
            }
        }
    }
    println!(
        "[PASS] criterion 3: truncated-gamma normalization on the 5x5x5 grid, worst defect {worst:.2e}"
    );
}

fn random_gradient_case(seed: u64) -> (MlpParams, Vec<TrainSample>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let params = MlpParams::he_init(3, &[8, 8], &mut rng);
    let samples: Vec<TrainSample> = (0..16)
        .map(|_| {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
            let input: Vec<f64> = v.into_iter().map(|x| x / norm).collect();
            let thresh = rng.gen_range(0.5..2.0);
            TrainSample {
                input,
                response: thresh + rng.gen_range(0.1..4.0),
                aux: [rng.gen_range(0.5..1.5), thresh],
            }
        })
        .collect();
    (params, samples)
}

/// Central differences are only a valid oracle away from the piecewise-linear
/// kinks; configurations whose pre-activations or loss corners sit within a
/// margin of a kink are skipped in favour of the next seed.
fn kink_free(params: &MlpParams, samples: &[TrainSample], tau: Option<f64>) -> bool {
    const MARGIN: f64 = 1e-3;
    for sample in samples {
        let mut act = sample.input.clone();
        let depth = params.layers.len();
        for (j, layer) in params.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.rows];
            for r in 0..layer.rows {
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                let mut z = layer.bias[r];
                for (w, a) in row.iter().zip(act.iter()) {
                    z += w * a;
                }
                if z.abs() < MARGIN {
                    return false;
                }
                next[r] = if j < depth - 1 { z.max(0.0) } else { z };
            }
            act = next;
        }
        if tau.is_some() && (sample.response - act[0].exp()).abs() < MARGIN {
            return false;
        }
    }
    true
}

fn max_rel_gradient_error(loss: &dyn TrainLoss, with_alpha: bool, seed: u64) -> f64 {
    let tau_marker = if with_alpha { None } else { Some(0.8) };
    let (params, samples) = (seed..seed + 200)
        .map(random_gradient_case)
        .find(|(p, s)| kink_free(p, s, tau_marker))
        .expect("kink-free case exists");
    let refs: Vec<&TrainSample> = samples.iter().collect();
    let penalty = Penalty {
        l1: 1e-3,
        l2: 1e-3,
        include_biases: true,
    };
    let log_alpha = if with_alpha { 0.7 } else { 0.0 };
    let (_, bp) = batch_gradient(&params, &refs, loss, log_alpha, &penalty);
    let fd = finite_difference_gradient(&params, &refs, loss, log_alpha, &penalty, 1e-5);
    let mut worst = 0.0_f64;
    for (a, b) in bp.layers.iter().zip(fd.layers.iter()) {
        for (x, y) in a
            .weights
            .iter()
            .chain(a.bias.iter())
            .zip(b.weights.iter().chain(b.bias.iter()))
        {
            worst = worst.max((x - y).abs() / y.abs().max(1e-6));
        }
    }
    if with_alpha {
        worst = worst.max((bp.d_log_alpha - fd.d_log_alpha).abs() / fd.d_log_alpha.abs().max(1e-6));
    }
    worst
}

#[test]
fn criterion_04_gradient_correctness() {
    let mut worst = 0.0_f64;
    for k in 0..10u64 {
        worst = worst.max(max_rel_gradient_error(
            &QuantileLoss { tau: 0.8 },
            false,
            3_000 + 31 * k,
        ));
        worst = worst.max(max_rel_gradient_error(&SquaredGaugeLoss, false, 4_000 + 31 * k));
        worst = worst.max(max_rel_gradient_error(&TruncGammaLoss, true, 5_000 + 31 * k));
    }
    assert!(worst < 1e-4, "worst relative gradient error {worst}");
    println!(
        "[PASS] criterion 4: backprop matches finite differences on 10 networks per loss, worst rel err {worst:.2e}"
    );
}

#[test]
fn criterion_05_oracle_gauge_agreement() {
    let fam = nested_correlation(3, 7).expect("family generates");
    let mut worst = 0.0_f64;
    let mut count = 0usize;
    for d in [2usize, 3] {
        let corr = fam.leading(d).expect("submatrix");
        let gauss = CopulaSpec::gaussian(corr.clone()).expect("spec");
        let q = gauss.precision().expect("precision");
        let student = CopulaSpec::student_t(corr, 1.0).expect("spec");
        for w in sample_sphere(50, d, 4242 + d as u64).iter_rows() {
            let got_g = gauge_numerical_oracle(&gauss, w, 200.0).expect("oracle");
            let want_g = gauge_gaussian(w, &q).expect("closed form");
            worst = worst.max((got_g - want_g).abs());
            let got_t = gauge_numerical_oracle(&student, w, 200.0).expect("oracle");
            let want_t = gauge_student_t(w, 1.0).expect("closed form");
            worst = worst.max((got_t - want_t).abs());
            count += 1;
        }
    }
    assert!(worst < 0.05, "worst oracle disagreement {worst}");
    println!(
        "[PASS] criterion 5: numerical oracle agrees with both closed-form gauges at {count} angles, worst gap {worst:.4}"
    );
}

#[test]
fn criterion_06_desk_scale_ise() {
    let started = std::time::Instant::now();
    let spec = gaussian_d3_spec();
    let q = spec.precision().expect("precision");
    let oracle = |w: &[f64]| gauge_gaussian(w, &q).expect("valid query");

    let mut ise_large: Vec<f64> = Vec::new();
    for seed in 0..5u64 {
        let data = sample(&spec, 100_000, 1000 + seed).expect("sampling succeeds");
        let report = limitset_core::fit(&data, &desk_config(0.75, seed)).expect("fit succeeds");
        ise_large.push(ise(&oracle, &report.model, &EVAL_D3));
    }
    let mut ise_small: Vec<f64> = Vec::new();
    for seed in 0..5u64 {
        let data = sample(&spec, 10_000, 2000 + seed).expect("sampling succeeds");
        let report = limitset_core::fit(&data, &desk_config(0.75, seed)).expect("fit succeeds");
        ise_small.push(ise(&oracle, &report.model, &EVAL_D3));
    }
    ise_large.sort_by(f64::total_cmp);
    ise_small.sort_by(f64::total_cmp);
    let median_large = ise_large[2];
    let median_small = ise_small[2];
    assert!(
        median_large < 0.5,
        "median ISE at n = 100,000 is {median_large} (values {ise_large:?})"
    );
    assert!(
        median_small > median_large,
        "ISE should fall with sample size: n=10k median {median_small} vs n=100k {median_large}"
    );
    println!(
        "[PASS] criterion 6: median ISE {median_large:.3} at n=100k (< 0.5), {median_small:.3} at n=10k (trend holds) in {:.0?}",
        started.elapsed()
    );
}

#[test]
fn criterion_07_desk_scale_male() {
    let fixture = &*GAUSS_D3;
    let mut truths = Vec::new();
    let mut estimates = Vec::new();
    for level in [0.99, 0.999, 0.01, 0.001] {
        let corner = vec![laplace_quantile(level).expect("valid level"); 3];
        let est = tail_probability(&corner, &fixture.data, &fixture.report.model, 0.9995)
            .expect("estimable target");
        truths.push(region_log_prob(&fixture.spec, &corner).expect("oracle").exp());
        estimates.push(est.probability);
    }
    let male_val = male(&truths, &estimates).expect("valid probabilities");
    assert!(
        male_val < 2.0,
        "MALE {male_val} over targets: truths {truths:?}, estimates {estimates:?}"
    );
    println!(
        "[PASS] criterion 7: MALE {male_val:.3} over four joint tail probabilities (quadrature oracle)"
    );
}

#[test]
fn criterion_08_adf_sandwich() {
    // fitted-model sandwich at 10,000 zero-free angles
    let model = &GAUSS_D3.report.model;
    let angles = sample_sphere(10_000, 3, 888);
    let mut max_upper_violation = 0.0_f64;
    for w in angles.iter_rows() {
        if w.iter().any(|&wi| wi == 0.0) {
            continue;
        }
        let est = estimate_adf(model, w).expect("zero-free angle");
        let g = model.rescaled_gauge(w);
        assert!(
            est.lambda_hat >= linf(w) - 1e-9,
            "lambda {} below the sup norm {}",
            est.lambda_hat,
            linf(w)
        );
        assert!(
            est.lambda_hat <= g + 1e-9,
            "lambda {} above the gauge {g}",
            est.lambda_hat
        );
        max_upper_violation = max_upper_violation.max(est.lambda_hat - g);
    }

    // independence toy boundary reproduces the L1 gauge at grid resolution
    let grid = 20_000usize;
    let mut cloud = Vec::with_capacity(grid * 2);
    for k in 0..grid {
        let t = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
        let w = [t.cos(), t.sin()];
        let g = w[0].abs() + w[1].abs();
        cloud.push(w[0] / g);
        cloud.push(w[1] / g);
    }
    let mut worst_gap = 0.0_f64;
    for w in sample_sphere(500, 2, 889).iter_rows() {
        if w.iter().any(|&wi| wi.abs() < 1e-3) {
            continue;
        }
        let est = adf_from_boundary(&cloud, 2, w).expect("candidates exist");
        let want = w[0].abs() + w[1].abs();
        worst_gap = worst_gap.max((est.lambda_hat - want).abs());
    }
    assert!(worst_gap < 1e-2, "independence boundary gap {worst_gap}");
    println!(
        "[PASS] criterion 8: ADF sandwich on 10,000 angles; independence boundary within {worst_gap:.1e}"
    );
}

#[test]
fn criterion_09_diagnostic_calibration() {
    let model = &GAUSS_D3.report.model;

    // (a) QQ transform of exact model simulations is Exp(1): the KS distance
    // clears the 5% critical value in at least 90 of 100 replicates
    let mut passes = 0usize;
    for rep in 0..100u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(10_000 + rep);
        let angles = sample_sphere(800, 3, 20_000 + rep);
        let radii: Vec<f64> = angles
            .iter_rows()
            .map(|w| {
                let eval = model.evaluate(w);
                sample_truncated_gamma(model.alpha, eval.gauge, eval.threshold, &mut rng)
                    .expect("valid parameters")
            })
            .collect();
        let polar = PolarSample {
            radii,
            angles,
            dropped_zero_rows: 0,
        };
        let qq = truncgamma_qq(&polar, model).expect("enough exceedances");
        let m = qq.observed.len() as f64;
        if ks_exp1(&qq.observed) < 1.358 / m.sqrt() {
            passes += 1;
        }
    }
    assert!(passes >= 90, "KS calibration passed only {passes} of 100 replicates");

    // (b) empirical coverage of B_p sits inside the 95% binomial band for
    // data simulated from the fitted radial model (any angular law works;
    // sub-threshold radii fill the tau mass uniformly)
    let n_sim = 20_000usize;
    let mut rng = ChaCha20Rng::seed_from_u64(777);
    let angles = sample_sphere(n_sim, 3, 778);
    let rows: Vec<Vec<f64>> = angles
        .iter_rows()
        .map(|w| {
            let eval = model.evaluate(w);
            let r = if rng.gen_range(0.0..1.0) < model.tau {
                rng.gen_range(0.0..1.0) * eval.threshold
            } else {
                sample_truncated_gamma(model.alpha, eval.gauge, eval.threshold, &mut rng)
                    .expect("valid parameters")
            };
            w.iter().map(|&wi| wi * r.max(1e-300)).collect()
        })
        .collect();
    let sim_data = DataMatrix::from_rows(&rows, MarginTag::Laplace).expect("valid rows");
    let coverage = return_level_coverage(&sim_data, model, &[0.9, 0.99]).expect("coverage runs");
    for point in &coverage {
        let band = 1.96 * (point.p * (1.0 - point.p) / n_sim as f64).sqrt();
        assert!(
            (point.p_hat - point.p).abs() <= band,
            "coverage at p = {}: p_hat = {} outside ±{band:.4}",
            point.p,
            point.p_hat
        );
    }
    println!(
        "[PASS] criterion 9: KS calibration {passes}/100; coverage at 0.9/0.99 inside the binomial band"
    );
}

#[test]
fn criterion_10_end_to_end_determinism() {
    use limitset_cli::run;
    let dir = tempfile::TempDir::new().expect("tempdir");
    let outputs = |tag: &str| -> Vec<String> {
        let base = dir.path().join(tag);
        std::fs::create_dir_all(&base).expect("mkdir");
        let path = |name: &str| base.join(name).display().to_string();
        let data = path("data.csv");
        let model = path("model.json");
        let losses = path("losses.csv");
        let angles = path("angles.csv");
        let adf = path("adf.csv");
        std::fs::write(&angles, "w1,w2\n1,1\n-1,2\n").expect("write angles");
        assert_eq!(
            run([
                "limitset", "simulate", "--copula", "student-t", "--d", "2", "--nu", "1",
                "--n", "3000", "--seed", "21", "--corr-seed", "7", "--out", &data,
            ]),
            0
        );
        assert_eq!(
            run([
                "limitset",
                "fit",
                "--data",
                &data,
                "--out",
                &model,
                "--losses",
                &losses,
                "--tau",
                "0.7",
                "--q-arch",
                "8,8",
                "--g-arch",
                "12,12",
                "--epochs",
                "12",
                "--patience",
                "12",
                "--batch-size",
                "512",
                "--seed",
                "9",
                "--pretrain-epochs",
                "8",
                "--pretrain-samples",
                "2000",
                "--wset-size",
                "8000",
                "--refresh-subsample",
                "2000",
            ]),
            0
        );
        assert_eq!(
            run([
                "limitset", "infer", "--model", &model, "--mode", "adf", "--angles", &angles,
                "--out", &adf,
            ]),
            0
        );
        vec![data, model, losses, adf]
    };
    let first = outputs("a");
    let second = outputs("b");
    for (fa, fb) in first.iter().zip(second.iter()) {
        let ba = std::fs::read(fa).expect("read");
        let bb = std::fs::read(fb).expect("read");
        assert_eq!(ba, bb, "{fa} differs from {fb}");
    }
    println!("[PASS] criterion 10: seeded end-to-end run reproduces byte-for-byte");
}
