//! Two-stage model fitting: a quantile-threshold network trained with the
//! tilted loss, then a gauge network trained on the threshold exceedances
//! under the truncated-gamma likelihood whose rate is the rescaled gauge.
//!
//! The gauge stage re-derives its scaling factors from the current network
//! once per epoch over a subsample of the reference set (gradients treat
//! them as constants within the epoch, where they are piecewise constant in
//! the parameters almost everywhere), and the frozen model recomputes them
//! over the full reference set.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, MarginTag};
use crate::error::{CoreError, Result};
use crate::geometry::{
    decompose, kappa_inverse, linf, rescaled_gauge, sample_sphere, scaling_factors, AngleSet,
    PolarSample, ScalingFactors,
};
use crate::net::{
    train, validation_split, MlpParams, QuantileLoss, SquaredGaugeLoss, TrainConfig, TrainExtras,
    TrainSample, TrainingLog, TruncGammaLoss,
};

use super::{GaugeModel, WsetMeta};

/// Hyper-parameters of the full pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Radial quantile level of the exceedance threshold.
    pub tau: f64,
    /// Hidden widths of the threshold network.
    pub quantile_hidden: Vec<usize>,
    /// Hidden widths of the gauge network.
    pub gauge_hidden: Vec<usize>,
    /// Shared optimizer settings; `train.seed` drives every random choice.
    pub train: TrainConfig,
    /// Epochs for the squared-error pre-training stage (0 disables it).
    pub pretrain_epochs: usize,
    /// Number of reference angles used as pre-training inputs.
    pub pretrain_samples: usize,
    /// Size of the reference angle set 𝒲.
    pub wset_size: usize,
    /// Seed of the reference angle set.
    pub wset_seed: u64,
    /// Subsample of 𝒲 used for the per-epoch scaling-factor refresh.
    pub refresh_subsample: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tau: 0.75,
            quantile_hidden: vec![32, 32, 32],
            gauge_hidden: vec![64, 64, 64],
            train: TrainConfig::default(),
            pretrain_epochs: 100,
            pretrain_samples: 20_000,
            wset_size: 1_000_000,
            wset_seed: 0x5ca1e,
            refresh_subsample: 10_000,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(CoreError::domain("FitConfig", "tau must lie in (0, 1)"));
        }
        if self.quantile_hidden.is_empty() || self.gauge_hidden.is_empty() {
            return Err(CoreError::domain(
                "FitConfig",
                "both networks need at least one hidden layer",
            ));
        }
        if self.wset_size < 100 || self.refresh_subsample < 100 {
            return Err(CoreError::domain(
                "FitConfig",
                "reference set and refresh subsample must hold at least 100 angles",
            ));
        }
        self.train.validate()
    }

    fn stage_config(&self, seed_offset: u64, epochs: Option<usize>) -> TrainConfig {
        let mut cfg = self.train.clone();
        cfg.seed = self.train.seed.wrapping_add(seed_offset);
        if let Some(e) = epochs {
            cfg.epochs = e;
        }
        cfg
    }
}

/// Raw gauge of an arbitrary parameter state: ReLU{m(v)} + ‖v‖∞.
fn raw_gauge_of(params: &MlpParams, v: &[f64]) -> f64 {
    params.forward(v).expect("dimensions fixed by pipeline").max(0.0) + linf(v)
}

/// Stage-1 result: the threshold network plus its report.
#[derive(Debug)]
pub struct ThresholdFit {
    pub params: MlpParams,
    pub log: TrainingLog,
    /// Fraction of all observations exceeding their fitted threshold.
    pub exceedance_fraction: f64,
    pub warnings: Vec<String>,
}

/// Fits the radial-threshold network r̂_τ(w) = exp{m(w)} by tilted loss.
pub fn fit_threshold(polar: &PolarSample, config: &FitConfig) -> Result<ThresholdFit> {
    config.validate()?;
    let n = polar.len();
    if n == 0 {
        return Err(CoreError::invalid_data("fit_threshold", "no observations"));
    }
    let mut warnings = Vec::new();
    if n < 100 {
        warnings.push(format!("only {n} observations; quantile surface will be crude"));
    }
    let (min_r, max_r) = polar
        .radii
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    if min_r == max_r {
        return Err(CoreError::invalid_data(
            "fit_threshold",
            "degenerate radii: all observations share one radius",
        ));
    }

    let d = polar.angles.dim();
    let mut samples: Vec<TrainSample> = (0..n)
        .map(|j| TrainSample::new(polar.angles.row(j).to_vec(), polar.radii[j]))
        .collect();
    let is_val = validation_split(n, config.train.validation_fraction, config.train.seed)?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.train.seed.wrapping_add(2));
    let init = MlpParams::he_init(d, &config.quantile_hidden, &mut rng);
    let outcome = train(
        &mut samples,
        &is_val,
        &QuantileLoss { tau: config.tau },
        &config.stage_config(1, None),
        init,
        TrainExtras::default(),
    )?;

    let exceed = (0..n)
        .filter(|&j| polar.radii[j] > threshold_of(&outcome.params, polar.angles.row(j)))
        .count();
    Ok(ThresholdFit {
        params: outcome.params,
        log: outcome.log,
        exceedance_fraction: exceed as f64 / n as f64,
        warnings,
    })
}

fn threshold_of(params: &MlpParams, w: &[f64]) -> f64 {
    params.forward(w).expect("dimensions fixed by pipeline").exp()
}

/// Scaling factors of the radial function h = r̂_τ over the reference set;
/// with them, [`initial_target_value`] evaluates the valid initial gauge
/// estimate the pre-training stage regresses on.
pub fn initial_gauge_target(quantile_net: &MlpParams, angles: &AngleSet) -> Result<ScalingFactors> {
    scaling_factors(&|w: &[f64]| threshold_of(quantile_net, w), angles)
}

/// Rescaled-gauge value derived from the fitted threshold surface.
pub fn initial_target_value(quantile_net: &MlpParams, b: &ScalingFactors, w: &[f64]) -> f64 {
    rescaled_gauge(&|v: &[f64]| threshold_of(quantile_net, v), b, w)
}

/// Pre-trains the gauge network so that ReLU{m(w)} + ‖w‖∞ matches the
/// target values in mean square.
pub fn pretrain_gauge(
    init: MlpParams,
    angles: &AngleSet,
    targets: &[f64],
    config: &FitConfig,
) -> Result<(MlpParams, TrainingLog)> {
    if angles.len() != targets.len() {
        return Err(CoreError::Dimension {
            op: "pretrain_gauge",
            expected: angles.len(),
            got: targets.len(),
        });
    }
    let mut samples: Vec<TrainSample> = angles
        .iter_rows()
        .zip(targets.iter())
        .map(|(w, &t)| TrainSample::new(w.to_vec(), t))
        .collect();
    let is_val = validation_split(
        samples.len(),
        config.train.validation_fraction,
        config.train.seed.wrapping_add(3),
    )?;
    let outcome = train(
        &mut samples,
        &is_val,
        &SquaredGaugeLoss,
        &config.stage_config(4, Some(config.pretrain_epochs)),
        init,
        TrainExtras::default(),
    )?;
    Ok((outcome.params, outcome.log))
}

/// Stage-2 result bundled with its diagnostics.
#[derive(Debug)]
pub struct GaugeFit {
    pub model: GaugeModel,
    pub pretrain_log: Option<TrainingLog>,
    pub log: TrainingLog,
    pub exceedance_count: usize,
    pub alpha_clamped: bool,
    pub warnings: Vec<String>,
}

/// Fits the gauge network on the exceedances of the frozen stage-1
/// thresholds and freezes the rescaled model.
pub fn fit_gauge(
    polar: &PolarSample,
    quantile_net: &MlpParams,
    config: &FitConfig,
) -> Result<GaugeFit> {
    config.validate()?;
    let n = polar.len();
    let d = polar.angles.dim();
    if quantile_net.input_dim != d {
        return Err(CoreError::Dimension {
            op: "fit_gauge",
            expected: d,
            got: quantile_net.input_dim,
        });
    }
    let mut warnings = Vec::new();
    let wset = sample_sphere(config.wset_size, d, config.wset_seed);

    // initial gauge estimate from the threshold surface
    let b_tau = initial_gauge_target(quantile_net, &wset)?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.train.seed.wrapping_add(5));
    let mut gauge_params = MlpParams::he_init(d, &config.gauge_hidden, &mut rng);
    let mut pretrain_log = None;
    if config.pretrain_epochs > 0 {
        let pre_angles = wset.head(config.pretrain_samples);
        let targets: Vec<f64> = pre_angles
            .iter_rows()
            .map(|w| initial_target_value(quantile_net, &b_tau, w))
            .collect();
        let (params, log) = pretrain_gauge(gauge_params, &pre_angles, &targets, config)?;
        gauge_params = params;
        pretrain_log = Some(log);
    }

    // exceedances of the frozen thresholds; the effective sample is fixed
    // for the whole stage
    let mut exceed_idx = Vec::new();
    let mut thresholds = Vec::new();
    for j in 0..n {
        let t = threshold_of(quantile_net, polar.angles.row(j));
        if polar.radii[j] > t {
            exceed_idx.push(j);
            thresholds.push(t);
        }
    }
    if exceed_idx.is_empty() {
        return Err(CoreError::invalid_data(
            "fit_gauge",
            "no threshold exceedances; lower tau or check the threshold fit",
        ));
    }
    if exceed_idx.len() < 20 {
        warnings.push(format!(
            "only {} exceedances; gauge surface will be crude",
            exceed_idx.len()
        ));
    }

    let full_split = validation_split(n, config.train.validation_fraction, config.train.seed)?;
    let is_val: Vec<bool> = exceed_idx.iter().map(|&j| full_split[j]).collect();
    let data_angles: Vec<Vec<f64>> = exceed_idx
        .iter()
        .map(|&j| polar.angles.row(j).to_vec())
        .collect();
    let mut samples: Vec<TrainSample> = exceed_idx
        .iter()
        .zip(thresholds.iter())
        .map(|(&j, &t)| {
            let mut s = TrainSample::new(vec![0.0; d], polar.radii[j]);
            s.aux = [1.0, t];
            s
        })
        .collect();

    // per-epoch refresh: recompute the scaling factors over the subsample,
    // then rewrite each sample's kappa-inverse angle and boundary normalizer
    let refresh_set = wset.head(config.refresh_subsample);
    let mut hook = |params: &MlpParams, data: &mut [TrainSample]| {
        let b = scaling_factors(&|v: &[f64]| 1.0 / raw_gauge_of(params, v), &refresh_set)
            .expect("raw gauge is positive and the subsample straddles all axes");
        for (sample, w) in data.iter_mut().zip(data_angles.iter()) {
            let v = kappa_inverse(w, &b);
            let norm: f64 = v
                .iter()
                .enumerate()
                .map(|(i, &vi)| {
                    let q = vi / b.divisor(i, vi);
                    q * q
                })
                .sum::<f64>()
                .sqrt();
            sample.aux[0] = 1.0 / norm;
            sample.input = v;
        }
    };

    let outcome = train(
        &mut samples,
        &is_val,
        &TruncGammaLoss,
        &config.stage_config(6, None),
        gauge_params,
        TrainExtras {
            init_log_alpha: Some((d as f64).ln()),
            log_alpha_bounds: Some((0.1_f64.ln(), (10.0 * d as f64).ln())),
            epoch_hook: Some(&mut hook),
        },
    )?;
    if outcome.alpha_clamped {
        warnings.push("alpha was driven to its bounds during optimization".to_string());
    }

    let gauge_net = outcome.params;
    let alpha = outcome.log_alpha.expect("gauge stage estimates alpha").exp();
    // freeze with scaling factors over the full reference set
    let scaling = scaling_factors(&|v: &[f64]| 1.0 / raw_gauge_of(&gauge_net, v), &wset)?;
    let model = GaugeModel::new(
        quantile_net.clone(),
        gauge_net,
        alpha,
        config.tau,
        scaling,
        WsetMeta {
            size: config.wset_size,
            seed: config.wset_seed,
        },
    )?;
    Ok(GaugeFit {
        model,
        pretrain_log,
        log: outcome.log,
        exceedance_count: exceed_idx.len(),
        alpha_clamped: outcome.alpha_clamped,
        warnings,
    })
}

/// Full pipeline report.
#[derive(Debug)]
pub struct FitReport {
    pub model: GaugeModel,
    pub stage1_log: TrainingLog,
    pub pretrain_log: Option<TrainingLog>,
    pub stage2_log: TrainingLog,
    pub exceedance_count: usize,
    pub exceedance_fraction: f64,
    pub warnings: Vec<String>,
}

/// Runs both stages on Laplace-margin data.
pub fn fit(data: &DataMatrix, config: &FitConfig) -> Result<FitReport> {
    if data.margin() != MarginTag::Laplace {
        return Err(CoreError::invalid_data(
            "fit",
            format!(
                "expected laplace margins, got {}; rank-transform raw data first",
                data.margin()
            ),
        ));
    }
    let polar = decompose(data);
    let mut warnings = Vec::new();
    if polar.dropped_zero_rows > 0 {
        warnings.push(format!("dropped {} exactly-zero rows", polar.dropped_zero_rows));
    }
    let stage1 = fit_threshold(&polar, config)?;
    warnings.extend(stage1.warnings.iter().cloned());
    let stage2 = fit_gauge(&polar, &stage1.params, config)?;
    warnings.extend(stage2.warnings.iter().cloned());
    Ok(FitReport {
        model: stage2.model,
        stage1_log: stage1.log,
        pretrain_log: stage2.pretrain_log,
        stage2_log: stage2.log,
        exceedance_count: stage2.exceedance_count,
        exceedance_fraction: stage1.exceedance_fraction,
        warnings,
    })
}
