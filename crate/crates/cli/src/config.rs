//! Configuration plumbing: every fit-related flag can come from a JSON
//! config file (`--config`) and be overridden on the command line. All
//! values are schema-validated before any computation starts.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use limitset_core::copulas::{nested_correlation, CopulaSpec};
use limitset_core::{CoreError, FitConfig, Result, TrainConfig};

/// Fit hyper-parameters as optional flags; unset values fall back to the
/// config file and then to the library defaults.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct FitFlags {
    /// Radial quantile level of the exceedance threshold.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Threshold-network hidden widths, comma separated (e.g. 32,32,32).
    #[arg(long, value_delimiter = ',')]
    pub q_arch: Option<Vec<usize>>,
    /// Gauge-network hidden widths, comma separated (e.g. 64,64,64).
    #[arg(long, value_delimiter = ',')]
    pub g_arch: Option<Vec<usize>>,
    /// Maximum training epochs per stage.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Mini-batch size.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Early-stopping patience (epochs without validation improvement).
    #[arg(long)]
    pub patience: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// L1 shrinkage weight.
    #[arg(long)]
    pub l1: Option<f64>,
    /// L2 shrinkage weight.
    #[arg(long)]
    pub l2: Option<f64>,
    /// Whether biases receive the L1/L2 penalties.
    #[arg(long)]
    pub penalize_biases: Option<bool>,
    /// Validation fraction of the data.
    #[arg(long)]
    pub val_frac: Option<f64>,
    /// Master seed for splits, initialization, and shuffling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pre-training epochs for the gauge network (0 disables).
    #[arg(long)]
    pub pretrain_epochs: Option<usize>,
    /// Number of reference angles used for pre-training.
    #[arg(long)]
    pub pretrain_samples: Option<usize>,
    /// Size of the reference angle set.
    #[arg(long)]
    pub wset_size: Option<usize>,
    /// Seed of the reference angle set.
    #[arg(long)]
    pub wset_seed: Option<u64>,
    /// Angles per scaling-factor refresh during gauge training.
    #[arg(long)]
    pub refresh_subsample: Option<usize>,
}

impl FitFlags {
    /// Command-line values take precedence over the file layer.
    pub fn over(self, file: FitFlags) -> FitFlags {
        FitFlags {
            tau: self.tau.or(file.tau),
            q_arch: self.q_arch.or(file.q_arch),
            g_arch: self.g_arch.or(file.g_arch),
            epochs: self.epochs.or(file.epochs),
            batch_size: self.batch_size.or(file.batch_size),
            patience: self.patience.or(file.patience),
            learning_rate: self.learning_rate.or(file.learning_rate),
            l1: self.l1.or(file.l1),
            l2: self.l2.or(file.l2),
            penalize_biases: self.penalize_biases.or(file.penalize_biases),
            val_frac: self.val_frac.or(file.val_frac),
            seed: self.seed.or(file.seed),
            pretrain_epochs: self.pretrain_epochs.or(file.pretrain_epochs),
            pretrain_samples: self.pretrain_samples.or(file.pretrain_samples),
            wset_size: self.wset_size.or(file.wset_size),
            wset_seed: self.wset_seed.or(file.wset_seed),
            refresh_subsample: self.refresh_subsample.or(file.refresh_subsample),
        }
    }

    pub fn into_config(self) -> Result<FitConfig> {
        let defaults = FitConfig::default();
        let train_defaults = TrainConfig::default();
        let config = FitConfig {
            tau: self.tau.unwrap_or(defaults.tau),
            quantile_hidden: self.q_arch.unwrap_or(defaults.quantile_hidden),
            gauge_hidden: self.g_arch.unwrap_or(defaults.gauge_hidden),
            train: TrainConfig {
                epochs: self.epochs.unwrap_or(train_defaults.epochs),
                batch_size: self.batch_size.unwrap_or(train_defaults.batch_size),
                patience: self.patience.unwrap_or(train_defaults.patience),
                learning_rate: self.learning_rate.unwrap_or(train_defaults.learning_rate),
                l1: self.l1.unwrap_or(train_defaults.l1),
                l2: self.l2.unwrap_or(train_defaults.l2),
                penalize_biases: self
                    .penalize_biases
                    .unwrap_or(train_defaults.penalize_biases),
                validation_fraction: self.val_frac.unwrap_or(train_defaults.validation_fraction),
                seed: self.seed.unwrap_or(train_defaults.seed),
            },
            pretrain_epochs: self.pretrain_epochs.unwrap_or(defaults.pretrain_epochs),
            pretrain_samples: self.pretrain_samples.unwrap_or(defaults.pretrain_samples),
            wset_size: self.wset_size.unwrap_or(defaults.wset_size),
            wset_seed: self.wset_seed.unwrap_or(defaults.wset_seed),
            refresh_subsample: self.refresh_subsample.unwrap_or(defaults.refresh_subsample),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Loads the optional `--config` JSON layer.
pub fn load_fit_flags(path: Option<&PathBuf>) -> Result<FitFlags> {
    match path {
        None => Ok(FitFlags::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| {
                CoreError::invalid_data("load_fit_flags", format!("{}: {e}", p.display()))
            })
        }
    }
}

/// Copula selection shared by `simulate` and `study`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CopulaFlags {
    /// Copula family: gaussian | student-t | logistic.
    #[arg(long)]
    pub copula: String,
    /// Dimension.
    #[arg(long)]
    pub d: usize,
    /// Seed of the nested correlation family (elliptical families).
    #[arg(long, default_value_t = 7)]
    pub corr_seed: u64,
    /// Maximal dimension of the nested correlation family.
    #[arg(long, default_value_t = 8)]
    pub d_max: usize,
    /// Degrees of freedom (student-t).
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Dependence parameter in (0, 1] (logistic).
    #[arg(long, default_value_t = 0.3)]
    pub theta: f64,
}

impl CopulaFlags {
    pub fn build(&self) -> Result<CopulaSpec> {
        if self.d > self.d_max {
            return Err(CoreError::domain(
                "copula flags",
                format!("d = {} exceeds d_max = {}", self.d, self.d_max),
            ));
        }
        match self.copula.as_str() {
            "gaussian" => {
                let fam = nested_correlation(self.d_max, self.corr_seed)?;
                CopulaSpec::gaussian(fam.leading(self.d)?)
            }
            "student-t" => {
                let fam = nested_correlation(self.d_max, self.corr_seed)?;
                CopulaSpec::student_t(fam.leading(self.d)?, self.nu)
            }
            "logistic" => CopulaSpec::logistic(self.d, self.theta),
            other => Err(CoreError::domain(
                "copula flags",
                format!("unknown copula '{other}'; expected gaussian | student-t | logistic"),
            )),
        }
    }
}

/// One cell of the simulation-study grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyCell {
    pub copula: String,
    pub d: usize,
    pub n: usize,
    pub tau: f64,
    #[serde(default = "default_q_arch")]
    pub q_arch: Vec<usize>,
    #[serde(default = "default_g_arch")]
    pub g_arch: Vec<usize>,
    pub replicates: usize,
}

fn default_q_arch() -> Vec<usize> {
    vec![32, 32, 32]
}

fn default_g_arch() -> Vec<usize> {
    vec![64, 64, 64]
}

/// Study grid file: cells plus shared settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyGrid {
    pub cells: Vec<StudyCell>,
    pub seed: u64,
    pub corr_seed: u64,
    pub d_max: usize,
    pub nu: f64,
    pub theta: f64,
    /// Structure-variable quantile for probability estimation.
    pub q_level: f64,
    /// Fit settings applied to every cell (tau and architectures come from
    /// the cell).
    pub fit: FitFlags,
    /// Number of reference angles used to evaluate the ISE.
    pub ise_angles: usize,
}

impl Default for StudyGrid {
    fn default() -> Self {
        StudyGrid {
            cells: Vec::new(),
            seed: 1,
            corr_seed: 7,
            d_max: 8,
            nu: 1.0,
            theta: 0.3,
            q_level: 0.9995,
            fit: FitFlags::default(),
            ise_angles: 100_000,
        }
    }
}

pub fn load_study_grid(path: &Path) -> Result<StudyGrid> {
    let text = std::fs::read_to_string(path)?;
    let grid: StudyGrid = serde_json::from_str(&text).map_err(|e| {
        CoreError::invalid_data("load_study_grid", format!("{}: {e}", path.display()))
    })?;
    if grid.cells.is_empty() {
        return Err(CoreError::invalid_data(
            "load_study_grid",
            "grid has no cells",
        ));
    }
    Ok(grid)
}
