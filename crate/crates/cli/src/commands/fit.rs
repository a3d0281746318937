//! `fit`: the two-stage pipeline, emitting the model bundle, per-epoch loss
//! trajectories, and a fit summary.

use std::path::PathBuf;

use clap::Args;

use limitset_core::net::TrainingLog;
use limitset_core::Result;

use crate::config::{load_fit_flags, FitFlags};

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input data CSV (Laplace margins unless --rank-transform is set).
    #[arg(long)]
    pub data: PathBuf,
    /// Rank-transform raw input onto Laplace margins first.
    #[arg(long, default_value_t = false)]
    pub rank_transform: bool,
    /// Output path of the fitted model JSON bundle.
    #[arg(long)]
    pub out: PathBuf,
    /// Output path of the per-epoch loss CSV.
    #[arg(long)]
    pub losses: Option<PathBuf>,
    /// JSON config file; command-line flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: FitFlags,
}

pub fn run(args: FitArgs) -> Result<()> {
    let file_layer = load_fit_flags(args.config.as_ref())?;
    let config = args.flags.over(file_layer).into_config()?;
    let data = super::load_laplace_data(&args.data, args.rank_transform)?;
    let report = limitset_core::fit(&data, &config)?;

    std::fs::write(&args.out, report.model.to_json())?;
    if let Some(losses_path) = &args.losses {
        write_losses(
            losses_path,
            &[
                ("quantile", &report.stage1_log),
                ("pretrain", report.pretrain_log.as_ref().unwrap_or(&EMPTY_LOG)),
                ("gauge", &report.stage2_log),
            ],
        )?;
    }
    let summary = serde_json::json!({
        "alpha": report.model.alpha,
        "tau": report.model.tau,
        "exceedance_count": report.exceedance_count,
        "exceedance_fraction": report.exceedance_fraction,
        "stage1_best_epoch": report.stage1_log.best_epoch,
        "stage2_best_epoch": report.stage2_log.best_epoch,
        "stage1_stopped_early": report.stage1_log.stopped_early,
        "stage2_stopped_early": report.stage2_log.stopped_early,
        "warnings": report.warnings,
    });
    std::fs::write(
        super::sidecar_path(&args.out),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    println!(
        "fitted model: alpha = {}, {} exceedances ({:.4} of the sample); model at {}",
        report.model.alpha,
        report.exceedance_count,
        report.exceedance_fraction,
        args.out.display()
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

static EMPTY_LOG: TrainingLog = TrainingLog {
    train_loss: Vec::new(),
    val_loss: Vec::new(),
    best_epoch: 0,
    stopped_early: false,
};

fn write_losses(path: &PathBuf, stages: &[(&str, &TrainingLog)]) -> Result<()> {
    let rows = stages.iter().flat_map(|(stage, log)| {
        log.train_loss
            .iter()
            .zip(log.val_loss.iter())
            .enumerate()
            .map(move |(epoch, (tr, va))| {
                vec![
                    stage.to_string(),
                    (epoch + 1).to_string(),
                    tr.to_string(),
                    va.to_string(),
                ]
            })
    });
    super::write_csv(path, &["stage", "epoch", "train_loss", "val_loss"], rows)
}
