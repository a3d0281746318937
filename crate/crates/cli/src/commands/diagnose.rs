//! `diagnose`: goodness-of-fit diagnostics as plot-ready CSV files.
//!
//! Emits, under `--out-dir`:
//! - `truncgamma_qq.csv`: rank, theoretical, observed, lower, upper
//! - `adf_qq.csv`: the same columns for the extended-ADF diagnostic
//! - `coverage.csv`: p, p_hat, log_p, log_p_hat
//! - `slice_{i}_{j}.csv`: the fitted boundary slice (columns u, v)
//! - `slice_points_{i}_{j}.csv`: scaled validation points (columns u, v)

use std::path::PathBuf;

use clap::Args;

use limitset_core::diagnostics::{
    adf_diagnostic, return_level_coverage, slice_validation_points, truncgamma_qq, QqSeries,
};
use limitset_core::geometry::{bivariate_slice, decompose};
use limitset_core::inference::estimate_adf;
use limitset_core::Result;

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Fitted model JSON bundle.
    #[arg(long)]
    pub model: PathBuf,
    /// Laplace-margin data CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Structure-variable quantile for the ADF diagnostic.
    #[arg(long, default_value_t = 0.9995)]
    pub q: f64,
    /// Probability grid for the coverage diagnostic.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.8, 0.9, 0.95, 0.99])]
    pub p_grid: Vec<f64>,
    /// Off-pair filter width for slice validation clouds.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Points per bivariate slice curve.
    #[arg(long, default_value_t = 512)]
    pub slice_grid: usize,
    /// Simulation replicates behind the QQ tolerance bounds.
    #[arg(long, default_value_t = 200)]
    pub envelope_reps: usize,
    /// Seed of the envelope simulations.
    #[arg(long, default_value_t = 90210)]
    pub envelope_seed: u64,
}

fn write_qq(path: &PathBuf, series: &QqSeries) -> Result<()> {
    let lower = series.lower.clone().unwrap_or_default();
    let upper = series.upper.clone().unwrap_or_default();
    let rows = series
        .theoretical
        .iter()
        .zip(series.observed.iter())
        .enumerate()
        .map(|(k, (t, o))| {
            vec![
                (k + 1).to_string(),
                t.to_string(),
                o.to_string(),
                lower.get(k).map(f64::to_string).unwrap_or_default(),
                upper.get(k).map(f64::to_string).unwrap_or_default(),
            ]
        });
    super::write_csv(
        path,
        &["rank", "theoretical", "observed", "lower", "upper"],
        rows,
    )
}

pub fn run(args: DiagnoseArgs) -> Result<()> {
    let model = super::read_model(&args.model)?;
    let data = super::load_laplace_data(&args.data, false)?;
    let d = model.dim();
    std::fs::create_dir_all(&args.out_dir)?;

    // truncated-gamma QQ over the threshold exceedances
    let polar = decompose(&data);
    let qq = truncgamma_qq(&polar, &model)?
        .with_exp1_envelope(args.envelope_reps, args.envelope_seed);
    write_qq(&args.out_dir.join("truncgamma_qq.csv"), &qq)?;

    // extended-ADF diagnostic at the all-positive diagonal
    let diag = vec![1.0 / (d as f64).sqrt(); d];
    let adf = estimate_adf(&model, &diag)?;
    let adf_qq = adf_diagnostic(&data, &diag, adf.lambda_hat, args.q)?
        .with_exp1_envelope(args.envelope_reps, args.envelope_seed.wrapping_add(1));
    if let Some(w) = &adf_qq.warning {
        eprintln!("warning: {w}");
    }
    write_qq(&args.out_dir.join("adf_qq.csv"), &adf_qq)?;

    // return-level coverage
    let coverage = return_level_coverage(&data, &model, &args.p_grid)?;
    super::write_csv(
        args.out_dir.join("coverage.csv"),
        &["p", "p_hat", "log_p", "log_p_hat"],
        coverage.iter().map(|c| {
            vec![
                c.p.to_string(),
                c.p_hat.to_string(),
                c.log_pair.0.to_string(),
                c.log_pair.1.to_string(),
            ]
        }),
    )?;

    // bivariate slices with scaled validation clouds
    for i in 0..d {
        for j in (i + 1)..d {
            let curve = bivariate_slice(
                &|w: &[f64]| model.rescaled_gauge(w),
                d,
                i,
                j,
                args.slice_grid,
            )?;
            super::write_csv(
                args.out_dir.join(format!("slice_{i}_{j}.csv")),
                &["u", "v"],
                curve
                    .iter()
                    .map(|(x, y)| vec![x.to_string(), y.to_string()]),
            )?;
            let (points, warning) = slice_validation_points(&data, i, j, args.epsilon)?;
            if let Some(w) = warning {
                eprintln!("warning: slice ({i}, {j}): {w}");
            }
            super::write_csv(
                args.out_dir.join(format!("slice_points_{i}_{j}.csv")),
                &["u", "v"],
                points
                    .iter()
                    .map(|(x, y)| vec![x.to_string(), y.to_string()]),
            )?;
        }
    }
    println!("diagnostics written under {}", args.out_dir.display());
    Ok(())
}
