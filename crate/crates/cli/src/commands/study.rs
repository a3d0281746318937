//! `study`: the simulation-study grid. Each cell simulates `replicates`
//! data sets from its copula, fits the full pipeline to each, and reports
//! the median and 2.5/97.5 percentiles of the ISE (fitted against the
//! theoretical gauge) and the MALE over four equal-threshold joint tail
//! probabilities (upper 0.99/0.999, lower 0.01/0.001 Laplace quantiles)
//! against the quadrature oracle. Partial failures are counted per cell and
//! the run continues.

use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;

use limitset_core::copulas::{
    gauge_gaussian, gauge_numerical_oracle, gauge_student_t, region_log_prob, sample, CopulaKind,
    CopulaSpec,
};
use limitset_core::diagnostics::{ise, male};
use limitset_core::geometry::sample_sphere;
use limitset_core::inference::{quantile_type7, tail_probability};
use limitset_core::margins::laplace_quantile;
use limitset_core::{CoreError, Result};

use crate::config::{load_study_grid, StudyCell, StudyGrid};

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Study grid JSON (cells plus shared settings).
    #[arg(long)]
    pub grid: PathBuf,
    /// Output CSV of per-cell aggregates.
    #[arg(long)]
    pub out: PathBuf,
}

struct ReplicateMetrics {
    ise: f64,
    male: Option<f64>,
}

fn build_spec(grid: &StudyGrid, cell: &StudyCell) -> Result<CopulaSpec> {
    crate::config::CopulaFlags {
        copula: cell.copula.clone(),
        d: cell.d,
        corr_seed: grid.corr_seed,
        d_max: grid.d_max,
        nu: grid.nu,
        theta: grid.theta,
    }
    .build()
}

fn run_replicate(
    grid: &StudyGrid,
    cell: &StudyCell,
    spec: &CopulaSpec,
    rep: usize,
) -> Result<ReplicateMetrics> {
    let rep_seed = grid
        .seed
        .wrapping_mul(1_000_003)
        .wrapping_add(rep as u64);
    let data = sample(spec, cell.n, rep_seed)?;

    let mut flags = grid.fit.clone();
    flags.tau = Some(cell.tau);
    flags.q_arch = Some(cell.q_arch.clone());
    flags.g_arch = Some(cell.g_arch.clone());
    flags.seed = Some(rep_seed.wrapping_add(0x9e37));
    let config = flags.into_config()?;
    let report = limitset_core::fit(&data, &config)?;

    // ISE against the theoretical gauge on a fresh evaluation set
    let eval_angles = sample_sphere(grid.ise_angles, cell.d, grid.seed.wrapping_add(17));
    let ise_val = match spec.kind() {
        CopulaKind::Gaussian => {
            let q = spec.precision()?;
            ise(
                &move |w: &[f64]| gauge_gaussian(w, &q).expect("valid query"),
                &report.model,
                &eval_angles,
            )
        }
        CopulaKind::StudentT => {
            let nu = spec.nu().expect("student-t has nu");
            ise(
                &move |w: &[f64]| gauge_student_t(w, nu).expect("valid query"),
                &report.model,
                &eval_angles,
            )
        }
        CopulaKind::Logistic => {
            let spec = spec.clone();
            ise(
                &move |w: &[f64]| {
                    gauge_numerical_oracle(&spec, w, 200.0).expect("oracle evaluates")
                },
                &report.model,
                &eval_angles,
            )
        }
    };

    // four equal-threshold joint tail probabilities
    let mut truths = Vec::new();
    let mut estimates = Vec::new();
    for level in [0.99, 0.999, 0.01, 0.001] {
        let corner = vec![laplace_quantile(level)?; cell.d];
        if let Ok(est) = tail_probability(&corner, &data, &report.model, grid.q_level) {
            truths.push(region_log_prob(spec, &corner)?.exp());
            estimates.push(est.probability);
        }
    }
    let male_val = if estimates.is_empty() {
        None
    } else {
        Some(male(&truths, &estimates)?)
    };
    Ok(ReplicateMetrics {
        ise: ise_val,
        male: male_val,
    })
}

fn percentiles(values: &mut Vec<f64>) -> Result<(f64, f64, f64)> {
    values.sort_by(f64::total_cmp);
    Ok((
        quantile_type7(values, 0.5)?,
        quantile_type7(values, 0.025)?,
        quantile_type7(values, 0.975)?,
    ))
}

fn arch_label(widths: &[usize]) -> String {
    widths
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

pub fn run(args: StudyArgs) -> Result<()> {
    let grid = load_study_grid(&args.grid)?;
    let mut rows = Vec::new();
    for cell in &grid.cells {
        if cell.replicates == 0 {
            return Err(CoreError::domain("study", "cell with zero replicates"));
        }
        let spec = build_spec(&grid, cell)?;
        let outcomes: Vec<Result<ReplicateMetrics>> = (0..cell.replicates)
            .into_par_iter()
            .map(|rep| run_replicate(&grid, cell, &spec, rep))
            .collect();

        let mut ises = Vec::new();
        let mut males = Vec::new();
        let mut failures = 0usize;
        for outcome in outcomes {
            match outcome {
                Ok(metrics) => {
                    ises.push(metrics.ise);
                    match metrics.male {
                        Some(m) => males.push(m),
                        None => failures += 1,
                    }
                }
                Err(e) => {
                    eprintln!(
                        "warning: replicate failed in cell ({}, d={}, n={}): {e}",
                        cell.copula, cell.d, cell.n
                    );
                    failures += 1;
                }
            }
        }
        if ises.is_empty() {
            eprintln!(
                "warning: every replicate failed in cell ({}, d={}, n={})",
                cell.copula, cell.d, cell.n
            );
            continue;
        }
        let (ise_med, ise_lo, ise_hi) = percentiles(&mut ises)?;
        let (male_med, male_lo, male_hi) = if males.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            percentiles(&mut males)?
        };
        rows.push(vec![
            cell.copula.clone(),
            cell.d.to_string(),
            cell.n.to_string(),
            cell.tau.to_string(),
            arch_label(&cell.q_arch),
            arch_label(&cell.g_arch),
            cell.replicates.to_string(),
            ise_med.to_string(),
            ise_lo.to_string(),
            ise_hi.to_string(),
            male_med.to_string(),
            male_lo.to_string(),
            male_hi.to_string(),
            failures.to_string(),
        ]);
    }
    super::write_csv(
        &args.out,
        &[
            "copula",
            "d",
            "n",
            "tau",
            "q_arch",
            "g_arch",
            "replicates",
            "ise_median",
            "ise_p025",
            "ise_p975",
            "male_median",
            "male_p025",
            "male_p975",
            "failures",
        ],
        rows.into_iter(),
    )?;
    println!("study results written to {}", args.out.display());
    Ok(())
}
