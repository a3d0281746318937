//! `infer`: batch queries against a frozen model. Rows that fail (for
//! example ADF queries on an axis) carry a per-row error and the run
//! continues.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use limitset_core::inference::{estimate_adf, return_level_radius, tail_probability};
use limitset_core::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InferMode {
    /// Extended ADF at query angles.
    Adf,
    /// Joint tail probabilities at query corner points.
    Prob,
    /// Return-level radii at query angles over a probability list.
    Rlevel,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Fitted model JSON bundle.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub mode: InferMode,
    /// Query angles CSV (adf, rlevel); rows are normalized to unit length.
    #[arg(long)]
    pub angles: Option<PathBuf>,
    /// Query corner points CSV (prob).
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Laplace-margin data CSV backing the empirical quantile (prob).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Structure-variable quantile level (prob).
    #[arg(long, default_value_t = 0.9995)]
    pub q: f64,
    /// Probability levels (rlevel), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: InferArgs) -> Result<()> {
    let model = super::read_model(&args.model)?;
    let d = model.dim();
    match args.mode {
        InferMode::Adf => {
            let path = args.angles.ok_or_else(|| {
                CoreError::domain("infer", "--angles is required in adf mode")
            })?;
            let angles = super::read_angles(&path, d)?;
            let mut header: Vec<String> = (1..=d).map(|i| format!("w{i}")).collect();
            header.extend(["lambda_hat".into(), "r_tilde".into(), "error".into()]);
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = angles.iter().map(|w| {
                let mut row: Vec<String> = w.iter().map(f64::to_string).collect();
                match estimate_adf(&model, w) {
                    Ok(est) => {
                        row.push(est.lambda_hat.to_string());
                        row.push(est.r_tilde.to_string());
                        row.push(String::new());
                    }
                    Err(e) => {
                        row.push(String::new());
                        row.push(String::new());
                        row.push(format!("\"{e}\""));
                    }
                }
                row
            });
            super::write_csv(&args.out, &header_refs, rows)?;
        }
        InferMode::Prob => {
            let points_path = args.points.ok_or_else(|| {
                CoreError::domain("infer", "--points is required in prob mode")
            })?;
            let data_path = args.data.ok_or_else(|| {
                CoreError::domain("infer", "--data is required in prob mode")
            })?;
            let data = super::load_laplace_data(&data_path, false)?;
            let points = limitset_core::io::read_matrix_csv(
                &points_path,
                limitset_core::MarginTag::Laplace,
            )?;
            if points.ncols() != d {
                return Err(CoreError::Dimension {
                    op: "infer prob",
                    expected: d,
                    got: points.ncols(),
                });
            }
            let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
            header.extend((1..=d).map(|i| format!("w{i}")));
            header.extend([
                "lambda_hat".into(),
                "u".into(),
                "probability".into(),
                "error".into(),
            ]);
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = points.rows_iter().map(|x| {
                let mut row: Vec<String> = x.iter().map(f64::to_string).collect();
                match tail_probability(x, &data, &model, args.q) {
                    Ok(est) => {
                        row.extend(est.angle.iter().map(f64::to_string));
                        row.push(est.lambda_hat.to_string());
                        row.push(est.u.to_string());
                        row.push(est.probability.to_string());
                        row.push(String::new());
                    }
                    Err(e) => {
                        row.extend(std::iter::repeat_n(String::new(), d + 3));
                        row.push(format!("\"{e}\""));
                    }
                }
                row
            });
            super::write_csv(&args.out, &header_refs, rows)?;
        }
        InferMode::Rlevel => {
            let path = args.angles.ok_or_else(|| {
                CoreError::domain("infer", "--angles is required in rlevel mode")
            })?;
            if args.p.is_empty() {
                return Err(CoreError::domain("infer", "--p list is empty"));
            }
            let angles = super::read_angles(&path, d)?;
            let mut header: Vec<String> = (1..=d).map(|i| format!("w{i}")).collect();
            header.extend(["p".into(), "radius".into(), "error".into()]);
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let model_ref = &model;
            let rows = angles.iter().flat_map(|w| {
                args.p.iter().map(move |&p| {
                    let mut row: Vec<String> = w.iter().map(f64::to_string).collect();
                    row.push(p.to_string());
                    match return_level_radius(model_ref, w, p) {
                        Ok(r) => {
                            row.push(r.to_string());
                            row.push(String::new());
                        }
                        Err(e) => {
                            row.push(String::new());
                            row.push(format!("\"{e}\""));
                        }
                    }
                    row
                })
            });
            super::write_csv(&args.out, &header_refs, rows)?;
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}
