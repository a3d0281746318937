//! Subcommand implementations.

mod bootstrap;
mod diagnose;
mod fit;
mod infer;
mod simulate;
mod study;
mod transform;

use std::io::Write;
use std::path::Path;

use clap::Subcommand;

use limitset_core::{CoreError, DataMatrix, MarginTag, Result};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a seeded sample from a study copula on Laplace margins.
    Simulate(simulate::SimulateArgs),
    /// Rank-transform raw data onto standard Laplace margins.
    Transform(transform::TransformArgs),
    /// Fit the two-stage gauge model to Laplace-margin data.
    Fit(fit::FitArgs),
    /// Query a fitted model: extended ADF, tail probabilities, return levels.
    Infer(infer::InferArgs),
    /// Emit goodness-of-fit diagnostics as plot-ready CSV files.
    Diagnose(diagnose::DiagnoseArgs),
    /// Block-bootstrap the full pipeline for uncertainty quantification.
    Bootstrap(bootstrap::BootstrapArgs),
    /// Run a simulation-study grid and aggregate ISE/MALE per cell.
    Study(study::StudyArgs),
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate::run(args),
        Command::Transform(args) => transform::run(args),
        Command::Fit(args) => fit::run(args),
        Command::Infer(args) => infer::run(args),
        Command::Diagnose(args) => diagnose::run(args),
        Command::Bootstrap(args) => bootstrap::run(args),
        Command::Study(args) => study::run(args),
    }
}

/// Writes a CSV with full round-trip decimal precision.
pub(crate) fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a CSV of row vectors and normalizes each row to the unit sphere.
pub(crate) fn read_angles(path: &Path, expected_dim: usize) -> Result<Vec<Vec<f64>>> {
    let matrix = limitset_core::io::read_matrix_csv(path, MarginTag::Raw)?;
    if matrix.ncols() != expected_dim {
        return Err(CoreError::Dimension {
            op: "read_angles",
            expected: expected_dim,
            got: matrix.ncols(),
        });
    }
    let mut angles = Vec::with_capacity(matrix.nrows());
    for (k, row) in matrix.rows_iter().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(CoreError::invalid_data(
                "read_angles",
                format!("row {} is the zero vector", k + 1),
            ));
        }
        angles.push(row.iter().map(|v| v / norm).collect());
    }
    Ok(angles)
}

/// Loads a Laplace-margin data matrix, optionally rank-transforming raw
/// input first.
pub(crate) fn load_laplace_data(path: &Path, rank_transform: bool) -> Result<DataMatrix> {
    if rank_transform {
        let raw = limitset_core::io::read_matrix_csv(path, MarginTag::Raw)?;
        limitset_core::margins::rank_transform_to_laplace(&raw)
    } else {
        limitset_core::io::read_matrix_csv(path, MarginTag::Laplace)
    }
}

pub(crate) fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

pub(crate) fn read_model(path: &Path) -> Result<limitset_core::GaugeModel> {
    let text = std::fs::read_to_string(path)?;
    limitset_core::GaugeModel::from_json(&text)
}
