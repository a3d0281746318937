//! `transform`: column-wise rank transform onto standard Laplace margins.

use std::path::PathBuf;

use clap::Args;

use limitset_core::io::{read_matrix_csv, write_matrix_csv};
use limitset_core::margins::rank_transform_to_laplace;
use limitset_core::{MarginTag, Result};

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Raw input CSV (header row, numeric columns).
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV on Laplace margins.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: TransformArgs) -> Result<()> {
    let raw = read_matrix_csv(&args.input, MarginTag::Raw)?;
    let transformed = rank_transform_to_laplace(&raw)?;
    write_matrix_csv(&transformed, &args.out)?;
    std::fs::write(
        super::sidecar_path(&args.out),
        serde_json::to_string_pretty(&serde_json::json!({
            "transform": "rank-to-laplace",
            "source": args.input.display().to_string(),
            "rows": transformed.nrows(),
            "cols": transformed.ncols(),
            "margin": "laplace",
        }))
        .expect("sidecar serializes"),
    )?;
    println!(
        "rank-transformed {} rows x {} columns to {}",
        transformed.nrows(),
        transformed.ncols(),
        args.out.display()
    );
    Ok(())
}
