//! Circular moving-block bootstrap for serially dependent data.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::data::DataMatrix;
use crate::error::{CoreError, Result};

/// Resampling plan: block length in rows plus the seed that fixes the draw.
#[derive(Debug, Clone, Copy)]
pub struct BlockPlan {
    pub block_len: usize,
    pub seed: u64,
}

impl BlockPlan {
    pub fn new(block_len: usize, seed: u64) -> Result<Self> {
        if block_len == 0 {
            return Err(CoreError::domain("BlockPlan", "block length must be >= 1"));
        }
        Ok(BlockPlan { block_len, seed })
    }

    pub fn num_blocks(&self, n: usize) -> usize {
        n.div_ceil(self.block_len)
    }
}

/// Circular moving-block resample: ⌈n/L⌉ uniformly chosen start rows, each
/// extended to a contiguous block with wrap-around, truncated to n rows.
/// Wrapping removes the edge-effect bias of non-circular blocks.
pub fn block_resample(data: &DataMatrix, plan: &BlockPlan) -> Result<DataMatrix> {
    let n = data.nrows();
    let l = plan.block_len;
    if l > n {
        return Err(CoreError::invalid_data(
            "block_resample",
            format!("block length {l} exceeds sample size {n}"),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(plan.seed);
    let d = data.ncols();
    let mut out = Vec::with_capacity(n * d);
    let mut filled = 0usize;
    while filled < n {
        let start = rng.gen_range(0..n);
        let take = l.min(n - filled);
        for k in 0..take {
            out.extend_from_slice(data.row((start + k) % n));
        }
        filled += take;
    }
    data.with_values(out, data.margin())
}
