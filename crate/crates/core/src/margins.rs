//! Marginal transforms between raw, exponential, uniform, and standard
//! Laplace scales.

use crate::data::{DataMatrix, MarginTag};
use crate::error::{CoreError, Result};

/// Standard Laplace distribution function: ½eˣ for x < 0, 1 − ½e⁻ˣ otherwise.
pub fn laplace_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * x.exp()
    } else {
        1.0 - 0.5 * (-x).exp()
    }
}

/// Standard Laplace quantile, the exact inverse of [`laplace_cdf`].
pub fn laplace_quantile(q: f64) -> Result<f64> {
    if !(0.0 < q && q < 1.0) {
        return Err(CoreError::domain(
            "laplace_quantile",
            format!("requires q in (0, 1), got {q}"),
        ));
    }
    Ok(if q < 0.5 {
        (2.0 * q).ln()
    } else {
        -(2.0 * (1.0 - q)).ln()
    })
}

/// Maps a unit-exponential value to the standard Laplace scale.
///
/// The transform splits at the exponential median log 2: below it the value
/// maps through log(1 − e⁻ˣ) + log 2, above it through a shift by −log 2.
/// Returns −∞ at exactly zero.
pub fn exp_to_laplace(x_e: f64) -> Result<f64> {
    if !(x_e >= 0.0) {
        return Err(CoreError::domain(
            "exp_to_laplace",
            format!("requires x >= 0, got {x_e}"),
        ));
    }
    let ln2 = std::f64::consts::LN_2;
    if x_e <= ln2 {
        if x_e == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        // log(1 - e^{-x}) computed as ln(-expm1(-x)) to keep precision near 0
        Ok((-(-x_e).exp_m1()).ln() + ln2)
    } else {
        Ok(x_e - ln2)
    }
}

/// Column-wise rank transform of raw data onto standard Laplace margins.
///
/// The value with (average, 1-based) rank k maps to the Laplace quantile of
/// k/(n+1); the plotting position keeps every quantile finite.
pub fn rank_transform_to_laplace(data: &DataMatrix) -> Result<DataMatrix> {
    let n = data.nrows();
    if n < 2 {
        return Err(CoreError::invalid_data(
            "rank_transform_to_laplace",
            format!("need at least 2 rows, got {n}"),
        ));
    }
    let d = data.ncols();
    let mut out = vec![0.0; n * d];
    for j in 0..d {
        let col = data.column(j);
        let ranks = average_ranks(&col)?;
        for i in 0..n {
            out[i * d + j] = laplace_quantile(ranks[i] / (n as f64 + 1.0))?;
        }
    }
    data.with_values(out, MarginTag::Laplace)
}

/// Average (mid) ranks, 1-based; errors on a constant column.
fn average_ranks(col: &[f64]) -> Result<Vec<f64>> {
    let n = col.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).expect("finite data"));
    if col[order[0]] == col[order[n - 1]] {
        return Err(CoreError::invalid_data(
            "rank_transform_to_laplace",
            "constant column: ranks carry no information",
        ));
    }
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && col[order[j + 1]] == col[order[i]] {
            j += 1;
        }
        // ties share the average of ranks i+1..=j+1
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    Ok(ranks)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn cdf_quantile_roundtrip(q in 1e-6_f64..0.999999) {
            let x = laplace_quantile(q).unwrap();
            prop_assert!((laplace_cdf(x) - q).abs() < 1e-14);
        }

        #[test]
        fn rank_transform_median_near_zero(values in proptest::collection::vec(-1e3_f64..1e3, 5..60)) {
            let n = values.len();
            prop_assume!(values.iter().any(|v| *v != values[0]));
            let m = DataMatrix::new(values, n, 1, MarginTag::Raw).unwrap();
            let mut col = rank_transform_to_laplace(&m).unwrap().column(0);
            col.sort_by(f64::total_cmp);
            let med = if n % 2 == 1 { col[n / 2] } else { 0.5 * (col[n / 2 - 1] + col[n / 2]) };
            // within one rank step of zero
            let step = laplace_quantile((n as f64 / 2.0 + 1.0) / (n as f64 + 1.0)).unwrap();
            prop_assert!(med.abs() <= step + 1e-12);
        }
    }
}
