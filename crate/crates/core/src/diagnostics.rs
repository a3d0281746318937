//! Goodness-of-fit machinery and performance metrics: exponential-scale QQ
//! diagnostics with simulation envelopes, return-level coverage, integrated
//! squared error over the sphere, and mean absolute log error.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::gauge::GaugeModel;
use crate::geometry::{AngleSet, PolarSample};
use crate::inference::{min_projection, quantile_type7, return_level_membership};
use crate::special::{inv_reg_gamma_lower, ln_reg_gamma_upper, log_gamma, reg_gamma_lower};
use crate::DataMatrix;

/// Paired theoretical/observed quantiles on the unit-exponential scale,
/// with optional pointwise tolerance bounds.
#[derive(Debug, Clone)]
pub struct QqSeries {
    pub theoretical: Vec<f64>,
    pub observed: Vec<f64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub warning: Option<String>,
}

impl QqSeries {
    fn from_sorted(observed: Vec<f64>) -> Self {
        let m = observed.len();
        let theoretical = (1..=m)
            .map(|k| -(1.0 - k as f64 / (m as f64 + 1.0)).ln())
            .collect();
        QqSeries {
            theoretical,
            observed,
            lower: None,
            upper: None,
            warning: None,
        }
    }

    /// Pointwise order-statistic envelopes from `replicates` unit-exponential
    /// simulations of the same sample size (2.5% and 97.5% per rank).
    pub fn with_exp1_envelope(mut self, replicates: usize, seed: u64) -> Self {
        let m = self.observed.len();
        if m == 0 || replicates == 0 {
            return self;
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut per_rank: Vec<Vec<f64>> = vec![Vec::with_capacity(replicates); m];
        for _ in 0..replicates {
            let mut sim: Vec<f64> = (0..m)
                .map(|_| {
                    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                    -u.ln()
                })
                .collect();
            sim.sort_by(f64::total_cmp);
            for (rank, v) in sim.into_iter().enumerate() {
                per_rank[rank].push(v);
            }
        }
        let mut lower = Vec::with_capacity(m);
        let mut upper = Vec::with_capacity(m);
        for mut vals in per_rank {
            vals.sort_by(f64::total_cmp);
            lower.push(quantile_type7(&vals, 0.025).expect("non-empty"));
            upper.push(quantile_type7(&vals, 0.975).expect("non-empty"));
        }
        self.lower = Some(lower);
        self.upper = Some(upper);
        self
    }
}

/// Kolmogorov-Smirnov distance of a sample against the unit exponential.
pub fn ks_exp1(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// One draw from truncGamma(shape, rate) conditioned on exceeding `thresh`,
/// by inverting the conditional distribution function.
pub fn sample_truncated_gamma(
    alpha: f64,
    rate: f64,
    thresh: f64,
    rng: &mut ChaCha20Rng,
) -> Result<f64> {
    let z = rate * thresh;
    let lower = reg_gamma_lower(alpha, z)?;
    let u: f64 = rng.gen_range(0.0..1.0);
    let target = lower + u * (1.0 - lower);
    Ok(inv_reg_gamma_lower(alpha, target.min(1.0 - 1e-16))? / rate)
}

/// Probability-integral transform of the threshold exceedances to the unit
/// exponential scale under the fitted truncated-gamma model:
/// e_j = −log[ Q(α, g̃(w_j)·r_j) / Q(α, g̃(w_j)·r̂_τ(w_j)) ].
pub fn truncgamma_qq(polar: &PolarSample, model: &GaugeModel) -> Result<QqSeries> {
    let mut transformed = Vec::new();
    for j in 0..polar.len() {
        let w = polar.angles.row(j);
        let eval = model.evaluate(w);
        if polar.radii[j] > eval.threshold {
            let ln_q_r = ln_reg_gamma_upper(model.alpha, eval.gauge * polar.radii[j])?;
            let ln_q_t = ln_reg_gamma_upper(model.alpha, eval.gauge * eval.threshold)?;
            transformed.push(-(ln_q_r - ln_q_t));
        }
    }
    if transformed.len() < 20 {
        return Err(CoreError::invalid_data(
            "truncgamma_qq",
            format!("only {} exceedances; need at least 20", transformed.len()),
        ));
    }
    transformed.sort_by(f64::total_cmp);
    Ok(QqSeries::from_sorted(transformed))
}

/// Extended-ADF diagnostic from precomputed min-projections: exceedances of
/// `u` scaled by Λ̂ are unit exponential when the fitted rate is right.
pub fn adf_qq_from_projections(t: &[f64], lambda_hat: f64, u: f64) -> QqSeries {
    let mut scaled: Vec<f64> = t
        .iter()
        .filter(|&&tk| tk > u)
        .map(|&tk| lambda_hat * (tk - u))
        .collect();
    scaled.sort_by(f64::total_cmp);
    let mut series = QqSeries::from_sorted(scaled);
    if series.observed.len() < 10 {
        series.warning = Some(format!(
            "only {} min-projection exceedances; the diagnostic is unstable",
            series.observed.len()
        ));
    }
    series
}

/// Extended-ADF diagnostic at one angle: min-projections of the data, their
/// empirical q-quantile, and the Λ̂-scaled exceedances on the exponential
/// scale.
pub fn adf_diagnostic(
    data: &DataMatrix,
    w: &[f64],
    lambda_hat: f64,
    q: f64,
) -> Result<QqSeries> {
    if w.iter().any(|&wi| wi == 0.0) {
        return Err(CoreError::domain(
            "adf_diagnostic",
            "angle with zero component",
        ));
    }
    if !(0.0 < q && q < 1.0) {
        return Err(CoreError::domain("adf_diagnostic", "q must lie in (0, 1)"));
    }
    let mut t: Vec<f64> = data.rows_iter().map(|row| min_projection(row, w)).collect();
    t.sort_by(f64::total_cmp);
    let u = quantile_type7(&t, q)?;
    Ok(adf_qq_from_projections(&t, lambda_hat, u))
}

/// One point of the return-level coverage diagnostic.
#[derive(Debug, Clone)]
pub struct CoveragePoint {
    pub p: f64,
    pub p_hat: f64,
    /// (−log(1−p), −log(1−p̂)), the plotted pair.
    pub log_pair: (f64, f64),
}

/// Empirical coverage of the return-level sets B_p over a probability grid.
pub fn return_level_coverage(
    data: &DataMatrix,
    model: &GaugeModel,
    p_grid: &[f64],
) -> Result<Vec<CoveragePoint>> {
    let n = data.nrows();
    if n == 0 {
        return Err(CoreError::invalid_data("return_level_coverage", "no data"));
    }
    let mut out = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        if !(p > model.tau && p < 1.0) {
            return Err(CoreError::domain(
                "return_level_coverage",
                format!("grid point {p} outside (tau, 1)"),
            ));
        }
        let inside = data
            .rows_iter()
            .map(|row| return_level_membership(model, p, row))
            .collect::<Result<Vec<bool>>>()?
            .iter()
            .filter(|&&b| b)
            .count();
        let p_hat = inside as f64 / n as f64;
        out.push(CoveragePoint {
            p,
            p_hat,
            log_pair: (-(1.0 - p).ln(), -(1.0 - p_hat).max(f64::MIN_POSITIVE).ln()),
        });
    }
    Ok(out)
}

/// Surface area of S^{d−1}: 2π^{d/2}/Γ(d/2).
pub fn sphere_surface_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0)
        / log_gamma(d as f64 / 2.0).expect("positive argument").exp()
}

/// Monte-Carlo integrated squared error between two gauge functions over the
/// sphere: (A_d/|𝒲|) Σ (1/g₀(w) − 1/g₁(w))².
pub fn ise_between<G0, G1>(g0: &G0, g1: &G1, angles: &AngleSet) -> f64
where
    G0: Fn(&[f64]) -> f64 + Sync,
    G1: Fn(&[f64]) -> f64 + Sync,
{
    let d = angles.dim();
    let partials: Vec<f64> = angles
        .par_rows()
        .chunks(4096)
        .map(|rows| {
            rows.iter()
                .map(|w| {
                    let diff = 1.0 / g0(w) - 1.0 / g1(w);
                    diff * diff
                })
                .sum::<f64>()
        })
        .collect();
    sphere_surface_area(d) / angles.len() as f64 * partials.iter().sum::<f64>()
}

/// ISE of the fitted rescaled gauge against a gauge oracle.
pub fn ise<G0>(g_true: &G0, model: &GaugeModel, angles: &AngleSet) -> f64
where
    G0: Fn(&[f64]) -> f64 + Sync,
{
    ise_between(g_true, &|w: &[f64]| model.rescaled_gauge(w), angles)
}

/// Mean absolute log error between paired probabilities.
pub fn male(true_probs: &[f64], est_probs: &[f64]) -> Result<f64> {
    if true_probs.len() != est_probs.len() || true_probs.is_empty() {
        return Err(CoreError::Dimension {
            op: "male",
            expected: true_probs.len(),
            got: est_probs.len(),
        });
    }
    let mut acc = 0.0;
    for (&p, &q) in true_probs.iter().zip(est_probs.iter()) {
        if !(p > 0.0 && q > 0.0) {
            return Err(CoreError::domain(
                "male",
                format!("probabilities must be positive, got ({p}, {q})"),
            ));
        }
        acc += (q.ln() - p.ln()).abs();
    }
    Ok(acc / true_probs.len() as f64)
}

/// Scaled bivariate sample cloud for validating a unit-level-set slice:
/// rows whose off-pair norm divided by log(n/2) is at most ε, projected onto
/// the (i, j) plane and scaled the same way.
pub fn slice_validation_points(
    data: &DataMatrix,
    i: usize,
    j: usize,
    epsilon: f64,
) -> Result<(Vec<(f64, f64)>, Option<String>)> {
    let d = data.ncols();
    if i >= d || j >= d || i == j {
        return Err(CoreError::domain(
            "slice_validation_points",
            format!("indices ({i}, {j}) invalid for dimension {d}"),
        ));
    }
    if !(epsilon > 0.0) {
        return Err(CoreError::domain(
            "slice_validation_points",
            "epsilon must be positive",
        ));
    }
    if data.nrows() <= 2 {
        return Err(CoreError::invalid_data(
            "slice_validation_points",
            "the log(n/2) scaling needs n > 2 rows",
        ));
    }
    let scale = (data.nrows() as f64 / 2.0).ln();
    let mut points = Vec::new();
    for row in data.rows_iter() {
        let off: f64 = row
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i && *k != j)
            .map(|(_, &v)| v * v)
            .sum::<f64>()
            .sqrt();
        if off / scale <= epsilon {
            points.push((row[i] / scale, row[j] / scale));
        }
    }
    let warning = if points.is_empty() {
        Some(format!(
            "no rows pass the off-pair filter at epsilon = {epsilon}; try a larger value"
        ))
    } else {
        None
    };
    Ok((points, warning))
}
