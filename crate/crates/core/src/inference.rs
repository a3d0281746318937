//! Extremal dependence summaries from a fitted unit-level set: the extended
//! angular dependence function, joint tail probabilities via the
//! min-projection, and return-level sets.
//!
//! Everything here is pure given a frozen model and embarrassingly parallel
//! across query angles.

use crate::error::{CoreError, Result};
use crate::gauge::GaugeModel;
use crate::geometry::linf;
use crate::special::{inv_reg_gamma_lower, reg_gamma_lower, reg_gamma_upper};
use crate::DataMatrix;

/// Extended-ADF estimate at one angle: Λ̂(w) = ‖w‖∞ / r̃, where r̃ is the
/// largest scaling that keeps the w-directed corner region touching the
/// fitted boundary.
#[derive(Debug, Clone)]
pub struct AdfEstimate {
    pub angle: Vec<f64>,
    pub lambda_hat: f64,
    pub r_tilde: f64,
}

/// Min-projection (structure variable) t_w(x) = minᵢ xᵢ/wᵢ.
pub fn min_projection(x: &[f64], w: &[f64]) -> f64 {
    x.iter()
        .zip(w.iter())
        .map(|(&a, &b)| a / b)
        .fold(f64::INFINITY, f64::min)
}

/// Type-7 empirical quantile of an ascending-sorted sample.
pub fn quantile_type7(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&q) {
        return Err(CoreError::domain(
            "quantile_type7",
            "need a non-empty sample and q in [0, 1]",
        ));
    }
    let n = sorted.len();
    let h = (n as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// ADF estimate from an explicit boundary cloud (row-major points of the
/// unit-level set). Candidates are restricted to the orthant of `w`; the
/// caller may append the query's own boundary point to sharpen the upper
/// bound.
pub fn adf_from_boundary(cloud: &[f64], d: usize, w: &[f64]) -> Result<AdfEstimate> {
    if w.len() != d {
        return Err(CoreError::Dimension {
            op: "adf_from_boundary",
            expected: d,
            got: w.len(),
        });
    }
    if w.iter().any(|&wi| wi == 0.0) {
        return Err(CoreError::domain(
            "adf_from_boundary",
            "the extended ADF is not defined on the axes (zero component in w)",
        ));
    }
    let sup = linf(w);
    let mut best = f64::NEG_INFINITY;
    for point in cloud.chunks_exact(d) {
        // same-orthant filter
        if point.iter().zip(w.iter()).any(|(&xi, &wi)| xi * wi <= 0.0) {
            continue;
        }
        let m = point
            .iter()
            .zip(w.iter())
            .map(|(&xi, &wi)| xi / wi)
            .fold(f64::INFINITY, f64::min);
        let r = sup * m;
        if r > best {
            best = r;
        }
    }
    if !best.is_finite() || best <= 0.0 {
        return Err(CoreError::invalid_data(
            "adf_from_boundary",
            "no boundary candidates in the orthant of w",
        ));
    }
    Ok(AdfEstimate {
        angle: w.to_vec(),
        lambda_hat: sup / best,
        r_tilde: best,
    })
}

/// Extended-ADF estimate from the fitted model. Candidates are the model's
/// boundary cloud (its reference set pushed through the rescaled boundary
/// map) filtered to the orthant of `w`, plus the query's own boundary point,
/// which pins the estimate at or below g̃(w).
pub fn estimate_adf(model: &GaugeModel, w: &[f64]) -> Result<AdfEstimate> {
    let d = model.dim();
    if w.len() != d {
        return Err(CoreError::Dimension {
            op: "estimate_adf",
            expected: d,
            got: w.len(),
        });
    }
    if w.iter().any(|&wi| wi == 0.0) {
        return Err(CoreError::domain(
            "estimate_adf",
            "the extended ADF is not defined on the axes (zero component in w)",
        ));
    }
    let cloud = model.boundary_cloud();
    let own = model.evaluate(w).boundary_point;
    let mut est = adf_from_boundary(cloud, d, w)?;
    let sup = linf(w);
    let own_r = sup
        * own
            .iter()
            .zip(w.iter())
            .map(|(&xi, &wi)| xi / wi)
            .fold(f64::INFINITY, f64::min);
    if own_r > est.r_tilde {
        est.r_tilde = own_r;
        est.lambda_hat = sup / own_r;
    }
    Ok(est)
}

/// One joint-tail probability estimate with its provenance.
#[derive(Debug, Clone)]
pub struct TailProbability {
    pub probability: f64,
    pub lambda_hat: f64,
    /// Empirical q-quantile of the min-projection.
    pub u: f64,
    /// ‖x‖ of the query point.
    pub r: f64,
    pub angle: Vec<f64>,
}

/// Survival scaling exp{−Λ(r − u)}·(1 − q) shared by the estimator and its
/// algebra tests.
pub fn tail_probability_from(lambda: f64, r: f64, u: f64, q: f64) -> f64 {
    (-lambda * (r - u)).exp() * (1.0 - q)
}

/// Estimates Pr(sgn(xᵢ)Xᵢ > sgn(xᵢ)xᵢ ∀i) for a far corner point x:
/// the exceedance rate of the min-projection beyond its empirical
/// q-quantile, extrapolated by the fitted extended ADF.
pub fn tail_probability(
    x: &[f64],
    data: &DataMatrix,
    model: &GaugeModel,
    q: f64,
) -> Result<TailProbability> {
    if !(0.0 < q && q < 1.0) {
        return Err(CoreError::domain("tail_probability", "q must lie in (0, 1)"));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(CoreError::domain("tail_probability", "query point is the origin"));
    }
    let w: Vec<f64> = x.iter().map(|v| v / r).collect();
    if w.iter().any(|&wi| wi == 0.0) {
        return Err(CoreError::domain(
            "tail_probability",
            "query direction touches an axis; the min-projection is undefined there",
        ));
    }
    let mut t: Vec<f64> = data.rows_iter().map(|row| min_projection(row, &w)).collect();
    t.sort_by(f64::total_cmp);
    let u = quantile_type7(&t, q)?;
    if r < u {
        return Err(CoreError::invalid_data(
            "tail_probability",
            format!(
                "the query radius {r} sits below the empirical {q}-quantile {u} of the \
                 structure variable; use the empirical estimate directly"
            ),
        ));
    }
    let adf = estimate_adf(model, &w)?;
    Ok(TailProbability {
        probability: tail_probability_from(adf.lambda_hat, r, u, q),
        lambda_hat: adf.lambda_hat,
        u,
        r,
        angle: w,
    })
}

/// p-quantile radius of the conditional R | W = w under the fitted model:
/// the truncated-gamma quantile spliced onto the τ mass below the threshold.
pub fn return_radius_from(alpha: f64, rate: f64, thresh: f64, tau: f64, p: f64) -> Result<f64> {
    if !(p > tau && p < 1.0) {
        return Err(CoreError::domain(
            "return_level_radius",
            format!("p must lie in (tau, 1) = ({tau}, 1), got {p}"),
        ));
    }
    let z = rate * thresh;
    let lower = reg_gamma_lower(alpha, z)?;
    let upper = reg_gamma_upper(alpha, z)?;
    let inner = (p - tau) / (1.0 - tau) * upper + lower;
    Ok(inv_reg_gamma_lower(alpha, inner.min(1.0 - 1e-16))? / rate)
}

/// Return-level radius r_p(w) with the rate taken as the fitted rescaled
/// gauge.
pub fn return_level_radius(model: &GaugeModel, w: &[f64], p: f64) -> Result<f64> {
    let eval = model.evaluate(w);
    return_radius_from(model.alpha, eval.gauge, eval.threshold, model.tau, p)
}

/// Membership of x in the return-level set B_p (closed; the origin is
/// inside by construction).
pub fn return_level_membership(model: &GaugeModel, p: f64, x: &[f64]) -> Result<bool> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Ok(true);
    }
    let w: Vec<f64> = x.iter().map(|v| v / r).collect();
    Ok(r <= return_level_radius(model, &w, p)?)
}
