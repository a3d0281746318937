//! Closed-form joint log densities of the study copulas on Laplace or
//! exponential margins, evaluated fully in log space so the gauge oracle can
//! probe rays hundreds of units from the origin.

use nalgebra::DMatrix;

use crate::error::{CoreError, Result};
use crate::special::{log_gamma, normal_upper_quantile, student_t_upper_quantile};

use super::{CopulaKind, CopulaSpec};

/// Marginal scale the oracle density is expressed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMargin {
    Laplace,
    Exponential,
}

/// log f(x) of the copula on standard Laplace margins.
pub fn log_density_laplace(spec: &CopulaSpec, x: &[f64]) -> Result<f64> {
    log_density_margins(spec, x, OracleMargin::Laplace)
}

/// log f(x) of the copula on the requested margins. Exponential margins
/// require x ≥ 0 componentwise.
pub fn log_density_margins(spec: &CopulaSpec, x: &[f64], margin: OracleMargin) -> Result<f64> {
    if x.len() != spec.dim() {
        return Err(CoreError::Dimension {
            op: "log_density_margins",
            expected: spec.dim(),
            got: x.len(),
        });
    }
    if margin == OracleMargin::Exponential && x.iter().any(|&v| v < 0.0) {
        return Err(CoreError::domain(
            "log_density_margins",
            "exponential margins require non-negative coordinates",
        ));
    }
    match spec.kind() {
        CopulaKind::Gaussian => gaussian_log_density(spec, x, margin),
        CopulaKind::StudentT => student_t_log_density(spec, x, margin),
        CopulaKind::Logistic => gumbel_log_density(spec, x, margin),
    }
}

/// Upper-tail probability of the margin at value v: ½e^{−v} on the Laplace
/// scale for v ≥ 0 (mirrored below zero), e^{−v} on the exponential scale.
/// Returned as (tail_prob, is_upper_tail).
fn margin_tail(v: f64, margin: OracleMargin) -> (f64, bool) {
    match margin {
        OracleMargin::Laplace => {
            if v >= 0.0 {
                (0.5 * (-v).exp(), true)
            } else {
                (0.5 * v.exp(), false)
            }
        }
        OracleMargin::Exponential => {
            let upper = (-v).exp();
            // below the median the lower tail 1 − e^{−v} is better conditioned
            if upper <= 0.5 {
                (upper, true)
            } else {
                (-(-v).exp_m1(), false)
            }
        }
    }
}

/// log marginal density of the margin scale at v.
fn margin_log_density(v: f64, margin: OracleMargin) -> f64 {
    match margin {
        OracleMargin::Laplace => -v.abs() - std::f64::consts::LN_2,
        OracleMargin::Exponential => -v,
    }
}

/// Normal score with the same tail probability as the margin value.
fn normal_score(v: f64, margin: OracleMargin) -> Result<f64> {
    let (tail, upper) = margin_tail(v, margin);
    let z = normal_upper_quantile(tail)?;
    Ok(if upper { z } else { -z })
}

fn ln_normal_pdf(z: f64) -> f64 {
    -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

struct EllipticalPieces {
    ln_det: f64,
    precision: DMatrix<f64>,
}

fn elliptical_pieces(spec: &CopulaSpec) -> Result<EllipticalPieces> {
    let corr = spec
        .corr()
        .expect("elliptical spec has correlation")
        .clone();
    let chol = corr
        .clone()
        .cholesky()
        .ok_or_else(|| CoreError::domain("log_density", "correlation not positive definite"))?;
    let ln_det = 2.0 * (0..corr.nrows()).map(|i| chol.l()[(i, i)].ln()).sum::<f64>();
    Ok(EllipticalPieces {
        ln_det,
        precision: spec.precision()?,
    })
}

fn gaussian_log_density(spec: &CopulaSpec, x: &[f64], margin: OracleMargin) -> Result<f64> {
    let d = spec.dim();
    let pieces = elliptical_pieces(spec)?;
    let mut z = vec![0.0; d];
    for i in 0..d {
        z[i] = normal_score(x[i], margin)?;
    }
    let mut quad = 0.0;
    for i in 0..d {
        for j in 0..d {
            quad += z[i] * pieces.precision[(i, j)] * z[j];
        }
    }
    let ln_joint = -0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * pieces.ln_det
        - 0.5 * quad;
    let mut out = ln_joint;
    for i in 0..d {
        out += margin_log_density(x[i], margin) - ln_normal_pdf(z[i]);
    }
    Ok(out)
}

fn ln_student_pdf(t: f64, nu: f64) -> Result<f64> {
    Ok(log_gamma((nu + 1.0) / 2.0)? - log_gamma(nu / 2.0)?
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - (nu + 1.0) / 2.0 * (t * t / nu).ln_1p())
}

fn student_t_log_density(spec: &CopulaSpec, x: &[f64], margin: OracleMargin) -> Result<f64> {
    let d = spec.dim();
    let nu = spec.nu().expect("student-t spec has nu");
    let pieces = elliptical_pieces(spec)?;
    let mut z = vec![0.0; d];
    for i in 0..d {
        let (tail, upper) = margin_tail(x[i], margin);
        let t = student_t_upper_quantile(tail.min(0.5), nu)?;
        // tail > 0.5 only on the exponential scale below the median
        let t = if tail > 0.5 {
            -student_t_upper_quantile(1.0 - tail, nu)?
        } else {
            t
        };
        z[i] = if upper { t } else { -t };
    }
    let mut quad = 0.0;
    for i in 0..d {
        for j in 0..d {
            quad += z[i] * pieces.precision[(i, j)] * z[j];
        }
    }
    let ln_joint = log_gamma((nu + d as f64) / 2.0)? - log_gamma(nu / 2.0)?
        - 0.5 * d as f64 * (nu * std::f64::consts::PI).ln()
        - 0.5 * pieces.ln_det
        - (nu + d as f64) / 2.0 * (quad / nu).ln_1p();
    let mut out = ln_joint;
    for i in 0..d {
        out += margin_log_density(x[i], margin) - ln_student_pdf(z[i], nu)?;
    }
    Ok(out)
}

/// log-sum-exp over a slice.
fn lse(vals: &[f64]) -> f64 {
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Signed Stirling numbers of the first kind s(n, k) for n ≤ `n`.
fn stirling_first(n: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n + 1]; n + 1];
    s[0][0] = 1.0;
    for i in 1..=n {
        for k in 1..=i {
            s[i][k] = s[i - 1][k - 1] - (i as f64 - 1.0) * s[i - 1][k];
        }
    }
    s
}

/// Stirling numbers of the second kind S(n, k) for n ≤ `n`.
fn stirling_second(n: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n + 1]; n + 1];
    s[0][0] = 1.0;
    for i in 1..=n {
        for k in 1..=i {
            s[i][k] = k as f64 * s[i - 1][k] + s[i - 1][k - 1];
        }
    }
    s
}

/// Coefficients a_{dk}(θ) > 0 of the d-th derivative of the Gumbel
/// generator ψ(t) = exp(−t^θ):
/// ψ⁽ᵈ⁾(t) = (−1)^d ψ(t) t^{−d} Σ_k a_{dk} t^{θk}, with
/// a_{dk} = (−1)^{d−k} Σ_{j=k}^d θ^j s(d,j) S(j,k).
fn gumbel_coefficients(d: usize, theta: f64) -> Vec<f64> {
    let s1 = stirling_first(d);
    let s2 = stirling_second(d);
    let mut coeffs = vec![0.0; d + 1];
    for k in 1..=d {
        let mut acc = 0.0;
        for j in k..=d {
            acc += theta.powi(j as i32) * s1[d][j] * s2[j][k];
        }
        coeffs[k] = if (d - k) % 2 == 0 { acc } else { -acc };
    }
    coeffs
}

fn gumbel_log_density(spec: &CopulaSpec, x: &[f64], margin: OracleMargin) -> Result<f64> {
    let d = spec.dim();
    let theta = spec.theta().expect("logistic spec has theta");

    // Per-coordinate pieces in log space:
    //   ell_i  = ln(−ln u_i)
    //   ln u_i (≈ 0 deep in the upper tail, handled via ln1p)
    let mut ell = vec![0.0; d];
    let mut ln_u = vec![0.0; d];
    for i in 0..d {
        let (tail, upper) = margin_tail(x[i], margin);
        if upper {
            // u = 1 − tail
            let neg_ln_u = -(-tail).ln_1p();
            ln_u[i] = (-tail).ln_1p();
            ell[i] = neg_ln_u.ln();
        } else {
            // u = tail
            ln_u[i] = tail.ln();
            ell[i] = (-ln_u[i]).ln();
        }
        if !ell[i].is_finite() {
            return Err(CoreError::domain(
                "gumbel_log_density",
                "coordinate too deep in the tail for f64",
            ));
        }
    }

    // t = Σ exp(ell_i / θ), kept as ln t
    let exponents: Vec<f64> = ell.iter().map(|e| e / theta).collect();
    let ln_t = lse(&exponents);
    let lt_theta = theta * ln_t; // ln(t^θ)

    // ln |ψ⁽ᵈ⁾(t)| = −t^θ − d ln t + ln Σ_k a_dk e^{k ln t^θ}
    let coeffs = gumbel_coefficients(d, theta);
    let terms: Vec<f64> = (1..=d)
        .filter(|&k| coeffs[k] > 0.0)
        .map(|k| coeffs[k].ln() + k as f64 * lt_theta)
        .collect();
    let ln_psi_d = -lt_theta.exp() - d as f64 * ln_t + lse(&terms);

    // ln |(ψ⁻¹)'(u_i)| = −ln θ + (1/θ − 1) ell_i − ln u_i
    let mut out = ln_psi_d;
    for i in 0..d {
        out += -theta.ln() + (1.0 / theta - 1.0) * ell[i] - ln_u[i];
        out += margin_log_density(x[i], margin);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn rel_close(a: f64, b: f64, tol: f64) {
        assert!(
            ((a - b) / b.abs().max(1e-300)).abs() <= tol,
            "{a} vs {b}: rel {}",
            ((a - b) / b.abs().max(1e-300)).abs()
        );
    }

    #[test]
    fn gaussian_identity_density_is_product() {
        let spec = CopulaSpec::gaussian(DMatrix::identity(3, 3)).unwrap();
        let x = [0.7, -1.2, 2.4];
        let got = log_density_laplace(&spec, &x).unwrap();
        let want: f64 = x.iter().map(|v| -v.abs() - std::f64::consts::LN_2).sum();
        rel_close(got, want, 1e-10);
    }

    #[test]
    fn logistic_theta_one_density_is_product() {
        let spec = CopulaSpec::logistic(3, 1.0).unwrap();
        let x = [0.4, -0.9, 1.7];
        let got = log_density_laplace(&spec, &x).unwrap();
        let want: f64 = x.iter().map(|v| -v.abs() - std::f64::consts::LN_2).sum();
        rel_close(got, want, 1e-10);
    }

    #[test]
    fn gumbel_copula_density_matches_reference_values() {
        // log copula densities computed by 30-digit differentiation of the
        // copula distribution function
        let cases_d2 = [
            ((0.3, 0.7), 0.3, -1.437_897_104_932_050_6),
            ((0.9, 0.95), 0.3, 1.364_180_065_540_462_7),
            ((0.5, 0.5), 0.7, 0.166_908_384_091_504_82),
            ((0.01, 0.99), 0.5, -5.920_784_877_891_539_5),
        ];
        for ((u1, u2), theta, want) in cases_d2 {
            let spec = CopulaSpec::logistic(2, theta).unwrap();
            // Laplace values with these uniforms, then strip the margins to
            // recover the copula density alone.
            let x = [
                crate::margins::laplace_quantile(u1).unwrap(),
                crate::margins::laplace_quantile(u2).unwrap(),
            ];
            let ln_f = log_density_laplace(&spec, &x).unwrap();
            let ln_marg: f64 = x.iter().map(|v| -v.abs() - std::f64::consts::LN_2).sum();
            rel_close(ln_f - ln_marg, want, 1e-9);
        }
        let cases_d3 = [
            ((0.3, 0.5, 0.7), 0.3, -0.782_192_433_711_254_23),
            ((0.8, 0.9, 0.85), 0.6, 1.782_327_099_412_955_6),
        ];
        for ((u1, u2, u3), theta, want) in cases_d3 {
            let spec = CopulaSpec::logistic(3, theta).unwrap();
            let x = [
                crate::margins::laplace_quantile(u1).unwrap(),
                crate::margins::laplace_quantile(u2).unwrap(),
                crate::margins::laplace_quantile(u3).unwrap(),
            ];
            let ln_f = log_density_laplace(&spec, &x).unwrap();
            let ln_marg: f64 = x.iter().map(|v| -v.abs() - std::f64::consts::LN_2).sum();
            rel_close(ln_f - ln_marg, want, 1e-9);
        }
    }

    #[test]
    fn stirling_inversion_collapses_theta_one() {
        // at theta = 1 the generator is exp(−t) and a_dk = δ_dk
        for d in 1..=8 {
            let c = gumbel_coefficients(d, 1.0);
            for k in 1..=d {
                let want = if k == d { 1.0 } else { 0.0 };
                assert!(
                    (c[k] - want).abs() < 1e-9,
                    "d={d} k={k}: {}",
                    c[k]
                );
            }
        }
    }

    #[test]
    fn gumbel_coefficients_positive_for_valid_theta() {
        for d in 1..=8 {
            for theta in [0.1, 0.3, 0.6, 0.9] {
                let c = gumbel_coefficients(d, theta);
                for k in 1..=d {
                    assert!(c[k] > 0.0, "a[{d}][{k}]({theta}) = {}", c[k]);
                }
            }
        }
    }

    #[test]
    fn densities_integrate_locally_like_probabilities() {
        // crude 2D Riemann check over a small box for the t copula density
        let corr = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
        let spec = CopulaSpec::student_t(corr, 3.0).unwrap();
        let (x0, x1) = (0.3_f64, 0.5_f64);
        let (y0, y1) = (-0.2_f64, 0.0_f64);
        let steps = 40;
        let mut mass = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                let x = x0 + (i as f64 + 0.5) / steps as f64 * (x1 - x0);
                let y = y0 + (j as f64 + 0.5) / steps as f64 * (y1 - y0);
                mass += log_density_laplace(&spec, &[x, y]).unwrap().exp();
            }
        }
        mass *= (x1 - x0) * (y1 - y0) / (steps * steps) as f64;
        // Monte-Carlo comparison from the exact sampler
        let n = 200_000;
        let data = super::super::sample(&spec, n, 3).unwrap();
        let count = data
            .rows_iter()
            .filter(|r| r[0] >= x0 && r[0] < x1 && r[1] >= y0 && r[1] < y1)
            .count();
        let p_mc = count as f64 / n as f64;
        let se = (p_mc * (1.0 - p_mc) / n as f64).sqrt();
        assert!(
            (mass - p_mc).abs() < 4.0 * se + 2e-4,
            "density mass {mass} vs MC {p_mc} (se {se})"
        );
    }

    #[test]
    fn deep_tail_evaluation_stays_finite() {
        let corr = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        for spec in [
            CopulaSpec::gaussian(corr.clone()).unwrap(),
            CopulaSpec::student_t(corr, 1.0).unwrap(),
            CopulaSpec::logistic(2, 0.3).unwrap(),
        ] {
            for t in [25.0, 50.0, 100.0, 200.0] {
                let x = [t / 2.0_f64.sqrt(), t / 2.0_f64.sqrt()];
                let v = log_density_laplace(&spec, &x).unwrap();
                assert!(v.is_finite() && v < 0.0, "{:?} at t={t}: {v}", spec.kind());
                let y = [-t / 2.0_f64.sqrt(), t / 2.0_f64.sqrt()];
                let v2 = log_density_laplace(&spec, &y).unwrap();
                assert!(v2.is_finite() && v2 < 0.0);
            }
        }
    }
}
