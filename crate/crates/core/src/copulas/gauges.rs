//! Theoretical gauge functions of the study copulas, plus a numerical
//! log-density-limit oracle usable for any copula with an evaluable joint
//! density.

use nalgebra::DMatrix;

use crate::error::{CoreError, Result};

use super::density::{log_density_margins, OracleMargin};
use super::CopulaSpec;

/// Gauge function of the Gaussian copula on Laplace margins:
/// the quadratic form of the componentwise signed square roots,
/// Σᵢⱼ sgn(xᵢ)|xᵢ|^{1/2} Qᵢⱼ sgn(xⱼ)|xⱼ|^{1/2}, 1-homogeneous by
/// construction.
pub fn gauge_gaussian(x: &[f64], precision: &DMatrix<f64>) -> Result<f64> {
    let d = x.len();
    if precision.nrows() != d || precision.ncols() != d {
        return Err(CoreError::Dimension {
            op: "gauge_gaussian",
            expected: d,
            got: precision.nrows(),
        });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(CoreError::domain("gauge_gaussian", "undefined at the origin"));
    }
    let s: Vec<f64> = x.iter().map(|&v| v.signum() * v.abs().sqrt()).collect();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += s[i] * precision[(i, j)] * s[j];
        }
    }
    Ok(acc)
}

/// Gauge function of the Student-t copula on Laplace margins:
/// −ν⁻¹ Σ|xᵢ| + (1 + dν⁻¹) maxᵢ|xᵢ|.
pub fn gauge_student_t(x: &[f64], nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(CoreError::domain("gauge_student_t", "nu must be positive"));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(CoreError::domain("gauge_student_t", "undefined at the origin"));
    }
    let d = x.len() as f64;
    let sum: f64 = x.iter().map(|v| v.abs()).sum();
    let max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(-sum / nu + (1.0 + d / nu) * max)
}

/// Numerical gauge via the log-density limit −log f(t·w)/t, evaluated on the
/// geometric grid {t_max/8, t_max/4, t_max/2, t_max} and extrapolated with the
/// asymptotic correction model y(t) = g + c₀/t + c₁·log(t)/t fitted by least
/// squares; the log term captures the slowly-varying prefactors of the
/// density.
pub fn gauge_numerical_oracle(spec: &CopulaSpec, w: &[f64], t_max: f64) -> Result<f64> {
    gauge_numerical_oracle_margins(spec, w, t_max, OracleMargin::Laplace)
}

pub fn gauge_numerical_oracle_margins(
    spec: &CopulaSpec,
    w: &[f64],
    t_max: f64,
    margin: OracleMargin,
) -> Result<f64> {
    if !(t_max > 8.0) {
        return Err(CoreError::domain(
            "gauge_numerical_oracle",
            "t_max must exceed the smallest grid multiple",
        ));
    }
    let grid = [t_max / 8.0, t_max / 4.0, t_max / 2.0, t_max];
    let mut ys = [0.0; 4];
    for (k, &t) in grid.iter().enumerate() {
        let point: Vec<f64> = w.iter().map(|&wi| t * wi).collect();
        ys[k] = -log_density_margins(spec, &point, margin)? / t;
    }
    // least squares for y = g + c0/t + c1 log(t)/t over the 4 grid points
    let mut ata = [[0.0_f64; 3]; 3];
    let mut aty = [0.0_f64; 3];
    for (k, &t) in grid.iter().enumerate() {
        let row = [1.0, 1.0 / t, t.ln() / t];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * ys[k];
        }
    }
    solve3(&mut ata, &mut aty)?;
    Ok(aty[0])
}

/// In-place 3×3 Gaussian elimination with partial pivoting.
fn solve3(a: &mut [[f64; 3]; 3], b: &mut [f64; 3]) -> Result<()> {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(CoreError::domain("solve3", "singular normal equations"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..3).rev() {
        for k in (col + 1)..3 {
            b[col] -= a[col][k] * b[k];
        }
        b[col] /= a[col][col];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copulas::nested_correlation;
    use crate::geometry::{linf, sample_sphere};

    fn corr2(rho: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])
    }

    #[test]
    fn gaussian_gauge_bivariate_closed_form() {
        // (x + y − 2ρ√(xy))/(1 − ρ²) on the positive quadrant
        let q = CopulaSpec::gaussian(corr2(0.5)).unwrap().precision().unwrap();
        let w = [1.0 / 2.0_f64.sqrt(), 1.0 / 2.0_f64.sqrt()];
        let got = gauge_gaussian(&w, &q).unwrap();
        let want = (2.0 / 2.0_f64.sqrt() - 2.0 * 0.5 / 2.0_f64.sqrt()) / 0.75;
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.942_809_041_582_063_4).abs() < 1e-9);
        // sign flip makes the cross term positive
        let w2 = [1.0 / 2.0_f64.sqrt(), -1.0 / 2.0_f64.sqrt()];
        let got2 = gauge_gaussian(&w2, &q).unwrap();
        assert!((got2 - 2.828_427_124_746_19).abs() < 1e-9);
        // independence
        let q0 = CopulaSpec::gaussian(corr2(0.0)).unwrap().precision().unwrap();
        let got3 = gauge_gaussian(&w, &q0).unwrap();
        assert!((got3 - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn student_t_gauge_values() {
        let invsq = 1.0 / 2.0_f64.sqrt();
        let got = gauge_student_t(&[invsq, invsq], 1.0).unwrap();
        assert!((got - invsq).abs() < 1e-12, "diagonal equals the sup norm");
        let got2 = gauge_student_t(&[1.0, 0.0], 1.0).unwrap();
        assert!((got2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauges_are_one_homogeneous() {
        let fam = nested_correlation(3, 9).unwrap();
        let q = CopulaSpec::gaussian(fam.leading(3).unwrap())
            .unwrap()
            .precision()
            .unwrap();
        for w in sample_sphere(200, 3, 10).iter_rows() {
            let x2: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
            let g1 = gauge_gaussian(w, &q).unwrap();
            let g2 = gauge_gaussian(&x2, &q).unwrap();
            assert!((g2 - 2.0 * g1).abs() < 1e-10);
            let s1 = gauge_student_t(w, 1.0).unwrap();
            let s2 = gauge_student_t(&x2, 1.0).unwrap();
            assert!((s2 - 2.0 * s1).abs() < 1e-10);
        }
    }

    #[test]
    fn gauges_dominate_sup_norm() {
        let fam = nested_correlation(3, 29).unwrap();
        let q = CopulaSpec::gaussian(fam.leading(3).unwrap())
            .unwrap()
            .precision()
            .unwrap();
        for w in sample_sphere(10_000, 3, 30).iter_rows() {
            assert!(gauge_gaussian(w, &q).unwrap() >= linf(w) - 1e-9);
            assert!(gauge_student_t(w, 1.0).unwrap() >= linf(w) - 1e-9);
        }
    }

    #[test]
    fn oracle_matches_gaussian_closed_form() {
        let spec = CopulaSpec::gaussian(corr2(0.5)).unwrap();
        let q = spec.precision().unwrap();
        let invsq = 1.0 / 2.0_f64.sqrt();
        let w = [invsq, invsq];
        let got = gauge_numerical_oracle(&spec, &w, 200.0).unwrap();
        let want = gauge_gaussian(&w, &q).unwrap();
        assert!((got - want).abs() < 0.02, "{got} vs {want}");
        // negative-orthant direction exercises the extended construction
        let w2 = [-invsq, invsq];
        let got2 = gauge_numerical_oracle(&spec, &w2, 200.0).unwrap();
        let want2 = gauge_gaussian(&w2, &q).unwrap();
        assert!((got2 - want2).abs() < 0.02, "{got2} vs {want2}");
    }

    #[test]
    fn oracle_matches_student_t_closed_form() {
        let spec = CopulaSpec::student_t(corr2(0.5), 1.0).unwrap();
        let invsq = 1.0 / 2.0_f64.sqrt();
        let got = gauge_numerical_oracle(&spec, &[invsq, invsq], 200.0).unwrap();
        assert!((got - invsq).abs() < 0.02, "{got} vs {invsq}");
    }

    #[test]
    fn oracle_logistic_is_bracketed() {
        let spec = CopulaSpec::logistic(2, 0.3).unwrap();
        let invsq = 1.0 / 2.0_f64.sqrt();
        let got = gauge_numerical_oracle(&spec, &[invsq, invsq], 200.0).unwrap();
        // between the sup norm (asymptotic dependence) and the L1 norm
        // (independence), per the gauge/ADF sandwich
        assert!(got >= invsq - 0.01 && got <= 2.0 * invsq + 0.01, "{got}");
    }

    #[test]
    fn oracle_agrees_across_margins_on_positive_orthant() {
        // exponential- and Laplace-margin gauges coincide on the positive
        // orthant for the Gaussian copula
        let spec = CopulaSpec::gaussian(corr2(0.5)).unwrap();
        for w in sample_sphere(40, 2, 31).iter_rows() {
            if w.iter().any(|&v| v < 0.05) {
                continue;
            }
            let lap = gauge_numerical_oracle_margins(&spec, w, 200.0, OracleMargin::Laplace)
                .unwrap();
            let exp = gauge_numerical_oracle_margins(&spec, w, 200.0, OracleMargin::Exponential)
                .unwrap();
            assert!((lap - exp).abs() < 0.05, "{lap} vs {exp} at {w:?}");
        }
    }
}
