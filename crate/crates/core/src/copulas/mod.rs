//! Simulators for the three study copulas on standard Laplace margins, their
//! theoretical gauge functions, a numerical log-density-limit oracle, and
//! quadrature oracles for joint tail probabilities.

mod corr;
mod density;
mod gauges;
mod region;
mod sample;

pub use corr::{nested_correlation, CorrelationFamily};
pub use density::{log_density_laplace, log_density_margins, OracleMargin};
pub use gauges::{gauge_gaussian, gauge_numerical_oracle, gauge_student_t};
pub use region::region_log_prob;
pub use sample::{positive_stable, sample};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopulaKind {
    Gaussian,
    StudentT,
    Logistic,
}

impl std::fmt::Display for CopulaKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CopulaKind::Gaussian => "gaussian",
            CopulaKind::StudentT => "student-t",
            CopulaKind::Logistic => "logistic",
        };
        f.write_str(s)
    }
}

/// A fully-specified copula: correlation matrix for the elliptical families,
/// degrees of freedom ν for Student-t, dependence parameter θ ∈ (0, 1] for
/// the logistic (Gumbel copula with parameter 1/θ).
#[derive(Debug, Clone)]
pub struct CopulaSpec {
    kind: CopulaKind,
    d: usize,
    corr: Option<DMatrix<f64>>,
    nu: Option<f64>,
    theta: Option<f64>,
}

impl CopulaSpec {
    pub fn gaussian(corr: DMatrix<f64>) -> Result<Self> {
        let d = validate_correlation(&corr)?;
        Ok(CopulaSpec {
            kind: CopulaKind::Gaussian,
            d,
            corr: Some(corr),
            nu: None,
            theta: None,
        })
    }

    pub fn student_t(corr: DMatrix<f64>, nu: f64) -> Result<Self> {
        let d = validate_correlation(&corr)?;
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(CoreError::domain(
                "CopulaSpec",
                format!("degrees of freedom must be positive, got {nu}"),
            ));
        }
        Ok(CopulaSpec {
            kind: CopulaKind::StudentT,
            d,
            corr: Some(corr),
            nu: Some(nu),
            theta: None,
        })
    }

    pub fn logistic(d: usize, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(CoreError::domain(
                "CopulaSpec",
                format!("theta must lie in (0, 1], got {theta}"),
            ));
        }
        if d < 1 {
            return Err(CoreError::domain("CopulaSpec", "dimension must be >= 1"));
        }
        Ok(CopulaSpec {
            kind: CopulaKind::Logistic,
            d,
            corr: None,
            nu: None,
            theta: Some(theta),
        })
    }

    pub fn kind(&self) -> CopulaKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn corr(&self) -> Option<&DMatrix<f64>> {
        self.corr.as_ref()
    }

    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    /// Precision matrix Q = R⁻¹ of the elliptical families.
    pub fn precision(&self) -> Result<DMatrix<f64>> {
        let corr = self.corr.as_ref().ok_or_else(|| {
            CoreError::domain("CopulaSpec::precision", "no correlation matrix for this kind")
        })?;
        corr.clone().try_inverse().ok_or_else(|| {
            CoreError::domain("CopulaSpec::precision", "correlation matrix not invertible")
        })
    }
}

fn validate_correlation(corr: &DMatrix<f64>) -> Result<usize> {
    let d = corr.nrows();
    if corr.ncols() != d || d == 0 {
        return Err(CoreError::domain(
            "CopulaSpec",
            "correlation matrix must be square and non-empty",
        ));
    }
    for i in 0..d {
        if (corr[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(CoreError::domain(
                "CopulaSpec",
                format!("diagonal entry {i} is {}, expected 1", corr[(i, i)]),
            ));
        }
        for j in 0..i {
            if (corr[(i, j)] - corr[(j, i)]).abs() > 1e-12 {
                return Err(CoreError::domain("CopulaSpec", "correlation matrix not symmetric"));
            }
        }
    }
    if corr.clone().cholesky().is_none() {
        return Err(CoreError::domain(
            "CopulaSpec",
            "correlation matrix not positive definite",
        ));
    }
    Ok(d)
}
