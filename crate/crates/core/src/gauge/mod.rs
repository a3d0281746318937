//! The fitted gauge model: a quantile-threshold network, a gauge network
//! with its rescaling factors, the truncated-gamma shape, and the reference
//! angle set metadata. Frozen models are immutable and shareable across
//! threads.

mod fit;

pub use fit::{
    fit, fit_gauge, fit_threshold, initial_gauge_target, initial_target_value, pretrain_gauge,
    FitConfig, FitReport,
};

use once_cell::sync::OnceCell;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{
    boundary_point, linf, rescaled_gauge, sample_sphere, AngleSet, ScalingFactors,
};
use crate::net::MlpParams;

/// Size and seed of the reference angle set 𝒲; the set itself is
/// regenerated deterministically on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WsetMeta {
    pub size: usize,
    pub seed: u64,
}

/// Everything needed to evaluate the fitted rescaled gauge and radial
/// threshold, plus the boundary cloud used for dependence summaries.
#[derive(Debug)]
pub struct GaugeModel {
    pub quantile_net: MlpParams,
    pub gauge_net: MlpParams,
    pub alpha: f64,
    pub tau: f64,
    pub scaling: ScalingFactors,
    pub wset: WsetMeta,
    boundary: OnceCell<Vec<f64>>,
}

/// Consistent evaluation triple at one angle.
#[derive(Debug, Clone)]
pub struct GaugeEvaluation {
    pub gauge: f64,
    pub threshold: f64,
    pub boundary_point: Vec<f64>,
}

impl GaugeModel {
    pub fn new(
        quantile_net: MlpParams,
        gauge_net: MlpParams,
        alpha: f64,
        tau: f64,
        scaling: ScalingFactors,
        wset: WsetMeta,
    ) -> Result<Self> {
        quantile_net.validate()?;
        gauge_net.validate()?;
        if !(alpha > 0.0) {
            return Err(CoreError::domain("GaugeModel", "alpha must be positive"));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(CoreError::domain("GaugeModel", "tau must lie in (0, 1)"));
        }
        if quantile_net.input_dim != gauge_net.input_dim
            || scaling.dim() != gauge_net.input_dim
        {
            return Err(CoreError::Dimension {
                op: "GaugeModel",
                expected: gauge_net.input_dim,
                got: scaling.dim(),
            });
        }
        Ok(GaugeModel {
            quantile_net,
            gauge_net,
            alpha,
            tau,
            scaling,
            wset,
            boundary: OnceCell::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.gauge_net.input_dim
    }

    /// Radial threshold r̂_τ(w) = exp{m(w)} > 0.
    pub fn threshold(&self, w: &[f64]) -> f64 {
        self.quantile_net
            .forward(w)
            .expect("dimension checked at construction")
            .exp()
    }

    /// Raw (unscaled) gauge h(w) = ReLU{m(w)} + ‖w‖∞ ≥ ‖w‖∞.
    pub fn raw_gauge(&self, w: &[f64]) -> f64 {
        self.gauge_net
            .forward(w)
            .expect("dimension checked at construction")
            .max(0.0)
            + linf(w)
    }

    /// Rescaled gauge g̃(w) with the frozen scaling factors. The radial
    /// function entering the rescaling is the reciprocal of the raw gauge,
    /// whose boundary is {w/raw_gauge(w)}.
    pub fn rescaled_gauge(&self, w: &[f64]) -> f64 {
        rescaled_gauge(&|v: &[f64]| 1.0 / self.raw_gauge(v), &self.scaling, w)
    }

    /// (g̃(w), r̂_τ(w), w/g̃(w)); the boundary point has norm 1/g̃(w).
    pub fn evaluate(&self, w: &[f64]) -> GaugeEvaluation {
        let gauge = self.rescaled_gauge(w);
        GaugeEvaluation {
            gauge,
            threshold: self.threshold(w),
            boundary_point: w.iter().map(|&x| x / gauge).collect(),
        }
    }

    /// The reference angle set, regenerated from its metadata.
    pub fn reference_angles(&self) -> AngleSet {
        sample_sphere(self.wset.size, self.dim(), self.wset.seed)
    }

    /// Unit-level boundary cloud {h(v)·(vᵢ/b(vᵢ))ᵢ : v ∈ 𝒲}, the image
    /// parameterization of the fitted boundary. Computed once and cached;
    /// row-major, one point per reference angle.
    pub fn boundary_cloud(&self) -> &[f64] {
        self.boundary.get_or_init(|| {
            use rayon::prelude::*;
            let angles = self.reference_angles();
            let d = self.dim();
            let mut flat = vec![0.0; angles.len() * d];
            flat.par_chunks_mut(d)
                .zip(angles.par_rows())
                .for_each(|(out, v)| {
                    let p =
                        boundary_point(&|u: &[f64]| 1.0 / self.raw_gauge(u), &self.scaling, v);
                    out.copy_from_slice(&p);
                });
            flat
        })
    }
}

/// Versioned JSON bundle for a frozen model.
#[derive(Serialize, Deserialize)]
struct GaugeModelFile {
    version: u32,
    tau: f64,
    alpha: f64,
    quantile_net: MlpParams,
    gauge_net: MlpParams,
    scaling: ScalingFactors,
    wset: WsetMeta,
}

impl GaugeModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GaugeModelFile {
            version: 1,
            tau: self.tau,
            alpha: self.alpha,
            quantile_net: self.quantile_net.clone(),
            gauge_net: self.gauge_net.clone(),
            scaling: self.scaling.clone(),
            wset: self.wset,
        })
        .expect("gauge model always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GaugeModelFile =
            serde_json::from_str(text).map_err(|e| CoreError::Serialization(e.to_string()))?;
        if file.version != 1 {
            return Err(CoreError::Serialization(format!(
                "unsupported gauge model version {}",
                file.version
            )));
        }
        GaugeModel::new(
            file.quantile_net,
            file.gauge_net,
            file.alpha,
            file.tau,
            file.scaling,
            file.wset,
        )
    }
}
