//! Angular-radial decomposition, sphere sampling, and the rescaling machinery
//! that turns any positive radial function into a valid unit-level set.
//!
//! The central objects are the per-coordinate scaling factors
//! bᵢᵁ = max{wᵢh(w)}, bᵢᴸ = min{wᵢh(w)} over a reference angle set, the
//! sphere bijection κ they induce, and the rescaled gauge g̃ whose unit-level
//! set touches every face of the unit hypercube.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{CoreError, Result};

/// Componentwise infinity norm.
pub fn linf(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A set of unit vectors on S^{d−1}, stored row-major.
#[derive(Debug, Clone)]
pub struct AngleSet {
    points: Vec<f64>,
    dim: usize,
}

impl AngleSet {
    pub fn from_flat(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(CoreError::Dimension {
                op: "AngleSet::from_flat",
                expected: dim,
                got: points.len(),
            });
        }
        Ok(AngleSet { points, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn par_rows(&self) -> rayon::slice::ChunksExact<'_, f64> {
        self.points.par_chunks_exact(self.dim)
    }

    /// First `m` rows; a uniform subsample since the set is itself i.i.d.
    pub fn head(&self, m: usize) -> AngleSet {
        let m = m.min(self.len());
        AngleSet {
            points: self.points[..m * self.dim].to_vec(),
            dim: self.dim,
        }
    }
}

/// Paired radii and unit angles: the decomposition of a data matrix.
#[derive(Debug, Clone)]
pub struct PolarSample {
    pub radii: Vec<f64>,
    pub angles: AngleSet,
    /// Rows excluded because they were exactly zero.
    pub dropped_zero_rows: usize,
}

impl PolarSample {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Splits each observation x into (‖x‖, x/‖x‖); exactly-zero rows are
/// dropped and counted.
pub fn decompose(data: &DataMatrix) -> PolarSample {
    let d = data.ncols();
    let mut radii = Vec::with_capacity(data.nrows());
    let mut angles = Vec::with_capacity(data.nrows() * d);
    let mut dropped = 0usize;
    for row in data.rows_iter() {
        let r = euclid(row);
        if r == 0.0 {
            dropped += 1;
            continue;
        }
        radii.push(r);
        angles.extend(row.iter().map(|x| x / r));
    }
    PolarSample {
        radii,
        angles: AngleSet { points: angles, dim: d },
        dropped_zero_rows: dropped,
    }
}

/// Draws `m` approximately-uniform points on S^{d−1} by rejection from the
/// unit ball, excluding an inner radius of 0.05 that would amplify rounding
/// when normalizing, then projecting to the sphere. Deterministic per seed.
pub fn sample_sphere(m: usize, d: usize, seed: u64) -> AngleSet {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(m * d);
    let mut buf = vec![0.0_f64; d];
    let mut accepted = 0usize;
    while accepted < m {
        let mut norm2 = 0.0;
        for b in buf.iter_mut() {
            *b = rng.gen_range(-1.0..1.0);
            norm2 += *b * *b;
        }
        if norm2 > 1.0 || norm2 < 0.05 * 0.05 {
            continue;
        }
        let norm = norm2.sqrt();
        points.extend(buf.iter().map(|x| x / norm));
        accepted += 1;
    }
    AngleSet { points, dim: d }
}

/// Per-coordinate extremes of wᵢh(w) over a reference angle set, with the
/// attaining angles retained for diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFactors {
    pub b_upper: Vec<f64>,
    pub b_lower: Vec<f64>,
    pub argmax: Vec<Vec<f64>>,
    pub argmin: Vec<Vec<f64>>,
}

impl ScalingFactors {
    /// Unit factors (±1), under which κ is the identity.
    pub fn unit(d: usize) -> Self {
        ScalingFactors {
            b_upper: vec![1.0; d],
            b_lower: vec![-1.0; d],
            argmax: vec![Vec::new(); d],
            argmin: vec![Vec::new(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.b_upper.len()
    }

    /// b(wᵢ): the positive divisor for coordinate i given the sign of wᵢ.
    /// The term vanishes at wᵢ = 0, so the upper branch is used there.
    #[inline]
    pub fn divisor(&self, i: usize, w_i: f64) -> f64 {
        if w_i >= 0.0 {
            self.b_upper[i]
        } else {
            -self.b_lower[i]
        }
    }
}

struct Extremes {
    max_val: Vec<f64>,
    min_val: Vec<f64>,
    max_arg: Vec<usize>,
    min_arg: Vec<usize>,
    non_positive: Option<usize>,
}

/// Computes the scaling factors for a positive radial function h over the
/// reference set. Parallel reduction with deterministic chunk combination.
pub fn scaling_factors<H>(h: &H, angles: &AngleSet) -> Result<ScalingFactors>
where
    H: Fn(&[f64]) -> f64 + Sync,
{
    let d = angles.dim();
    if angles.is_empty() {
        return Err(CoreError::invalid_data("scaling_factors", "empty angle set"));
    }
    let chunk = 4096usize;
    let n = angles.len();
    let partials: Vec<Extremes> = (0..n.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = ((c + 1) * chunk).min(n);
            let mut ext = Extremes {
                max_val: vec![f64::NEG_INFINITY; d],
                min_val: vec![f64::INFINITY; d],
                max_arg: vec![lo; d],
                min_arg: vec![lo; d],
                non_positive: None,
            };
            for k in lo..hi {
                let w = angles.row(k);
                let hv = h(w);
                if !(hv > 0.0) {
                    ext.non_positive = Some(k);
                    break;
                }
                for i in 0..d {
                    let v = w[i] * hv;
                    if v > ext.max_val[i] {
                        ext.max_val[i] = v;
                        ext.max_arg[i] = k;
                    }
                    if v < ext.min_val[i] {
                        ext.min_val[i] = v;
                        ext.min_arg[i] = k;
                    }
                }
            }
            ext
        })
        .collect();

    let mut total = Extremes {
        max_val: vec![f64::NEG_INFINITY; d],
        min_val: vec![f64::INFINITY; d],
        max_arg: vec![0; d],
        min_arg: vec![0; d],
        non_positive: None,
    };
    for ext in partials {
        if let Some(k) = ext.non_positive {
            return Err(CoreError::domain(
                "scaling_factors",
                format!("radial function non-positive at reference angle {k}"),
            ));
        }
        for i in 0..d {
            if ext.max_val[i] > total.max_val[i] {
                total.max_val[i] = ext.max_val[i];
                total.max_arg[i] = ext.max_arg[i];
            }
            if ext.min_val[i] < total.min_val[i] {
                total.min_val[i] = ext.min_val[i];
                total.min_arg[i] = ext.min_arg[i];
            }
        }
    }
    for i in 0..d {
        if !(total.max_val[i] > 0.0 && total.min_val[i] < 0.0) {
            return Err(CoreError::invalid_data(
                "scaling_factors",
                format!("reference set does not straddle coordinate {i}: bU={}, bL={}",
                    total.max_val[i], total.min_val[i]),
            ));
        }
    }
    Ok(ScalingFactors {
        argmax: total.max_arg.iter().map(|&k| angles.row(k).to_vec()).collect(),
        argmin: total.min_arg.iter().map(|&k| angles.row(k).to_vec()).collect(),
        b_upper: total.max_val,
        b_lower: total.min_val,
    })
}

/// The sphere bijection κ(w) = (wᵢ/b(wᵢ))ᵢ normalized to unit length.
pub fn kappa(w: &[f64], b: &ScalingFactors) -> Vec<f64> {
    let mut u: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(i, &wi)| wi / b.divisor(i, wi))
        .collect();
    let norm = euclid(&u);
    for v in u.iter_mut() {
        *v /= norm;
    }
    u
}

/// Closed-form inverse of κ.
///
/// Pivots on the largest-magnitude coordinate; any non-zero coordinate works,
/// and the largest keeps the normalizer well conditioned.
pub fn kappa_inverse(w: &[f64], b: &ScalingFactors) -> Vec<f64> {
    let d = w.len();
    let mut p = 0usize;
    for i in 1..d {
        if w[i].abs() > w[p].abs() {
            p = i;
        }
    }
    let bp = b.divisor(p, w[p]);
    let denom = bp * w[p].abs();
    let mut sum = 1.0;
    for (i, &wi) in w.iter().enumerate() {
        if i != p {
            let t = b.divisor(i, wi) * wi / denom;
            sum += t * t;
        }
    }
    let a = 1.0 / sum.sqrt();
    let mut v = vec![0.0; d];
    for (i, &wi) in w.iter().enumerate() {
        if i == p {
            v[i] = a * w[p].signum();
        } else {
            v[i] = a * b.divisor(i, wi) * wi / denom;
        }
    }
    v
}

/// Rescaled gauge g̃(w) = 1/‖h(κ⁻¹(w))·(κ⁻¹(w)ᵢ/b(κ⁻¹(w)ᵢ))ᵢ‖, floored at
/// ‖w‖∞.
///
/// The floor realizes the exact lower bound of the rescaled construction;
/// with scaling factors taken over a finite reference set, the raw quotient
/// can undershoot it by the resolution of that set.
pub fn rescaled_gauge<H>(h: &H, b: &ScalingFactors, w: &[f64]) -> f64
where
    H: Fn(&[f64]) -> f64,
{
    let v = kappa_inverse(w, b);
    let hv = h(&v);
    let norm = euclid(
        &v.iter()
            .enumerate()
            .map(|(i, &vi)| vi / b.divisor(i, vi))
            .collect::<Vec<f64>>(),
    );
    let raw = 1.0 / (hv * norm);
    raw.max(linf(w))
}

/// Boundary point of the rescaled unit-level set reached from the reference
/// angle v: h(v)·(vᵢ/b(vᵢ))ᵢ. Enumerating these over the reference set walks
/// the whole boundary without inverting κ and attains the ±1 coordinate
/// touches exactly.
pub fn boundary_point<H>(h: &H, b: &ScalingFactors, v: &[f64]) -> Vec<f64>
where
    H: Fn(&[f64]) -> f64,
{
    let hv = h(v);
    v.iter()
        .enumerate()
        .map(|(i, &vi)| hv * vi / b.divisor(i, vi))
        .collect()
}

/// Planar curve of the unit-level set in the (i, j) coordinate plane:
/// (wᵢ, wⱼ)/g̃(w) along the great circle with all other coordinates zero.
pub fn bivariate_slice<G>(g: &G, d: usize, i: usize, j: usize, grid: usize) -> Result<Vec<(f64, f64)>>
where
    G: Fn(&[f64]) -> f64,
{
    if i == j || i >= d || j >= d {
        return Err(CoreError::domain(
            "bivariate_slice",
            format!("indices must be distinct and < {d}, got ({i}, {j})"),
        ));
    }
    let mut out = Vec::with_capacity(grid);
    let mut w = vec![0.0; d];
    for k in 0..grid {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
        w.iter_mut().for_each(|x| *x = 0.0);
        w[i] = theta.cos();
        w[j] = theta.sin();
        let g_val = g(&w);
        out.push((w[i] / g_val, w[j] / g_val));
    }
    Ok(out)
}
