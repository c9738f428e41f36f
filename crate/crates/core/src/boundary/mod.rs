//! Occlusion-boundary detection from a pair of flow fields.
//!
//! For every pixel a divergence score compares the flow on either side of the
//! local gradient direction. Of the backward and forward fields, the one whose
//! flow diverges more at a pixel contributes its gradient magnitude to the
//! confidence map; converging sides are where flow estimates break down. The
//! confidence map is then box-blurred, normalized by a high percentile,
//! thresholded and thinned to one-pixel edges.

mod thinning;

pub use thinning::thin;

use std::path::Path;

use image::{ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{
    ensure_same_dims, flow_gradient_magnitude, gradient_direction, sample_flow, BinaryMask,
    FlowField, PixelPoint, ScalarMap, UnitVec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryParams {
    /// Distance of the two divergence helpers from the pixel, in pixels.
    pub helper_offset_unit: f64,
    pub blur_k: usize,
    pub norm_percentile: f64,
    pub threshold_tau: f64,
}

impl Default for BoundaryParams {
    fn default() -> Self {
        Self {
            helper_offset_unit: 1.0,
            blur_k: 31,
            norm_percentile: 90.0,
            threshold_tau: 0.3,
        }
    }
}

impl BoundaryParams {
    pub fn validate(&self) -> Result<()> {
        if self.blur_k.is_multiple_of(2) {
            return Err(Error::param(format!(
                "blur_k must be odd and >= 1, got {}",
                self.blur_k
            )));
        }
        if !(self.norm_percentile > 0.0 && self.norm_percentile <= 100.0) {
            return Err(Error::param(format!(
                "norm_percentile must be in (0, 100], got {}",
                self.norm_percentile
            )));
        }
        if !(self.threshold_tau > 0.0 && self.threshold_tau <= 1.0) {
            return Err(Error::param(format!(
                "threshold_tau must be in (0, 1], got {}",
                self.threshold_tau
            )));
        }
        if !(self.helper_offset_unit > 0.0 && self.helper_offset_unit.is_finite()) {
            return Err(Error::param("helper_offset_unit must be positive"));
        }
        Ok(())
    }
}

/// Which temporal direction supplied the confidence at a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowSide {
    Prev,
    Next,
}

/// Fused confidence map plus the per-pixel record of which field won.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMap {
    pub map: ScalarMap,
    pub selection: Vec<FlowSide>,
}

/// `(F[p + d] - F[p - d]) . d` with both helpers rounded to the lattice and
/// clamped. Positive where the two sides move apart along `d`.
pub fn divergence_score(field: &FlowField, p: PixelPoint, d: UnitVec) -> f64 {
    divergence_score_at(field, p, d, 1.0)
}

fn divergence_score_at(field: &FlowField, p: PixelPoint, d: UnitVec, offset: f64) -> f64 {
    let h1 = p.offset(d, -offset);
    let h2 = p.offset(d, offset);
    let (u1, v1) = sample_flow(field, h1);
    let (u2, v2) = sample_flow(field, h2);
    d.dot(u2 as f64, v2 as f64) - d.dot(u1 as f64, v1 as f64)
}

/// Gradient magnitude of `field` and its per-pixel divergence score, with the
/// direction taken from the gradient of the magnitude map itself. Pixels where
/// that direction is undefined score zero.
pub fn divergence_map(field: &FlowField, helper_offset: f64) -> (ScalarMap, ScalarMap) {
    let grad = flow_gradient_magnitude(field);
    let (w, h) = field.dims();
    let mut scores = Vec::with_capacity(w * h);
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let p = PixelPoint::new(x, y);
            let b = gradient_direction(&grad, p)
                .map_or(0.0, |d| divergence_score_at(field, p, d, helper_offset));
            scores.push(b);
        }
    }
    (grad, ScalarMap::from_raw(w, h, scores))
}

/// Per-pixel selection: the backward magnitude wins only where its score is
/// strictly larger; ties go to the forward field.
pub fn select_confidence(
    score_prev: &ScalarMap,
    score_next: &ScalarMap,
    grad_prev: &ScalarMap,
    grad_next: &ScalarMap,
) -> Result<ConfidenceMap> {
    for m in [score_next, grad_prev, grad_next] {
        ensure_same_dims(score_prev.dims(), m.dims())?;
    }
    let (w, h) = score_prev.dims();
    let mut values = Vec::with_capacity(w * h);
    let mut selection = Vec::with_capacity(w * h);
    for i in 0..w * h {
        if score_prev.values()[i] > score_next.values()[i] {
            values.push(grad_prev.values()[i]);
            selection.push(FlowSide::Prev);
        } else {
            values.push(grad_next.values()[i]);
            selection.push(FlowSide::Next);
        }
    }
    Ok(ConfidenceMap {
        map: ScalarMap::from_raw(w, h, values),
        selection,
    })
}

pub fn fuse_confidence(f_prev: &FlowField, f_next: &FlowField) -> Result<ConfidenceMap> {
    fuse_confidence_with(f_prev, f_next, 1.0)
}

fn fuse_confidence_with(
    f_prev: &FlowField,
    f_next: &FlowField,
    offset: f64,
) -> Result<ConfidenceMap> {
    ensure_same_dims(f_prev.dims(), f_next.dims())?;
    let (g_prev, b_prev) = divergence_map(f_prev, offset);
    let (g_next, b_next) = divergence_map(f_next, offset);
    select_confidence(&b_prev, &b_next, &g_prev, &g_next)
}

/// Mean over the `k`x`k` window, cropped at the borders and normalized by the
/// number of pixels actually covered.
pub fn box_blur(map: &ScalarMap, k: usize) -> Result<ScalarMap> {
    if k.is_multiple_of(2) {
        return Err(Error::param(format!("box size must be odd, got {k}")));
    }
    let (w, h) = map.dims();
    let stride = w + 1;
    let mut sat = vec![0.0f64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += map.at(x, y);
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
        }
    }
    let half = k / 2;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(half), (y + half + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(half), (x + half + 1).min(w));
            let sum = sat[y1 * stride + x1] - sat[y0 * stride + x1] - sat[y1 * stride + x0]
                + sat[y0 * stride + x0];
            let count = ((y1 - y0) * (x1 - x0)) as f64;
            out.push(sum / count);
        }
    }
    if map.values().iter().all(|&v| v >= 0.0) {
        // summed-area subtraction can leave -1e-17 style residue
        out.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    Ok(ScalarMap::from_raw(w, h, out))
}

/// Nearest-rank percentile: the `ceil(pct/100 * N)`-th smallest value.
pub fn nearest_rank_percentile(values: &[f64], pct: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    let n = values.len();
    let rank = ((pct * n as f64 / 100.0) - 1e-9)
        .ceil()
        .clamp(1.0, n as f64) as usize;
    let mut v = values.to_vec();
    let (_, nth, _) = v.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *nth
}

/// Divides every value by the `pct`-th percentile. A percentile below `1e-12`
/// yields an all-zero map.
pub fn percentile_normalize(map: &ScalarMap, pct: f64) -> ScalarMap {
    let (w, h) = map.dims();
    let p = nearest_rank_percentile(map.values(), pct);
    let values = if p < 1e-12 {
        vec![0.0; w * h]
    } else {
        map.values().iter().map(|v| v / p).collect()
    };
    ScalarMap::from_raw(w, h, values)
}

/// Strict threshold: set where `value > tau`.
pub fn threshold_mask(map: &ScalarMap, tau: f64) -> BinaryMask {
    let (w, h) = map.dims();
    BinaryMask::new(w, h, map.values().iter().map(|&v| v > tau).collect()).expect("same dims")
}

/// Every intermediate raster of one detection run.
#[derive(Debug, Clone)]
pub struct BoundaryStages {
    pub confidence: ConfidenceMap,
    pub blurred: ScalarMap,
    pub normalized: ScalarMap,
    pub thresholded: BinaryMask,
    pub edges: BinaryMask,
}

pub fn detect_boundaries(
    f_prev: &FlowField,
    f_next: &FlowField,
    params: &BoundaryParams,
) -> Result<BinaryMask> {
    Ok(detect_boundaries_staged(f_prev, f_next, params)?.edges)
}

pub fn detect_boundaries_staged(
    f_prev: &FlowField,
    f_next: &FlowField,
    params: &BoundaryParams,
) -> Result<BoundaryStages> {
    params.validate()?;
    let confidence = fuse_confidence_with(f_prev, f_next, params.helper_offset_unit)?;
    finish_stages(confidence, params)
}

/// Detection when only one temporal neighbor exists (first and last frames of
/// a clip). The missing field enters the fusion with zero gradient and zero
/// score, so converging pixels of the lone field drop out.
pub fn detect_boundaries_single(
    field: &FlowField,
    side: FlowSide,
    params: &BoundaryParams,
) -> Result<BinaryMask> {
    params.validate()?;
    let (grad, score) = divergence_map(field, params.helper_offset_unit);
    let (w, h) = field.dims();
    let zero = ScalarMap::from_raw(w, h, vec![0.0; w * h]);
    let confidence = match side {
        FlowSide::Prev => select_confidence(&score, &zero, &grad, &zero)?,
        FlowSide::Next => select_confidence(&zero, &score, &zero, &grad)?,
    };
    Ok(finish_stages(confidence, params)?.edges)
}

fn finish_stages(confidence: ConfidenceMap, params: &BoundaryParams) -> Result<BoundaryStages> {
    let blurred = box_blur(&confidence.map, params.blur_k)?;
    let normalized = percentile_normalize(&blurred, params.norm_percentile);
    let thresholded = threshold_mask(&normalized, params.threshold_tau);
    let edges = thin(&thresholded);
    Ok(BoundaryStages {
        confidence,
        blurred,
        normalized,
        thresholded,
        edges,
    })
}

/// Writes `map` as a 16-bit grayscale PNG, scaling `[0, max]` onto `[0, 65535]`.
pub fn write_debug_png(map: &ScalarMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let max = map.max();
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let raw: Vec<u16> = map
        .values()
        .iter()
        .map(|&v| (v.max(0.0) * scale).round().min(65535.0) as u16)
        .collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(map.width() as u32, map.height() as u32, raw).expect("map size");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}
