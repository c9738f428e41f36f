//! Relative depth pairs from classified boundary segments.
//!
//! Every boundary pixel `p` yields up to two pairs: `(p, p_b)` with `p` closer,
//! where `p_b` is a random point on the background side, and `(p_f, p)` with
//! equal depth, where `p_f` is a random point a short way into the
//! foreground. Random points are accepted only if their flow matches the flow
//! at the helper pixel of the same side.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{sample_flow, FlowField, PixelPoint, UnitVec};
use crate::order::{helper_pixels, FigureGroundVerdict, Side};

/// Ordinal relation of a pair `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Ordinal {
    /// `j` is closer.
    Further,
    Same,
    /// `i` is closer.
    Closer,
}

impl Ordinal {
    pub fn value(self) -> i8 {
        match self {
            Ordinal::Further => -1,
            Ordinal::Same => 0,
            Ordinal::Closer => 1,
        }
    }
}

impl TryFrom<i8> for Ordinal {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Ordinal::Further),
            0 => Ok(Ordinal::Same),
            1 => Ok(Ordinal::Closer),
            other => Err(format!("ordinal must be -1, 0 or 1, got {other}")),
        }
    }
}

impl From<Ordinal> for i8 {
    fn from(o: Ordinal) -> i8 {
        o.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DepthPair {
    pub i: PixelPoint,
    pub j: PixelPoint,
    pub o: Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingParams {
    pub bg_max_offset: f64,
    pub fg_max_offset: f64,
    /// Largest per-component flow difference still counted as the same motion.
    pub flow_epsilon: f64,
    pub keep_rate: f64,
    /// Extra pixels past the first foreground-consistent pixel that must also
    /// agree before a boundary point is accepted.
    pub anchor_margin: usize,
    /// Resampling cap per point.
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            bg_max_offset: 30.0,
            fg_max_offset: 7.0,
            flow_epsilon: 0.5,
            keep_rate: 0.10,
            anchor_margin: 1,
            max_attempts: 8,
            seed: 0,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bg_max_offset >= 1.0 && self.fg_max_offset >= 1.0) {
            return Err(Error::param("sampling offsets must be >= 1"));
        }
        if !(self.keep_rate > 0.0 && self.keep_rate <= 1.0) {
            return Err(Error::param(format!(
                "keep_rate must be in (0, 1], got {}",
                self.keep_rate
            )));
        }
        if self.flow_epsilon.is_nan() || self.flow_epsilon < 0.0 {
            return Err(Error::param("flow_epsilon must be >= 0"));
        }
        if self.max_attempts == 0 {
            return Err(Error::param("max_attempts must be >= 1"));
        }
        Ok(())
    }
}

/// Independent random stream for one frame, so frames can be processed in any
/// order with the same result.
pub fn frame_rng(seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame_index);
    rng
}

/// Chebyshev flow difference at `a` and `b` is at most `eps`.
pub fn flow_consistent(field: &FlowField, a: PixelPoint, b: PixelPoint, eps: f64) -> bool {
    let (ua, va) = sample_flow(field, a);
    let (ub, vb) = sample_flow(field, b);
    ((ua - ub).abs() as f64) <= eps && ((va - vb).abs() as f64) <= eps
}

/// [`flow_consistent`] in every field.
pub fn flows_consistent(fields: &[&FlowField], a: PixelPoint, b: PixelPoint, eps: f64) -> bool {
    fields.iter().all(|f| flow_consistent(f, a, b, eps))
}

/// Draws `round(p + t * dir)` with `t ~ U[1, max_offset]` until the point is
/// inside the fields and moves like `anchor` in all of them, giving up after
/// `max_attempts`.
pub fn sample_along<R: Rng + ?Sized>(
    p: PixelPoint,
    dir: Option<UnitVec>,
    max_offset: f64,
    anchor: PixelPoint,
    fields: &[&FlowField],
    params: &SamplingParams,
    rng: &mut R,
) -> Option<PixelPoint> {
    let dir = dir?;
    let (w, h) = fields.first()?.dims();
    for _ in 0..params.max_attempts {
        let t = rng.random_range(1.0..=max_offset);
        let q = p.offset(dir, t);
        if q.in_bounds(w, h) && flows_consistent(fields, q, anchor, params.flow_epsilon) {
            return Some(q);
        }
    }
    None
}

/// Background sample within `bg_max_offset` of `p`, checked against `p2`.
pub fn sample_background_point<R: Rng + ?Sized>(
    p: PixelPoint,
    dir_bg: Option<UnitVec>,
    p2: PixelPoint,
    field: &FlowField,
    params: &SamplingParams,
    rng: &mut R,
) -> Option<PixelPoint> {
    sample_along(p, dir_bg, params.bg_max_offset, p2, &[field], params, rng)
}

/// Foreground sample within `fg_max_offset` of `p`, checked against `p1`.
pub fn sample_foreground_point<R: Rng + ?Sized>(
    p: PixelPoint,
    dir_fg: Option<UnitVec>,
    p1: PixelPoint,
    field: &FlowField,
    params: &SamplingParams,
    rng: &mut R,
) -> Option<PixelPoint> {
    sample_along(p, dir_fg, params.fg_max_offset, p1, &[field], params, rng)
}

/// The boundary point used in pairs. A thinned edge can sit on the background
/// side of the true boundary; the point must move with the foreground, so it
/// is stepped toward the foreground helper until `margin + 1` consecutive
/// pixels agree with the helper's flow in every field, and the last of them
/// is returned. `None` if no run starts short of the helper.
pub fn anchor_boundary_point(
    p: PixelPoint,
    dir_fg: UnitVec,
    fg_helper: PixelPoint,
    helper_offset: f64,
    margin: usize,
    fields: &[&FlowField],
    eps: f64,
) -> Option<PixelPoint> {
    let (w, h) = fields.first()?.dims();
    let steps = (helper_offset.ceil() as i32 - 1).max(0);
    let agrees = |k: i32| {
        let q = p.offset(dir_fg, k as f64);
        q.in_bounds(w, h) && flows_consistent(fields, q, fg_helper, eps)
    };
    (0..=steps)
        .find(|&k| (k..=k + margin as i32).all(agrees))
        .map(|k| p.offset(dir_fg, (k + margin as i32) as f64))
}

/// Positive `(p, p_b)` and equal-depth `(p_f, p)` pairs for every pixel of
/// every classified segment, in segment and pixel order. Pixels whose two
/// helpers share one motion are skipped.
pub fn extract_pairs<R: Rng + ?Sized>(
    verdicts: &[FigureGroundVerdict],
    field: &FlowField,
    helper_offset: f64,
    params: &SamplingParams,
    rng: &mut R,
) -> Vec<DepthPair> {
    extract_pairs_checked(verdicts, &[field], helper_offset, params, rng)
}

/// [`extract_pairs`] where "same motion" must hold in every field. Passing
/// the flows to both temporal neighbors rejects points that only one of them
/// assigns to the wrong layer, as happens next to converging boundaries.
pub fn extract_pairs_checked<R: Rng + ?Sized>(
    verdicts: &[FigureGroundVerdict],
    fields: &[&FlowField],
    helper_offset: f64,
    params: &SamplingParams,
    rng: &mut R,
) -> Vec<DepthPair> {
    let Some((w, h)) = fields.first().map(|f| f.dims()) else {
        return Vec::new();
    };
    let eps = params.flow_epsilon;
    let mut pairs = Vec::new();
    for verdict in verdicts {
        let seg = &verdict.segment;
        for (&p, &n) in seg.pixels.iter().zip(&seg.normals) {
            let (p1, p2) = helper_pixels(p, n, helper_offset, w, h);
            let (fg_helper, bg_helper, dir_fg) = match verdict.foreground {
                Side::One => (p1, p2, -n),
                Side::Two => (p2, p1, n),
            };
            // helpers that move together do not straddle a depth edge
            if flows_consistent(fields, fg_helper, bg_helper, eps) {
                continue;
            }
            let Some(p) = anchor_boundary_point(
                p,
                dir_fg,
                fg_helper,
                helper_offset,
                params.anchor_margin,
                fields,
                eps,
            ) else {
                continue;
            };
            let bg = sample_along(
                p,
                Some(-dir_fg),
                params.bg_max_offset,
                bg_helper,
                fields,
                params,
                rng,
            );
            if let Some(pb) = bg {
                pairs.push(DepthPair {
                    i: p,
                    j: pb,
                    o: Ordinal::Closer,
                });
            }
            let fg = sample_along(
                p,
                Some(dir_fg),
                params.fg_max_offset,
                fg_helper,
                fields,
                params,
                rng,
            );
            if let Some(pf) = fg {
                pairs.push(DepthPair {
                    i: pf,
                    j: p,
                    o: Ordinal::Same,
                });
            }
        }
    }
    pairs
}

/// Keeps a uniformly random subset of exactly `floor(keep_rate * n)` pairs,
/// preserving input order.
pub fn random_drop<R: Rng + ?Sized>(
    pairs: &[DepthPair],
    keep_rate: f64,
    rng: &mut R,
) -> Vec<DepthPair> {
    let n = pairs.len();
    let keep = ((keep_rate * n as f64) + 1e-9).floor().clamp(0.0, n as f64) as usize;
    let mut chosen = index::sample(rng, n, keep).into_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| pairs[i]).collect()
}
