//! Figure/ground assignment along thinned occlusion boundaries.
//!
//! Boundaries are traced into short segments. For each segment, every pixel is
//! warped once with the flow found a few pixels to one side and once with the
//! flow on the other side. The side whose flow carries the edge onto the edge
//! mask of the neighboring frame is taken as the occluder, and only when the
//! backward and forward neighbors agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{sample_flow, BinaryMask, FlowField, PixelPoint, UnitVec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrderParams {
    /// Distance of the side helpers `p1`, `p2` from the boundary pixel.
    pub helper_offset: f64,
    /// Temporal distance, in frames, of the neighbors used for validation.
    pub baseline: usize,
    /// Required margin `(c1 - c2) / c` for a side to win.
    pub delta: f64,
    /// Chebyshev radius within which a warped pixel counts as aligned.
    pub align_tolerance: u32,
    /// Maximum pixels per segment.
    pub segment_len: usize,
}

impl Default for OrderParams {
    fn default() -> Self {
        Self {
            helper_offset: 5.0,
            baseline: 2,
            delta: 0.5,
            align_tolerance: 1,
            segment_len: 20,
        }
    }
}

impl OrderParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.helper_offset >= 1.0 && self.helper_offset.is_finite()) {
            return Err(Error::param("helper_offset must be >= 1"));
        }
        if self.baseline < 1 {
            return Err(Error::param("baseline must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::param(format!(
                "delta must be in [0, 1], got {}",
                self.delta
            )));
        }
        if self.segment_len < 1 {
            return Err(Error::param("segment_len must be >= 1"));
        }
        Ok(())
    }
}

/// A run of consecutive skeleton pixels with per-pixel unit normals.
/// Side one lies at `p - offset * normal`, side two at `p + offset * normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySegment {
    pub pixels: Vec<PixelPoint>,
    pub normals: Vec<UnitVec>,
}

impl BoundarySegment {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }
}

/// Aligned-pixel counts for one temporal direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectionCounts {
    pub c1: usize,
    pub c2: usize,
    pub c: usize,
}

impl DirectionCounts {
    pub fn swapped(self) -> Self {
        Self {
            c1: self.c2,
            c2: self.c1,
            c: self.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureGroundVerdict {
    pub segment: BoundarySegment,
    pub foreground: Side,
    pub prev: DirectionCounts,
    pub next: DirectionCounts,
}

// Ring order: N, NE, E, SE, S, SW, W, NW.
const RING: [(i32, i32); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];
// 4-neighbors first so staircases are walked pixel by pixel.
const WALK: [(i32, i32); 8] = [
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, 0),
    (1, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
];

/// Number of separate runs of neighbors satisfying `pred` around the ring.
fn neighbor_groups(p: PixelPoint, pred: impl Fn(PixelPoint) -> bool) -> usize {
    let on: Vec<bool> = RING
        .iter()
        .map(|&(dx, dy)| pred(PixelPoint::new(p.x + dx, p.y + dy)))
        .collect();
    if on.iter().all(|&b| b) {
        return 1;
    }
    (0..8).filter(|&i| on[i] && !on[(i + 7) % 8]).count()
}

/// Traces the skeleton into curves and chops them into segments of at most
/// `segment_len` pixels. Pixels where three or more branches meet are left
/// out, which splits curves there. Trailing runs shorter than
/// `max(3, segment_len / 4)` are dropped.
pub fn split_segments(mask: &BinaryMask, segment_len: usize) -> Vec<BoundarySegment> {
    let (w, h) = mask.dims();
    let set = |p: PixelPoint| mask.get_signed(p.x as i64, p.y as i64);
    let junction: Vec<bool> = (0..w * h)
        .map(|i| {
            let p = PixelPoint::new((i % w) as i32, (i / w) as i32);
            set(p) && neighbor_groups(p, set) >= 3
        })
        .collect();
    let idx = |p: PixelPoint| p.y as usize * w + p.x as usize;
    let traceable = |p: PixelPoint| set(p) && !junction[idx(p)];

    let mut visited = vec![false; w * h];
    let mut curves: Vec<(Vec<PixelPoint>, bool)> = Vec::new();

    let walk = |start: PixelPoint, visited: &mut Vec<bool>| -> Vec<PixelPoint> {
        let mut path = vec![start];
        visited[idx(start)] = true;
        let mut cur = start;
        'walk: loop {
            for &(dx, dy) in &WALK {
                let q = PixelPoint::new(cur.x + dx, cur.y + dy);
                if traceable(q) && !visited[idx(q)] {
                    visited[idx(q)] = true;
                    path.push(q);
                    cur = q;
                    continue 'walk;
                }
            }
            return path;
        }
    };

    // open curves from their endpoints first, then whatever is left (loops)
    for pass in 0..2 {
        for p in mask.points() {
            if !traceable(p) || visited[idx(p)] {
                continue;
            }
            if pass == 0 && neighbor_groups(p, |q| traceable(q) && !visited[idx(q)]) > 1 {
                continue;
            }
            let path = walk(p, &mut visited);
            let closed =
                pass == 1 && path.len() >= 5 && path[0].chebyshev(*path.last().unwrap()) <= 1;
            curves.push((path, closed));
        }
    }

    let min_run = 3.max(segment_len / 4);
    let mut segments = Vec::new();
    for (path, closed) in curves {
        let n = path.len();
        let normals: Vec<Option<UnitVec>> = (0..n)
            .map(|i| {
                let (a, b) = if closed {
                    (path[(i + n - 2) % n], path[(i + 2) % n])
                } else {
                    (path[i.saturating_sub(2)], path[(i + 2).min(n - 1)])
                };
                let (tx, ty) = ((b.x - a.x) as f64, (b.y - a.y) as f64);
                UnitVec::new(-ty, tx)
            })
            .collect();
        for start in (0..n).step_by(segment_len.max(1)) {
            let end = (start + segment_len).min(n);
            if end - start < min_run {
                continue;
            }
            if normals[start..end].iter().any(Option::is_none) {
                continue;
            }
            segments.push(BoundarySegment {
                pixels: path[start..end].to_vec(),
                normals: normals[start..end].iter().map(|d| d.unwrap()).collect(),
            });
        }
    }
    segments
}

/// `p1 = round(p - offset * d)`, `p2 = round(p + offset * d)`, both clamped.
pub fn helper_pixels(
    p: PixelPoint,
    d: UnitVec,
    offset: f64,
    width: usize,
    height: usize,
) -> (PixelPoint, PixelPoint) {
    (
        p.offset(d, -offset).clamp(width, height),
        p.offset(d, offset).clamp(width, height),
    )
}

/// Number of segment pixels that land within `align_tolerance` of an edge in
/// `edges_other` after being moved by the flow sampled at `side`'s helper.
pub fn warp_match_count(
    segment: &BoundarySegment,
    side: Side,
    flow: &FlowField,
    edges_other: &BinaryMask,
    params: &OrderParams,
) -> usize {
    let (w, h) = flow.dims();
    segment
        .pixels
        .iter()
        .zip(&segment.normals)
        .filter(|(&p, &d)| {
            let (p1, p2) = helper_pixels(p, d, params.helper_offset, w, h);
            let helper = if side == Side::One { p1 } else { p2 };
            let (u, v) = sample_flow(flow, helper);
            let warped = PixelPoint::round(p.x as f64 + u as f64, p.y as f64 + v as f64);
            edges_other.any_within(warped, params.align_tolerance)
        })
        .count()
}

/// The side whose margin over the other exceeds `delta` in one direction.
pub fn matched_side(counts: DirectionCounts, delta: f64) -> Option<Side> {
    if counts.c == 0 {
        return None;
    }
    let c = counts.c as f64;
    let margin = (counts.c1 as f64 - counts.c2 as f64) / c;
    if margin > delta {
        Some(Side::One)
    } else if -margin > delta {
        Some(Side::Two)
    } else {
        None
    }
}

/// A side is foreground only if it wins in both temporal directions.
pub fn classify_counts(prev: DirectionCounts, next: DirectionCounts, delta: f64) -> Option<Side> {
    match (matched_side(prev, delta), matched_side(next, delta)) {
        (Some(a), Some(b)) if a == b => Some(a),
        _ => None,
    }
}

pub fn classify_segment(
    segment: &BoundarySegment,
    f_prev: &FlowField,
    f_next: &FlowField,
    edges_prev: &BinaryMask,
    edges_next: &BinaryMask,
    params: &OrderParams,
) -> Option<FigureGroundVerdict> {
    let counts = |flow: &FlowField, edges: &BinaryMask| DirectionCounts {
        c1: warp_match_count(segment, Side::One, flow, edges, params),
        c2: warp_match_count(segment, Side::Two, flow, edges, params),
        c: segment.len(),
    };
    let prev = counts(f_prev, edges_prev);
    let next = counts(f_next, edges_next);
    classify_counts(prev, next, params.delta).map(|foreground| FigureGroundVerdict {
        segment: segment.clone(),
        foreground,
        prev,
        next,
    })
}
