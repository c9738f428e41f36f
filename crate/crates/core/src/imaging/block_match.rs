//! Integer block-matching flow with a sum-of-absolute-differences cost.
//!
//! Each candidate displacement is scored for every pixel at once: the
//! absolute-difference image is integrated into a summed-area table so the
//! block cost is four lookups. Luma is quantized to 16 bits so costs are exact
//! integers and ties resolve identically on every run.

use rayon::prelude::*;

use super::{ensure_same_dims, FlowField, Frame};
use crate::error::{Error, Result};

const LUMA_SCALE: f32 = 65535.0;

fn quantize(frame: &Frame) -> Vec<i64> {
    frame
        .luma()
        .into_iter()
        .map(|v| (v * LUMA_SCALE).round() as i64)
        .collect()
}

/// Candidate displacements in tie-break order: smallest magnitude first, then
/// lexicographic `(dy, dx)`.
fn candidates(radius: i32) -> Vec<(i32, i32)> {
    let mut c: Vec<(i32, i32)> = (-radius..=radius)
        .flat_map(|dy| (-radius..=radius).map(move |dx| (dx, dy)))
        .collect();
    c.sort_by_key(|&(dx, dy)| (dx * dx + dy * dy, dy, dx));
    c
}

/// Per-pixel displacement from `a` to `b` minimizing the SAD of the
/// `block`x`block` window around each pixel. Windows are cropped to the image
/// and `b` is sampled with border clamping; a displacement is only admissible
/// when it keeps the pixel itself inside the frame.
pub fn estimate_flow_block_matching(
    a: &Frame,
    b: &Frame,
    block: usize,
    radius: usize,
) -> Result<FlowField> {
    ensure_same_dims(a.dims(), b.dims())?;
    if block.is_multiple_of(2) {
        return Err(Error::param(format!("block size must be odd, got {block}")));
    }
    if radius == 0 {
        return Err(Error::param("search radius must be at least 1"));
    }
    let (w, h) = a.dims();
    let la = quantize(a);
    let lb = quantize(b);
    let half = (block / 2) as i64;

    let mut best_cost = vec![i64::MAX; w * h];
    let mut best_disp = vec![(0i32, 0i32); w * h];
    let mut sat = vec![0i64; (w + 1) * (h + 1)];

    for (dx, dy) in candidates(radius as i32) {
        for y in 0..h {
            let sy = (y as i64 + dy as i64).clamp(0, h as i64 - 1) as usize;
            let mut row = 0i64;
            for x in 0..w {
                let sx = (x as i64 + dx as i64).clamp(0, w as i64 - 1) as usize;
                row += (la[y * w + x] - lb[sy * w + sx]).abs();
                sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
            }
        }
        let sat = &sat;
        best_cost
            .par_chunks_mut(w)
            .zip(best_disp.par_chunks_mut(w))
            .enumerate()
            .for_each(|(y, (cost_row, disp_row))| {
                let ty = y as i64 + dy as i64;
                if ty < 0 || ty >= h as i64 {
                    return;
                }
                let y0 = (y as i64 - half).max(0) as usize;
                let y1 = (y as i64 + half).min(h as i64 - 1) as usize + 1;
                for x in 0..w {
                    let tx = x as i64 + dx as i64;
                    if tx < 0 || tx >= w as i64 {
                        continue;
                    }
                    let x0 = (x as i64 - half).max(0) as usize;
                    let x1 = (x as i64 + half).min(w as i64 - 1) as usize + 1;
                    let s =
                        sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0]
                            + sat[y0 * (w + 1) + x0];
                    if s < cost_row[x] {
                        cost_row[x] = s;
                        disp_row[x] = (dx, dy);
                    }
                }
            });
    }

    let u = best_disp.iter().map(|d| d.0 as f32).collect();
    let v = best_disp.iter().map(|d| d.1 as f32).collect();
    FlowField::new(w, h, u, v)
}
