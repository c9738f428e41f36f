//! Ordinal ranking loss, hard-query selection and the weighted disagreement rate.
//!
//! A larger predicted value `z` means closer: an ordered query `o = +1` is
//! satisfied when `z_i > z_j`.

use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::PixelPoint;
use crate::sampling::{DepthPair, Ordinal};

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Loss of a single query.
pub fn query_loss(z_i: f64, z_j: f64, o: Ordinal) -> f64 {
    let d = z_i - z_j;
    match o {
        Ordinal::Closer => softplus(-d),
        Ordinal::Further => softplus(d),
        Ordinal::Same => d * d,
    }
}

/// Derivative of [`query_loss`] with respect to `z_i - z_j`.
pub fn query_loss_grad(z_i: f64, z_j: f64, o: Ordinal) -> f64 {
    let d = z_i - z_j;
    match o {
        Ordinal::Closer => -sigmoid(-d),
        Ordinal::Further => sigmoid(d),
        Ordinal::Same => 2.0 * d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub i: PixelPoint,
    pub j: PixelPoint,
    pub o: Ordinal,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuerySet {
    pub queries: Vec<Query>,
}

impl QuerySet {
    pub fn new(queries: Vec<Query>) -> Self {
        Self { queries }
    }

    /// Unit-weight queries from extracted pairs.
    pub fn from_pairs(pairs: &[DepthPair]) -> Self {
        Self {
            queries: pairs
                .iter()
                .map(|p| Query {
                    i: p.i,
                    j: p.j,
                    o: p.o,
                    weight: 1.0,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    z: Vec<f64>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, z: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension {
                width: width as i64,
                height: height as i64,
            });
        }
        if z.len() != width * height {
            return Err(Error::param(format!(
                "depth map needs {} values, got {}",
                width * height,
                z.len()
            )));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("depth values must be finite"));
        }
        Ok(Self { width, height, z })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let z = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, z)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn get(&self, p: PixelPoint) -> Result<f64> {
        if !p.in_bounds(self.width, self.height) {
            return Err(Error::OutOfBounds {
                x: p.x as i64,
                y: p.y as i64,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.z[p.y as usize * self.width + p.x as usize])
    }

    /// Raw little-endian raster: `u32` width, `u32` height, then `f32` values in
    /// row-major order.
    pub fn read_raw_f32(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::Truncated {
                expected: 8,
                found: bytes.len(),
            });
        }
        let w = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let expected = w
            .checked_mul(h)
            .and_then(|n| n.checked_mul(4))
            .and_then(|n| n.checked_add(8))
            .ok_or(Error::Dimension {
                width: w as i64,
                height: h as i64,
            })?;
        if bytes.len() != expected {
            return Err(Error::Truncated {
                expected,
                found: bytes.len(),
            });
        }
        let z = bytes[8..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        Self::new(w, h, z)
    }

    pub fn write_raw_f32(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.z.len());
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        for v in &self.z {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out
    }

    /// 16-bit grayscale PNG where `z = raw * scale`.
    pub fn read_png16(path: impl AsRef<Path>, scale: f64) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })?
            .into_luma16();
        let (w, h) = img.dimensions();
        let z = img
            .into_raw()
            .into_iter()
            .map(|v| v as f64 * scale)
            .collect();
        Self::new(w as usize, h as usize, z)
    }
}

/// Compensated summation.
fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Per-query losses, in query order.
pub fn query_losses(z: &DepthMap, queries: &QuerySet) -> Result<Vec<f64>> {
    queries
        .queries
        .iter()
        .map(|q| Ok(query_loss(z.get(q.i)?, z.get(q.j)?, q.o)))
        .collect()
}

/// Sum of query losses over a non-empty query set.
pub fn ranking_loss(z: &DepthMap, queries: &QuerySet) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    Ok(neumaier_sum(query_losses(z, queries)?))
}

/// Indices of the `ceil(fraction * n)` largest losses, ascending. Ties keep the
/// lower index.
pub fn top_fraction(losses: &[f64], fraction: f64) -> Vec<usize> {
    let keep = ((fraction.clamp(0.0, 1.0) * losses.len() as f64) - 1e-9)
        .ceil()
        .max(0.0) as usize;
    let mut order: Vec<usize> = (0..losses.len()).collect();
    order.sort_by(|&a, &b| losses[b].total_cmp(&losses[a]).then(a.cmp(&b)));
    order.truncate(keep.min(losses.len()));
    order.sort_unstable();
    order
}

/// Ordinal relation implied by predicted values, with equality band `t`.
pub fn predict_order(z_i: f64, z_j: f64, t: f64) -> Ordinal {
    let d = z_i - z_j;
    if d.abs() <= t {
        Ordinal::Same
    } else if d > 0.0 {
        Ordinal::Closer
    } else {
        Ordinal::Further
    }
}

/// Weighted fraction of predictions that disagree with the ground truth.
pub fn whdr(predicted: &[Ordinal], gt: &QuerySet) -> Result<f64> {
    if predicted.len() != gt.len() {
        return Err(Error::param(format!(
            "{} predictions for {} queries",
            predicted.len(),
            gt.len()
        )));
    }
    if gt
        .queries
        .iter()
        .any(|q| !q.weight.is_finite() || q.weight < 0.0)
    {
        return Err(Error::param(
            "query weights must be finite and non-negative",
        ));
    }
    let total = neumaier_sum(gt.queries.iter().map(|q| q.weight));
    if total <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    let wrong = neumaier_sum(
        predicted
            .iter()
            .zip(&gt.queries)
            .filter(|(p, q)| **p != q.o)
            .map(|(_, q)| q.weight),
    );
    Ok(wrong / total)
}

/// [`whdr`] with predictions read from a depth map.
pub fn whdr_from_depth(z: &DepthMap, gt: &QuerySet, t: f64) -> Result<f64> {
    let predicted = gt
        .queries
        .iter()
        .map(|q| Ok(predict_order(z.get(q.i)?, z.get(q.j)?, t)))
        .collect::<Result<Vec<_>>>()?;
    whdr(&predicted, gt)
}

#[derive(Deserialize)]
struct AnnotationLine {
    frame: String,
    pairs: Vec<DepthPair>,
}

/// Reads an annotation JSON Lines file into per-frame query sets.
pub fn read_annotation_queries(path: impl AsRef<Path>) -> Result<Vec<(String, QuerySet)>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let a: AnnotationLine = serde_json::from_str(&line)?;
        out.push((a.frame, QuerySet::from_pairs(&a.pairs)));
    }
    Ok(out)
}
