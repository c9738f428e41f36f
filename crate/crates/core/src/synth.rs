//! Synthetic dynamic scenes with exact ground truth.
//!
//! Scenes are textured sprites translating by whole pixels over a textured
//! background. Flow, layer order and boundaries are computed analytically from
//! the scene description, never estimated, so they serve as the reference for
//! every stage of the pipeline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{write_flo_file, write_frame_png, BinaryMask, FlowField, Frame, PixelPoint};
use crate::sampling::{DepthPair, Ordinal};

/// Layer index of the background; every sprite is nearer.
pub const BACKGROUND_LAYER: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Texture {
    /// Hash-based value noise: `mean + amplitude * n` with `n` in `[-0.5, 0.5]`,
    /// mixing per-pixel noise with a smoother 4-pixel lattice octave.
    Noise {
        seed: u64,
        mean: f32,
        amplitude: f32,
    },
    Flat {
        level: f32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Rect { x: i32, y: i32, w: i32, h: i32 },
    Disc { cx: i32, cy: i32, r: i32 },
}

impl Shape {
    fn contains(&self, x: i32, y: i32) -> bool {
        match *self {
            Shape::Rect { x: rx, y: ry, w, h } => x >= rx && x < rx + w && y >= ry && y < ry + h,
            Shape::Disc { cx, cy, r } => {
                let (dx, dy) = ((x - cx) as i64, (y - cy) as i64);
                dx * dx + dy * dy <= (r as i64) * (r as i64)
            }
        }
    }

    /// Inclusive pixel extent `(x0, y0, x1, y1)`.
    fn extent(&self) -> (i32, i32, i32, i32) {
        match *self {
            Shape::Rect { x, y, w, h } => (x, y, x + w - 1, y + h - 1),
            Shape::Disc { cx, cy, r } => (cx - r, cy - r, cx + r, cy + r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sprite {
    /// Geometry at frame 0.
    pub shape: Shape,
    /// Lower is nearer.
    pub layer: u32,
    /// Translation per frame, in pixels.
    pub velocity: (i32, i32),
    pub texture: Texture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Frame distance of the ground-truth flows.
    pub baseline: usize,
    pub background: Texture,
    pub background_velocity: (i32, i32),
    pub sprites: Vec<Sprite>,
}

impl SceneSpec {
    /// 128x128, ten frames, one 56x72 textured rectangle moving `(4, 0)` px per
    /// frame over a static textured background.
    pub fn default_rect() -> Self {
        Self {
            width: 128,
            height: 128,
            frames: 10,
            baseline: 2,
            background: Texture::Noise {
                seed: 11,
                mean: 0.45,
                amplitude: 0.6,
            },
            background_velocity: (0, 0),
            sprites: vec![Sprite {
                shape: Shape::Rect {
                    x: 16,
                    y: 28,
                    w: 56,
                    h: 72,
                },
                layer: 0,
                velocity: (4, 0),
                texture: Texture::Noise {
                    seed: 23,
                    mean: 0.55,
                    amplitude: 0.6,
                },
            }],
        }
    }

    /// Same geometry with every sprite at rest.
    pub fn static_rect() -> Self {
        let mut s = Self::default_rect();
        s.sprites.iter_mut().for_each(|sp| sp.velocity = (0, 0));
        s
    }

    /// Two rectangles separating horizontally.
    pub fn two_rects_apart() -> Self {
        let mut s = Self::default_rect();
        s.width = 192;
        s.sprites = vec![
            Sprite {
                shape: Shape::Rect {
                    x: 50,
                    y: 28,
                    w: 44,
                    h: 72,
                },
                layer: 0,
                velocity: (-4, 0),
                texture: Texture::Noise {
                    seed: 31,
                    mean: 0.55,
                    amplitude: 0.6,
                },
            },
            Sprite {
                shape: Shape::Rect {
                    x: 98,
                    y: 28,
                    w: 44,
                    h: 72,
                },
                layer: 1,
                velocity: (4, 0),
                texture: Texture::Noise {
                    seed: 37,
                    mean: 0.5,
                    amplitude: 0.6,
                },
            },
        ];
        s
    }

    /// The default scene with every texture replaced by one flat level.
    pub fn flat_rect(level: f32) -> Self {
        let mut s = Self::default_rect();
        s.background = Texture::Flat { level };
        s.sprites
            .iter_mut()
            .for_each(|sp| sp.texture = Texture::Flat { level });
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 3 || self.height < 3 || self.frames == 0 || self.baseline == 0 {
            return Err(Error::Scene(
                "canvas, frame count and baseline must be positive".into(),
            ));
        }
        let mut layers: Vec<u32> = self.sprites.iter().map(|s| s.layer).collect();
        layers.sort_unstable();
        if layers.windows(2).any(|w| w[0] == w[1]) || layers.contains(&BACKGROUND_LAYER) {
            return Err(Error::Scene(
                "sprite layers must be unique and below the background".into(),
            ));
        }
        for (k, sp) in self.sprites.iter().enumerate() {
            let (x0, y0, x1, y1) = sp.shape.extent();
            for f in [0, self.frames as i32 - 1] {
                let (dx, dy) = (sp.velocity.0 * f, sp.velocity.1 * f);
                if x0 + dx < 1
                    || y0 + dy < 1
                    || x1 + dx > self.width as i32 - 2
                    || y1 + dy > self.height as i32 - 2
                {
                    return Err(Error::Scene(format!(
                        "sprite {k} leaves the canvas by frame {f}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Ground truth for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTruth {
    /// Flow to frame `t - baseline`, if it exists.
    pub flow_prev: Option<FlowField>,
    /// Flow to frame `t + baseline`, if it exists.
    pub flow_next: Option<FlowField>,
    /// Nearest visible layer per pixel.
    pub layers: Vec<u32>,
    /// Pixels with a 4-neighbor on a different layer.
    pub boundary: BinaryMask,
    width: usize,
}

impl FrameTruth {
    pub fn layer(&self, p: PixelPoint) -> u32 {
        self.layers[p.y as usize * self.width + p.x as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub frames: Vec<FrameTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedScene {
    pub spec: SceneSpec,
    pub frames: Vec<Frame>,
    pub truth: GroundTruth,
}

fn hash3(seed: u64, x: i64, y: i64) -> u64 {
    // splitmix64 finalizer over a mixed key
    let mut z = seed
        .wrapping_add((x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_noise(seed: u64, x: i64, y: i64) -> f32 {
    (hash3(seed, x, y) >> 40) as f32 / (1u64 << 24) as f32 - 0.5
}

fn lattice_noise(seed: u64, x: i64, y: i64, cell: i64) -> f32 {
    let (cx, cy) = (x.div_euclid(cell), y.div_euclid(cell));
    let (fx, fy) = (
        x.rem_euclid(cell) as f32 / cell as f32,
        y.rem_euclid(cell) as f32 / cell as f32,
    );
    let s = seed ^ 0x5851_F42D_4C95_7F2D;
    let a = unit_noise(s, cx, cy);
    let b = unit_noise(s, cx + 1, cy);
    let c = unit_noise(s, cx, cy + 1);
    let d = unit_noise(s, cx + 1, cy + 1);
    let top = a + (b - a) * fx;
    let bottom = c + (d - c) * fx;
    top + (bottom - top) * fy
}

impl Texture {
    /// Intensity at texture coordinate `(x, y)`, quantized to 8-bit levels.
    pub fn sample(&self, x: i64, y: i64) -> f32 {
        let v = match *self {
            Texture::Flat { level } => level,
            Texture::Noise {
                seed,
                mean,
                amplitude,
            } => {
                mean + amplitude
                    * (0.6 * unit_noise(seed, x, y) + 0.4 * lattice_noise(seed, x, y, 4))
            }
        };
        (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
    }
}

/// Index of the visible sprite at `(x, y)` in frame `f`, or `None` for background.
fn visible_sprite(spec: &SceneSpec, f: i32, x: i32, y: i32) -> Option<usize> {
    spec.sprites
        .iter()
        .enumerate()
        .filter(|(_, sp)| {
            sp.shape
                .contains(x - sp.velocity.0 * f, y - sp.velocity.1 * f)
        })
        .min_by_key(|(_, sp)| sp.layer)
        .map(|(k, _)| k)
}

pub fn render_scene(spec: &SceneSpec) -> Result<RenderedScene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut frames = Vec::with_capacity(spec.frames);
    let mut truth = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames as i32 {
        let mut data = Vec::with_capacity(w * h);
        let mut layers = Vec::with_capacity(w * h);
        let mut velocity = Vec::with_capacity(w * h);
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                let (vel, tex, layer) = match visible_sprite(spec, f, x, y) {
                    Some(k) => {
                        let sp = &spec.sprites[k];
                        (sp.velocity, sp.texture, sp.layer)
                    }
                    None => (spec.background_velocity, spec.background, BACKGROUND_LAYER),
                };
                data.push(tex.sample((x - vel.0 * f) as i64, (y - vel.1 * f) as i64));
                layers.push(layer);
                velocity.push(vel);
            }
        }
        let flow_towards = |k: i32| -> Option<FlowField> {
            let target = f + k;
            (target >= 0 && target < spec.frames as i32).then(|| {
                let u = velocity.iter().map(|v| (v.0 * k) as f32).collect();
                let v = velocity.iter().map(|v| (v.1 * k) as f32).collect();
                FlowField::new(w, h, u, v).expect("flow size")
            })
        };
        let b = spec.baseline as i32;
        let boundary = BinaryMask::from_fn(w, h, |x, y| {
            let l = layers[y * w + x];
            (x > 0 && layers[y * w + x - 1] != l)
                || (x + 1 < w && layers[y * w + x + 1] != l)
                || (y > 0 && layers[(y - 1) * w + x] != l)
                || (y + 1 < h && layers[(y + 1) * w + x] != l)
        })?;
        truth.push(FrameTruth {
            flow_prev: flow_towards(-b),
            flow_next: flow_towards(b),
            layers,
            boundary,
            width: w,
        });
        frames.push(Frame::new(w, h, 1, data)?);
    }
    Ok(RenderedScene {
        spec: spec.clone(),
        frames,
        truth: GroundTruth { frames: truth },
    })
}

pub fn frame_stem(index: usize) -> String {
    format!("frame_{index:04}")
}

/// Writes `frame_NNNN.png` plus `frame_NNNN.prev.flo` / `frame_NNNN.next.flo`
/// for every flow that exists.
pub fn write_scene(scene: &RenderedScene, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (k, (frame, truth)) in scene.frames.iter().zip(&scene.truth.frames).enumerate() {
        let stem = frame_stem(k);
        write_frame_png(frame, dir.join(format!("{stem}.png")))?;
        if let Some(f) = &truth.flow_prev {
            write_flo_file(dir.join(format!("{stem}.prev.flo")), f)?;
        }
        if let Some(f) = &truth.flow_next {
            write_flo_file(dir.join(format!("{stem}.next.flo")), f)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    /// Ordered pairs whose closer point is on the nearer layer. `1.0` when there
    /// are none.
    pub pos_accuracy: f64,
    /// Equal-depth pairs on a single layer. `1.0` when there are none.
    pub neg_accuracy: f64,
    pub pos_total: usize,
    pub pos_correct: usize,
    pub neg_total: usize,
    pub neg_correct: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores pairs against the layer map. `-1` pairs are scored as ordered pairs
/// with the roles of `i` and `j` exchanged.
pub fn score_pairs(pairs: &[DepthPair], truth: &FrameTruth) -> PairScore {
    let (mut pos_total, mut pos_correct, mut neg_total, mut neg_correct) = (0, 0, 0, 0);
    for p in pairs {
        let (li, lj) = (truth.layer(p.i), truth.layer(p.j));
        match p.o {
            Ordinal::Closer => {
                pos_total += 1;
                pos_correct += (li < lj) as usize;
            }
            Ordinal::Further => {
                pos_total += 1;
                pos_correct += (lj < li) as usize;
            }
            Ordinal::Same => {
                neg_total += 1;
                neg_correct += (li == lj) as usize;
            }
        }
    }
    PairScore {
        pos_accuracy: ratio(pos_correct, pos_total),
        neg_accuracy: ratio(neg_correct, neg_total),
        pos_total,
        pos_correct,
        neg_total,
        neg_correct,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryScore {
    /// Fraction of mask pixels near a true boundary; `1.0` for an empty mask.
    pub precision: f64,
    /// Fraction of true boundary pixels near the mask; `1.0` if there are none.
    pub recall: f64,
}

/// Precision and recall with a Chebyshev tolerance of `tol_px`.
pub fn score_boundaries(
    mask: &BinaryMask,
    truth: &FrameTruth,
    tol_px: u32,
) -> Result<BoundaryScore> {
    crate::imaging::ensure_same_dims(mask.dims(), truth.boundary.dims())?;
    let near_truth = truth.boundary.dilate(tol_px);
    let near_mask = mask.dilate(tol_px);
    let hits = mask
        .points()
        .filter(|p| near_truth.get(p.x as usize, p.y as usize))
        .count();
    let found = truth
        .boundary
        .points()
        .filter(|p| near_mask.get(p.x as usize, p.y as usize))
        .count();
    Ok(BoundaryScore {
        precision: ratio(hits, mask.count()),
        recall: ratio(found, truth.boundary.count()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scene_flows() {
        let s = render_scene(&SceneSpec::default_rect()).unwrap();
        assert_eq!(s.frames.len(), 10);
        let t = &s.truth.frames[3];
        let next = t.flow_next.as_ref().unwrap();
        let prev = t.flow_prev.as_ref().unwrap();
        // sprite at frame 3 spans x in [28, 84), y in [28, 100)
        assert_eq!(next.at(40, 50), (8.0, 0.0));
        assert_eq!(prev.at(40, 50), (-8.0, 0.0));
        assert_eq!(next.at(90, 50), (0.0, 0.0));
        assert_eq!(t.layer(PixelPoint::new(28, 28)), 0);
        assert_eq!(t.layer(PixelPoint::new(27, 28)), BACKGROUND_LAYER);
        assert!(s.truth.frames[0].flow_prev.is_none() && s.truth.frames[1].flow_prev.is_none());
        assert!(s.truth.frames[2].flow_prev.is_some());
        assert!(s.truth.frames[9].flow_next.is_none());
    }

    #[test]
    fn static_sprite_outline_boundary() {
        let s = render_scene(&SceneSpec::static_rect()).unwrap();
        let t = &s.truth.frames[4];
        for f in [&t.flow_prev, &t.flow_next] {
            assert!(f.as_ref().unwrap().u().iter().all(|&u| u == 0.0));
        }
        // outline of a 56x72 rectangle on both sides of the edge
        let inner = 2 * 56 + 2 * 72 - 4;
        let outer = 2 * 56 + 2 * 72;
        assert_eq!(t.boundary.count(), inner + outer);
        assert!(t.boundary.get(16, 50) && t.boundary.get(15, 50) && !t.boundary.get(14, 50));
    }

    #[test]
    fn overlap_resolves_to_lower_layer() {
        let mut spec = SceneSpec::default_rect();
        spec.sprites.push(Sprite {
            shape: Shape::Rect {
                x: 40,
                y: 40,
                w: 40,
                h: 40,
            },
            layer: 3,
            velocity: (0, 0),
            texture: Texture::Flat { level: 0.9 },
        });
        let s = render_scene(&spec).unwrap();
        let t = &s.truth.frames[0];
        assert_eq!(t.layer(PixelPoint::new(50, 50)), 0);
        assert_eq!(t.layer(PixelPoint::new(75, 50)), 3);
        assert!(t.boundary.get(71, 50) && t.boundary.get(72, 50));
    }

    #[test]
    fn rendering_is_deterministic() {
        let a = render_scene(&SceneSpec::two_rects_apart()).unwrap();
        let b = render_scene(&SceneSpec::two_rects_apart()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flow_warp_reconstructs_next_frame() {
        let s = render_scene(&SceneSpec::two_rects_apart()).unwrap();
        let (w, h) = (s.spec.width, s.spec.height);
        for f in 0..s.frames.len() - 2 {
            let flow = s.truth.frames[f].flow_next.as_ref().unwrap();
            let (a, b) = (&s.frames[f], &s.frames[f + 2]);
            let mut checked = 0;
            for y in 0..h {
                for x in 0..w {
                    let (u, v) = flow.at(x, y);
                    let q = PixelPoint::new(x as i32 + u as i32, y as i32 + v as i32);
                    if !q.in_bounds(w, h) {
                        continue;
                    }
                    let same = s.truth.frames[f].layer(PixelPoint::new(x as i32, y as i32))
                        == s.truth.frames[f + 2].layer(q);
                    if same {
                        assert_eq!(a.get(x, y, 0), b.get(q.x as usize, q.y as usize, 0));
                        checked += 1;
                    }
                }
            }
            assert!(checked > w * h * 9 / 10);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = SceneSpec::default_rect();
        s.sprites[0].velocity = (12, 0);
        assert!(matches!(render_scene(&s), Err(Error::Scene(_))));
        let mut s = SceneSpec::two_rects_apart();
        s.sprites[1].layer = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn pair_scores() {
        let s = render_scene(&SceneSpec::default_rect()).unwrap();
        let t = &s.truth.frames[0];
        let fg = PixelPoint::new(30, 50);
        let bg = PixelPoint::new(5, 50);
        let fg2 = PixelPoint::new(40, 60);
        let good = [
            DepthPair {
                i: fg,
                j: bg,
                o: Ordinal::Closer,
            },
            DepthPair {
                i: fg2,
                j: fg,
                o: Ordinal::Same,
            },
            DepthPair {
                i: bg,
                j: fg,
                o: Ordinal::Further,
            },
        ];
        let sc = score_pairs(&good, t);
        assert_eq!(
            (sc.pos_accuracy, sc.neg_accuracy, sc.pos_total, sc.neg_total),
            (1.0, 1.0, 2, 1)
        );
        let swapped: Vec<_> = good[..1]
            .iter()
            .map(|p| DepthPair {
                i: p.j,
                j: p.i,
                ..*p
            })
            .collect();
        assert_eq!(score_pairs(&swapped, t).pos_accuracy, 0.0);
    }

    #[test]
    fn boundary_scores() {
        let s = render_scene(&SceneSpec::default_rect()).unwrap();
        let t = &s.truth.frames[0];
        let sc = score_boundaries(&t.boundary, t, 0).unwrap();
        assert_eq!((sc.precision, sc.recall), (1.0, 1.0));
        let empty = BinaryMask::empty(128, 128).unwrap();
        let sc = score_boundaries(&empty, t, 2).unwrap();
        assert_eq!((sc.precision, sc.recall), (1.0, 0.0));
    }
}
