//! Clip-level orchestration: flows, edge masks, per-frame annotation, and
//! serialization of JSON Lines annotations and overlays.

mod config;
mod overlay;

use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExtractionParams, FlowSource, PipelineConfig};
pub use overlay::{render_overlay, write_overlay};

use crate::boundary::{detect_boundaries, detect_boundaries_single, FlowSide};
use crate::error::{Error, Result};
use crate::imaging::{
    estimate_flow_block_matching, read_flo_file, read_frame, BinaryMask, FlowField, Frame,
};
use crate::order::{classify_segment, split_segments};
use crate::sampling::{extract_pairs_checked, frame_rng, random_drop, DepthPair};
use crate::synth::{frame_stem, RenderedScene};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "DYNOCC_THREADS";

const FRAME_EXTENSIONS: [&str; 5] = ["png", "ppm", "pgm", "pnm", "pbm"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameStats {
    pub boundary_pixels: usize,
    pub classified_segments: usize,
    pub pairs_before_drop: usize,
    pub pairs_after_drop: usize,
}

/// One line of the annotation file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAnnotation {
    pub frame: String,
    pub image: String,
    pub pairs: Vec<DepthPair>,
    pub stats: FrameStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFrame {
    pub frame: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrameOutcome {
    Annotated(FrameAnnotation),
    Skipped(SkippedFrame),
}

/// Input for one frame. Missing pieces carry the reason they are missing.
#[derive(Debug, Clone)]
pub struct ClipFrame {
    pub id: String,
    pub image: String,
    pub frame: std::result::Result<Frame, String>,
    /// Flow to frame `t - baseline`.
    pub flow_prev: std::result::Result<FlowField, String>,
    /// Flow to frame `t + baseline`.
    pub flow_next: std::result::Result<FlowField, String>,
}

impl ClipFrame {
    /// Frames of a synthetic scene with its exact flows.
    pub fn from_scene(scene: &RenderedScene) -> Vec<ClipFrame> {
        scene
            .frames
            .iter()
            .zip(&scene.truth.frames)
            .enumerate()
            .map(|(k, (frame, truth))| {
                let missing = |dir: &str| format!("no {dir} neighbor in the clip");
                ClipFrame {
                    id: frame_stem(k),
                    image: format!("{}.png", frame_stem(k)),
                    frame: Ok(frame.clone()),
                    flow_prev: truth.flow_prev.clone().ok_or_else(|| missing("previous")),
                    flow_next: truth.flow_next.clone().ok_or_else(|| missing("next")),
                }
            })
            .collect()
    }
}

/// Replaces the flows of `clip` with block-matching estimates.
pub fn estimate_clip_flows(clip: &mut [ClipFrame], baseline: usize, block: usize, radius: usize) {
    let frames: Vec<_> = clip.iter().map(|c| c.frame.clone()).collect();
    let n = frames.len();
    let estimate = |t: usize, s: Option<usize>| -> std::result::Result<FlowField, String> {
        let s = s.filter(|&s| s < n).ok_or("no neighbor at the baseline")?;
        match (&frames[t], &frames[s]) {
            (Ok(a), Ok(b)) => {
                estimate_flow_block_matching(a, b, block, radius).map_err(|e| e.to_string())
            }
            (Err(e), _) | (_, Err(e)) => Err(format!("frame unavailable: {e}")),
        }
    };
    let flows: Vec<_> = (0..n)
        .into_par_iter()
        .map(|t| {
            (
                estimate(t, t.checked_sub(baseline)),
                estimate(t, Some(t + baseline)),
            )
        })
        .collect();
    for (c, (prev, next)) in clip.iter_mut().zip(flows) {
        c.flow_prev = prev;
        c.flow_next = next;
    }
}

/// Edge mask of one frame from whichever flows it has.
fn frame_edges(
    c: &ClipFrame,
    params: &ExtractionParams,
) -> std::result::Result<BinaryMask, String> {
    let edges = match (&c.flow_prev, &c.flow_next) {
        (Ok(p), Ok(n)) => detect_boundaries(p, n, &params.boundary),
        (Ok(p), Err(_)) => detect_boundaries_single(p, FlowSide::Prev, &params.boundary),
        (Err(_), Ok(n)) => detect_boundaries_single(n, FlowSide::Next, &params.boundary),
        (Err(a), Err(b)) => return Err(format!("no flow for edge detection ({a}; {b})")),
    };
    edges.map_err(|e| e.to_string())
}

fn annotate_frame(
    t: usize,
    clip: &[ClipFrame],
    edges: &[std::result::Result<BinaryMask, String>],
    params: &ExtractionParams,
) -> std::result::Result<FrameAnnotation, String> {
    let b = params.baseline;
    if t < b || t + b >= clip.len() {
        return Err(format!(
            "clip boundary: frames t-{b} and t+{b} are both required"
        ));
    }
    let c = &clip[t];
    c.frame
        .as_ref()
        .map_err(|e| format!("frame unavailable: {e}"))?;
    let f_prev = c
        .flow_prev
        .as_ref()
        .map_err(|e| format!("previous flow unavailable: {e}"))?;
    let f_next = c
        .flow_next
        .as_ref()
        .map_err(|e| format!("next flow unavailable: {e}"))?;
    let own = edges[t]
        .as_ref()
        .map_err(|e| format!("edges unavailable: {e}"))?;
    let e_prev = edges[t - b]
        .as_ref()
        .map_err(|e| format!("edges of frame t-{b} unavailable: {e}"))?;
    let e_next = edges[t + b]
        .as_ref()
        .map_err(|e| format!("edges of frame t+{b} unavailable: {e}"))?;
    if e_prev.dims() != own.dims() || e_next.dims() != own.dims() {
        return Err("neighbor frames differ in size".into());
    }

    let verdicts: Vec<_> = split_segments(own, params.order.segment_len)
        .iter()
        .filter_map(|s| classify_segment(s, f_prev, f_next, e_prev, e_next, &params.order))
        .collect();
    let mut rng = frame_rng(params.seed, t as u64);
    let all = extract_pairs_checked(
        &verdicts,
        &[f_next, f_prev],
        params.order.helper_offset,
        &params.sampling,
        &mut rng,
    );
    let pairs = random_drop(&all, params.sampling.keep_rate, &mut rng);
    Ok(FrameAnnotation {
        frame: c.id.clone(),
        image: c.image.clone(),
        stats: FrameStats {
            boundary_pixels: own.count(),
            classified_segments: verdicts.len(),
            pairs_before_drop: all.len(),
            pairs_after_drop: pairs.len(),
        },
        pairs,
    })
}

/// Annotates every frame of an in-memory clip, in frame order.
pub fn annotate_clip(clip: &[ClipFrame], params: &ExtractionParams) -> Result<Vec<FrameOutcome>> {
    let params = params.resolved();
    params.validate()?;
    let edges: Vec<_> = clip.par_iter().map(|c| frame_edges(c, &params)).collect();
    Ok((0..clip.len())
        .into_par_iter()
        .map(|t| match annotate_frame(t, clip, &edges, &params) {
            Ok(a) => FrameOutcome::Annotated(a),
            Err(reason) => FrameOutcome::Skipped(SkippedFrame {
                frame: clip[t].id.clone(),
                reason,
            }),
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub frames_total: usize,
    pub processed: Vec<String>,
    pub skipped: Vec<SkippedFrame>,
    pub total_pairs: usize,
}

impl DatasetSummary {
    pub fn from_outcomes(outcomes: &[FrameOutcome]) -> Self {
        let mut s = DatasetSummary {
            frames_total: outcomes.len(),
            ..Default::default()
        };
        for o in outcomes {
            match o {
                FrameOutcome::Annotated(a) => {
                    s.processed.push(a.frame.clone());
                    s.total_pairs += a.pairs.len();
                }
                FrameOutcome::Skipped(k) => s.skipped.push(k.clone()),
            }
        }
        s
    }
}

/// Sorted frame files of a directory.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn load_clip(config: &PipelineConfig) -> Result<Vec<ClipFrame>> {
    let files = list_frames(&config.frames_dir)?;
    let mut clip: Vec<ClipFrame> = files
        .par_iter()
        .map(|path| {
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let (flow_prev, flow_next) = match &config.flow {
                FlowSource::FloDir { dir } => {
                    let load = |kind: &str| {
                        let p = dir.join(format!("{id}.{kind}.flo"));
                        if p.is_file() {
                            read_flo_file(&p).map_err(|e| e.to_string())
                        } else {
                            Err(format!("{} not found", p.display()))
                        }
                    };
                    (load("prev"), load("next"))
                }
                FlowSource::Internal { .. } => {
                    (Err("not estimated".into()), Err("not estimated".into()))
                }
            };
            ClipFrame {
                image: path.display().to_string(),
                frame: read_frame(path).map_err(|e| e.to_string()),
                id,
                flow_prev,
                flow_next,
            }
        })
        .collect();
    if let FlowSource::Internal { block, radius } = config.flow {
        estimate_clip_flows(&mut clip, config.baseline, block, radius);
    }
    Ok(clip)
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Runs the whole extraction described by `config`. Frames that cannot be
/// annotated are skipped and listed in the summary with their reason.
pub fn run_pipeline(config: &PipelineConfig) -> Result<DatasetSummary> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let (clip, outcomes) = pool.install(|| -> Result<_> {
        let clip = load_clip(config)?;
        let outcomes = annotate_clip(&clip, &config.params())?;
        Ok((clip, outcomes))
    })?;

    if let Some(parent) = config.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = std::fs::File::create(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let mut out = std::io::BufWriter::new(file);
    for o in &outcomes {
        match o {
            FrameOutcome::Annotated(a) => {
                serde_json::to_writer(&mut out, a)?;
                out.write_all(b"\n")
                    .map_err(|e| Error::io(&config.out, e))?;
            }
            FrameOutcome::Skipped(s) => warn!("skipping frame {}: {}", s.frame, s.reason),
        }
    }
    out.flush().map_err(|e| Error::io(&config.out, e))?;

    if let Some(dir) = &config.overlay_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (c, o) in clip.iter().zip(&outcomes) {
            if let (FrameOutcome::Annotated(a), Ok(frame)) = (o, &c.frame) {
                write_overlay(frame, a, dir.join(format!("{}.png", a.frame)))?;
            }
        }
    }

    let summary = DatasetSummary::from_outcomes(&outcomes);
    info!(
        "{} of {} frames annotated, {} pairs",
        summary.processed.len(),
        summary.frames_total,
        summary.total_pairs
    );
    Ok(summary)
}

/// Parses an annotation file written by [`run_pipeline`].
pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<FrameAnnotation>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
