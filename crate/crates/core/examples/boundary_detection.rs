//! Runs motion-boundary detection on the exact flows of the default synthetic
//! scene and prints each stage of one frame.

use dynocc::boundary::{detect_boundaries_staged, BoundaryParams, FlowSide};
use dynocc::synth::{render_scene, score_boundaries, SceneSpec};

fn main() -> dynocc::Result<()> {
    let scene = render_scene(&SceneSpec::default_rect())?;
    let t = 4;
    let truth = &scene.truth.frames[t];
    let (f_prev, f_next) = (
        truth.flow_prev.as_ref().unwrap(),
        truth.flow_next.as_ref().unwrap(),
    );
    let stages = detect_boundaries_staged(f_prev, f_next, &BoundaryParams::default())?;

    let from_prev = stages
        .confidence
        .selection
        .iter()
        .filter(|&&s| s == FlowSide::Prev)
        .count();
    println!("frame {t}: {} pixels take the backward field", from_prev);
    println!(
        "confidence max {:.3}, blurred max {:.4}",
        stages.confidence.map.max(),
        stages.blurred.max()
    );
    println!(
        "thresholded {} px, thinned {} px",
        stages.thresholded.count(),
        stages.edges.count()
    );

    let score = score_boundaries(&stages.edges, truth, 2)?;
    println!(
        "precision {:.3}, recall {:.3} at 2 px",
        score.precision, score.recall
    );

    for row in stages.edges.to_ascii().iter().step_by(4) {
        let line: String = row.chars().step_by(2).collect();
        println!("{line}");
    }
    Ok(())
}
