//! Extracts ordinal depth pairs for one frame and scores them against the
//! synthetic layer map.

use dynocc::pipeline::{annotate_clip, ClipFrame, ExtractionParams, FrameOutcome};
use dynocc::synth::{render_scene, score_pairs, SceneSpec};

fn main() -> dynocc::Result<()> {
    let scene = render_scene(&SceneSpec::default_rect())?;
    let clip = ClipFrame::from_scene(&scene);
    let params = ExtractionParams {
        seed: 7,
        ..ExtractionParams::default()
    };

    for outcome in annotate_clip(&clip, &params)? {
        match outcome {
            FrameOutcome::Annotated(a) => {
                let t: usize = a.frame.trim_start_matches("frame_").parse().unwrap();
                let s = score_pairs(&a.pairs, &scene.truth.frames[t]);
                println!(
                    "{}: {} of {} pairs kept, ordered {}/{}, equal {}/{}",
                    a.frame,
                    a.stats.pairs_after_drop,
                    a.stats.pairs_before_drop,
                    s.pos_correct,
                    s.pos_total,
                    s.neg_correct,
                    s.neg_total
                );
                if let Some(p) = a.pairs.first() {
                    println!("  first pair: {}", serde_json::to_string(p).unwrap());
                }
            }
            FrameOutcome::Skipped(s) => println!("{}: skipped ({})", s.frame, s.reason),
        }
    }
    Ok(())
}
