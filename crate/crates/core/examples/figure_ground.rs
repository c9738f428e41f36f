//! Splits detected edges into segments and decides which side of each one is
//! in front by warping it into the neighboring frames.

use dynocc::boundary::{detect_boundaries, BoundaryParams};
use dynocc::order::{classify_segment, split_segments, OrderParams, Side};
use dynocc::synth::{render_scene, SceneSpec};

fn main() -> dynocc::Result<()> {
    let scene = render_scene(&SceneSpec::default_rect())?;
    let order = OrderParams::default();
    let b = order.baseline;
    let t = 4;
    let edges: Vec<_> = [t - b, t, t + b]
        .iter()
        .map(|&k| {
            let tr = &scene.truth.frames[k];
            detect_boundaries(
                tr.flow_prev.as_ref().unwrap(),
                tr.flow_next.as_ref().unwrap(),
                &BoundaryParams::default(),
            )
        })
        .collect::<dynocc::Result<_>>()?;
    let truth = &scene.truth.frames[t];
    let (f_prev, f_next) = (
        truth.flow_prev.as_ref().unwrap(),
        truth.flow_next.as_ref().unwrap(),
    );

    let segments = split_segments(&edges[1], order.segment_len);
    println!("{} segments on frame {t}", segments.len());
    for seg in &segments {
        let start = seg.pixels[0];
        match classify_segment(seg, f_prev, f_next, &edges[0], &edges[2], &order) {
            Some(v) => {
                let side = if v.foreground == Side::One {
                    "one"
                } else {
                    "two"
                };
                println!(
                    "  at ({:3},{:3}) len {:2}: side {side} in front (prev {}/{} vs {}, next {}/{} vs {})",
                    start.x, start.y, seg.len(), v.prev.c1, v.prev.c, v.prev.c2, v.next.c1, v.next.c, v.next.c2
                );
            }
            None => println!(
                "  at ({:3},{:3}) len {:2}: undecided",
                start.x,
                start.y,
                seg.len()
            ),
        }
    }
    Ok(())
}
