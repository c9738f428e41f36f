//! Renders the two-sprite scene and writes its frames and exact flows to disk.

use dynocc::synth::{render_scene, write_scene, SceneSpec};

fn main() -> dynocc::Result<()> {
    let spec = SceneSpec::two_rects_apart();
    let scene = render_scene(&spec)?;
    let dir = std::env::temp_dir().join("dynocc_two_rects");
    write_scene(&scene, &dir)?;
    println!(
        "{} frames of {}x{} written to {}",
        scene.frames.len(),
        spec.width,
        spec.height,
        dir.display()
    );
    for (k, truth) in scene.truth.frames.iter().enumerate() {
        println!(
            "frame {k}: {} boundary px, prev flow {}, next flow {}",
            truth.boundary.count(),
            truth.flow_prev.is_some(),
            truth.flow_next.is_some()
        );
    }
    Ok(())
}
