//! Writes a synthetic clip to disk and runs the file-based pipeline on it with
//! block-matching flow, producing JSON Lines annotations and overlays.

use dynocc::pipeline::{read_annotations, run_pipeline, FlowSource, PipelineConfig};
use dynocc::synth::{render_scene, write_scene, SceneSpec};

fn main() -> dynocc::Result<()> {
    let root = std::env::temp_dir().join("dynocc_full_pipeline");
    let frames = root.join("frames");
    write_scene(&render_scene(&SceneSpec::default_rect())?, &frames)?;

    let mut config = PipelineConfig::new(&frames, FlowSource::internal(), root.join("pairs.jsonl"));
    config.overlay_dir = Some(root.join("overlays"));
    config.seed = 3;
    println!("config:\n{}", config.to_toml_string()?);

    let summary = run_pipeline(&config)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    for a in read_annotations(&config.out)? {
        println!("{}: {} pairs", a.frame, a.pairs.len());
    }
    println!("overlays in {}", root.join("overlays").display());
    Ok(())
}
