//! Writes a rotational flow field to a `.flo` file and reads it back.

use dynocc::imaging::{read_flo_file, write_flo_file, FlowField};

fn main() -> dynocc::Result<()> {
    let (w, h) = (64, 48);
    let (cx, cy) = (w as f32 / 2.0, h as f32 / 2.0);
    let field = FlowField::from_fn(w, h, |x, y| (-(y as f32 - cy) * 0.1, (x as f32 - cx) * 0.1))?;

    let dir = std::env::temp_dir().join("dynocc_flo_roundtrip");
    std::fs::create_dir_all(&dir).map_err(|e| dynocc::Error::Format(e.to_string()))?;
    let path = dir.join("rotation.flo");
    write_flo_file(&path, &field)?;
    let back = read_flo_file(&path)?;

    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("wrote {} ({bytes} bytes)", path.display());
    println!(
        "{}x{} field, bit-exact round trip: {}",
        back.width(),
        back.height(),
        back == field
    );
    println!("flow at (0, 0): {:?}", back.at(0, 0));
    Ok(())
}
