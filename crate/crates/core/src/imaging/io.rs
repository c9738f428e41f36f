use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};

use super::Frame;
use crate::error::{Error, Result};

/// Loads an 8-bit PNG/PPM/PGM frame, scaling intensities by `1/255`.
/// Color images keep three channels; grayscale images keep one.
pub fn read_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    frame_from_image(&img)
}

pub(crate) fn frame_from_image(img: &DynamicImage) -> Result<Frame> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if img.color().has_color() {
        let rgb = img.to_rgb8();
        let data = rgb.as_raw().iter().map(|&b| b as f32 / 255.0).collect();
        Frame::new(w, h, 3, data)
    } else {
        let gray = img.to_luma8();
        let data = gray.as_raw().iter().map(|&b| b as f32 / 255.0).collect();
        Frame::new(w, h, 1, data)
    }
}

pub(crate) fn to_u8(v: f32) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub(crate) fn frame_to_image(frame: &Frame) -> DynamicImage {
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let raw: Vec<u8> = frame.data().iter().map(|&v| to_u8(v)).collect();
    match frame.channels() {
        1 => DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, raw).expect("frame size")),
        _ => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, raw).expect("frame size")),
    }
}

/// Writes a frame as an 8-bit PNG.
pub fn write_frame_png(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    frame_to_image(frame)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_and_ppm_roundtrip_on_8bit_levels() {
        let dir = tempfile::tempdir().unwrap();
        let data: Vec<f32> = (0..12).map(|i| (i * 20) as f32 / 255.0).collect();
        let rgb = Frame::new(2, 2, 3, data.clone()).unwrap();
        let p = dir.path().join("a.png");
        write_frame_png(&rgb, &p).unwrap();
        assert_eq!(read_frame(&p).unwrap(), rgb);

        let ppm = dir.path().join("a.ppm");
        frame_to_image(&rgb).save(&ppm).unwrap();
        assert_eq!(read_frame(&ppm).unwrap(), rgb);

        let gray = Frame::new(3, 2, 1, data[..6].to_vec()).unwrap();
        let g = dir.path().join("g.png");
        write_frame_png(&gray, &g).unwrap();
        assert_eq!(read_frame(&g).unwrap(), gray);
    }
}
