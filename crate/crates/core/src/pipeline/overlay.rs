use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::imaging::to_u8;
use crate::imaging::{Frame, PixelPoint};
use crate::pipeline::FrameAnnotation;
use crate::sampling::Ordinal;

pub const FOREGROUND: Rgb<u8> = Rgb([0, 0, 255]);
pub const BOUNDARY: Rgb<u8> = Rgb([0, 255, 0]);
pub const BACKGROUND: Rgb<u8> = Rgb([255, 0, 0]);

fn base_image(frame: &Frame) -> RgbImage {
    RgbImage::from_fn(frame.width() as u32, frame.height() as u32, |x, y| {
        let (x, y) = (x as usize, y as usize);
        if frame.channels() == 3 {
            Rgb([0, 1, 2].map(|c| to_u8(frame.get(x, y, c))))
        } else {
            let v = to_u8(frame.get(x, y, 0));
            Rgb([v, v, v])
        }
    })
}

fn square(img: &mut RgbImage, p: PixelPoint, color: Rgb<u8>) {
    for dy in -1..=1 {
        for dx in -1..=1 {
            let (x, y) = (p.x + dx, p.y + dy);
            if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
                img.put_pixel(x as u32, y as u32, color);
            }
        }
    }
}

/// Draws 3x3 markers: blue foreground samples, green boundary points, red
/// background samples. Boundary markers are drawn last.
pub fn render_overlay(frame: &Frame, annotation: &FrameAnnotation) -> Result<RgbImage> {
    let (w, h) = frame.dims();
    for p in &annotation.pairs {
        for q in [p.i, p.j] {
            if !q.in_bounds(w, h) {
                return Err(Error::OutOfBounds {
                    x: q.x as i64,
                    y: q.y as i64,
                    width: w,
                    height: h,
                });
            }
        }
    }
    let mut img = base_image(frame);
    let mut boundary = Vec::new();
    for p in &annotation.pairs {
        match p.o {
            Ordinal::Closer => {
                square(&mut img, p.j, BACKGROUND);
                boundary.push(p.i);
            }
            Ordinal::Further => {
                square(&mut img, p.i, BACKGROUND);
                boundary.push(p.j);
            }
            Ordinal::Same => {
                square(&mut img, p.i, FOREGROUND);
                boundary.push(p.j);
            }
        }
    }
    for p in boundary {
        square(&mut img, p, BOUNDARY);
    }
    Ok(img)
}

pub fn write_overlay(
    frame: &Frame,
    annotation: &FrameAnnotation,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    render_overlay(frame, annotation)?
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::FrameStats;
    use crate::sampling::DepthPair;

    fn annotation(pairs: Vec<DepthPair>) -> FrameAnnotation {
        FrameAnnotation {
            frame: "f".into(),
            image: "f.png".into(),
            pairs,
            stats: FrameStats::default(),
        }
    }

    #[test]
    fn empty_annotation_leaves_frame() {
        let frame = Frame::filled(6, 5, 0.5).unwrap();
        let img = render_overlay(&frame, &annotation(vec![])).unwrap();
        assert!(img.pixels().all(|p| *p == Rgb([128, 128, 128])));
    }

    #[test]
    fn one_positive_pair() {
        let frame = Frame::filled(20, 20, 0.0).unwrap();
        let pair = DepthPair {
            i: PixelPoint::new(5, 5),
            j: PixelPoint::new(12, 5),
            o: Ordinal::Closer,
        };
        let img = render_overlay(&frame, &annotation(vec![pair])).unwrap();
        let count = |c| img.pixels().filter(|p| **p == c).count();
        assert_eq!(
            (count(BOUNDARY), count(BACKGROUND), count(FOREGROUND)),
            (9, 9, 0)
        );
        assert_eq!(*img.get_pixel(5, 5), BOUNDARY);
        assert_eq!(*img.get_pixel(12, 5), BACKGROUND);
    }

    #[test]
    fn rejects_out_of_frame_pairs() {
        let frame = Frame::filled(4, 4, 0.0).unwrap();
        let pair = DepthPair {
            i: PixelPoint::new(5, 0),
            j: PixelPoint::new(0, 0),
            o: Ordinal::Same,
        };
        assert!(matches!(
            render_overlay(&frame, &annotation(vec![pair])),
            Err(Error::OutOfBounds { .. })
        ));
    }
}
