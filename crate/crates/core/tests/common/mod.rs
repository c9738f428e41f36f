#![allow(dead_code)]

use dynocc::imaging::BinaryMask;
use dynocc::metrics::Query;
use dynocc::sampling::Ordinal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-subiteration Guo–Hall thinning on a plain grid, written against the
/// original neighbor labels: x1 = east, then counter-clockwise to x8 =
/// south-east. Pixels outside the grid are background.
pub fn guo_hall_reference(grid: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let h = grid.len() as i64;
    let w = grid.first().map_or(0, |r| r.len()) as i64;
    let mut img: Vec<Vec<bool>> = grid.to_vec();
    let at = |img: &Vec<Vec<bool>>, x: i64, y: i64| {
        x >= 0 && y >= 0 && x < w && y < h && img[y as usize][x as usize]
    };
    // (dx, dy) for x1..x8 with y pointing down
    let ring = [
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    loop {
        let mut removed = 0;
        for pass in 0..2 {
            let mut kill = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    if !at(&img, x, y) {
                        continue;
                    }
                    let mut n = [false; 9];
                    for (k, (dx, dy)) in ring.iter().enumerate() {
                        n[k + 1] = at(&img, x + dx, y + dy);
                    }
                    let xi = |i: usize| n[(i - 1) % 8 + 1];
                    let c: u32 = (1..=4)
                        .map(|i| (!xi(2 * i - 1) && (xi(2 * i) || xi(2 * i + 1))) as u32)
                        .sum();
                    let n1: u32 = (1..=4).map(|k| (xi(2 * k - 1) || xi(2 * k)) as u32).sum();
                    let n2: u32 = (1..=4).map(|k| (xi(2 * k) || xi(2 * k + 1)) as u32).sum();
                    let nn = n1.min(n2);
                    let g3 = if pass == 0 {
                        !((xi(2) || xi(3) || !xi(8)) && xi(1))
                    } else {
                        !((xi(6) || xi(7) || !xi(4)) && xi(5))
                    };
                    if c == 1 && (2..=3).contains(&nn) && g3 {
                        kill.push((x as usize, y as usize));
                    }
                }
            }
            removed += kill.len();
            for (x, y) in kill {
                img[y][x] = false;
            }
        }
        if removed == 0 {
            return img;
        }
    }
}

pub fn mask_to_grid(m: &BinaryMask) -> Vec<Vec<bool>> {
    (0..m.height())
        .map(|y| (0..m.width()).map(|x| m.get(x, y)).collect())
        .collect()
}

/// Union of a few random discs and rectangles plus sparse speckle.
pub fn seeded_blob(seed: u64, w: usize, h: usize) -> BinaryMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: Vec<(i64, i64, i64, i64, bool)> = (0..rng.random_range(1..6))
        .map(|_| {
            (
                rng.random_range(0..w as i64),
                rng.random_range(0..h as i64),
                rng.random_range(2..12),
                rng.random_range(2..12),
                rng.random_bool(0.5),
            )
        })
        .collect();
    let speckle: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.02)).collect();
    BinaryMask::from_fn(w, h, |x, y| {
        let (x, y) = (x as i64, y as i64);
        speckle[y as usize * w + x as usize]
            || shapes.iter().any(|&(cx, cy, a, b, disc)| {
                if disc {
                    (x - cx).pow(2) * b * b + (y - cy).pow(2) * a * a <= a * a * b * b
                } else {
                    (x - cx).abs() <= a && (y - cy).abs() <= b
                }
            })
    })
    .unwrap()
}

/// Direct transcription of the per-query loss with no overflow guard.
pub fn naive_loss(zi: f64, zj: f64, o: Ordinal) -> f64 {
    let d = zi - zj;
    match o {
        Ordinal::Closer => (1.0 + (-d).exp()).ln(),
        Ordinal::Further => (1.0 + d.exp()).ln(),
        Ordinal::Same => d * d,
    }
}

pub fn brute_whdr(pred: &[Ordinal], gt: &[Query]) -> f64 {
    let mut wrong = 0.0;
    let mut total = 0.0;
    for (p, q) in pred.iter().zip(gt) {
        total += q.weight;
        if *p != q.o {
            wrong += q.weight;
        }
    }
    wrong / total
}

pub fn random_ordinal(rng: &mut impl Rng) -> Ordinal {
    match rng.random_range(0..3) {
        0 => Ordinal::Further,
        1 => Ordinal::Same,
        _ => Ordinal::Closer,
    }
}
