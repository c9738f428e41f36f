//! Guo–Hall two-subiteration parallel thinning (8-connected skeletons).

use crate::imaging::BinaryMask;

/// Neighborhood of a pixel in the order N, NE, E, SE, S, SW, W, NW.
#[inline]
fn neighbors(mask: &BinaryMask, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as i64, y as i64);
    [
        mask.get_signed(x, y - 1),
        mask.get_signed(x + 1, y - 1),
        mask.get_signed(x + 1, y),
        mask.get_signed(x + 1, y + 1),
        mask.get_signed(x, y + 1),
        mask.get_signed(x - 1, y + 1),
        mask.get_signed(x - 1, y),
        mask.get_signed(x - 1, y - 1),
    ]
}

/// Deletion test for one subiteration. `first` selects the pass that spares
/// pixels with a set east neighbor, applied first in each iteration.
#[inline]
fn deletable(n: [bool; 8], first: bool) -> bool {
    let [p2, p3, p4, p5, p6, p7, p8, p9] = n;
    let b = |v: bool| v as u8;
    let connectivity =
        b(!p2 && (p3 || p4)) + b(!p4 && (p5 || p6)) + b(!p6 && (p7 || p8)) + b(!p8 && (p9 || p2));
    if connectivity != 1 {
        return false;
    }
    let n1 = b(p9 || p2) + b(p3 || p4) + b(p5 || p6) + b(p7 || p8);
    let n2 = b(p2 || p3) + b(p4 || p5) + b(p6 || p7) + b(p8 || p9);
    let n = n1.min(n2);
    if !(2..=3).contains(&n) {
        return false;
    }
    let m = if first {
        (p2 || p3 || !p5) && p4
    } else {
        (p6 || p7 || !p9) && p8
    };
    !m
}

/// Reduces set regions to a one-pixel-wide 8-connected skeleton. Runs both
/// subiterations until a full pass deletes nothing, so the result is a fixed
/// point: `thin(thin(m)) == thin(m)`.
pub fn thin(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut cur = mask.clone();
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for first in [true, false] {
            doomed.clear();
            for y in 0..h {
                for x in 0..w {
                    if cur.get(x, y) && deletable(neighbors(&cur, x, y), first) {
                        doomed.push((x, y));
                    }
                }
            }
            for &(x, y) in &doomed {
                cur.set(x, y, false);
            }
            changed |= !doomed.is_empty();
        }
        if !changed {
            return cur;
        }
    }
}
