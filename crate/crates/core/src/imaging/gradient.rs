use super::{FlowField, PixelPoint, ScalarMap, UnitVec};

/// Finite difference of `f` along one axis at index `i` of `n` samples:
/// central in the interior, one-sided at the ends, zero for a single sample.
#[inline]
fn diff(n: usize, i: usize, f: impl Fn(usize) -> f64) -> f64 {
    if n < 2 {
        0.0
    } else if i == 0 {
        f(1) - f(0)
    } else if i == n - 1 {
        f(n - 1) - f(n - 2)
    } else {
        0.5 * (f(i + 1) - f(i - 1))
    }
}

/// L1 norm of the flow Jacobian, `|u_x| + |u_y| + |v_x| + |v_y|`, per pixel.
pub fn flow_gradient_magnitude(field: &FlowField) -> ScalarMap {
    let (w, h) = field.dims();
    let (u, v) = (field.u(), field.v());
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let ux = diff(w, x, |i| u[y * w + i] as f64);
            let uy = diff(h, y, |j| u[j * w + x] as f64);
            let vx = diff(w, x, |i| v[y * w + i] as f64);
            let vy = diff(h, y, |j| v[j * w + x] as f64);
            out.push(ux.abs() + uy.abs() + vx.abs() + vy.abs());
        }
    }
    ScalarMap::from_raw(w, h, out)
}

/// Flow vector at the lattice point nearest `p`, clamped to the border.
pub fn sample_flow(field: &FlowField, p: PixelPoint) -> (f32, f32) {
    let q = p.clamp(field.width(), field.height());
    field.at(q.x as usize, q.y as usize)
}

/// Unit direction of the local gradient of `map` at `p` (clamped into the
/// raster). Returns `None` where the gradient norm is below `1e-8`; callers
/// must skip such pixels rather than invent a direction.
pub fn gradient_direction(map: &ScalarMap, p: PixelPoint) -> Option<UnitVec> {
    let (w, h) = map.dims();
    let q = p.clamp(w, h);
    let (x, y) = (q.x as usize, q.y as usize);
    let gx = diff(w, x, |i| map.at(i, y));
    let gy = diff(h, y, |j| map.at(x, j));
    UnitVec::new(gx, gy)
}
