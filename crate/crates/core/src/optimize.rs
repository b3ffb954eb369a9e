//! Small deterministic minimizers used for sub-grid refinement.

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`. Returns the best abscissa seen and its
/// value.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        // `<=` keeps the left point on ties so the smaller abscissa wins
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Vertex of the parabola through three equally spaced samples `y` at
/// offsets −1, 0, +1, as an offset in units of the spacing. `None` if the
/// samples are not convex.
pub fn parabolic_offset(y: [f64; 3]) -> Option<f64> {
    let curv = y[0] - 2.0 * y[1] + y[2];
    if !(curv > 0.0) {
        return None;
    }
    let off = 0.5 * (y[0] - y[2]) / curv;
    off.is_finite().then_some(off)
}

/// Least-squares quadratic surface through a 3×3 stencil of samples at
/// offsets (−1, 0, 1)², returning the stationary point as offsets in units
/// of the spacings. `None` unless the fit has a proper minimum.
///
/// `z[i][j]` is the sample at offset `(i − 1, j − 1)`.
pub fn quadratic_offset_2d(z: [[f64; 3]; 3]) -> Option<(f64, f64)> {
    // Fit z = c + bx x + by y + axx x² + ayy y² + axy x y. On the symmetric
    // stencil the normal equations decouple into closed-form moments.
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut s = 0.0;
    for (i, row) in z.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let x = i as f64 - 1.0;
            let y = j as f64 - 1.0;
            s += v;
            sx += x * v;
            sy += y * v;
            sxy += x * y * v;
            sxx += x * x * v;
            syy += y * y * v;
        }
    }
    let bx = sx / 6.0;
    let by = sy / 6.0;
    let axy = sxy / 4.0;
    // eliminating c from the (c, axx, ayy) block
    let axx = (sxx - 2.0 * s / 3.0) / 2.0;
    let ayy = (syy - 2.0 * s / 3.0) / 2.0;
    let det = 4.0 * axx * ayy - axy * axy;
    if !(axx > 0.0 && det > 0.0) {
        return None;
    }
    let x = (-2.0 * ayy * bx + axy * by) / det;
    let y = (-2.0 * axx * by + axy * bx) / det;
    (x.is_finite() && y.is_finite()).then_some((x, y))
}
