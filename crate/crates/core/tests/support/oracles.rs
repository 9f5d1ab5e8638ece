//! Brute-force references for ball geometry and scalar prox problems.

#![allow(dead_code)]

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `max ‖x − c‖²` over the lens `B(a, ra²) ∩ B(b, rb²)` for `c` on the axis at
/// signed offset `uc` from `a`. The lens is rotationally symmetric and the
/// squared distance is affine in the axial coordinate on each sphere, so
/// the maximum sits at an axial pole or on the rim circle.
fn lens_farthest_sq(d: f64, ra2: f64, rb2: f64, uc: f64) -> f64 {
    let (ra, rb) = (ra2.sqrt(), rb2.sqrt());
    let ur = (ra2 - rb2 + d * d) / (2.0 * d);
    let mut best = f64::NEG_INFINITY;
    let mut on_a = |u: f64| best = best.max((u - uc).powi(2) + (ra2 - u * u).max(0.0));
    if ur <= ra {
        on_a(ra);
        on_a(ur.max(-ra));
    }
    let mut best_b = f64::NEG_INFINITY;
    let mut on_b = |u: f64| best_b = best_b.max((u - uc).powi(2) + (rb2 - (u - d).powi(2)).max(0.0));
    if ur >= d - rb {
        on_b(d - rb);
        on_b(ur.min(d + rb));
    }
    best.max(best_b)
}

/// Minimax radius² of the lens by golden-section search over the axis.
pub fn golden_meb_r_sq(a: &[f64], ra2: f64, b: &[f64], rb2: f64) -> f64 {
    let d = dist_sq(a, b).sqrt();
    if d == 0.0 {
        return ra2.min(rb2);
    }
    let (ra, rb) = (ra2.sqrt(), rb2.sqrt());
    let (mut lo, mut hi) = ((-ra).max(d - rb), ra.min(d + rb));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |u: f64| lens_farthest_sq(d, ra2, rb2, u);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..300 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(0.5 * (lo + hi)))
}

/// Boundary samples of `∩ B(cᵢ, rᵢ²)` in the plane: `k` angles per circle
/// plus all pairwise circle intersections, filtered to the intersection.
pub fn intersection_boundary_2d(balls: &[([f64; 2], f64)], k: usize) -> Vec<[f64; 2]> {
    let inside = |p: &[f64; 2]| {
        balls
            .iter()
            .all(|(c, r2)| dist_sq(p, c) <= r2 * (1.0 + 1e-12) + 1e-15)
    };
    let mut pts = Vec::new();
    for (c, r2) in balls {
        let r = r2.sqrt();
        for i in 0..k {
            let th = std::f64::consts::TAU * i as f64 / k as f64;
            let p = [c[0] + r * th.cos(), c[1] + r * th.sin()];
            if inside(&p) {
                pts.push(p);
            }
        }
    }
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            let ((a, ra2), (b, rb2)) = (balls[i], balls[j]);
            let d2 = dist_sq(&a, &b);
            let d = d2.sqrt();
            if d == 0.0 {
                continue;
            }
            let u = (ra2 - rb2 + d2) / (2.0 * d);
            let h2 = ra2 - u * u;
            if h2 < 0.0 {
                continue;
            }
            let h = h2.sqrt();
            let e = [(b[0] - a[0]) / d, (b[1] - a[1]) / d];
            for s in [-1.0, 1.0] {
                let p = [a[0] + u * e[0] - s * h * e[1], a[1] + u * e[1] + s * h * e[0]];
                if inside(&p) {
                    pts.push(p);
                }
            }
        }
    }
    pts
}

fn circle2(a: [f64; 2], b: [f64; 2]) -> ([f64; 2], f64) {
    let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    (c, dist_sq(&c, &a))
}

fn circle3(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<([f64; 2], f64)> {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let det = 2.0 * (bx * cy - by * cx);
    if det.abs() < 1e-300 {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / det;
    let uy = (bx * c2 - cx * b2) / det;
    let o = [a[0] + ux, a[1] + uy];
    Some((o, ux * ux + uy * uy))
}

/// Smallest enclosing circle of a point cloud (Welzl, move-to-front form).
pub fn min_enclosing_circle(points: &[[f64; 2]]) -> ([f64; 2], f64) {
    let mut pts = points.to_vec();
    // deterministic shuffle
    let mut s: u64 = 0x9E37_79B9_7F4A_7C15;
    for i in (1..pts.len()).rev() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        pts.swap(i, (s % (i as u64 + 1)) as usize);
    }
    let within = |c: &([f64; 2], f64), p: &[f64; 2]| dist_sq(&c.0, p) <= c.1 * (1.0 + 1e-12);
    let mut circ = (pts[0], 0.0);
    for i in 1..pts.len() {
        if within(&circ, &pts[i]) {
            continue;
        }
        circ = (pts[i], 0.0);
        for j in 0..i {
            if within(&circ, &pts[j]) {
                continue;
            }
            circ = circle2(pts[i], pts[j]);
            for k in 0..j {
                if !within(&circ, &pts[k]) {
                    circ = circle3(pts[i], pts[j], pts[k]).unwrap_or(circ);
                }
            }
        }
    }
    circ
}

/// Chebyshev radius² of a planar intersection from `k` boundary samples
/// per circle.
pub fn chebyshev_r_sq_2d(balls: &[([f64; 2], f64)], k: usize) -> f64 {
    let pts = intersection_boundary_2d(balls, k);
    assert!(!pts.is_empty(), "empty intersection");
    min_enclosing_circle(&pts).1
}

/// Minimizer of a scalar function on a uniform grid over `[lo, hi]`.
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (lo, f(lo));
    for i in 1..=n {
        let x = lo + i as f64 * step;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best.0
}
