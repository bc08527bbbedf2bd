//! GJK distance and EPA penetration depth on the Minkowski difference `A - B`.

use alloc::vec::Vec;

use super::{cross, perp, ConvexBody, SdfResult, Vec2};

const GJK_TOL: f64 = 1e-9;
const GJK_MAX_ITERS: usize = 64;
const EPA_TOL: f64 = 1e-9;
const EPA_MAX_ITERS: usize = 128;
const TOUCH_TOL: f64 = 1e-9;
const FEATURE_TOL: f64 = 1e-9;

/// A vertex of the Minkowski difference with the body points that produced it.
#[derive(Clone, Copy, Debug)]
struct MinkowskiVertex {
    w: Vec2,
    a: Vec2,
    b: Vec2,
}

#[inline]
fn support(a: &ConvexBody, b: &ConvexBody, dir: Vec2) -> MinkowskiVertex {
    let pa = a.support(dir);
    let pb = b.support(-dir);
    MinkowskiVertex {
        w: pa - pb,
        a: pa,
        b: pb,
    }
}

#[derive(Clone, Copy, Debug)]
struct Simplex {
    pts: [MinkowskiVertex; 3],
    weights: [f64; 3],
    len: usize,
}

impl Simplex {
    fn single(p: MinkowskiVertex) -> Self {
        Self {
            pts: [p; 3],
            weights: [1.0, 0.0, 0.0],
            len: 1,
        }
    }

    fn push(&mut self, p: MinkowskiVertex) {
        self.pts[self.len] = p;
        self.len += 1;
    }

    fn witnesses(&self) -> (Vec2, Vec2) {
        let mut p1 = Vec2::zeros();
        let mut p2 = Vec2::zeros();
        for i in 0..self.len {
            p1 += self.pts[i].a * self.weights[i];
            p2 += self.pts[i].b * self.weights[i];
        }
        (p1, p2)
    }

    /// Replaces the simplex with its sub-simplex closest to the origin and
    /// returns that closest point. A full triangle survives only when it
    /// contains the origin.
    fn reduce(&mut self) -> Vec2 {
        match self.len {
            1 => self.pts[0].w,
            2 => {
                let (p, v) = closest_on_segment(self.pts[0], self.pts[1]);
                *self = p;
                v
            }
            _ => {
                let [p0, p1, p2] = self.pts;
                let area = cross(p1.w - p0.w, p2.w - p0.w);
                if area.abs() > f64::EPSILON * (p1.w - p0.w).norm() * (p2.w - p0.w).norm() {
                    let s0 = cross(p1.w - p0.w, -p0.w) * area.signum();
                    let s1 = cross(p2.w - p1.w, -p1.w) * area.signum();
                    let s2 = cross(p0.w - p2.w, -p2.w) * area.signum();
                    if s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0 {
                        // barycentric weights of the origin
                        self.weights = [s1 / area.abs(), s2 / area.abs(), s0 / area.abs()];
                        return Vec2::zeros();
                    }
                }
                let mut best: Option<(Simplex, Vec2)> = None;
                for (u, w) in [(p0, p1), (p1, p2), (p2, p0)] {
                    let (s, v) = closest_on_segment(u, w);
                    if best.is_none_or(|(_, bv)| v.norm_squared() < bv.norm_squared()) {
                        best = Some((s, v));
                    }
                }
                let (s, v) = best.expect("triangle has edges");
                *self = s;
                v
            }
        }
    }
}

fn closest_on_segment(p: MinkowskiVertex, q: MinkowskiVertex) -> (Simplex, Vec2) {
    let e = q.w - p.w;
    let ee = e.norm_squared();
    if ee == 0.0 {
        return (Simplex::single(p), p.w);
    }
    let t = -p.w.dot(&e) / ee;
    if t <= 0.0 {
        (Simplex::single(p), p.w)
    } else if t >= 1.0 {
        (Simplex::single(q), q.w)
    } else {
        let s = Simplex {
            pts: [p, q, q],
            weights: [1.0 - t, t, 0.0],
            len: 2,
        };
        (s, p.w + e * t)
    }
}

enum GjkOutcome {
    Separated { v: Vec2, simplex: Simplex },
    Contact { simplex: Simplex, dir: Vec2 },
}

fn gjk(a: &ConvexBody, b: &ConvexBody) -> GjkOutcome {
    let mut dir = a.centroid() - b.centroid();
    if dir.norm_squared() == 0.0 {
        dir = Vec2::new(1.0, 0.0);
    }
    let mut simplex = Simplex::single(support(a, b, dir));
    let mut v = simplex.pts[0].w;
    for _ in 0..GJK_MAX_ITERS {
        let vn = v.norm();
        if vn <= TOUCH_TOL {
            return GjkOutcome::Contact { simplex, dir };
        }
        let w = support(a, b, -v);
        if v.norm_squared() - v.dot(&w.w) <= GJK_TOL * vn {
            return GjkOutcome::Separated { v, simplex };
        }
        dir = v;
        simplex.push(w);
        v = simplex.reduce();
        if simplex.len == 3 {
            return GjkOutcome::Contact { simplex, dir };
        }
    }
    GjkOutcome::Separated { v, simplex }
}

/// Result of EPA: penetration depth, outward face normal of `A - B` and
/// barycentric witnesses on the closest face.
struct EpaResult {
    depth: f64,
    face_normal: Vec2,
    p1: Vec2,
    p2: Vec2,
}

fn epa(a: &ConvexBody, b: &ConvexBody, mut poly: Vec<MinkowskiVertex>) -> EpaResult {
    let mut best = (0usize, f64::INFINITY, Vec2::zeros());
    for _ in 0..EPA_MAX_ITERS {
        best = (0, f64::INFINITY, Vec2::zeros());
        let n = poly.len();
        for i in 0..n {
            let e = poly[(i + 1) % n].w - poly[i].w;
            let len = e.norm();
            if len == 0.0 {
                continue;
            }
            let normal = Vec2::new(e.y, -e.x) / len;
            let dist = normal.dot(&poly[i].w);
            if dist < best.1 {
                best = (i, dist, normal);
            }
        }
        let (i, dist, normal) = best;
        let s = support(a, b, normal);
        if normal.dot(&s.w) - dist <= EPA_TOL {
            break;
        }
        poly.insert(i + 1, s);
    }
    let (i, dist, normal) = best;
    let n = poly.len();
    let (p, q) = (poly[i], poly[(i + 1) % n]);
    let e = q.w - p.w;
    let t = (-p.w.dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
    EpaResult {
        depth: dist.max(0.0),
        face_normal: normal,
        p1: p.a + (q.a - p.a) * t,
        p2: p.b + (q.b - p.b) * t,
    }
}

/// Vertices of `body` that attain the support value along `dir`, as the two
/// extreme ones along the tangent direction (equal for a vertex feature).
fn support_feature(body: &ConvexBody, dir: Vec2, tangent: Vec2) -> (Vec2, Vec2) {
    let verts = body.vertices();
    let max = verts
        .iter()
        .map(|v| v.dot(&dir))
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = FEATURE_TOL * (1.0 + max.abs());
    let mut lo: Option<Vec2> = None;
    let mut hi: Option<Vec2> = None;
    for v in verts.iter().filter(|v| v.dot(&dir) >= max - tol) {
        let t = v.dot(&tangent);
        if lo.is_none_or(|l| t < l.dot(&tangent)) {
            lo = Some(*v);
        }
        if hi.is_none_or(|h| t > h.dot(&tangent)) {
            hi = Some(*v);
        }
    }
    (lo.expect("non-empty body"), hi.expect("non-empty body"))
}

fn point_on_feature(feature: (Vec2, Vec2), tangent: Vec2, t: f64) -> Vec2 {
    let (p, q) = feature;
    let (tp, tq) = (p.dot(&tangent), q.dot(&tangent));
    if tq - tp <= 0.0 {
        return p;
    }
    let s = ((t - tp) / (tq - tp)).clamp(0.0, 1.0);
    p + (q - p) * s
}

/// Witness points from the contact features: the closest features of both
/// bodies are projected on the contact tangent and the midpoint of their
/// overlap interval is used. Returns `None` when the features do not overlap.
fn feature_witnesses(a: &ConvexBody, b: &ConvexBody, normal: Vec2) -> Option<(Vec2, Vec2)> {
    let tangent = perp(normal);
    let fa = support_feature(a, -normal, tangent);
    let fb = support_feature(b, normal, tangent);
    let (a0, a1) = (fa.0.dot(&tangent), fa.1.dot(&tangent));
    let (b0, b1) = (fb.0.dot(&tangent), fb.1.dot(&tangent));
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    let scale = 1.0 + a0.abs().max(a1.abs()).max(b0.abs()).max(b1.abs());
    if lo > hi + 1e-7 * scale {
        return None;
    }
    let mid = 0.5 * (lo + hi);
    Some((
        point_on_feature(fa, tangent, mid),
        point_on_feature(fb, tangent, mid),
    ))
}

fn touching(a: &ConvexBody, b: &ConvexBody, dir: Vec2, fallback: (Vec2, Vec2)) -> SdfResult {
    let normal = dir.normalize();
    let (p1, p2) = feature_witnesses(a, b, normal).unwrap_or(fallback);
    let mid = (p1 + p2) * 0.5;
    SdfResult {
        signed_distance: 0.0,
        p1: mid,
        p2: mid,
        normal,
    }
}

pub(super) fn signed_distance_unchecked(a: &ConvexBody, b: &ConvexBody) -> SdfResult {
    match gjk(a, b) {
        GjkOutcome::Separated { v, simplex } => {
            let d = v.norm();
            let fallback = simplex.witnesses();
            if d <= TOUCH_TOL {
                return touching(a, b, v, fallback);
            }
            let normal = v / d;
            let (p1, p2) = feature_witnesses(a, b, normal).unwrap_or(fallback);
            SdfResult {
                signed_distance: d,
                p1,
                p2,
                normal,
            }
        }
        GjkOutcome::Contact { simplex, dir } => {
            let fallback = simplex.witnesses();
            let poly = match simplex.len {
                3 => {
                    let [p0, mut p1, mut p2] = simplex.pts;
                    if cross(p1.w - p0.w, p2.w - p0.w) < 0.0 {
                        core::mem::swap(&mut p1, &mut p2);
                    }
                    alloc::vec![p0, p1, p2]
                }
                2 => {
                    let (p0, p1) = (simplex.pts[0], simplex.pts[1]);
                    let n = perp(p1.w - p0.w).normalize();
                    let up = support(a, b, n);
                    let down = support(a, b, -n);
                    if n.dot(&up.w) <= TOUCH_TOL || -n.dot(&down.w) <= TOUCH_TOL {
                        return touching(a, b, dir, fallback);
                    }
                    alloc::vec![p0, down, p1, up]
                }
                // a support point coincides with the origin: boundary contact
                _ => return touching(a, b, dir, fallback),
            };
            let res = epa(a, b, poly);
            if res.depth <= TOUCH_TOL {
                return touching(a, b, -res.face_normal, (res.p1, res.p2));
            }
            let normal = -res.face_normal;
            let (p1, p2) = feature_witnesses(a, b, normal).unwrap_or((res.p1, res.p2));
            SdfResult {
                signed_distance: -res.depth,
                p1,
                p2,
                normal,
            }
        }
    }
}
