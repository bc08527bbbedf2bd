use super::{cross, ConvexBody, FovParams, Pose2, Vec2};

/// Closed point-in-polygon test for a counter-clockwise convex polygon.
/// Points and segments have no interior and never contain anything.
pub fn point_in_polygon(p: Vec2, body: &ConvexBody) -> bool {
    let ConvexBody::Polygon(v) = body else {
        return false;
    };
    let n = v.len();
    (0..n).all(|i| cross(v[(i + 1) % n] - v[i], p - v[i]) >= 0.0)
}

/// Whether the segment `p -> q` passes through the open interior of a convex
/// polygon. Touching a vertex or sliding along an edge does not count.
pub fn segment_crosses_interior(p: Vec2, q: Vec2, body: &ConvexBody) -> bool {
    let ConvexBody::Polygon(v) = body else {
        return false;
    };
    let d = q - p;
    let (mut t_lo, mut t_hi) = (0.0f64, 1.0f64);
    let n = v.len();
    for i in 0..n {
        let e = v[(i + 1) % n] - v[i];
        let outward = Vec2::new(e.y, -e.x);
        let num = outward.dot(&(p - v[i]));
        let den = outward.dot(&d);
        if den == 0.0 {
            if num >= 0.0 {
                return false;
            }
        } else {
            let t = -num / den;
            if den > 0.0 {
                t_hi = t_hi.min(t);
            } else {
                t_lo = t_lo.max(t);
            }
            if t_lo >= t_hi {
                return false;
            }
        }
    }
    t_lo < t_hi
}

/// Exact detection test: the target lies in the true annular sector and the
/// line of sight crosses no obstacle interior.
pub fn exact_visibility(
    robot: &Pose2,
    target: Vec2,
    obstacles: &[ConvexBody],
    fov: &FovParams,
) -> bool {
    fov.contains(robot, target)
        && !obstacles
            .iter()
            .any(|o| segment_crosses_interior(robot.position, target, o))
}
