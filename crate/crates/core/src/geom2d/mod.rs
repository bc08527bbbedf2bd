//! Exact planar convex geometry.
//!
//! Bodies are points, segments and counter-clockwise strictly convex
//! polygons, all exposed through one support-function interface so that a
//! single GJK/EPA path produces signed distances with witness points.

mod fov;
mod gjk;
mod visibility;

use alloc::format;
use alloc::vec::Vec;

use nalgebra::Vector2;
#[allow(unused_imports)] // shadowed by inherent f64 methods whenever std is linked
use num_traits::Float;

use crate::angle::wrap_angle;
use crate::error::{Error, Result};

pub use fov::{convexify_fov, FovParams};
pub use visibility::{exact_visibility, point_in_polygon, segment_crosses_interior};

/// Planar vector in meters.
pub type Vec2 = Vector2<f64>;

/// Counter-clockwise perpendicular.
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Position plus heading, heading kept in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose2 {
    pub position: Vec2,
    pub heading: f64,
}

impl Pose2 {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Self {
            position,
            heading: wrap_angle(heading),
        }
    }

    /// Maps a point from the body frame into the world frame.
    #[inline]
    pub fn transform_point(&self, local: Vec2) -> Vec2 {
        let (s, c) = self.heading.sin_cos();
        self.position + Vec2::new(c * local.x - s * local.y, s * local.x + c * local.y)
    }

    /// Maps a world point into the body frame.
    #[inline]
    pub fn inverse_transform_point(&self, world: Vec2) -> Vec2 {
        let (s, c) = self.heading.sin_cos();
        let d = world - self.position;
        Vec2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }
}

/// A convex body in the plane.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexBody {
    Point(Vec2),
    Segment([Vec2; 2]),
    /// Counter-clockwise, strictly convex, at least three vertices.
    Polygon(Vec<Vec2>),
}

impl ConvexBody {
    pub fn point(p: Vec2) -> Self {
        ConvexBody::Point(p)
    }

    pub fn segment(a: Vec2, b: Vec2) -> Result<Self> {
        let body = ConvexBody::Segment([a, b]);
        body.validate()?;
        Ok(body)
    }

    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self> {
        let body = ConvexBody::Polygon(vertices);
        body.validate()?;
        Ok(body)
    }

    /// Axis-aligned rectangle given its center and full side lengths.
    pub fn rectangle(center: Vec2, width: f64, height: f64) -> Result<Self> {
        let (hw, hh) = (0.5 * width, 0.5 * height);
        Self::polygon(alloc::vec![
            center + Vec2::new(-hw, -hh),
            center + Vec2::new(hw, -hh),
            center + Vec2::new(hw, hh),
            center + Vec2::new(-hw, hh),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        match self {
            ConvexBody::Point(p) => core::slice::from_ref(p),
            ConvexBody::Segment(s) => s,
            ConvexBody::Polygon(v) => v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .vertices()
            .iter()
            .all(|v| v.x.is_finite() && v.y.is_finite());
        if !finite {
            return Err(Error::InvalidGeometry("non-finite vertex".into()));
        }
        match self {
            ConvexBody::Point(_) => Ok(()),
            ConvexBody::Segment([a, b]) => {
                if a == b {
                    Err(Error::InvalidGeometry("segment endpoints coincide".into()))
                } else {
                    Ok(())
                }
            }
            ConvexBody::Polygon(v) => {
                let n = v.len();
                if n < 3 {
                    return Err(Error::InvalidGeometry(format!(
                        "polygon needs at least 3 vertices, got {n}"
                    )));
                }
                for i in 0..n {
                    let (p0, p1, p2) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
                    if p0 == p1 {
                        return Err(Error::InvalidGeometry(format!(
                            "repeated adjacent vertex at index {i}"
                        )));
                    }
                    if cross(p1 - p0, p2 - p1) <= 0.0 {
                        return Err(Error::InvalidGeometry(format!(
                            "polygon is not strictly convex counter-clockwise at vertex {}",
                            (i + 1) % n
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Farthest vertex along `dir`; ties resolve to the lowest index.
    #[inline]
    pub fn support(&self, dir: Vec2) -> Vec2 {
        let verts = self.vertices();
        let mut best = verts[0];
        let mut best_dot = best.dot(&dir);
        for v in &verts[1..] {
            let d = v.dot(&dir);
            if d > best_dot {
                best_dot = d;
                best = *v;
            }
        }
        best
    }

    pub fn centroid(&self) -> Vec2 {
        let verts = self.vertices();
        verts.iter().fold(Vec2::zeros(), |acc, v| acc + v) / verts.len() as f64
    }

    /// Applies a rigid transform taking body coordinates to world coordinates.
    pub fn transformed(&self, pose: &Pose2) -> ConvexBody {
        match self {
            ConvexBody::Point(p) => ConvexBody::Point(pose.transform_point(*p)),
            ConvexBody::Segment([a, b]) => {
                ConvexBody::Segment([pose.transform_point(*a), pose.transform_point(*b)])
            }
            ConvexBody::Polygon(v) => {
                ConvexBody::Polygon(v.iter().map(|p| pose.transform_point(*p)).collect())
            }
        }
    }

    pub fn translated(&self, offset: Vec2) -> ConvexBody {
        match self {
            ConvexBody::Point(p) => ConvexBody::Point(p + offset),
            ConvexBody::Segment([a, b]) => ConvexBody::Segment([a + offset, b + offset]),
            ConvexBody::Polygon(v) => ConvexBody::Polygon(v.iter().map(|p| p + offset).collect()),
        }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn aabb(&self) -> (Vec2, Vec2) {
        let verts = self.vertices();
        let mut lo = verts[0];
        let mut hi = verts[0];
        for v in &verts[1..] {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }
}

/// Signed distance between two bodies with witness points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdfResult {
    /// Positive when separated, negative penetration depth when overlapping.
    pub signed_distance: f64,
    /// Closest (or deepest) point on the first body.
    pub p1: Vec2,
    /// Closest point on the second body.
    pub p2: Vec2,
    /// Unit contact normal `sgn(d) (p1 - p2) / |p1 - p2|`.
    pub normal: Vec2,
}

/// Signed distance between `a` and `b`.
///
/// Separated bodies go through GJK, overlapping ones through EPA. Bodies
/// closer than `1e-9` m report zero with coincident witnesses.
pub fn signed_distance(a: &ConvexBody, b: &ConvexBody) -> Result<SdfResult> {
    a.validate()?;
    b.validate()?;
    Ok(gjk::signed_distance_unchecked(a, b))
}

/// Distance from a point to a convex body, negative inside.
pub fn point_signed_distance(p: Vec2, body: &ConvexBody) -> Result<f64> {
    Ok(signed_distance(&ConvexBody::Point(p), body)?.signed_distance)
}
