use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent f64 methods whenever std is linked
use num_traits::Float;

use super::{ConvexBody, Pose2, Vec2};
use crate::error::{Error, Result};

/// Annular-sector field of view.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FovParams {
    /// Minimum detection range.
    pub r1: f64,
    /// Maximum detection range.
    pub r2: f64,
    /// Total sensing angle.
    pub psi: f64,
    /// Number of chords used to inscribe the outer arc.
    pub arc_segments: usize,
}

impl Default for FovParams {
    fn default() -> Self {
        Self {
            r1: 2.0,
            r2: 10.0,
            psi: 2.0 * PI / 3.0,
            arc_segments: 6,
        }
    }
}

impl FovParams {
    pub fn new(r1: f64, r2: f64, psi: f64, arc_segments: usize) -> Result<Self> {
        let fov = Self {
            r1,
            r2,
            psi,
            arc_segments,
        };
        fov.validate()?;
        Ok(fov)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0 && self.r1 < self.r2) {
            return Err(Error::InvalidParameter(format!(
                "fov ranges must satisfy 0 < r1 < r2 (r1={}, r2={})",
                self.r1, self.r2
            )));
        }
        if !(self.psi > 0.0 && self.psi < PI) {
            return Err(Error::InvalidParameter(format!(
                "fov angle must lie in (0, pi), got {}",
                self.psi
            )));
        }
        if self.arc_segments < 2 {
            return Err(Error::InvalidParameter(
                "fov arc_segments must be at least 2".into(),
            ));
        }
        // the tangent chord must lie inside the inscribed outer arc
        let half = 0.5 * self.psi;
        if self.r1 >= self.r2 * half.cos() {
            return Err(Error::InvalidParameter(format!(
                "inner chord at r1={} does not fit below the outer arc (r2 cos(psi/2)={})",
                self.r1,
                self.r2 * half.cos()
            )));
        }
        Ok(())
    }

    /// The two angular boundary half-planes `a . x <= b` of the sector.
    pub fn sector_halfplanes(&self, pose: &Pose2) -> [(Vec2, f64); 2] {
        let half = 0.5 * self.psi;
        let (sl, cl) = (pose.heading + half).sin_cos();
        let (sr, cr) = (pose.heading - half).sin_cos();
        let a_left = Vec2::new(-sl, cl);
        let a_right = Vec2::new(sr, -cr);
        [
            (a_left, a_left.dot(&pose.position)),
            (a_right, a_right.dot(&pose.position)),
        ]
    }

    /// Membership in the true (non-convexified) annular sector.
    pub fn contains(&self, pose: &Pose2, p: Vec2) -> bool {
        let r = (p - pose.position).norm();
        r >= self.r1
            && r <= self.r2
            && self
                .sector_halfplanes(pose)
                .iter()
                .all(|(a, b)| a.dot(&p) <= *b)
    }

    /// Convexified field of view in the sensor frame (heading along `+x`).
    pub fn local_polygon(&self) -> Vec<Vec2> {
        let half = 0.5 * self.psi;
        let chord_y = self.r1 * half.tan();
        let mut verts = Vec::with_capacity(self.arc_segments + 3);
        verts.push(Vec2::new(self.r1, -chord_y));
        for i in 0..=self.arc_segments {
            let ang = -half + self.psi * i as f64 / self.arc_segments as f64;
            let (s, c) = ang.sin_cos();
            verts.push(Vec2::new(self.r2 * c, self.r2 * s));
        }
        verts.push(Vec2::new(self.r1, chord_y));
        verts
    }
}

/// Convex polygon approximating the field of view at `pose`: the sector cut
/// by the chord tangent to the inner arc, with the outer arc replaced by an
/// inscribed polyline.
pub fn convexify_fov(pose: &Pose2, fov: &FovParams) -> Result<ConvexBody> {
    fov.validate()?;
    let verts = fov
        .local_polygon()
        .into_iter()
        .map(|p| pose.transform_point(p))
        .collect();
    Ok(ConvexBody::Polygon(verts))
}
