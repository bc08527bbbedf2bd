//! Probabilities of stochastic signed-distance satisfaction.
//!
//! Two bodies are posed by the stacked robot/target state `x`. The witness
//! points found at the mean are frozen in each body's local frame, the signed
//! distance is approximated by projecting their difference on the frozen
//! contact normal, linearized at the mean, and the probability of a linear
//! inequality of a Gaussian is evaluated in closed form.
//!
//! Three instances drive the planner: the target inside the (convexified)
//! field of view, the line of sight clear of an obstacle, and the robot inside
//! an obstacle. Their product over the field of view and all line-of-sight
//! terms is the detection probability of a step.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Vector4};
#[allow(unused_imports)] // shadowed by inherent f64 methods whenever std is linked
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::belief::{RobotBelief, TargetBelief};
use crate::error::{Error, Result};
use crate::geom2d::{
    convexify_fov, exact_visibility, signed_distance, ConvexBody, FovParams, Pose2, SdfResult,
    Vec2,
};
use crate::models::{target_position, RobotState};

/// Floor on `sqrt(2 a^T S a)` so deterministic inputs collapse to a step.
pub const STD_FLOOR: f64 = 1e-9;

/// Samples per independent random stream of the Monte-Carlo oracle.
pub const MC_CHUNK: usize = 1024;

/// `Pr(z <= threshold)` for `z ~ N(mean, var)`.
#[inline]
pub fn normal_prob_le(mean: f64, var: f64, threshold: f64) -> f64 {
    let den = (2.0 * var.max(0.0)).sqrt().max(STD_FLOOR);
    (0.5 * libm::erfc((mean - threshold) / den)).clamp(0.0, 1.0)
}

/// `Pr(a^T x <= b)` for `x ~ N(mean, cov)`.
pub fn linear_gaussian_prob(a: &DVector<f64>, b: f64, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    normal_prob_le(a.dot(mean), (a.transpose() * cov * a)[(0, 0)], b)
}

/// Joint Gaussian over `[z_r; z_t]` with independent robot and target blocks.
#[derive(Clone, Copy, Debug)]
pub struct StackedGaussian<'a> {
    pub robot: &'a RobotBelief,
    pub target: &'a TargetBelief,
}

impl<'a> StackedGaussian<'a> {
    pub fn new(robot: &'a RobotBelief, target: &'a TargetBelief) -> Self {
        Self { robot, target }
    }

    pub fn dim(&self) -> usize {
        4 + self.target.dim()
    }

    pub fn mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim());
        m.rows_mut(0, 4).copy_from(&self.robot.mean.to_vector());
        m.rows_mut(4, self.target.dim()).copy_from(&self.target.mean);
        m
    }

    /// Block-diagonal covariance; robot/target cross terms are zero.
    pub fn cov(&self) -> DMatrix<f64> {
        let n = self.dim();
        let dt = self.target.dim();
        let mut c = DMatrix::zeros(n, n);
        c.view_mut((0, 0), (4, 4)).copy_from(&self.robot.cov);
        c.view_mut((4, 4), (dt, dt)).copy_from(&self.target.cov);
        c
    }

    fn robot_pose(&self) -> Pose2 {
        self.robot.mean.pose()
    }

    fn target_pos(&self) -> Vec2 {
        target_position(&self.target.mean)
    }
}

/// Which pair of bodies a parameter set linearizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdfQuery {
    /// Target position point against the field of view attached to the robot pose.
    TargetFov,
    /// Line of sight segment against a static obstacle.
    LosObstacle,
    /// Robot position point against a static obstacle.
    RobotObstacle,
}

/// Frozen witness on the first body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FirstWitness {
    /// Local coordinates in the first body's frame.
    Local(Vec2),
    /// Separative ratio along the line of sight, measured from the target end.
    Ratio(f64),
}

/// Frozen contact data linearizing one stochastic signed distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdfParams {
    pub query: SdfQuery,
    pub first: FirstWitness,
    /// Witness on the second body, in its local frame.
    pub p2_local: Vec2,
    /// Contact normal (world frame) at the linearization point.
    pub normal: Vec2,
}

/// Frozen parameters of one horizon step. Obstacle entries carry the index
/// of the obstacle they were computed for.
#[derive(Clone, Debug, PartialEq)]
pub struct StepParams {
    pub tf: SdfParams,
    pub lo: Vec<(usize, SdfParams)>,
    pub ro: Vec<(usize, SdfParams)>,
}

/// Parameters for every step of a planning horizon.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdfParamSet {
    pub steps: Vec<StepParams>,
}

/// Direction of the inequality on the linearized signed distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    /// `Pr(sd <= threshold)`.
    Leq,
    /// `Pr(sd >= threshold)`.
    Geq,
}

/// Computes parameters for `query` with the bodies posed at the mean of `gaussian`.
///
/// `body` is the convexified field of view in the robot frame for
/// [`SdfQuery::TargetFov`] and a world-frame obstacle otherwise.
pub fn compute_sdf_params(
    query: SdfQuery,
    gaussian: &StackedGaussian<'_>,
    body: &ConvexBody,
) -> Result<(SdfParams, SdfResult)> {
    let xr = gaussian.robot.mean.position;
    let xt = gaussian.target_pos();
    match query {
        SdfQuery::TargetFov => {
            let pose = gaussian.robot_pose();
            let fov_world = body.transformed(&pose);
            let res = signed_distance(&ConvexBody::Point(xt), &fov_world)?;
            Ok((
                SdfParams {
                    query,
                    first: FirstWitness::Local(res.p1 - xt),
                    p2_local: pose.inverse_transform_point(res.p2),
                    normal: res.normal,
                },
                res,
            ))
        }
        SdfQuery::LosObstacle => {
            let len = (xr - xt).norm();
            if len == 0.0 {
                return Err(Error::ZeroLengthLos);
            }
            let res = signed_distance(&ConvexBody::Segment([xt, xr]), body)?;
            let ratio = ((res.p1 - xt).norm() / len).clamp(0.0, 1.0);
            Ok((
                SdfParams {
                    query,
                    first: FirstWitness::Ratio(ratio),
                    p2_local: res.p2,
                    normal: res.normal,
                },
                res,
            ))
        }
        SdfQuery::RobotObstacle => {
            let res = signed_distance(&ConvexBody::Point(xr), body)?;
            Ok((
                SdfParams {
                    query,
                    first: FirstWitness::Local(res.p1 - xr),
                    p2_local: res.p2,
                    normal: res.normal,
                },
                res,
            ))
        }
    }
}

/// Linearized signed distance: value at the mean and gradient split into
/// the robot state block and the target position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearizedSdf {
    pub value: f64,
    pub grad_robot: Vector4<f64>,
    pub grad_target_pos: Vec2,
}

impl LinearizedSdf {
    pub fn variance(&self, gaussian: &StackedGaussian<'_>) -> f64 {
        let vr = (self.grad_robot.transpose() * gaussian.robot.cov * self.grad_robot)[(0, 0)];
        let p = &gaussian.target.cov;
        let g = self.grad_target_pos;
        let vt = g.x * g.x * p[(0, 0)] + 2.0 * g.x * g.y * p[(0, 1)] + g.y * g.y * p[(1, 1)];
        vr + vt
    }

    /// Gradient as a dense vector over the stacked state.
    pub fn gradient(&self, target_dim: usize) -> DVector<f64> {
        let mut g = DVector::zeros(4 + target_dim);
        g.rows_mut(0, 4).copy_from(&self.grad_robot);
        g[4] = self.grad_target_pos.x;
        g[5] = self.grad_target_pos.y;
        g
    }
}

/// Reconstructs the frozen witnesses at the mean of `gaussian`, projects on
/// the normal and differentiates analytically.
pub fn linearize_sdf(params: &SdfParams, gaussian: &StackedGaussian<'_>) -> LinearizedSdf {
    let xr = gaussian.robot.mean.position;
    let xt = gaussian.target_pos();
    let n = params.normal;
    match params.query {
        SdfQuery::TargetFov => {
            // p1 = x_t + l1, p2 = x_r + R(theta) l2
            let l1 = match params.first {
                FirstWitness::Local(l) => l,
                FirstWitness::Ratio(_) => Vec2::zeros(),
            };
            let theta = gaussian.robot.mean.heading;
            let (s, c) = theta.sin_cos();
            let l2 = params.p2_local;
            let rot_l2 = Vec2::new(c * l2.x - s * l2.y, s * l2.x + c * l2.y);
            let drot_l2 = Vec2::new(-s * l2.x - c * l2.y, c * l2.x - s * l2.y);
            let p1 = xt + l1;
            let p2 = xr + rot_l2;
            LinearizedSdf {
                value: n.dot(&(p1 - p2)),
                grad_robot: Vector4::new(-n.x, -n.y, -n.dot(&drot_l2), 0.0),
                grad_target_pos: n,
            }
        }
        SdfQuery::LosObstacle => {
            let lambda = match params.first {
                FirstWitness::Ratio(l) => l,
                FirstWitness::Local(_) => 0.0,
            };
            let p1 = xr * lambda + xt * (1.0 - lambda);
            LinearizedSdf {
                value: n.dot(&(p1 - params.p2_local)),
                grad_robot: Vector4::new(lambda * n.x, lambda * n.y, 0.0, 0.0),
                grad_target_pos: n * (1.0 - lambda),
            }
        }
        SdfQuery::RobotObstacle => {
            let l1 = match params.first {
                FirstWitness::Local(l) => l,
                FirstWitness::Ratio(_) => Vec2::zeros(),
            };
            LinearizedSdf {
                value: n.dot(&(xr + l1 - params.p2_local)),
                grad_robot: Vector4::new(n.x, n.y, 0.0, 0.0),
                grad_target_pos: Vec2::zeros(),
            }
        }
    }
}

/// Probability that the linearized signed distance satisfies `sense` against `threshold`.
pub fn possdf_prob(
    params: &SdfParams,
    gaussian: &StackedGaussian<'_>,
    sense: Sense,
    threshold: f64,
) -> f64 {
    let lin = linearize_sdf(params, gaussian);
    let var = lin.variance(gaussian);
    match sense {
        Sense::Leq => normal_prob_le(lin.value, var, threshold),
        // Pr(sd >= t) = Pr(-sd <= -t)
        Sense::Geq => normal_prob_le(-lin.value, var, -threshold),
    }
}

/// Probability that the target is inside the field of view, with the
/// boundary relaxed outward by `relax`.
pub fn gamma_tf(
    rb: &RobotBelief,
    tb: &TargetBelief,
    fov: &FovParams,
    relax: f64,
) -> Result<f64> {
    let g = StackedGaussian::new(rb, tb);
    let local = convexify_fov(&Pose2::new(Vec2::zeros(), 0.0), fov)?;
    let (params, _) = compute_sdf_params(SdfQuery::TargetFov, &g, &local)?;
    Ok(possdf_prob(&params, &g, Sense::Leq, relax))
}

/// Probability that the line of sight clears `obstacle`, tolerating a
/// penetration of `relax`.
pub fn gamma_lo(
    rb: &RobotBelief,
    tb: &TargetBelief,
    obstacle: &ConvexBody,
    relax: f64,
) -> Result<f64> {
    let g = StackedGaussian::new(rb, tb);
    let (params, _) = compute_sdf_params(SdfQuery::LosObstacle, &g, obstacle)?;
    Ok(possdf_prob(&params, &g, Sense::Geq, -relax))
}

/// Probability that the robot is inside `obstacle`. The obstacle is replaced
/// by the supporting half-plane at the witness point, which contains it, so
/// the value never underestimates the true collision probability.
pub fn gamma_ro(rb: &RobotBelief, obstacle: &ConvexBody) -> Result<f64> {
    let target = TargetBelief {
        mean: DVector::from_column_slice(&[rb.mean.position.x, rb.mean.position.y]),
        cov: DMatrix::zeros(2, 2),
    };
    let g = StackedGaussian::new(rb, &target);
    let (params, _) = compute_sdf_params(SdfQuery::RobotObstacle, &g, obstacle)?;
    Ok(possdf_prob(&params, &g, Sense::Leq, 0.0))
}

/// Detection probability from its field-of-view and line-of-sight factors.
pub fn bpod(gamma_tf: f64, gamma_lo: &[f64]) -> f64 {
    gamma_lo.iter().fold(gamma_tf, |acc, g| acc * g).clamp(0.0, 1.0)
}

/// Sampler for `N(mean, cov)` through a symmetric square root of `cov`.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    mean: DVector<f64>,
    root: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(mean: DVector<f64>, cov: &DMatrix<f64>) -> Self {
        let eig = cov.clone().symmetric_eigen();
        let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals);
        Self { mean, root }
    }

    pub fn sample<R: rand_core::RngCore>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.mean.len(), |_, _| StandardNormal.sample(rng));
        &self.mean + &self.root * z
    }
}

/// Random stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Inputs of the Monte-Carlo detection oracle.
pub struct McBpodOracle<'a> {
    robot: GaussianSampler,
    target: GaussianSampler,
    obstacles: &'a [ConvexBody],
    fov: &'a FovParams,
}

impl<'a> McBpodOracle<'a> {
    pub fn new(
        rb: &RobotBelief,
        tb: &TargetBelief,
        obstacles: &'a [ConvexBody],
        fov: &'a FovParams,
    ) -> Self {
        let cov_r = DMatrix::from_fn(4, 4, |i, j| rb.cov[(i, j)]);
        Self {
            robot: GaussianSampler::new(DVector::from_column_slice(rb.mean.to_vector().as_slice()), &cov_r),
            target: GaussianSampler::new(tb.mean.clone(), &tb.cov),
            obstacles,
            fov,
        }
    }

    /// Number of chunks covering `n_samples`.
    pub fn chunks(n_samples: usize) -> usize {
        n_samples.div_ceil(MC_CHUNK)
    }

    /// Detections among the samples of chunk `chunk`, each chunk drawing from
    /// its own stream so chunks can be evaluated in any order.
    pub fn chunk_hits(&self, seed: u64, chunk: usize, n_samples: usize) -> u64 {
        let start = chunk * MC_CHUNK;
        let end = (start + MC_CHUNK).min(n_samples);
        let mut rng = stream_rng(seed, chunk as u64);
        let mut hits = 0;
        for _ in start..end {
            let zr = self.robot.sample(&mut rng);
            let zt = self.target.sample(&mut rng);
            let robot = RobotState::new(zr[0], zr[1], zr[2], zr[3]);
            if exact_visibility(&robot.pose(), Vec2::new(zt[0], zt[1]), self.obstacles, self.fov) {
                hits += 1;
            }
        }
        hits
    }
}

/// Estimate of the detection probability and its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

impl McEstimate {
    pub fn from_hits(hits: u64, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            estimate: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }
}

/// Monte-Carlo detection probability using the exact sector and exact
/// occlusion test. Deterministic for a fixed seed.
pub fn mc_bpod_oracle(
    rb: &RobotBelief,
    tb: &TargetBelief,
    obstacles: &[ConvexBody],
    fov: &FovParams,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter("the oracle needs at least 100 samples".into()));
    }
    let oracle = McBpodOracle::new(rb, tb, obstacles, fov);
    let hits = (0..McBpodOracle::chunks(n_samples))
        .map(|c| oracle.chunk_hits(seed, c, n_samples))
        .sum();
    Ok(McEstimate::from_hits(hits, n_samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use nalgebra::Matrix4;

    fn dv(s: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(s)
    }

    fn tight_robot(x: f64, y: f64, th: f64) -> RobotBelief {
        RobotBelief {
            mean: RobotState::new(x, y, th, 0.0),
            cov: Matrix4::identity() * 1e-6,
        }
    }

    fn tight_target(x: f64, y: f64) -> TargetBelief {
        TargetBelief {
            mean: dv(&[x, y]),
            cov: DMatrix::identity(2, 2) * 1e-6,
        }
    }

    #[test]
    fn linear_gaussian_reference_values() {
        let i2 = DMatrix::identity(2, 2);
        let a = dv(&[1.0, 0.0]);
        assert!((linear_gaussian_prob(&a, 0.0, &dv(&[0.0, 0.0]), &i2) - 0.5).abs() < 1e-15);
        let p = linear_gaussian_prob(&a, 0.0, &dv(&[-1.0, 0.0]), &i2);
        assert!((p - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert_eq!(linear_gaussian_prob(&a, 0.0, &dv(&[-1e-3, 0.0]), &DMatrix::zeros(2, 2)), 1.0);
        // invariant under positive scaling of (a, b)
        let q = linear_gaussian_prob(&(a.clone() * 3.0), 0.6, &dv(&[0.1, 0.0]), &i2);
        let r = linear_gaussian_prob(&a, 0.2, &dv(&[0.1, 0.0]), &i2);
        assert!((q - r).abs() < 1e-15);
    }

    #[test]
    fn separative_ratio_examples() {
        let rb = tight_robot(0.0, 0.0, 0.0);
        let tb = tight_target(10.0, 0.0);
        let g = StackedGaussian::new(&rb, &tb);
        let obstacle = ConvexBody::rectangle(Vec2::new(4.0, -1.5), 2.0, 1.0).unwrap();
        let (params, res) = compute_sdf_params(SdfQuery::LosObstacle, &g, &obstacle).unwrap();
        assert!((res.signed_distance - 1.0).abs() < 1e-12);
        assert!((res.p1 - Vec2::new(4.0, 0.0)).norm() < 1e-12);
        assert_eq!(params.first, FirstWitness::Ratio(0.6));

        // nearest point at the target end
        let near_target = ConvexBody::rectangle(Vec2::new(12.0, 0.0), 1.0, 1.0).unwrap();
        let (params, _) = compute_sdf_params(SdfQuery::LosObstacle, &g, &near_target).unwrap();
        assert_eq!(params.first, FirstWitness::Ratio(0.0));

        let same = tight_target(0.0, 0.0);
        let g = StackedGaussian::new(&rb, &same);
        assert_eq!(
            compute_sdf_params(SdfQuery::LosObstacle, &g, &obstacle),
            Err(Error::ZeroLengthLos)
        );
    }

    #[test]
    fn robot_obstacle_params() {
        let rb = tight_robot(0.0, 0.0, 0.0);
        let tb = tight_target(5.0, 5.0);
        let g = StackedGaussian::new(&rb, &tb);
        let obstacle = ConvexBody::rectangle(Vec2::new(3.0, 0.0), 2.0, 2.0).unwrap();
        let (params, _) = compute_sdf_params(SdfQuery::RobotObstacle, &g, &obstacle).unwrap();
        assert!((params.normal - Vec2::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((params.p2_local - Vec2::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn field_of_view_limits() {
        let fov = FovParams::default();
        let rb = tight_robot(0.0, 0.0, 0.3);
        // centroid of the convexified polygon
        let c = convexify_fov(&rb.mean.pose(), &fov).unwrap().centroid();
        let inside = tight_target(c.x, c.y);
        assert!(gamma_tf(&rb, &inside, &fov, 0.0).unwrap() >= 0.999);
        let behind = Pose2::new(Vec2::zeros(), 0.3).transform_point(Vec2::new(-20.0, 0.0));
        let outside = tight_target(behind.x, behind.y);
        assert!(gamma_tf(&rb, &outside, &fov, 0.0).unwrap() <= 0.001);

        // on the outer chord of the inscribed arc
        let local = fov.local_polygon();
        let mid = (local[3] + local[4]) * 0.5;
        let robot = RobotBelief {
            mean: RobotState::new(0.0, 0.0, 0.0, 0.0),
            cov: Matrix4::from_diagonal(&nalgebra::Vector4::new(0.01, 0.01, 0.0, 0.0)),
        };
        let target = TargetBelief {
            mean: dv(&[mid.x, mid.y]),
            cov: DMatrix::identity(2, 2) * 0.01,
        };
        let p = gamma_tf(&robot, &target, &fov, 0.0).unwrap();
        assert!((p - 0.5).abs() <= 0.02, "{p}");
    }

    #[test]
    fn occlusion_limits() {
        let rb = tight_robot(0.0, 0.0, 0.0);
        let tb = tight_target(8.0, 0.0);
        let far = ConvexBody::rectangle(Vec2::new(4.0, 30.0), 2.0, 2.0).unwrap();
        assert!(gamma_lo(&rb, &tb, &far, 0.0).unwrap() >= 0.999);
        let blocking = ConvexBody::rectangle(Vec2::new(4.0, 0.0), 2.0, 2.0).unwrap();
        assert!(gamma_lo(&rb, &tb, &blocking, 0.0).unwrap() <= 0.001);
    }

    #[test]
    fn collision_limits() {
        let obstacle = ConvexBody::rectangle(Vec2::new(3.0, 3.0), 2.0, 2.0).unwrap();
        assert!(gamma_ro(&tight_robot(3.0, 3.0, 0.0), &obstacle).unwrap() >= 0.999);
        let away = RobotBelief {
            mean: RobotState::new(23.0, 3.0, 0.0, 0.0),
            cov: Matrix4::identity() * 0.01,
        };
        assert!(gamma_ro(&away, &obstacle).unwrap() <= 1e-6);
    }

    #[test]
    fn deterministic_separated_is_zero() {
        let rb = RobotBelief::exact(RobotState::new(0.0, 0.0, 0.0, 0.0));
        let obstacle = ConvexBody::rectangle(Vec2::new(3.0, 0.0), 2.0, 2.0).unwrap();
        assert_eq!(gamma_ro(&rb, &obstacle).unwrap(), 0.0);
    }

    #[test]
    fn bpod_product() {
        assert_eq!(bpod(1.0, &[]), 1.0);
        assert!((bpod(0.9, &[0.8]) - 0.72).abs() < 1e-15);
        assert_eq!(bpod(0.7, &[0.9, 0.0, 0.5]), 0.0);
    }

    #[test]
    fn oracle_deterministic_limits() {
        let fov = FovParams::default();
        let rb = RobotBelief::exact(RobotState::new(0.0, 0.0, 0.0, 0.0));
        let tb = TargetBelief {
            mean: dv(&[5.0, 0.0]),
            cov: DMatrix::zeros(2, 2),
        };
        let est = mc_bpod_oracle(&rb, &tb, &[], &fov, 1000, 3).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.stderr, 0.0);
        let wall = [ConvexBody::rectangle(Vec2::new(3.0, 0.0), 1.0, 4.0).unwrap()];
        let est = mc_bpod_oracle(&rb, &tb, &wall, &fov, 1000, 3).unwrap();
        assert_eq!(est.estimate, 0.0);

        let noisy = TargetBelief {
            mean: dv(&[5.0, 4.0]),
            cov: DMatrix::identity(2, 2) * 4.0,
        };
        let a = mc_bpod_oracle(&rb, &noisy, &wall, &fov, 5000, 11).unwrap();
        let b = mc_bpod_oracle(&rb, &noisy, &wall, &fov, 5000, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.estimate > 0.0 && a.estimate < 1.0);
        assert!(mc_bpod_oracle(&rb, &noisy, &wall, &fov, 10, 11).is_err());
        let _ = PI;
    }
}
