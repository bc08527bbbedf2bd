//! Belief-space MPC: horizon rollout, objectives and the SCP solver.
//!
//! Decision variables are the robot controls only; beliefs are obtained by
//! forward substitution through the prediction models.

mod rollout;
mod scp;

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::estimator::NoiseCovs;
use crate::geom2d::{convexify_fov, signed_distance, ConvexBody, FovParams, Pose2, Vec2};
use crate::models::{Limits, RobotInput, SensorModel, TargetModel};

pub use rollout::{rollout, rollout_with_params, step_gammas, RolloutResult, StepGammas};
pub use scp::{scp_solve, Diagnostics, SolveStatus, TrustStep, FD_STEP};

/// Planning objective.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Objective {
    /// Sum of target belief entropies over the horizon.
    #[default]
    CumulativeEntropy,
    /// Negated sum of detection probabilities.
    NegCumulativeBpod,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerConfig {
    pub horizon: usize,
    pub dt: f64,
    pub limits: Limits,
    /// Collision risk bound per step and obstacle.
    pub delta_s: f64,
    pub objective: Objective,
    pub relax_tf: f64,
    pub relax_lo: f64,
    pub valid_obstacle_radius: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            horizon: 4,
            dt: 0.5,
            limits: Limits::default(),
            delta_s: 0.05,
            objective: Objective::CumulativeEntropy,
            relax_tf: 0.3,
            relax_lo: 0.1,
            valid_obstacle_radius: 8.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        self.limits.validate()?;
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        if !(self.delta_s > 0.0 && self.delta_s < 1.0) {
            return Err(Error::InvalidParameter("delta_s must lie in (0, 1)".into()));
        }
        if !(self.valid_obstacle_radius > 0.0) {
            return Err(Error::InvalidParameter("valid_obstacle_radius must be positive".into()));
        }
        if !(self.relax_tf.is_finite() && self.relax_lo.is_finite()) {
            return Err(Error::InvalidParameter("relaxations must be finite".into()));
        }
        Ok(())
    }
}

/// Parameters of the sequential convex programming loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScpParams {
    pub eta0: f64,
    pub d0: f64,
    pub beta: f64,
    pub tau_c: f64,
    pub tau_p: f64,
    pub tau_f: f64,
    pub trust_expand: f64,
    pub trust_shrink: f64,
    pub ratio_accept: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for ScpParams {
    fn default() -> Self {
        Self {
            eta0: 10.0,
            d0: 0.5,
            beta: 10.0,
            tau_c: 1e-3,
            tau_p: 1e-4,
            tau_f: 1e-4,
            trust_expand: 1.5,
            trust_shrink: 0.5,
            ratio_accept: 0.1,
            max_outer: 5,
            max_inner: 30,
        }
    }
}

impl ScpParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 1.0
            && self.eta0 > 0.0
            && self.d0 > 0.0
            && self.tau_c > 0.0
            && self.tau_p > 0.0
            && self.tau_f > 0.0
            && self.trust_shrink > 0.0
            && self.trust_shrink < 1.0
            && self.trust_expand > 1.0
            && self.max_outer >= 1
            && self.max_inner >= 1;
        if !ok {
            return Err(Error::InvalidParameter(
                "scp parameters need beta > 1, positive tolerances and 0 < shrink < 1 < expand"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Robot controls over the horizon, `[omega_0, accel_0, omega_1, ...]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionVector(pub Vec<f64>);

impl DecisionVector {
    pub fn zeros(horizon: usize) -> Self {
        Self(alloc::vec![0.0; 2 * horizon])
    }

    pub fn horizon(&self) -> usize {
        self.0.len() / 2
    }

    pub fn input(&self, i: usize) -> RobotInput {
        RobotInput::new(self.0[2 * i], self.0[2 * i + 1])
    }

    /// Shift left by one step and repeat the last control.
    pub fn shifted(&self) -> Self {
        let n = self.0.len();
        let mut v = self.0.clone();
        if n >= 2 {
            v.copy_within(2.., 0);
            v[n - 2] = self.0[n - 2];
            v[n - 1] = self.0[n - 1];
        }
        Self(v)
    }

    /// Lower and upper control bounds of coordinate `j`.
    pub fn bounds(limits: &Limits, j: usize) -> [f64; 2] {
        if j.is_multiple_of(2) {
            limits.omega
        } else {
            limits.accel
        }
    }

    pub fn project(&mut self, limits: &Limits) {
        for (j, x) in self.0.iter_mut().enumerate() {
            let [lo, hi] = Self::bounds(limits, j);
            *x = x.clamp(lo, hi);
        }
    }

    /// Clamps accelerations in time order so the mean speeds starting from
    /// `v0` stay in `[0, speed_max]`. Speed is linear in the accelerations,
    /// so each step only depends on the ones before it.
    pub fn clamp_speeds(&mut self, limits: &Limits, v0: f64, dt: f64) {
        let [a_min, a_max] = limits.accel;
        let mut v = v0;
        for a in self.0.iter_mut().skip(1).step_by(2) {
            let lo = a_min.max(-v / dt);
            let hi = a_max.min((limits.speed_max - v) / dt).max(lo);
            *a = a.clamp(lo, hi);
            v += *a * dt;
        }
    }

    pub fn within(&self, limits: &Limits) -> bool {
        self.0.iter().enumerate().all(|(j, x)| {
            let [lo, hi] = Self::bounds(limits, j);
            (lo..=hi).contains(x)
        })
    }
}

/// Everything the planner needs besides the beliefs and controls.
#[derive(Clone, Debug)]
pub struct PlanningContext<'a> {
    pub obstacles: &'a [ConvexBody],
    pub fov: FovParams,
    pub sensor: &'a SensorModel,
    pub noise: &'a NoiseCovs,
    pub target_model: TargetModel,
    /// Target control assumed at each horizon step.
    pub target_controls: Vec<DVector<f64>>,
    fov_local: ConvexBody,
    aabbs: Vec<(Vec2, Vec2)>,
}

impl<'a> PlanningContext<'a> {
    pub fn new(
        obstacles: &'a [ConvexBody],
        fov: FovParams,
        sensor: &'a SensorModel,
        noise: &'a NoiseCovs,
        target_model: TargetModel,
        target_controls: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let fov_local = convexify_fov(&Pose2::new(Vec2::zeros(), 0.0), &fov)?;
        for o in obstacles {
            o.validate()?;
        }
        Ok(Self {
            obstacles,
            fov,
            sensor,
            noise,
            target_model,
            target_controls,
            fov_local,
            aabbs: obstacles.iter().map(ConvexBody::aabb).collect(),
        })
    }

    /// Convexified field of view in the robot frame.
    pub fn fov_local(&self) -> &ConvexBody {
        &self.fov_local
    }

    /// Obstacles whose bounding box lies within `radius` of the box spanned by `a` and `b`.
    pub(crate) fn near_box(&self, a: Vec2, b: Vec2, radius: f64) -> impl Iterator<Item = usize> + '_ {
        let lo = a.inf(&b);
        let hi = a.sup(&b);
        self.aabbs.iter().enumerate().filter_map(move |(j, (olo, ohi))| {
            let gap = (olo - hi).sup(&(lo - ohi)).sup(&Vec2::zeros());
            (gap.norm() <= radius).then_some(j)
        })
    }
}

/// Indices of obstacles whose signed distance to the line of sight
/// `robot -> target` is at most `radius`.
pub fn valid_obstacles(obstacles: &[ConvexBody], robot: Vec2, target: Vec2, radius: f64) -> Result<Vec<usize>> {
    let los = if robot == target {
        ConvexBody::Point(robot)
    } else {
        ConvexBody::Segment([target, robot])
    };
    let mut out = Vec::new();
    for (j, o) in obstacles.iter().enumerate() {
        if signed_distance(&los, o)?.signed_distance <= radius {
            out.push(j);
        }
    }
    Ok(out)
}

/// Objective value of a rollout.
pub fn objective(r: &RolloutResult, kind: Objective) -> f64 {
    match kind {
        Objective::CumulativeEntropy => r.entropies.iter().sum(),
        Objective::NegCumulativeBpod => -r.gammas.iter().map(|g| g.gamma).sum::<f64>(),
    }
}

/// Summed collision risks above `delta_s`. Speed limits are enforced
/// exactly by [`DecisionVector::clamp_speeds`].
pub fn violations(r: &RolloutResult, cfg: &PlannerConfig) -> f64 {
    r.gammas
        .iter()
        .flat_map(|g| g.ro.iter())
        .map(|&(_, p)| (p - cfg.delta_s).max(0.0))
        .sum()
}

/// `l1` penalty objective `J + eta * violations`; returns `(J_m, violations)`.
pub fn penalty_objective(r: &RolloutResult, eta: f64, cfg: &PlannerConfig) -> (f64, f64) {
    let v = violations(r, cfg);
    (objective(r, cfg.objective) + eta * v, v)
}
