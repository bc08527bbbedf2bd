//! Scenario files.
//!
//! A scenario is a JSON document. Obstacles are counter-clockwise vertex
//! arrays, covariances are row-major flat arrays, every optional block falls
//! back to the library defaults and unknown keys are rejected.

use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix4};
use serde::{Deserialize, Serialize};
use vistrack_core::estimator::NoiseCovs;
use vistrack_core::geom2d::{signed_distance, ConvexBody, FovParams, Vec2};
use vistrack_core::models::{Limits, RobotState, SensorKind, SensorModel, TargetModel};
use vistrack_core::planner::{Objective, PlannerConfig, ScpParams};

use crate::error::{SimError, SimResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub map: MapSpec,
    pub obstacles: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub fov: FovSpec,
    pub noise: NoiseSpec,
    pub sensor: SensorSpec,
    /// `[x, y, heading, speed]`.
    pub robot_init: [f64; 4],
    pub target: TargetSpec,
    #[serde(default)]
    pub belief_init: BeliefInitSpec,
    #[serde(default)]
    pub control_estimate: ControlEstimateSpec,
    #[serde(default)]
    pub planner: PlannerSpec,
    #[serde(default)]
    pub scp: ScpSpec,
    pub episode: EpisodeSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub width: f64,
    pub height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FovSpec {
    pub r1: f64,
    pub r2: f64,
    pub psi: f64,
    pub arc_segments: usize,
}

impl Default for FovSpec {
    fn default() -> Self {
        let f = FovParams::default();
        Self {
            r1: f.r1,
            r2: f.r2,
            psi: f.psi,
            arc_segments: f.arc_segments,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Robot motion noise, 4x4.
    pub robot: Vec<f64>,
    /// Target motion noise assumed by the filter and planner.
    pub target: Vec<f64>,
    /// Measurement noise.
    pub sensor: Vec<f64>,
    /// Motion noise of the simulated target; `target` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_truth: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorSpec {
    RangeBearing,
    CameraPose,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetModelSpec {
    LinearIntegrator,
    Unicycle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub model: TargetModelSpec,
    pub init: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<ScriptSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScriptSpec {
    /// One control vector per step.
    Controls(Vec<Vec<f64>>),
    /// Waypoint follower at constant speed (linear integrator only).
    Waypoints { points: Vec<[f64; 2]>, speed: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub v_max: f64,
    pub steps: usize,
    /// Fixed trajectory seed; each episode seed draws its own trajectory when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeliefInitSpec {
    /// Standard deviation of the initial mean error per position axis.
    pub mean_std: f64,
    /// Initial covariance is `cov * I`.
    pub cov: f64,
    /// Replace the mean by the inverted first measurement before the first update.
    pub seat_at_first_detection: bool,
}

/// Adjustments to the difference-quotient estimate of an unknown target control.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlEstimateSpec {
    /// Cap the speed estimate at the generator's `v_max`.
    pub cap_speed: bool,
    /// Zero the turn-rate estimate on steps without a detection.
    pub straight_when_unseen: bool,
}

impl Default for BeliefInitSpec {
    fn default() -> Self {
        Self {
            mean_std: 2.0,
            cov: 25.0,
            seat_at_first_detection: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Entropy,
    Bpod,
}

impl From<ObjectiveSpec> for Objective {
    fn from(o: ObjectiveSpec) -> Self {
        match o {
            ObjectiveSpec::Entropy => Objective::CumulativeEntropy,
            ObjectiveSpec::Bpod => Objective::NegCumulativeBpod,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSpec {
    pub horizon: usize,
    pub dt: f64,
    pub accel: [f64; 2],
    pub omega: [f64; 2],
    pub speed_max: f64,
    pub delta_s: f64,
    pub objective: ObjectiveSpec,
    pub relax_tf: f64,
    pub relax_lo: f64,
    pub valid_obstacle_radius: f64,
}

impl Default for PlannerSpec {
    fn default() -> Self {
        let c = PlannerConfig::default();
        Self {
            horizon: c.horizon,
            dt: c.dt,
            accel: c.limits.accel,
            omega: c.limits.omega,
            speed_max: c.limits.speed_max,
            delta_s: c.delta_s,
            objective: ObjectiveSpec::Entropy,
            relax_tf: c.relax_tf,
            relax_lo: c.relax_lo,
            valid_obstacle_radius: c.valid_obstacle_radius,
        }
    }
}

impl From<&PlannerSpec> for PlannerConfig {
    fn from(p: &PlannerSpec) -> Self {
        PlannerConfig {
            horizon: p.horizon,
            dt: p.dt,
            limits: Limits {
                accel: p.accel,
                omega: p.omega,
                speed_max: p.speed_max,
            },
            delta_s: p.delta_s,
            objective: p.objective.into(),
            relax_tf: p.relax_tf,
            relax_lo: p.relax_lo,
            valid_obstacle_radius: p.valid_obstacle_radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScpSpec {
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

impl Default for ScpSpec {
    fn default() -> Self {
        let s = ScpParams::default();
        Self {
            eta0: s.eta0,
            d0: s.d0,
            beta: s.beta,
            tau_c: s.tau_c,
            tau_p: s.tau_p,
            tau_f: s.tau_f,
            trust_expand: s.trust_expand,
            trust_shrink: s.trust_shrink,
            ratio_accept: s.ratio_accept,
            max_outer: s.max_outer,
            max_inner: s.max_inner,
        }
    }
}

impl From<&ScpSpec> for ScpParams {
    fn from(s: &ScpSpec) -> Self {
        ScpParams {
            eta0: s.eta0,
            d0: s.d0,
            beta: s.beta,
            tau_c: s.tau_c,
            tau_p: s.tau_p,
            tau_f: s.tau_f,
            trust_expand: s.trust_expand,
            trust_shrink: s.trust_shrink,
            ratio_accept: s.ratio_accept,
            max_outer: s.max_outer,
            max_inner: s.max_inner,
        }
    }
}

fn default_loss_limit() -> usize {
    15
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSpec {
    pub max_steps: usize,
    #[serde(default = "default_loss_limit")]
    pub loss_limit: usize,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

/// How the true target is driven.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetDrive {
    /// Fixed control sequence; the target stops once it runs out.
    Script(Vec<DVector<f64>>),
    Waypoints(WaypointFollower),
    Generator(GeneratorSpec),
}

/// A validated scenario in library types.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<ConvexBody>,
    pub fov: FovParams,
    pub noise: NoiseCovs,
    pub target_truth_noise: DMatrix<f64>,
    pub sensor: SensorModel,
    pub robot_init: RobotState,
    pub target_model: TargetModel,
    pub target_init: DVector<f64>,
    pub drive: TargetDrive,
    pub belief_init: BeliefInitSpec,
    pub control_estimate: ControlEstimateSpec,
    pub planner: PlannerConfig,
    pub scp: ScpParams,
    pub max_steps: usize,
    pub loss_limit: usize,
    pub seeds: Vec<u64>,
}

fn square(name: &str, v: &[f64], n: usize) -> SimResult<DMatrix<f64>> {
    if v.len() != n * n {
        return Err(SimError::Config(format!(
            "{name}: expected {} entries for a {n}x{n} matrix, got {}",
            n * n,
            v.len()
        )));
    }
    let m = DMatrix::from_row_slice(n, n, v);
    if (&m - m.transpose()).amax() > 1e-12 {
        return Err(SimError::Config(format!("{name}: matrix is not symmetric")));
    }
    if m.clone().symmetric_eigenvalues().iter().any(|&l| l < -1e-12) {
        return Err(SimError::Config(format!("{name}: matrix is not positive semidefinite")));
    }
    Ok(m)
}

/// Closed-loop waypoint follower for the linear integrator target: heads
/// for the current waypoint at `speed` and switches to the next one once it
/// is within one step.
#[derive(Clone, Debug, PartialEq)]
pub struct WaypointFollower {
    pub points: Vec<Vec2>,
    pub speed: f64,
    pub next: usize,
}

impl WaypointFollower {
    /// Control at `pos`, advancing past waypoints already within reach.
    pub fn control(&mut self, pos: Vec2, dt: f64) -> DVector<f64> {
        let reach = self.speed * dt;
        while self.next < self.points.len() && (self.points[self.next] - pos).norm() < reach {
            self.next += 1;
        }
        match self.points.get(self.next) {
            Some(w) => {
                let d = w - pos;
                let v = d / d.norm() * self.speed;
                DVector::from_column_slice(&[v.x, v.y])
            }
            None => DVector::zeros(2),
        }
    }

    /// Noiseless controls for `n` steps starting from `pos`, without
    /// changing the follower.
    pub fn preview(&self, pos: Vec2, n: usize, dt: f64) -> Vec<DVector<f64>> {
        let mut f = self.clone();
        let mut p = pos;
        (0..n)
            .map(|_| {
                let u = f.control(p, dt);
                p += Vec2::new(u[0], u[1]) * dt;
                u
            })
            .collect()
    }
}

impl ScenarioFile {
    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> SimResult<Self> {
        serde_json::from_str(text).map_err(|e| SimError::Config(format!("scenario: {e}")))
    }

    pub fn build(&self) -> SimResult<Scenario> {
        let target_model = match self.target.model {
            TargetModelSpec::LinearIntegrator => TargetModel::LinearIntegrator,
            TargetModelSpec::Unicycle => TargetModel::Unicycle,
        };
        let dt_dim = target_model.state_dim();
        let kind = match self.sensor {
            SensorSpec::RangeBearing => SensorKind::RangeBearing,
            SensorSpec::CameraPose => SensorKind::CameraPose,
        };
        if kind == SensorKind::CameraPose && target_model != TargetModel::Unicycle {
            return Err(SimError::Config("camera_pose sensor needs a unicycle target".into()));
        }
        let robot = square("noise.robot", &self.noise.robot, 4)?;
        let target = square("noise.target", &self.noise.target, dt_dim)?;
        let truth = match &self.noise.target_truth {
            Some(v) => square("noise.target_truth", v, dt_dim)?,
            None => target.clone(),
        };
        let sensor_cov = square("noise.sensor", &self.noise.sensor, kind.measurement_dim())?;
        let sensor = SensorModel::new(kind, sensor_cov)?;

        let fov = FovParams::new(self.fov.r1, self.fov.r2, self.fov.psi, self.fov.arc_segments)?;
        if !(self.map.width > 0.0 && self.map.height > 0.0) {
            return Err(SimError::Config("map dimensions must be positive".into()));
        }
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (i, verts) in self.obstacles.iter().enumerate() {
            let body = ConvexBody::polygon(verts.iter().map(|v| Vec2::new(v[0], v[1])).collect())
                .map_err(|e| SimError::Config(format!("obstacle {i}: {e}")))?;
            let inside = body.vertices().iter().all(|v| {
                (0.0..=self.map.width).contains(&v.x) && (0.0..=self.map.height).contains(&v.y)
            });
            if !inside {
                return Err(SimError::Config(format!("obstacle {i} leaves the map")));
            }
            obstacles.push(body);
        }
        let [x, y, th, v] = self.robot_init;
        let robot_init = RobotState::new(x, y, th, v);
        for (i, o) in obstacles.iter().enumerate() {
            if signed_distance(&ConvexBody::Point(robot_init.position), o)?.signed_distance <= 0.0 {
                return Err(SimError::Config(format!("robot starts inside obstacle {i}")));
            }
        }
        if self.target.init.len() != dt_dim {
            return Err(SimError::Config(format!(
                "target.init needs {dt_dim} entries, got {}",
                self.target.init.len()
            )));
        }
        let target_init = DVector::from_column_slice(&self.target.init);

        let planner = PlannerConfig::from(&self.planner);
        planner.validate()?;
        let scp = ScpParams::from(&self.scp);
        scp.validate()?;

        let drive = match (&self.target.script, &self.target.generator) {
            (Some(ScriptSpec::Controls(c)), None) => {
                let du = target_model.input_dim();
                let mut out = Vec::with_capacity(c.len());
                for (k, u) in c.iter().enumerate() {
                    if u.len() != du {
                        return Err(SimError::Config(format!(
                            "script control {k} needs {du} entries, got {}",
                            u.len()
                        )));
                    }
                    out.push(DVector::from_column_slice(u));
                }
                TargetDrive::Script(out)
            }
            (Some(ScriptSpec::Waypoints { points, speed }), None) => {
                if target_model != TargetModel::LinearIntegrator {
                    return Err(SimError::Config("waypoint scripts need a linear_integrator target".into()));
                }
                if !(*speed > 0.0) || points.is_empty() {
                    return Err(SimError::Config("waypoints need points and a positive speed".into()));
                }
                TargetDrive::Waypoints(WaypointFollower {
                    points: points.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
                    speed: *speed,
                    next: 0,
                })
            }
            (None, Some(g)) => {
                if target_model != TargetModel::Unicycle {
                    return Err(SimError::Config("the trajectory generator drives a unicycle target".into()));
                }
                if !(g.v_max > 0.0) {
                    return Err(SimError::Config("generator v_max must be positive".into()));
                }
                TargetDrive::Generator(*g)
            }
            _ => {
                return Err(SimError::Config(
                    "target needs exactly one of script or generator".into(),
                ))
            }
        };
        if self.episode.loss_limit < 1 {
            return Err(SimError::Config("loss_limit must be at least 1".into()));
        }
        if !(self.belief_init.cov > 0.0 && self.belief_init.mean_std >= 0.0) {
            return Err(SimError::Config("belief_init needs cov > 0 and mean_std >= 0".into()));
        }
        Ok(Scenario {
            name: self.name.clone(),
            width: self.map.width,
            height: self.map.height,
            obstacles,
            fov,
            noise: NoiseCovs {
                robot: Matrix4::from_iterator(robot.transpose().iter().copied()),
                target,
            },
            target_truth_noise: truth,
            sensor,
            robot_init,
            target_model,
            target_init,
            drive,
            belief_init: self.belief_init,
            control_estimate: self.control_estimate,
            planner,
            scp,
            max_steps: self.episode.max_steps,
            loss_limit: self.episode.loss_limit,
            seeds: self.episode.seeds.clone(),
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> SimResult<Self> {
        ScenarioFile::load(path)?.build()
    }
}
