//! Closed-loop episodes.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vistrack_core::angle::wrap_angle;
use vistrack_core::belief::{RobotBelief, TargetBelief};
use vistrack_core::estimator::{ekf_predict, ekf_update};
use vistrack_core::geom2d::{exact_visibility, signed_distance, ConvexBody, Vec2};
use vistrack_core::models::{measure, robot_step, target_position, target_step, RobotState, TargetModel};
use vistrack_core::planner::{scp_solve, DecisionVector, PlanningContext, StepGammas};
use vistrack_core::possdf::{stream_rng, GaussianSampler};

use crate::error::SimResult;
use crate::metrics::{compute_metrics, Metrics};
use crate::scenario::{Scenario, TargetDrive, WaypointFollower};
use crate::streams;
use crate::trajgen::{generate_target_trajectory, ReferenceTracker, Workspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Lost,
    /// The planner or filter returned an error; see the log's failure message.
    SolverFailure,
}

/// Beliefs the planner evaluated for the first horizon step.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedBelief {
    pub robot: RobotBelief,
    pub target_prior: TargetBelief,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: usize,
    pub robot: RobotState,
    pub target: DVector<f64>,
    pub mu: bool,
    /// Posterior target belief after this step's measurement.
    pub estimate: TargetBelief,
    /// Planned probabilities of the first horizon step.
    pub gammas: StepGammas,
    pub planned: PlannedBelief,
    pub solve_ms: f64,
    /// Distance from the true robot position to the nearest obstacle.
    pub d_min: f64,
}

impl StepRecord {
    pub fn min_gamma_lo(&self) -> f64 {
        self.gammas.lo.iter().map(|g| g.1).fold(1.0, f64::min)
    }

    pub fn max_gamma_ro(&self) -> f64 {
        self.gammas.ro.iter().map(|g| g.1).fold(0.0, f64::max)
    }

    pub fn estimation_error(&self) -> f64 {
        (target_position(&self.estimate.mean) - target_position(&self.target)).norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
    pub failure: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Record wall-clock solve times; off gives byte-reproducible outputs.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { timing: true }
    }
}

/// Target control from two consecutive estimates: velocity for the linear
/// integrator, `[|dp| / dt, wrap(dtheta) / dt]` for the unicycle.
pub fn estimate_target_control(
    model: TargetModel,
    prev: &DVector<f64>,
    curr: &DVector<f64>,
    dt: f64,
) -> DVector<f64> {
    let dp = target_position(curr) - target_position(prev);
    match model {
        TargetModel::LinearIntegrator => DVector::from_column_slice(&[dp.x / dt, dp.y / dt]),
        TargetModel::Unicycle => {
            DVector::from_column_slice(&[dp.norm() / dt, wrap_angle(curr[2] - prev[2]) / dt])
        }
    }
}

fn wrap_target(model: TargetModel, z: &mut DVector<f64>) {
    if model == TargetModel::Unicycle {
        z[2] = wrap_angle(z[2]);
    }
}

/// Overwrites the target position (and heading, for pose sensors) in `mean`
/// with the noiseless inverse of measurement `y`.
fn invert_measurement(y: &DVector<f64>, robot: &RobotState, mean: &mut DVector<f64>) {
    let bearing = robot.heading + y[1];
    mean[0] = robot.position.x + y[0] * bearing.cos();
    mean[1] = robot.position.y + y[0] * bearing.sin();
    if y.len() > 2 && mean.len() > 2 {
        mean[2] = wrap_angle(robot.heading + y[2]);
    }
}

/// Signed distance from `p` to the nearest obstacle (infinite without obstacles).
pub fn clearance(p: Vec2, obstacles: &[ConvexBody]) -> SimResult<f64> {
    let mut d = f64::INFINITY;
    for o in obstacles {
        d = d.min(signed_distance(&ConvexBody::Point(p), o)?.signed_distance);
    }
    Ok(d)
}

/// How the true target moves during an episode.
#[derive(Clone, Debug, PartialEq)]
pub enum TrueDrive {
    /// Open-loop controls; zero once exhausted.
    Script(Vec<DVector<f64>>),
    /// Feedback on the true target position.
    Follower(WaypointFollower),
    /// Feedback toward the noiseless rollout of a generated script.
    Tracker(ReferenceTracker),
}

/// True target drive of an episode.
pub fn target_drive(scenario: &Scenario, seed: u64) -> SimResult<TrueDrive> {
    match &scenario.drive {
        TargetDrive::Script(c) => Ok(TrueDrive::Script(c.clone())),
        TargetDrive::Waypoints(f) => Ok(TrueDrive::Follower(f.clone())),
        TargetDrive::Generator(g) => {
            let script = generate_target_trajectory(
                &Workspace {
                    width: scenario.width,
                    height: scenario.height,
                    obstacles: &scenario.obstacles,
                },
                &scenario.target_init,
                g.v_max,
                g.steps,
                scenario.planner.dt,
                g.seed.unwrap_or(seed),
            )?;
            ReferenceTracker::new(&scenario.target_init, script, g.v_max, scenario.planner.dt).map(TrueDrive::Tracker)
        }
    }
}

struct Noise {
    robot: GaussianSampler,
    target: GaussianSampler,
    sensor: GaussianSampler,
    rng_robot: ChaCha8Rng,
    rng_target: ChaCha8Rng,
    rng_sensor: ChaCha8Rng,
}

pub fn run_episode(scenario: &Scenario, seed: u64, opts: RunOptions) -> SimResult<(EpisodeLog, Metrics)> {
    let log = run_with_drive(scenario, seed, target_drive(scenario, seed)?, opts)?;
    let metrics = compute_metrics(&log);
    Ok((log, metrics))
}

/// Runs one episode with an explicit true target control sequence.
pub fn run_with_script(
    scenario: &Scenario,
    seed: u64,
    script: &[DVector<f64>],
    opts: RunOptions,
) -> SimResult<EpisodeLog> {
    run_with_drive(scenario, seed, TrueDrive::Script(script.to_vec()), opts)
}

pub fn run_with_drive(scenario: &Scenario, seed: u64, mut drive: TrueDrive, opts: RunOptions) -> SimResult<EpisodeLog> {
    let model = scenario.target_model;
    let dt_dim = model.state_dim();
    let cfg = &scenario.planner;
    let dt = cfg.dt;
    let known_control = model == TargetModel::LinearIntegrator;
    let zero_u = DVector::zeros(model.input_dim());
    let scripted = |s: &[DVector<f64>], k: usize| s.get(k).cloned().unwrap_or_else(|| zero_u.clone());

    let r_robot = DMatrix::from_fn(4, 4, |i, j| scenario.noise.robot[(i, j)]);
    let mut noise = Noise {
        robot: GaussianSampler::new(DVector::zeros(4), &r_robot),
        target: GaussianSampler::new(DVector::zeros(dt_dim), &scenario.target_truth_noise),
        sensor: GaussianSampler::new(
            DVector::zeros(scenario.sensor.kind.measurement_dim()),
            &scenario.sensor.noise_cov,
        ),
        rng_robot: stream_rng(seed, streams::ROBOT),
        rng_target: stream_rng(seed, streams::TARGET),
        rng_sensor: stream_rng(seed, streams::SENSOR),
    };

    let mut robot = scenario.robot_init;
    let mut target = scenario.target_init.clone();
    let mut belief = {
        let mut rng = stream_rng(seed, streams::INIT);
        let offset = GaussianSampler::new(
            DVector::zeros(2),
            &(DMatrix::identity(2, 2) * scenario.belief_init.mean_std.powi(2)),
        )
        .sample(&mut rng);
        let mut mean = target.clone();
        mean[0] += offset[0];
        mean[1] += offset[1];
        TargetBelief {
            mean,
            cov: DMatrix::identity(dt_dim, dt_dim) * scenario.belief_init.cov,
        }
    };
    let mut est_control = zero_u.clone();
    let mut warm: Option<DecisionVector> = None;
    let mut steps = Vec::with_capacity(scenario.max_steps);
    let mut unseen = 0;
    let mut detected = false;
    let mut outcome = Outcome::Success;
    let mut failure = None;

    for k in 0..scenario.max_steps {
        let ut = match &mut drive {
            TrueDrive::Script(s) => scripted(s, k),
            TrueDrive::Follower(f) => f.control(target_position(&target), dt),
            TrueDrive::Tracker(t) => t.control(k, &target),
        };
        let plan_controls: Vec<DVector<f64>> = match &drive {
            _ if !known_control => vec![est_control.clone()],
            TrueDrive::Script(s) => (0..cfg.horizon).map(|i| scripted(s, k + i)).collect(),
            TrueDrive::Tracker(_) => vec![ut.clone()],
            TrueDrive::Follower(f) => {
                let p = target_position(&belief.mean) + Vec2::new(ut[0], ut[1]) * dt;
                let mut c = vec![ut.clone()];
                c.extend(f.preview(p, cfg.horizon.saturating_sub(1), dt));
                c
            }
        };
        let solved = PlanningContext::new(
            &scenario.obstacles,
            scenario.fov,
            &scenario.sensor,
            &scenario.noise,
            model,
            plan_controls,
        )
        .and_then(|ctx| {
            let start = Instant::now();
            let r = scp_solve(
                &RobotBelief::exact(robot),
                &belief,
                &ctx,
                cfg,
                &scenario.scp,
                warm.as_ref(),
            );
            r.map(|(x, roll, _)| (x, roll, start.elapsed().as_secs_f64() * 1e3))
        });
        let (x, roll, elapsed_ms) = match solved {
            Ok(s) => s,
            Err(e) => {
                outcome = Outcome::SolverFailure;
                failure = Some(format!("step {}: {e}", k + 1));
                break;
            }
        };
        let u = x.input(0);
        warm = Some(x.shifted());

        // true motion
        let w = noise.robot.sample(&mut noise.rng_robot);
        let next = robot_step(&robot, &u, dt);
        robot = RobotState::new(
            next.position.x + w[0],
            next.position.y + w[1],
            next.heading + w[2],
            (next.speed + w[3]).clamp(0.0, cfg.limits.speed_max),
        );
        target = target_step(model, &target, &ut, dt)? + noise.target.sample(&mut noise.rng_target);
        wrap_target(model, &mut target);

        // sensing and filtering
        let tpos = target_position(&target);
        let mu = exact_visibility(&robot.pose(), tpos, &scenario.obstacles, &scenario.fov);
        let y = if mu {
            let mut y = measure(&scenario.sensor, &target, &robot)?
                + noise.sensor.sample(&mut noise.rng_sensor);
            for i in 0..y.len() {
                if scenario.sensor.kind.is_angular(i) {
                    y[i] = wrap_angle(y[i]);
                }
            }
            Some(y)
        } else {
            None
        };
        let filter_u = if known_control { ut } else { est_control.clone() };
        let seat = y.is_some() && !detected && scenario.belief_init.seat_at_first_detection;
        let filtered = ekf_predict(&belief, model, &filter_u, &scenario.noise, dt).and_then(|mut prior| {
            if seat {
                if let Some(y) = &y {
                    invert_measurement(y, &robot, &mut prior.mean);
                }
            }
            ekf_update(&prior, y.as_ref(), &scenario.sensor, &robot)
        });
        detected |= y.is_some();
        let posterior = match filtered {
            Ok(p) => p,
            Err(e) => {
                outcome = Outcome::SolverFailure;
                failure = Some(format!("step {}: {e}", k + 1));
                break;
            }
        };
        if !known_control && !seat {
            est_control = estimate_target_control(model, &belief.mean, &posterior.mean, dt);
            if let (TargetDrive::Generator(g), true) = (&scenario.drive, scenario.control_estimate.cap_speed) {
                est_control[0] = est_control[0].min(g.v_max);
            }
            if y.is_none() && scenario.control_estimate.straight_when_unseen {
                est_control[1] = 0.0;
            }
        }
        belief = posterior;

        let d_min = clearance(robot.position, &scenario.obstacles)?;
        steps.push(StepRecord {
            step: k + 1,
            robot,
            target: target.clone(),
            mu,
            estimate: belief.clone(),
            gammas: roll.gammas[0].clone(),
            planned: PlannedBelief {
                robot: roll.robot_beliefs[0],
                target_prior: roll.target_priors[0].clone(),
            },
            solve_ms: if opts.timing { elapsed_ms } else { 0.0 },
            d_min,
        });
        if d_min < 0.0 {
            outcome = Outcome::Collision;
            break;
        }
        unseen = if mu { 0 } else { unseen + 1 };
        if unseen >= scenario.loss_limit {
            outcome = Outcome::Lost;
            break;
        }
    }
    Ok(EpisodeLog {
        seed,
        steps,
        outcome,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn control_estimates() {
        let u = estimate_target_control(
            TargetModel::Unicycle,
            &DVector::from_column_slice(&[0.0, 0.0, 0.0]),
            &DVector::from_column_slice(&[0.5, 0.0, 0.1]),
            0.5,
        );
        assert!((u[0] - 1.0).abs() < 1e-12 && (u[1] - 0.2).abs() < 1e-12);
        let same = DVector::from_column_slice(&[3.0, 4.0, 1.0]);
        assert_eq!(estimate_target_control(TargetModel::Unicycle, &same, &same, 0.5), DVector::zeros(2));
        let u = estimate_target_control(
            TargetModel::Unicycle,
            &DVector::from_column_slice(&[0.0, 0.0, 3.1]),
            &DVector::from_column_slice(&[0.0, 0.0, -3.1]),
            0.5,
        );
        assert!((u[1] - (2.0 * PI - 6.2) / 0.5).abs() < 1e-9);
    }
}
