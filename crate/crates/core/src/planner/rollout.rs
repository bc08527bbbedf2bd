use alloc::vec::Vec;

use crate::belief::{
    belief_entropy, bpod_covariance_update, propagate_robot_belief, RobotBelief, TargetBelief,
};
use crate::error::{Error, Result};
use crate::estimator::ekf_predict;
use crate::models::{measurement_jacobian, target_position};
use crate::possdf::{
    compute_sdf_params, possdf_prob, SdfParamSet, SdfQuery, Sense, StackedGaussian,
    StepParams,
};

use super::{DecisionVector, PlannerConfig, PlanningContext};

/// Detection and collision probabilities of one horizon step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepGammas {
    pub tf: f64,
    /// Line-of-sight clearance per valid obstacle index.
    pub lo: Vec<(usize, f64)>,
    /// Detection probability, `tf` times every `lo`.
    pub gamma: f64,
    /// Collision probability per valid obstacle index.
    pub ro: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RolloutResult {
    pub robot_beliefs: Vec<RobotBelief>,
    /// Predicted target beliefs the probabilities were evaluated on.
    pub target_priors: Vec<TargetBelief>,
    /// Target beliefs after the detection-weighted covariance update.
    pub target_beliefs: Vec<TargetBelief>,
    pub gammas: Vec<StepGammas>,
    pub entropies: Vec<f64>,
}

/// Propagates the beliefs under controls `u`. With `frozen` the signed
/// distances are linearized with the given parameters, otherwise fresh
/// parameters are computed at each step's means.
pub fn rollout(
    u: &DecisionVector,
    rb0: &RobotBelief,
    tb0: &TargetBelief,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
    frozen: Option<&SdfParamSet>,
) -> Result<RolloutResult> {
    run(u, rb0, tb0, ctx, cfg, frozen, None)
}

/// Fresh rollout that also returns the parameter set it computed.
pub fn rollout_with_params(
    u: &DecisionVector,
    rb0: &RobotBelief,
    tb0: &TargetBelief,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
) -> Result<(RolloutResult, SdfParamSet)> {
    let mut set = SdfParamSet::default();
    let r = run(u, rb0, tb0, ctx, cfg, None, Some(&mut set))?;
    Ok((r, set))
}

fn run(
    u: &DecisionVector,
    rb0: &RobotBelief,
    tb0: &TargetBelief,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
    frozen: Option<&SdfParamSet>,
    mut record: Option<&mut SdfParamSet>,
) -> Result<RolloutResult> {
    let n = u.horizon();
    if let Some(set) = frozen {
        if set.steps.len() < n {
            return Err(Error::DimensionMismatch {
                context: "frozen parameter set",
                expected: n,
                got: set.steps.len(),
            });
        }
    }
    if ctx.target_controls.is_empty() {
        return Err(Error::InvalidParameter("no target control for the horizon".into()));
    }
    let mut out = RolloutResult {
        robot_beliefs: Vec::with_capacity(n),
        target_priors: Vec::with_capacity(n),
        target_beliefs: Vec::with_capacity(n),
        gammas: Vec::with_capacity(n),
        entropies: Vec::with_capacity(n),
    };
    let mut rb = *rb0;
    let mut tb = tb0.clone();
    for i in 0..n {
        rb = propagate_robot_belief(&rb, &u.input(i), ctx.noise, cfg.dt);
        let ut = &ctx.target_controls[i.min(ctx.target_controls.len() - 1)];
        let prior = ekf_predict(&tb, ctx.target_model, ut, ctx.noise, cfg.dt)?;
        let g = StackedGaussian::new(&rb, &prior);

        let fresh;
        let params = match frozen {
            Some(set) => &set.steps[i],
            None => {
                fresh = step_params(&g, ctx, cfg)?;
                &fresh
            }
        };
        let gammas = evaluate(params, &g, cfg);

        let cov = match measurement_jacobian(ctx.sensor, &prior.mean, &rb.mean) {
            Ok(c) => bpod_covariance_update(&prior.cov, &c, &ctx.sensor.noise_cov, gammas.gamma)?,
            Err(Error::Singular(_)) => prior.cov.clone(),
            Err(e) => return Err(e),
        };
        out.entropies.push(belief_entropy(&cov, prior.dim()));
        tb = TargetBelief {
            mean: prior.mean.clone(),
            cov,
        };
        out.target_priors.push(prior);
        if let Some(set) = record.as_deref_mut() {
            set.steps.push(params.clone());
        }
        out.robot_beliefs.push(rb);
        out.target_beliefs.push(tb.clone());
        out.gammas.push(gammas);
    }
    Ok(out)
}

/// Parameters at the means of `g`: field of view, line of sight against
/// obstacles near it, and robot against obstacles near the robot.
pub(crate) fn step_params(
    g: &StackedGaussian<'_>,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
) -> Result<StepParams> {
    let radius = cfg.valid_obstacle_radius;
    let (tf, _) = compute_sdf_params(SdfQuery::TargetFov, g, ctx.fov_local())?;
    let xr = g.robot.mean.position;
    let xt = target_position(&g.target.mean);
    let mut lo = Vec::new();
    if xr != xt {
        for j in ctx.near_box(xr, xt, radius) {
            let (p, res) = compute_sdf_params(SdfQuery::LosObstacle, g, &ctx.obstacles[j])?;
            if res.signed_distance <= radius {
                lo.push((j, p));
            }
        }
    }
    let mut ro = Vec::new();
    for j in ctx.near_box(xr, xr, radius) {
        let (p, res) = compute_sdf_params(SdfQuery::RobotObstacle, g, &ctx.obstacles[j])?;
        if res.signed_distance <= radius {
            ro.push((j, p));
        }
    }
    Ok(StepParams { tf, lo, ro })
}

/// Probabilities of one step with parameters computed at the given beliefs.
pub fn step_gammas(
    rb: &RobotBelief,
    prior: &TargetBelief,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
) -> Result<StepGammas> {
    let g = StackedGaussian::new(rb, prior);
    Ok(evaluate(&step_params(&g, ctx, cfg)?, &g, cfg))
}

fn evaluate(params: &StepParams, g: &StackedGaussian<'_>, cfg: &PlannerConfig) -> StepGammas {
    let tf = possdf_prob(&params.tf, g, Sense::Leq, cfg.relax_tf);
    let lo: Vec<(usize, f64)> = params
        .lo
        .iter()
        .map(|(j, p)| (*j, possdf_prob(p, g, Sense::Geq, -cfg.relax_lo)))
        .collect();
    let ro = params
        .ro
        .iter()
        .map(|(j, p)| (*j, possdf_prob(p, g, Sense::Leq, 0.0)))
        .collect();
    let gamma = lo.iter().fold(tf, |acc, (_, p)| acc * p).clamp(0.0, 1.0);
    StepGammas { tf, lo, gamma, ro }
}
