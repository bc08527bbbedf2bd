use alloc::format;
use alloc::vec::Vec;

use crate::belief::{RobotBelief, TargetBelief};
use crate::error::{Error, Result};
use crate::geom2d::signed_distance;
use crate::geom2d::ConvexBody;
use crate::possdf::SdfParamSet;

use super::rollout::{rollout, rollout_with_params, RolloutResult};
use super::{penalty_objective, DecisionVector, PlannerConfig, PlanningContext, ScpParams};

/// Central-difference step on the controls.
pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Violations fell below the tolerance.
    Converged,
    /// The outer loop ran out of iterations; the best iterate is returned.
    MaxIterations,
}

/// One trust-region trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrustStep {
    pub ratio: f64,
    pub accepted: bool,
    pub radius_before: f64,
    pub radius_after: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub status: SolveStatus,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub eta: f64,
    pub violations: f64,
    /// Violations at the end of each outer iteration.
    pub violation_history: Vec<f64>,
    pub trust_steps: Vec<TrustStep>,
}

struct Iterate {
    x: DecisionVector,
    rollout: RolloutResult,
    params: SdfParamSet,
}

/// Two-stage SCP: gradients use the frozen parameter set of the current
/// iterate, which is refreshed only after each subproblem solve.
pub fn scp_solve(
    rb0: &RobotBelief,
    tb0: &TargetBelief,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
    scp: &ScpParams,
    warm: Option<&DecisionVector>,
) -> Result<(DecisionVector, RolloutResult, Diagnostics)> {
    cfg.validate()?;
    scp.validate()?;
    check_start(rb0, ctx.obstacles)?;

    let n = cfg.horizon;
    let mut x0 = match warm {
        Some(w) if w.0.len() == 2 * n => w.clone(),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                context: "warm start",
                expected: 2 * n,
                got: w.0.len(),
            })
        }
        None => DecisionVector::zeros(n),
    };
    x0.project(&cfg.limits);
    x0.clamp_speeds(&cfg.limits, rb0.mean.speed, cfg.dt);

    let (r, params) = rollout_with_params(&x0, rb0, tb0, ctx, cfg)?;
    let mut cur = Iterate {
        x: x0,
        rollout: r,
        params,
    };
    let mut eta = scp.eta0;
    let mut diag = Diagnostics {
        status: SolveStatus::MaxIterations,
        outer_iterations: 0,
        inner_iterations: 0,
        eta,
        violations: 0.0,
        violation_history: Vec::new(),
        trust_steps: Vec::new(),
    };

    for _ in 0..scp.max_outer {
        diag.outer_iterations += 1;
        let mut d = scp.d0;
        let (mut j0, _) = penalty_objective(&cur.rollout, eta, cfg);
        for _ in 0..scp.max_inner {
            diag.inner_iterations += 1;
            let grad = gradient(&cur, rb0, tb0, ctx, cfg, eta)?;
            let mut trial = cur.x.clone();
            for (k, xk) in trial.0.iter_mut().enumerate() {
                let [lo, hi] = DecisionVector::bounds(&cfg.limits, k);
                let (lo, hi) = ((*xk - d).max(lo), (*xk + d).min(hi));
                if grad[k] > 0.0 {
                    *xk = lo;
                } else if grad[k] < 0.0 {
                    *xk = hi;
                }
            }
            trial.clamp_speeds(&cfg.limits, rb0.mean.speed, cfg.dt);
            let mut step_norm = 0.0f64;
            let mut predicted = 0.0;
            for (k, (a, b)) in trial.0.iter().zip(&cur.x.0).enumerate() {
                step_norm = step_norm.max((a - b).abs());
                predicted -= grad[k] * (a - b);
            }
            if step_norm <= scp.tau_c || predicted <= scp.tau_f {
                break;
            }
            let (r, params) = rollout_with_params(&trial, rb0, tb0, ctx, cfg)?;
            let (j_new, _) = penalty_objective(&r, eta, cfg);
            let ratio = (j0 - j_new) / predicted;
            let accepted = ratio >= scp.ratio_accept;
            let before = d;
            if accepted {
                cur = Iterate {
                    x: trial,
                    rollout: r,
                    params,
                };
                j0 = j_new;
                d *= scp.trust_expand;
            } else {
                d *= scp.trust_shrink;
            }
            diag.trust_steps.push(TrustStep {
                ratio,
                accepted,
                radius_before: before,
                radius_after: d,
            });
        }
        let (_, v) = penalty_objective(&cur.rollout, eta, cfg);
        diag.violation_history.push(v);
        diag.violations = v;
        if v <= scp.tau_p {
            diag.status = SolveStatus::Converged;
            break;
        }
        eta *= scp.beta;
    }
    diag.eta = eta;
    Ok((cur.x, cur.rollout, diag))
}

fn check_start(rb0: &RobotBelief, obstacles: &[ConvexBody]) -> Result<()> {
    for (j, o) in obstacles.iter().enumerate() {
        if signed_distance(&ConvexBody::Point(rb0.mean.position), o)?.signed_distance < 0.0 {
            return Err(Error::InfeasibleStart(j));
        }
    }
    Ok(())
}

/// Central differences of the penalty objective with the iterate's frozen parameters.
fn gradient(
    cur: &Iterate,
    rb0: &RobotBelief,
    tb0: &TargetBelief,
    ctx: &PlanningContext<'_>,
    cfg: &PlannerConfig,
    eta: f64,
) -> Result<Vec<f64>> {
    let mut x = cur.x.clone();
    let mut g = Vec::with_capacity(x.0.len());
    for k in 0..x.0.len() {
        let base = x.0[k];
        x.0[k] = base + FD_STEP;
        let (jp, _) = penalty_objective(&rollout(&x, rb0, tb0, ctx, cfg, Some(&cur.params))?, eta, cfg);
        x.0[k] = base - FD_STEP;
        let (jm, _) = penalty_objective(&rollout(&x, rb0, tb0, ctx, cfg, Some(&cur.params))?, eta, cfg);
        x.0[k] = base;
        let gk = (jp - jm) / (2.0 * FD_STEP);
        if !gk.is_finite() {
            return Err(Error::SolverFailure(format!("non-finite gradient in coordinate {k}")));
        }
        g.push(gk);
    }
    Ok(g)
}
