//! Belief propagation over the planning horizon.
//!
//! The robot belief follows the EKF prediction step. The target covariance
//! is updated with the expected Kalman correction, weighted by the detection
//! probability of the step.

use core::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4};
#[allow(unused_imports)] // shadowed by inherent f64 methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::estimator::{kalman_gain, symmetrize, GaussianBelief, NoiseCovs};
use crate::models::{robot_jacobian, robot_step, RobotInput, RobotState};

/// Determinant floor applied before taking logarithms.
pub const DET_FLOOR: f64 = 1e-300;
/// Eigenvalue floor for covariances produced by the weighted update.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Target belief in the horizon.
pub type TargetBelief = GaussianBelief;

/// Robot belief: mean state and 4x4 covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotBelief {
    pub mean: RobotState,
    pub cov: Matrix4<f64>,
}

impl RobotBelief {
    /// A perfectly known robot state.
    pub fn exact(mean: RobotState) -> Self {
        Self {
            mean,
            cov: Matrix4::zeros(),
        }
    }
}

pub fn propagate_robot_belief(
    b: &RobotBelief,
    u: &RobotInput,
    covs: &NoiseCovs,
    dt: f64,
) -> RobotBelief {
    let a = robot_jacobian(&b.mean, dt);
    let cov = a * b.cov * a.transpose() + covs.robot;
    RobotBelief {
        mean: robot_step(&b.mean, u, dt),
        cov: (cov + cov.transpose()) * 0.5,
    }
}

/// Covariance update weighted by the detection probability `gamma`:
/// `P - gamma K C P` with `K` the Kalman gain computed from `c_tilde`.
pub fn bpod_covariance_update(
    p_prior: &DMatrix<f64>,
    c_tilde: &DMatrix<f64>,
    rs: &DMatrix<f64>,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(alloc::format!(
            "detection probability {gamma} outside [0, 1]"
        )));
    }
    if gamma == 0.0 {
        return Ok(p_prior.clone());
    }
    let k = kalman_gain(p_prior, c_tilde, rs)?;
    let p = symmetrize(&(p_prior - (&k * c_tilde * p_prior) * gamma));
    Ok(floor_eigenvalues(p))
}

fn floor_eigenvalues(p: DMatrix<f64>) -> DMatrix<f64> {
    let eig = p.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= EIGEN_FLOOR) {
        return p;
    }
    let clamped = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let v = &eig.eigenvectors;
    symmetrize(&(v * DMatrix::from_diagonal(&clamped) * v.transpose()))
}

/// Differential entropy of a Gaussian with covariance `p` in `d_t` dimensions, in nats.
pub fn belief_entropy(p: &DMatrix<f64>, d_t: usize) -> f64 {
    let det = p.determinant().max(DET_FLOOR);
    0.5 * d_t as f64 * ((2.0 * PI).ln() + 1.0) + 0.5 * det.ln()
}
