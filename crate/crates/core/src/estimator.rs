//! Extended Kalman filter with intermittent measurements.
//!
//! A missing measurement (`None`) leaves the predicted belief untouched,
//! which is the detection-variable-zero branch of the update.

use nalgebra::{DMatrix, DVector, Matrix4};

use crate::angle::wrap_angle;
use crate::error::{Error, Result};
use crate::models::{
    measure, measurement_jacobian, target_jacobian, target_step, RobotState, SensorModel,
    TargetModel,
};

/// Mean and covariance of a Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBelief {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianBelief {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch {
                context: "belief covariance",
                expected: mean.len(),
                got: cov.nrows(),
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Process noise covariances of the robot and the target.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseCovs {
    pub robot: Matrix4<f64>,
    pub target: DMatrix<f64>,
}

/// `(P + P^T) / 2`.
pub fn symmetrize(p: &DMatrix<f64>) -> DMatrix<f64> {
    (p + p.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(p: &DMatrix<f64>) -> f64 {
    p.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Prediction step: propagate the mean through the target model and the
/// covariance through its Jacobian.
pub fn ekf_predict(
    belief: &GaussianBelief,
    model: TargetModel,
    u: &DVector<f64>,
    covs: &NoiseCovs,
    dt: f64,
) -> Result<GaussianBelief> {
    let a = target_jacobian(model, &belief.mean, u, dt)?;
    let mean = target_step(model, &belief.mean, u, dt)?;
    let cov = symmetrize(&(&a * &belief.cov * a.transpose() + &covs.target));
    Ok(GaussianBelief { mean, cov })
}

/// Kalman gain `P C^T (C P C^T + R)^-1`.
pub(crate) fn kalman_gain(
    p: &DMatrix<f64>,
    c: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let pct = p * c.transpose();
    let s = c * &pct + r;
    let s_inv = s
        .clone()
        .cholesky()
        .map(|ch| ch.inverse())
        .or_else(|| s.try_inverse())
        .ok_or(Error::Singular("innovation covariance"))?;
    Ok(pct * s_inv)
}

/// Measurement update. `None` means the target was not detected and returns
/// the prior unchanged.
pub fn ekf_update(
    prior: &GaussianBelief,
    y: Option<&DVector<f64>>,
    sensor: &SensorModel,
    zr: &RobotState,
) -> Result<GaussianBelief> {
    let Some(y) = y else {
        return Ok(prior.clone());
    };
    let dm = sensor.kind.measurement_dim();
    if y.len() != dm {
        return Err(Error::DimensionMismatch {
            context: "measurement",
            expected: dm,
            got: y.len(),
        });
    }
    let c = measurement_jacobian(sensor, &prior.mean, zr)?;
    let k = kalman_gain(&prior.cov, &c, &sensor.noise_cov)?;
    let mut innovation = y - measure(sensor, &prior.mean, zr)?;
    for i in 0..dm {
        if sensor.kind.is_angular(i) {
            innovation[i] = wrap_angle(innovation[i]);
        }
    }
    let mut mean = &prior.mean + &k * innovation;
    if prior.dim() == TargetModel::Unicycle.state_dim() {
        mean[2] = wrap_angle(mean[2]);
    }
    let kc = &k * &c;
    let mut cov = symmetrize(&(&prior.cov - &kc * &prior.cov));
    if min_eigenvalue(&cov) < -1e-9 {
        // Joseph form
        let ikc = DMatrix::identity(prior.dim(), prior.dim()) - kc;
        cov = symmetrize(
            &(&ikc * &prior.cov * ikc.transpose() + &k * &sensor.noise_cov * k.transpose()),
        );
    }
    Ok(GaussianBelief { mean, cov })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SensorKind;
    use core::f64::consts::PI;

    fn dv(s: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(s)
    }

    #[test]
    fn linear_prediction() {
        let b = GaussianBelief::new(dv(&[0.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
        let covs = NoiseCovs {
            robot: Matrix4::zeros(),
            target: DMatrix::identity(2, 2) * 0.01,
        };
        let p = ekf_predict(&b, TargetModel::LinearIntegrator, &dv(&[1.0, 1.0]), &covs, 0.5).unwrap();
        assert_eq!(p.mean, dv(&[0.5, 0.5]));
        assert!((p.cov.clone() - DMatrix::identity(2, 2) * 1.01).amax() < 1e-15);

        let quiet = NoiseCovs {
            robot: Matrix4::zeros(),
            target: DMatrix::zeros(2, 2),
        };
        let p = ekf_predict(&b, TargetModel::LinearIntegrator, &dv(&[0.0, 0.0]), &quiet, 0.5).unwrap();
        assert_eq!(p, b);
    }

    #[test]
    fn scalar_kalman_algebra() {
        let p = DMatrix::from_element(1, 1, 1.0);
        let c = DMatrix::from_element(1, 1, 1.0);
        let r = DMatrix::from_element(1, 1, 1.0);
        let k = kalman_gain(&p, &c, &r).unwrap();
        assert!((k[(0, 0)] - 0.5).abs() < 1e-15);
        let mean = 0.0 + k[(0, 0)] * (1.0 - 0.0);
        let post = &p - &k * &c * &p;
        assert!((mean - 0.5).abs() < 1e-15);
        assert!((post[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn missing_measurement_is_identity() {
        let b = GaussianBelief::new(dv(&[1.0, 2.0]), DMatrix::identity(2, 2) * 3.0).unwrap();
        let s = SensorModel::new(SensorKind::RangeBearing, DMatrix::identity(2, 2)).unwrap();
        let out = ekf_update(&b, None, &s, &RobotState::new(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(out, b);
    }

    #[test]
    fn bearing_innovation_wraps_across_seam() {
        // target straight behind the robot: predicted bearing is pi
        let eps = 1e-3;
        let robot = RobotState::new(0.0, 0.0, 0.0, 0.0);
        let prior_mean = dv(&[-5.0, -1e-6]);
        let b = GaussianBelief::new(prior_mean, DMatrix::identity(2, 2)).unwrap();
        let s = SensorModel::new(
            SensorKind::RangeBearing,
            DMatrix::from_diagonal(&dv(&[0.3, 0.05])),
        )
        .unwrap();
        let predicted = measure(&s, &b.mean, &robot).unwrap();
        assert!(predicted[1] < -PI + 1e-3);
        let y = dv(&[predicted[0], PI - eps]);
        let out = ekf_update(&b, Some(&y), &s, &robot).unwrap();
        // a small angular correction, not a 2 pi jump
        assert!((out.mean.clone() - b.mean.clone()).norm() < 0.1);
    }
}
