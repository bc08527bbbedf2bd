use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix4};
use vistrack_core::estimator::{ekf_predict, ekf_update, min_eigenvalue, GaussianBelief, NoiseCovs};
use vistrack_core::models::{measure, RobotState, SensorKind, SensorModel, TargetModel};
use vistrack_testkit as tk;
use vistrack_testkit::Rng;

fn covs(target: DMatrix<f64>) -> NoiseCovs {
    NoiseCovs {
        robot: Matrix4::zeros(),
        target,
    }
}

fn rb_sensor() -> SensorModel {
    // range-bearing noise of the Case 1 setup
    SensorModel::new(SensorKind::RangeBearing, DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.05])).unwrap()
}

#[test]
fn linear_predict_example() {
    let b = GaussianBelief::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
    let p = ekf_predict(
        &b,
        TargetModel::LinearIntegrator,
        &DVector::from_vec(vec![1.0, 1.0]),
        &covs(DMatrix::identity(2, 2) * 0.01),
        0.5,
    )
    .unwrap();
    assert!((p.mean - DVector::from_vec(vec![0.5, 0.5])).amax() < 1e-15);
    assert!((p.cov - DMatrix::identity(2, 2) * 1.01).amax() < 1e-15);
}

#[test]
fn noiseless_static_predict_is_identity() {
    let b = GaussianBelief::new(DVector::from_vec(vec![3.0, -2.0]), DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0])).unwrap();
    let p = ekf_predict(&b, TargetModel::LinearIntegrator, &DVector::zeros(2), &covs(DMatrix::zeros(2, 2)), 0.5).unwrap();
    assert_eq!(p, b);
}

#[test]
fn unicycle_predict_keeps_psd_and_adds_noise() {
    let mut r = tk::rng(21);
    let rt = tk::random_spd(&mut r, 3, 0.01, 0.5);
    for _ in 0..100 {
        let b = GaussianBelief::new(
            DVector::from_vec(vec![r.random_range(-10.0..10.0), r.random_range(-10.0..10.0), r.random_range(-PI..PI)]),
            tk::random_spd(&mut r, 3, 1e-3, 5.0),
        )
        .unwrap();
        let u = DVector::from_vec(vec![r.random_range(0.0..3.0), r.random_range(-1.0..1.0)]);
        let p = ekf_predict(&b, TargetModel::Unicycle, &u, &covs(rt.clone()), 0.5).unwrap();
        assert!(min_eigenvalue(&p.cov) >= -1e-9);
        assert!(p.cov.trace() >= rt.trace());
        assert!((&p.cov - p.cov.transpose()).amax() <= 1e-9);
    }
}

#[test]
fn missing_measurement_returns_prior_bit_for_bit() {
    let mut r = tk::rng(22);
    for _ in 0..50 {
        let prior = GaussianBelief::new(
            DVector::from_vec(vec![r.random_range(-10.0..10.0), r.random_range(-10.0..10.0)]),
            tk::random_spd(&mut r, 2, 1e-3, 5.0),
        )
        .unwrap();
        let post = ekf_update(&prior, None, &rb_sensor(), &RobotState::new(0.0, 0.0, 0.3, 1.0)).unwrap();
        assert_eq!(post.mean.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   prior.mean.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(post.cov.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   prior.cov.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}

#[test]
fn update_shrinks_covariance() {
    let mut r = tk::rng(23);
    let s = rb_sensor();
    for _ in 0..200 {
        let zr = RobotState::new(0.0, 0.0, r.random_range(-PI..PI), 0.0);
        let mean = DVector::from_vec(vec![r.random_range(2.0..10.0), r.random_range(-8.0..8.0)]);
        let prior = GaussianBelief::new(mean.clone(), tk::random_spd(&mut r, 2, 1e-2, 10.0)).unwrap();
        let mut y = measure(&s, &mean, &zr).unwrap();
        y[0] += r.random_range(-0.5..0.5);
        y[1] += r.random_range(-0.2..0.2);
        let post = ekf_update(&prior, Some(&y), &s, &zr).unwrap();
        assert!(min_eigenvalue(&(&prior.cov - &post.cov)) >= -1e-9);
        assert!(min_eigenvalue(&post.cov) >= -1e-9);
    }
}

#[test]
fn repeated_updates_drive_determinant_down() {
    let s = rb_sensor();
    let zr = RobotState::new(0.0, 0.0, 0.0, 0.0);
    let target = DVector::from_vec(vec![5.0, 1.0]);
    let y = measure(&s, &target, &zr).unwrap();
    let mut b = GaussianBelief::new(DVector::from_vec(vec![5.5, 0.5]), DMatrix::identity(2, 2) * 25.0).unwrap();
    let mut det = b.cov.determinant();
    for _ in 0..30 {
        b = ekf_update(&b, Some(&y), &s, &zr).unwrap();
        let d = b.cov.determinant();
        assert!(d < det);
        det = d;
    }
}

#[test]
fn bearing_innovation_wraps() {
    // target straight behind the robot: predicted bearing just below +pi,
    // measured just above -pi
    let s = SensorModel::new(SensorKind::RangeBearing, DMatrix::identity(2, 2) * 0.01).unwrap();
    let zr = RobotState::new(0.0, 0.0, 0.0, 0.0);
    let eps: f64 = 1e-3;
    let mean = DVector::from_vec(vec![-5.0 * eps.cos(), 5.0 * eps.sin()]);
    let prior = GaussianBelief::new(mean.clone(), DMatrix::identity(2, 2)).unwrap();
    let predicted = measure(&s, &mean, &zr).unwrap();
    assert!((predicted[1] - (PI - eps)).abs() < 1e-12);
    let y = DVector::from_vec(vec![5.0, -PI + eps]);
    let post = ekf_update(&prior, Some(&y), &s, &zr).unwrap();
    // an unwrapped innovation of about -2 pi would throw the mean metres away
    assert!((post.mean - mean).norm() < 0.1);
}

#[test]
fn scalar_kalman_example() {
    // one-dimensional surrogate: a range measurement along the x axis with
    // the y component known exactly
    let s = SensorModel::new(SensorKind::RangeBearing, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0])).unwrap();
    let zr = RobotState::new(0.0, 0.0, 0.0, 0.0);
    let prior = GaussianBelief::new(DVector::from_vec(vec![10.0, 0.0]), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
    let y = DVector::from_vec(vec![11.0, 0.0]);
    let post = ekf_update(&prior, Some(&y), &s, &zr).unwrap();
    assert!((post.mean[0] - 10.5).abs() < 1e-12);
    assert!((post.cov[(0, 0)] - 0.5).abs() < 1e-12);
}

#[test]
fn dimension_mismatch_is_an_error() {
    let prior = GaussianBelief::new(DVector::from_vec(vec![3.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
    let y = DVector::from_vec(vec![3.0, 0.0, 0.0]);
    assert!(ekf_update(&prior, Some(&y), &rb_sensor(), &RobotState::new(0.0, 0.0, 0.0, 0.0)).is_err());
}
