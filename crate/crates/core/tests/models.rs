use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector4};
use proptest::prelude::*;
use vistrack_core::angle::wrap_angle;
use vistrack_core::models::{
    measure, measurement_jacobian, robot_jacobian, robot_step, target_jacobian, target_step, RobotInput, RobotState,
    SensorKind, SensorModel, TargetModel,
};
use vistrack_testkit as tk;
use vistrack_testkit::Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn sensor(kind: SensorKind) -> SensorModel {
    let d = kind.measurement_dim();
    SensorModel::new(kind, DMatrix::identity(d, d) * 0.01).unwrap()
}

#[test]
fn robot_step_examples() {
    let z = robot_step(&RobotState::new(0.0, 0.0, 0.0, 1.0), &RobotInput::new(0.0, 0.0), 0.5);
    assert_eq!((z.position.x, z.position.y, z.heading, z.speed), (0.5, 0.0, 0.0, 1.0));

    let z = robot_step(&RobotState::new(0.0, 0.0, 0.0, 0.0), &RobotInput::new(0.0, 2.0), 0.5);
    assert_eq!((z.position.x, z.position.y, z.heading, z.speed), (0.0, 0.0, 0.0, 1.0));

    let z = robot_step(&RobotState::new(32.0, 7.0, 0.75 * PI, 0.0), &RobotInput::new(PI / 3.0, 2.0), 0.5);
    assert!(close(z.position.x, 32.0, 1e-12) && close(z.position.y, 7.0, 1e-12));
    assert!(close(z.heading, 0.75 * PI + PI / 6.0, 1e-12));
    assert!(close(z.speed, 1.0, 1e-12));
}

#[test]
fn target_step_examples() {
    let z = target_step(
        TargetModel::LinearIntegrator,
        &DVector::from_vec(vec![28.0, 9.0]),
        &DVector::from_vec(vec![1.0, 0.0]),
        0.5,
    )
    .unwrap();
    assert_eq!(z.as_slice(), &[28.5, 9.0]);

    let uni = |u: [f64; 2]| {
        target_step(TargetModel::Unicycle, &DVector::zeros(3), &DVector::from_vec(u.to_vec()), 0.5).unwrap()
    };
    let z = uni([2.0, 0.0]);
    assert!(close(z[0], 1.0, 1e-12) && close(z[1], 0.0, 1e-12) && close(z[2], 0.0, 1e-12));
    let z = uni([0.0, PI]);
    assert!(close(z[0], 0.0, 1e-12) && close(z[1], 0.0, 1e-12) && close(z[2], PI / 2.0, 1e-12));

    assert!(target_step(TargetModel::Unicycle, &DVector::zeros(2), &DVector::zeros(2), 0.5).is_err());
}

#[test]
fn measure_examples() {
    let rb = sensor(SensorKind::RangeBearing);
    let r0 = RobotState::new(0.0, 0.0, 0.0, 0.0);
    let y = measure(&rb, &DVector::from_vec(vec![1.0, 0.0]), &r0).unwrap();
    assert!(close(y[0], 1.0, 1e-12) && close(y[1], 0.0, 1e-12));
    let y = measure(&rb, &DVector::from_vec(vec![3.0, 4.0]), &r0).unwrap();
    assert!(close(y[0], 5.0, 1e-12) && close(y[1], 0.927_295_218_001_612_2, 1e-12));

    let cam = sensor(SensorKind::CameraPose);
    let y = measure(&cam, &DVector::from_vec(vec![-1.0, 0.0, PI]), &RobotState::new(0.0, 0.0, PI, 0.0)).unwrap();
    assert!(close(y[0], 1.0, 1e-12) && close(y[1], 0.0, 1e-12) && close(y[2], 0.0, 1e-12));

    assert!(measure(&rb, &DVector::from_vec(vec![0.0, 0.0]), &r0).is_err());
    assert!(measurement_jacobian(&rb, &DVector::from_vec(vec![0.0, 0.0]), &r0).is_err());
}

#[test]
fn linear_target_jacobian_is_identity() {
    let a = target_jacobian(
        TargetModel::LinearIntegrator,
        &DVector::from_vec(vec![3.0, -1.0]),
        &DVector::from_vec(vec![0.2, 0.4]),
        0.5,
    )
    .unwrap();
    assert_eq!(a, DMatrix::identity(2, 2));
}

#[test]
fn robot_jacobian_example() {
    let a = robot_jacobian(&RobotState::new(0.0, 0.0, 0.0, 1.0), 0.5);
    let mut want = nalgebra::Matrix4::identity();
    want[(0, 2)] = 0.0;
    want[(1, 2)] = 0.5;
    want[(0, 3)] = 0.5;
    want[(1, 3)] = 0.0;
    assert!((a - want).amax() < 1e-15);
}

#[test]
fn jacobians_match_finite_differences() {
    let mut r = tk::rng(11);
    let h = 1e-6;
    for _ in 0..100 {
        let z = RobotState::new(
            r.random_range(-20.0..20.0),
            r.random_range(-20.0..20.0),
            r.random_range(-PI..PI),
            r.random_range(0.0..4.0),
        );
        let u = RobotInput::new(r.random_range(-1.0..1.0), r.random_range(-4.0..2.0));
        let dt = 0.5;
        let f = |x: &DVector<f64>| {
            let s = robot_step(&RobotState::new(x[0], x[1], x[2], x[3]), &u, dt);
            DVector::from_column_slice(s.to_vector().as_slice())
        };
        let x = DVector::from_column_slice(z.to_vector().as_slice());
        let fd = tk::fd_jacobian_wrapped(f, &x, h);
        let a = robot_jacobian(&z, dt);
        let a = DMatrix::from_fn(4, 4, |i, j| a[(i, j)]);
        assert!((fd - a).amax() <= 1e-5);

        let zt = DVector::from_vec(vec![
            r.random_range(-20.0..20.0),
            r.random_range(-20.0..20.0),
            r.random_range(-PI..PI),
        ]);
        let ut = DVector::from_vec(vec![r.random_range(0.0..3.0), r.random_range(-1.0..1.0)]);
        let fd = tk::fd_jacobian_wrapped(|x| target_step(TargetModel::Unicycle, x, &ut, dt).unwrap(), &zt, h);
        let a = target_jacobian(TargetModel::Unicycle, &zt, &ut, dt).unwrap();
        assert!((fd - a).amax() <= 1e-5);

        for kind in [SensorKind::RangeBearing, SensorKind::CameraPose] {
            let s = sensor(kind);
            let zt = if kind == SensorKind::RangeBearing { zt.rows(0, 2).into_owned() } else { zt.clone() };
            if (zt.rows(0, 2) - nalgebra::Vector2::new(z.position.x, z.position.y)).norm() < 0.5 {
                continue;
            }
            let fd = tk::fd_jacobian_wrapped(|x| measure(&s, x, &z).unwrap(), &zt, h);
            let c = measurement_jacobian(&s, &zt, &z).unwrap();
            assert!((fd - c).amax() <= 1e-5, "{kind:?}");
        }
    }
}

proptest! {
    #[test]
    fn headings_stay_wrapped(h in -50.0..50.0f64, w in -10.0..10.0f64, v in 0.0..4.0f64) {
        let z = robot_step(&RobotState::new(0.0, 0.0, h, v), &RobotInput::new(w, 0.0), 0.5);
        prop_assert!(z.heading > -PI && z.heading <= PI);
        let t = target_step(TargetModel::Unicycle, &DVector::from_vec(vec![0.0, 0.0, h]),
                            &DVector::from_vec(vec![v, w]), 0.5).unwrap();
        prop_assert!(t[2] > -PI && t[2] <= PI);
        let a = wrap_angle(h);
        prop_assert!(a > -PI && a <= PI);
        prop_assert!((a.sin() - h.sin()).abs() < 1e-9 && (a.cos() - h.cos()).abs() < 1e-9);
    }

    #[test]
    fn range_bearing_rigid_motion_invariant(rx in -10.0..10.0f64, ry in -10.0..10.0f64, rh in -PI..PI,
                                            tx in -10.0..10.0f64, ty in -10.0..10.0f64,
                                            phi in -PI..PI, ox in -30.0..30.0f64, oy in -30.0..30.0f64) {
        prop_assume!(((tx - rx).powi(2) + (ty - ry).powi(2)).sqrt() > 1e-3);
        let s = sensor(SensorKind::RangeBearing);
        let y0 = measure(&s, &DVector::from_vec(vec![tx, ty]), &RobotState::new(rx, ry, rh, 0.0)).unwrap();
        let (sn, cs) = phi.sin_cos();
        let m = |x: f64, y: f64| (cs * x - sn * y + ox, sn * x + cs * y + oy);
        let (rx2, ry2) = m(rx, ry);
        let (tx2, ty2) = m(tx, ty);
        let y1 = measure(&s, &DVector::from_vec(vec![tx2, ty2]), &RobotState::new(rx2, ry2, rh + phi, 0.0)).unwrap();
        prop_assert!((y0[0] - y1[0]).abs() < 1e-9);
        prop_assert!(wrap_angle(y0[1] - y1[1]).abs() < 1e-9);
    }

    #[test]
    fn linear_target_step_is_exact(x in -50.0..50.0f64, y in -50.0..50.0f64, ux in -3.0..3.0f64, uy in -3.0..3.0f64) {
        let z = DVector::from_vec(vec![x, y]);
        let u = DVector::from_vec(vec![ux, uy]);
        let n = target_step(TargetModel::LinearIntegrator, &z, &u, 0.5).unwrap();
        prop_assert_eq!(n[0], x + ux * 0.5);
        prop_assert_eq!(n[1], y + uy * 0.5);
    }
}

#[test]
fn robot_state_vector_roundtrip() {
    let z = RobotState::new(1.0, 2.0, 0.3, 0.7);
    assert_eq!(RobotState::from_vector(&z.to_vector()), z);
    assert_eq!(z.to_vector(), Vector4::new(1.0, 2.0, 0.3, 0.7));
}
