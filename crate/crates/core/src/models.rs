//! Robot and target motion models, sensor models and their Jacobians.

use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
#[allow(unused_imports)] // shadowed by inherent f64 methods whenever std is linked
use num_traits::Float;

use crate::angle::wrap_angle;
use crate::error::{Error, Result};
use crate::geom2d::{Pose2, Vec2};

/// Unicycle robot state `[x, y, heading, speed]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotState {
    pub position: Vec2,
    pub heading: f64,
    pub speed: f64,
}

impl RobotState {
    pub fn new(x: f64, y: f64, heading: f64, speed: f64) -> Self {
        Self {
            position: Vec2::new(x, y),
            heading: wrap_angle(heading),
            speed,
        }
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.position.x, self.position.y, self.heading, self.speed)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn pose(&self) -> Pose2 {
        Pose2::new(self.position, self.heading)
    }
}

/// Robot control `[omega, accel]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RobotInput {
    pub omega: f64,
    pub accel: f64,
}

impl RobotInput {
    pub fn new(omega: f64, accel: f64) -> Self {
        Self { omega, accel }
    }
}

/// Control and speed bounds of the robot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limits {
    pub accel: [f64; 2],
    pub omega: [f64; 2],
    pub speed_max: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            accel: [-4.0, 2.0],
            omega: [-PI / 3.0, PI / 3.0],
            speed_max: 4.0,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<()> {
        if !(self.accel[0] < self.accel[1] && self.omega[0] < self.omega[1] && self.speed_max > 0.0)
        {
            return Err(Error::InvalidParameter(
                "limits need a_min < a_max, w_min < w_max and speed_max > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn clamp(&self, u: RobotInput) -> RobotInput {
        RobotInput {
            omega: u.omega.clamp(self.omega[0], self.omega[1]),
            accel: u.accel.clamp(self.accel[0], self.accel[1]),
        }
    }
}

/// Noiseless unicycle step.
pub fn robot_step(z: &RobotState, u: &RobotInput, dt: f64) -> RobotState {
    let (s, c) = z.heading.sin_cos();
    RobotState {
        position: z.position + Vec2::new(z.speed * c, z.speed * s) * dt,
        heading: wrap_angle(z.heading + u.omega * dt),
        speed: z.speed + u.accel * dt,
    }
}

/// Jacobian of [`robot_step`] with respect to the state.
pub fn robot_jacobian(z: &RobotState, dt: f64) -> Matrix4<f64> {
    let (s, c) = z.heading.sin_cos();
    let mut a = Matrix4::identity();
    a[(0, 2)] = -z.speed * s * dt;
    a[(0, 3)] = c * dt;
    a[(1, 2)] = z.speed * c * dt;
    a[(1, 3)] = s * dt;
    a
}

/// Target motion model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetModel {
    /// State is the position; the input is a velocity.
    LinearIntegrator,
    /// State is `[x, y, heading]`; the input is `[speed, omega]`.
    Unicycle,
}

impl TargetModel {
    pub fn state_dim(&self) -> usize {
        match self {
            TargetModel::LinearIntegrator => 2,
            TargetModel::Unicycle => 3,
        }
    }

    pub fn input_dim(&self) -> usize {
        2
    }

    /// Indices of angular state components.
    pub fn is_angular(&self, i: usize) -> bool {
        matches!(self, TargetModel::Unicycle) && i == 2
    }

    fn check(&self, z: &DVector<f64>, u: &DVector<f64>) -> Result<()> {
        if z.len() != self.state_dim() {
            return Err(Error::DimensionMismatch {
                context: "target state",
                expected: self.state_dim(),
                got: z.len(),
            });
        }
        if u.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "target input",
                expected: self.input_dim(),
                got: u.len(),
            });
        }
        Ok(())
    }
}

pub fn target_step(
    model: TargetModel,
    z: &DVector<f64>,
    u: &DVector<f64>,
    dt: f64,
) -> Result<DVector<f64>> {
    model.check(z, u)?;
    Ok(match model {
        TargetModel::LinearIntegrator => z + u * dt,
        TargetModel::Unicycle => {
            let (s, c) = z[2].sin_cos();
            DVector::from_column_slice(&[
                z[0] + u[0] * c * dt,
                z[1] + u[0] * s * dt,
                wrap_angle(z[2] + u[1] * dt),
            ])
        }
    })
}

/// Jacobian of [`target_step`] with respect to the state.
pub fn target_jacobian(
    model: TargetModel,
    z: &DVector<f64>,
    u: &DVector<f64>,
    dt: f64,
) -> Result<DMatrix<f64>> {
    model.check(z, u)?;
    Ok(match model {
        TargetModel::LinearIntegrator => DMatrix::identity(2, 2),
        TargetModel::Unicycle => {
            let (s, c) = z[2].sin_cos();
            let mut a = DMatrix::identity(3, 3);
            a[(0, 2)] = -u[0] * s * dt;
            a[(1, 2)] = u[0] * c * dt;
            a
        }
    })
}

/// Position part of a target state.
#[inline]
pub fn target_position(z: &DVector<f64>) -> Vec2 {
    Vec2::new(z[0], z[1])
}

/// Measurement function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SensorKind {
    /// `[range, bearing]`.
    RangeBearing,
    /// `[range, bearing, relative orientation]`; needs a heading in the target state.
    CameraPose,
}

impl SensorKind {
    pub fn measurement_dim(&self) -> usize {
        match self {
            SensorKind::RangeBearing => 2,
            SensorKind::CameraPose => 3,
        }
    }

    /// Whether measurement component `i` is an angle.
    pub fn is_angular(&self, i: usize) -> bool {
        i >= 1
    }
}

/// Sensor with additive Gaussian noise.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorModel {
    pub kind: SensorKind,
    pub noise_cov: DMatrix<f64>,
}

impl SensorModel {
    pub fn new(kind: SensorKind, noise_cov: DMatrix<f64>) -> Result<Self> {
        let d = kind.measurement_dim();
        if noise_cov.nrows() != d || noise_cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "sensor noise covariance",
                expected: d,
                got: noise_cov.nrows(),
            });
        }
        Ok(Self { kind, noise_cov })
    }

    fn check_target(&self, zt: &DVector<f64>) -> Result<()> {
        let needed = match self.kind {
            SensorKind::RangeBearing => 2,
            SensorKind::CameraPose => 3,
        };
        if zt.len() < needed {
            return Err(Error::DimensionMismatch {
                context: "target state for sensor",
                expected: needed,
                got: zt.len(),
            });
        }
        Ok(())
    }
}

/// Noiseless measurement of target `zt` from robot `zr`.
pub fn measure(sensor: &SensorModel, zt: &DVector<f64>, zr: &RobotState) -> Result<DVector<f64>> {
    sensor.check_target(zt)?;
    let d = target_position(zt) - zr.position;
    let range = d.norm();
    if range == 0.0 {
        return Err(Error::ZeroRange);
    }
    let bearing = wrap_angle(d.y.atan2(d.x) - zr.heading);
    Ok(match sensor.kind {
        SensorKind::RangeBearing => DVector::from_column_slice(&[range, bearing]),
        SensorKind::CameraPose => {
            DVector::from_column_slice(&[range, bearing, wrap_angle(zt[2] - zr.heading)])
        }
    })
}

/// Jacobian of [`measure`] with respect to the target state.
pub fn measurement_jacobian(
    sensor: &SensorModel,
    zt: &DVector<f64>,
    zr: &RobotState,
) -> Result<DMatrix<f64>> {
    sensor.check_target(zt)?;
    let d = target_position(zt) - zr.position;
    let r2 = d.norm_squared();
    if r2 == 0.0 {
        return Err(Error::Singular("measurement jacobian at zero range"));
    }
    let r = r2.sqrt();
    let mut c = DMatrix::zeros(sensor.kind.measurement_dim(), zt.len());
    c[(0, 0)] = d.x / r;
    c[(0, 1)] = d.y / r;
    c[(1, 0)] = -d.y / r2;
    c[(1, 1)] = d.x / r2;
    if sensor.kind == SensorKind::CameraPose {
        c[(2, 2)] = 1.0;
    }
    Ok(c)
}
