//! Random target trajectories for the unicycle target.

use nalgebra::DVector;
use rand_distr::{Distribution, Uniform};
use vistrack_core::angle::wrap_angle;
use vistrack_core::geom2d::{signed_distance, ConvexBody, Vec2};
use vistrack_core::models::{target_step, TargetModel};
use vistrack_core::possdf::stream_rng;

use crate::error::{SimError, SimResult};
use crate::streams;

/// Required distance between the noiseless path and every obstacle.
pub const CLEARANCE: f64 = 0.5;
/// Distance kept from the map border.
pub const BORDER: f64 = 1.0;
/// Turn rate while changing heading, rad/s.
pub const TURN_RATE: f64 = 0.5;
/// Largest heading change between two straight legs.
pub const MAX_TURN: f64 = core::f64::consts::FRAC_PI_2;
const SEGMENT_ATTEMPTS: usize = 60;
const TOTAL_ATTEMPTS: usize = 20_000;

/// Map region and obstacles the generated path must respect.
pub struct Workspace<'a> {
    pub width: f64,
    pub height: f64,
    pub obstacles: &'a [ConvexBody],
}

impl Workspace<'_> {
    fn admissible(&self, a: Vec2, b: Vec2) -> SimResult<bool> {
        let inside = |p: Vec2| {
            (BORDER..=self.width - BORDER).contains(&p.x) && (BORDER..=self.height - BORDER).contains(&p.y)
        };
        if !inside(b) {
            return Ok(false);
        }
        let path = if a == b {
            ConvexBody::Point(a)
        } else {
            ConvexBody::Segment([a, b])
        };
        for o in self.obstacles {
            if signed_distance(&path, o)?.signed_distance < CLEARANCE {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `[v, omega]` controls with `v <= v_max` whose noiseless rollout from
/// `start` stays inside the map and at least [`CLEARANCE`] from every
/// obstacle. Each segment turns by at most [`MAX_TURN`] at [`TURN_RATE`]
/// and then drives straight for 6 to 20 steps at one speed. Segments that
/// violate the clearance are resampled; a dead end drops the previous segment.
pub fn generate_target_trajectory(
    ws: &Workspace<'_>,
    start: &DVector<f64>,
    v_max: f64,
    steps: usize,
    dt: f64,
    seed: u64,
) -> SimResult<Vec<DVector<f64>>> {
    if !(v_max > 0.0) {
        return Err(SimError::Config("v_max must be positive".into()));
    }
    if start.len() != 3 {
        return Err(SimError::Config("the generator needs a [x, y, heading] start".into()));
    }
    let mut rng = stream_rng(seed, streams::GENERATOR);
    let speed = Uniform::new_inclusive(0.3 * v_max, v_max).expect("valid range");
    let turn = Uniform::new_inclusive(-MAX_TURN, MAX_TURN).expect("valid range");
    let length = Uniform::new_inclusive(6usize, 20).expect("valid range");

    // committed segments: (controls, state before the segment)
    let mut segments: Vec<(Vec<DVector<f64>>, DVector<f64>)> = Vec::new();
    let mut state = start.clone();
    let mut done = 0;
    let mut total = 0;
    while done < steps {
        let mut found = None;
        for _ in 0..SEGMENT_ATTEMPTS {
            total += 1;
            if total > TOTAL_ATTEMPTS {
                return Err(SimError::Generation(format!(
                    "no admissible path after {TOTAL_ATTEMPTS} segment draws"
                )));
            }
            let v = speed.sample(&mut rng);
            let dtheta: f64 = turn.sample(&mut rng);
            let turning = (dtheta.abs() / (TURN_RATE * dt)).ceil() as usize;
            let mut controls = Vec::new();
            if turning > 0 {
                let w = dtheta / (turning as f64 * dt);
                controls.extend((0..turning).map(|_| DVector::from_column_slice(&[v, w])));
            }
            controls.extend((0..length.sample(&mut rng)).map(|_| DVector::from_column_slice(&[v, 0.0])));
            controls.truncate(steps - done);
            let mut z = state.clone();
            let mut ok = true;
            for u in &controls {
                let next = target_step(TargetModel::Unicycle, &z, u, dt)?;
                if !ws.admissible(Vec2::new(z[0], z[1]), Vec2::new(next[0], next[1]))? {
                    ok = false;
                    break;
                }
                z = next;
            }
            if ok {
                found = Some((controls, z));
                break;
            }
        }
        match found {
            Some((controls, end)) => {
                done += controls.len();
                segments.push((controls, state));
                state = end;
            }
            None => {
                let Some((controls, before)) = segments.pop() else {
                    return Err(SimError::Generation("start state admits no segment".into()));
                };
                done -= controls.len();
                state = before;
            }
        }
    }
    Ok(segments.into_iter().flat_map(|(c, _)| c).collect())
}

/// Feedback tracker that keeps a noisy unicycle target on the noiseless
/// rollout of a control script. Kanayama-style law with gains that do not
/// scale with speed, so one step never overcorrects at `dt = 0.5`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTracker {
    states: Vec<DVector<f64>>,
    controls: Vec<DVector<f64>>,
    v_max: f64,
}

impl ReferenceTracker {
    const K_X: f64 = 1.0;
    const K_Y: f64 = 0.5;
    const K_THETA: f64 = 1.0;
    /// Turn rate bound of the tracked target, rad/s.
    pub const OMEGA_MAX: f64 = 2.0 * TURN_RATE;

    pub fn new(start: &DVector<f64>, controls: Vec<DVector<f64>>, v_max: f64, dt: f64) -> SimResult<Self> {
        // states[k] is the reference state before control k
        let mut states = Vec::with_capacity(controls.len());
        let mut z = start.clone();
        for u in &controls {
            states.push(z.clone());
            z = target_step(TargetModel::Unicycle, &z, u, dt)?;
        }
        Ok(Self { states, controls, v_max })
    }

    /// Control for step `k` from the true state `z`; zero after the script ends.
    pub fn control(&self, k: usize, z: &DVector<f64>) -> DVector<f64> {
        let (Some(r), Some(u)) = (self.states.get(k), self.controls.get(k)) else {
            return DVector::zeros(2);
        };
        let (s, c) = z[2].sin_cos();
        let (dx, dy) = (r[0] - z[0], r[1] - z[1]);
        let ex = c * dx + s * dy;
        let ey = -s * dx + c * dy;
        let et = wrap_angle(r[2] - z[2]);
        let v = u[0] * et.cos() + Self::K_X * ex;
        let w = u[1] + Self::K_Y * ey + Self::K_THETA * et.sin();
        DVector::from_column_slice(&[
            v.clamp(0.0, self.v_max),
            w.clamp(-Self::OMEGA_MAX, Self::OMEGA_MAX),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_map_speed_bound() {
        let ws = Workspace {
            width: 60.0,
            height: 50.0,
            obstacles: &[],
        };
        let start = DVector::from_column_slice(&[30.0, 25.0, 0.0]);
        let c = generate_target_trajectory(&ws, &start, 2.0, 100, 0.5, 4).unwrap();
        assert_eq!(c.len(), 100);
        assert!(c.iter().all(|u| u[0] <= 2.0 && u[0] >= 0.0));
        assert!(c.iter().all(|u| u[1].abs() <= TURN_RATE + 1e-12));
        let again = generate_target_trajectory(&ws, &start, 2.0, 100, 0.5, 4).unwrap();
        assert_eq!(c, again);
    }
}
