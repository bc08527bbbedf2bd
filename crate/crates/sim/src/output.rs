//! Step logs, planned-belief logs and batch summaries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix4};
use serde::{Deserialize, Serialize};
use vistrack_core::belief::{RobotBelief, TargetBelief};
use vistrack_core::models::RobotState;

use crate::episode::EpisodeLog;
use crate::error::{SimError, SimResult};
use crate::metrics::{Aggregate, Metrics};

pub fn csv_header(target_dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["step", "robot_x", "robot_y", "robot_heading", "robot_speed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((0..target_dim).map(|i| format!("target_{i}")));
    h.extend((0..target_dim).map(|i| format!("est_{i}")));
    h.extend(
        [
            "cov_det",
            "mu",
            "gamma",
            "gamma_tf",
            "min_gamma_lo",
            "max_gamma_ro",
            "solve_ms",
            "d_min",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

pub fn write_step_csv<W: Write>(log: &EpisodeLog, target_dim: usize, out: W) -> SimResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(target_dim))?;
    for s in &log.steps {
        let mut row = vec![
            s.step.to_string(),
            s.robot.position.x.to_string(),
            s.robot.position.y.to_string(),
            s.robot.heading.to_string(),
            s.robot.speed.to_string(),
        ];
        row.extend(s.target.iter().map(f64::to_string));
        row.extend(s.estimate.mean.iter().map(f64::to_string));
        row.push(s.estimate.cov.determinant().to_string());
        row.push(u8::from(s.mu).to_string());
        row.push(s.gammas.gamma.to_string());
        row.push(s.gammas.tf.to_string());
        row.push(s.min_gamma_lo().to_string());
        row.push(s.max_gamma_ro().to_string());
        row.push(s.solve_ms.to_string());
        row.push(s.d_min.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// First-step beliefs of one planning call, one JSON object per line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoggedState {
    pub seed: u64,
    pub step: usize,
    pub robot_mean: [f64; 4],
    /// Row-major 4x4.
    pub robot_cov: Vec<f64>,
    pub target_mean: Vec<f64>,
    /// Row-major.
    pub target_cov: Vec<f64>,
    pub gamma: f64,
    pub gamma_tf: f64,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

impl LoggedState {
    pub fn robot_belief(&self) -> SimResult<RobotBelief> {
        if self.robot_cov.len() != 16 {
            return Err(SimError::Config("robot_cov needs 16 entries".into()));
        }
        let [x, y, th, v] = self.robot_mean;
        Ok(RobotBelief {
            mean: RobotState::new(x, y, th, v),
            cov: Matrix4::from_row_slice(&self.robot_cov),
        })
    }

    pub fn target_belief(&self) -> SimResult<TargetBelief> {
        let d = self.target_mean.len();
        if self.target_cov.len() != d * d {
            return Err(SimError::Config("target_cov does not match target_mean".into()));
        }
        Ok(TargetBelief {
            mean: DVector::from_column_slice(&self.target_mean),
            cov: DMatrix::from_row_slice(d, d, &self.target_cov),
        })
    }
}

pub fn logged_states(log: &EpisodeLog) -> Vec<LoggedState> {
    log.steps
        .iter()
        .map(|s| {
            let r = &s.planned.robot;
            LoggedState {
                seed: log.seed,
                step: s.step,
                robot_mean: [r.mean.position.x, r.mean.position.y, r.mean.heading, r.mean.speed],
                robot_cov: r.cov.transpose().iter().copied().collect(),
                target_mean: s.planned.target_prior.mean.iter().copied().collect(),
                target_cov: row_major(&s.planned.target_prior.cov),
                gamma: s.gammas.gamma,
                gamma_tf: s.gammas.tf,
            }
        })
        .collect()
}

pub fn write_states<W: Write>(states: &[LoggedState], mut out: W) -> SimResult<()> {
    for s in states {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_states(path: &Path) -> SimResult<Vec<LoggedState>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| SimError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub objective: String,
    pub episodes: Vec<Metrics>,
    pub aggregate: Aggregate,
}

/// Writes `episode_<seed>.csv`, `states_<seed>.jsonl` and `summary.json` into `dir`.
pub fn write_batch(dir: &Path, logs: &[EpisodeLog], target_dim: usize, summary: &Summary) -> SimResult<()> {
    std::fs::create_dir_all(dir)?;
    for log in logs {
        let f = BufWriter::new(File::create(dir.join(format!("episode_{}.csv", log.seed)))?);
        write_step_csv(log, target_dim, f)?;
        let mut f = BufWriter::new(File::create(dir.join(format!("states_{}.jsonl", log.seed)))?);
        write_states(&logged_states(log), &mut f)?;
        f.flush()?;
    }
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
