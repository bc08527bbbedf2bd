use serde::{Deserialize, Serialize};

use crate::episode::{EpisodeLog, Outcome};

/// Per-episode tracking metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub seed: u64,
    pub steps: usize,
    /// Mean planning time per step in seconds.
    pub t_cal: f64,
    /// Mean distance between estimated and true target position.
    pub e_est: f64,
    /// Fraction of steps with a measurement.
    pub r_vis: f64,
    pub d_min: f64,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

pub fn compute_metrics(log: &EpisodeLog) -> Metrics {
    let n = log.steps.len();
    let mean = |f: &dyn Fn(&crate::episode::StepRecord) -> f64| {
        if n == 0 {
            0.0
        } else {
            log.steps.iter().map(f).sum::<f64>() / n as f64
        }
    };
    Metrics {
        seed: log.seed,
        steps: n,
        t_cal: mean(&|s| s.solve_ms * 1e-3),
        e_est: mean(&|s| s.estimation_error()),
        r_vis: mean(&|s| if s.mu { 1.0 } else { 0.0 }),
        d_min: log.steps.iter().map(|s| s.d_min).fold(f64::INFINITY, f64::min),
        outcome: log.outcome,
        failure: log.failure.clone(),
    }
}

/// Sample mean and standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub episodes: usize,
    pub success_rate: f64,
    pub collisions: usize,
    pub lost: usize,
    pub failures: usize,
    pub t_cal: MeanStd,
    pub e_est: MeanStd,
    pub r_vis: MeanStd,
    pub d_min: MeanStd,
    /// The same means restricted to successful episodes.
    pub successful: SuccessAggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessAggregate {
    pub t_cal: MeanStd,
    pub e_est: MeanStd,
    pub r_vis: MeanStd,
}

pub fn aggregate(metrics: &[Metrics]) -> Aggregate {
    let count = |o: Outcome| metrics.iter().filter(|m| m.outcome == o).count();
    Aggregate {
        episodes: metrics.len(),
        success_rate: if metrics.is_empty() {
            0.0
        } else {
            count(Outcome::Success) as f64 / metrics.len() as f64
        },
        collisions: count(Outcome::Collision),
        lost: count(Outcome::Lost),
        failures: count(Outcome::SolverFailure),
        t_cal: MeanStd::of(metrics.iter().map(|m| m.t_cal)),
        e_est: MeanStd::of(metrics.iter().map(|m| m.e_est)),
        r_vis: MeanStd::of(metrics.iter().map(|m| m.r_vis)),
        d_min: MeanStd::of(metrics.iter().map(|m| m.d_min)),
        successful: {
            let ok = || metrics.iter().filter(|m| m.outcome == Outcome::Success);
            SuccessAggregate {
                t_cal: MeanStd::of(ok().map(|m| m.t_cal)),
                e_est: MeanStd::of(ok().map(|m| m.e_est)),
                r_vis: MeanStd::of(ok().map(|m| m.r_vis)),
            }
        },
    }
}
