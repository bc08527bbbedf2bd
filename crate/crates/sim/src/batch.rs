//! Parallel episode batches and the detection-probability check.

use rayon::prelude::*;
use vistrack_core::geom2d::Vec2;
use vistrack_core::models::target_position;
use vistrack_core::planner::{step_gammas, PlannerConfig, PlanningContext};
use vistrack_core::possdf::{McBpodOracle, McEstimate};

use crate::episode::{run_episode, EpisodeLog, RunOptions};
use crate::error::SimResult;
use crate::metrics::Metrics;
use crate::output::LoggedState;
use crate::scenario::Scenario;

/// Runs one episode per seed. Results come back in seed order whatever the
/// thread schedule.
pub fn run_batch(scenario: &Scenario, seeds: &[u64], opts: RunOptions) -> SimResult<Vec<(EpisodeLog, Metrics)>> {
    seeds
        .par_iter()
        .map(|&s| run_episode(scenario, s, opts))
        .collect()
}

/// Monte-Carlo detection probability with chunks spread over threads.
pub fn mc_bpod_parallel(oracle: &McBpodOracle<'_>, n_samples: usize, seed: u64) -> McEstimate {
    let hits = (0..McBpodOracle::chunks(n_samples))
        .into_par_iter()
        .map(|c| oracle.chunk_hits(seed, c, n_samples))
        .sum();
    McEstimate::from_hits(hits, n_samples)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BpodComparison {
    pub seed: u64,
    pub step: usize,
    pub bpod: f64,
    pub mc: f64,
    pub mc_stderr: f64,
    pub eval_us: f64,
}

/// Detection probability of a logged state without relaxation, as the
/// product over the field of view and the valid obstacles.
pub fn bpod_unrelaxed(state: &LoggedState, scenario: &Scenario) -> SimResult<f64> {
    let rb = state.robot_belief()?;
    let tb = state.target_belief()?;
    let ctx = PlanningContext::new(
        &scenario.obstacles,
        scenario.fov,
        &scenario.sensor,
        &scenario.noise,
        scenario.target_model,
        vec![nalgebra::DVector::zeros(scenario.target_model.input_dim())],
    )?;
    let cfg = PlannerConfig {
        relax_tf: 0.0,
        relax_lo: 0.0,
        ..scenario.planner
    };
    let tpos: Vec2 = target_position(&tb.mean);
    if tpos == rb.mean.position {
        return Ok(0.0);
    }
    Ok(step_gammas(&rb, &tb, &ctx, &cfg)?.gamma)
}

/// Compares each state's detection probability against the Monte-Carlo oracle.
pub fn bpod_check(
    states: &[LoggedState],
    scenario: &Scenario,
    samples: usize,
    seed: u64,
    timing: bool,
) -> SimResult<Vec<BpodComparison>> {
    states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let start = std::time::Instant::now();
            let bpod = bpod_unrelaxed(s, scenario)?;
            let eval_us = if timing {
                start.elapsed().as_secs_f64() * 1e6
            } else {
                0.0
            };
            let rb = s.robot_belief()?;
            let tb = s.target_belief()?;
            let oracle = McBpodOracle::new(&rb, &tb, &scenario.obstacles, &scenario.fov);
            let mc = mc_bpod_parallel(&oracle, samples, seed.wrapping_add(i as u64));
            Ok(BpodComparison {
                seed: s.seed,
                step: s.step,
                bpod,
                mc: mc.estimate,
                mc_stderr: mc.stderr,
                eval_us,
            })
        })
        .collect()
}
