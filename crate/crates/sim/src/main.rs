use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;
use vistrack_core::belief::{RobotBelief, TargetBelief};
use vistrack_core::geom2d::{convexify_fov, exact_visibility, signed_distance, ConvexBody};
use vistrack_core::planner::{rollout, rollout_with_params, scp_solve, DecisionVector, Objective, PlanningContext};
use vistrack_core::possdf::gamma_tf;
use vistrack_sim::batch::{bpod_check, bpod_unrelaxed, run_batch};
use vistrack_sim::episode::{Outcome, RunOptions};
use vistrack_sim::metrics::{aggregate, MeanStd};
use vistrack_sim::output::{read_states, write_batch, Summary};
use vistrack_sim::scenario::{Scenario, ScenarioFile};
use vistrack_sim::trajgen::{generate_target_trajectory, Workspace};
use vistrack_sim::{SimError, SimResult};

const DEFAULT_MAP: &str = include_str!("../scenarios/case2_v1.json");
const BENCH_SCENARIO: &str = include_str!("../scenarios/case1.json");

#[derive(Parser)]
#[command(name = "vistrack", version, about = "Visibility-aware belief-space target tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Entropy,
    Bpod,
}

#[derive(Subcommand)]
enum Command {
    /// Run closed-loop episodes.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Run seeds 1..=N.
        #[arg(long, conflicts_with = "seed_list")]
        seeds: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        seed_list: Option<Vec<u64>>,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record zero solve times so repeated runs give identical files.
        #[arg(long)]
        no_timing: bool,
    },
    /// Compare detection probabilities of logged states with Monte Carlo.
    BpodCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// A states_<seed>.jsonl file written by `run`.
        #[arg(long)]
        states: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-state comparisons as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
    },
    /// Generate random unicycle target control scripts.
    GenTrajectories {
        #[arg(long)]
        vmax: f64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Map and start state; the bundled Case 2 map by default.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the main components.
    Bench {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn load(path: Option<&Path>, fallback: &str) -> SimResult<Scenario> {
    match path {
        Some(p) => Scenario::load(p),
        None => ScenarioFile::parse(fallback)?.build(),
    }
}

fn run(cli: Cli) -> SimResult<ExitCode> {
    match cli.command {
        Command::Run {
            scenario,
            seeds,
            seed_list,
            objective,
            out,
            no_timing,
        } => {
            let mut sc = Scenario::load(&scenario)?;
            if let Some(o) = objective {
                sc.planner.objective = match o {
                    ObjectiveArg::Entropy => Objective::CumulativeEntropy,
                    ObjectiveArg::Bpod => Objective::NegCumulativeBpod,
                };
            }
            let seeds: Vec<u64> = match (seeds, seed_list) {
                (Some(n), _) => (1..=n).collect(),
                (None, Some(l)) => l,
                (None, None) if !sc.seeds.is_empty() => sc.seeds.clone(),
                (None, None) => vec![0],
            };
            let results = run_batch(&sc, &seeds, RunOptions { timing: !no_timing })?;
            let (logs, metrics): (Vec<_>, Vec<_>) = results.into_iter().unzip();
            let summary = Summary {
                scenario: sc.name.clone(),
                objective: match sc.planner.objective {
                    Objective::CumulativeEntropy => "entropy".into(),
                    Objective::NegCumulativeBpod => "bpod".into(),
                },
                aggregate: aggregate(&metrics),
                episodes: metrics,
            };
            if let Some(dir) = out {
                write_batch(&dir, &logs, sc.target_model.state_dim(), &summary)?;
            }
            for m in &summary.episodes {
                println!(
                    "seed {:>6}  {:<14} steps {:>4}  r_vis {:.3}  e_est {:.3} m  t_cal {:.4} s  d_min {:.2} m",
                    m.seed,
                    format!("{:?}", m.outcome),
                    m.steps,
                    m.r_vis,
                    m.e_est,
                    m.t_cal,
                    m.d_min
                );
            }
            let a = &summary.aggregate;
            let ok = &a.successful;
            println!(
                "successful only  r_vis {:.3}±{:.3}  e_est {:.3}±{:.3} m  t_cal {:.4}±{:.4} s",
                ok.r_vis.mean, ok.r_vis.std, ok.e_est.mean, ok.e_est.std, ok.t_cal.mean, ok.t_cal.std
            );
            println!(
                "episodes {}  success {:.1}%  r_vis {:.3}±{:.3}  e_est {:.3}±{:.3} m  t_cal {:.4}±{:.4} s",
                a.episodes,
                100.0 * a.success_rate,
                a.r_vis.mean,
                a.r_vis.std,
                a.e_est.mean,
                a.e_est.std,
                a.t_cal.mean,
                a.t_cal.std
            );
            let all_ok = summary.episodes.iter().all(|m| m.outcome == Outcome::Success);
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::BpodCheck {
            scenario,
            samples,
            states,
            seed,
            out,
            no_timing,
        } => {
            if samples < 100 {
                return Err(SimError::Config("--samples must be at least 100".into()));
            }
            let sc = Scenario::load(&scenario)?;
            let states = read_states(&states)?;
            let rows = bpod_check(&states, &sc, samples, seed, !no_timing)?;
            let err = MeanStd::of(rows.iter().map(|r| (r.bpod - r.mc).abs()));
            let max = rows.iter().map(|r| (r.bpod - r.mc).abs()).fold(0.0, f64::max);
            if let Some(p) = out {
                let mut f = std::fs::File::create(p)?;
                serde_json::to_writer_pretty(&mut f, &rows)?;
                f.write_all(b"\n")?;
            }
            println!(
                "states {}  mean |bpod - mc| {:.5}  std {:.5}  max {:.5}",
                rows.len(),
                err.mean,
                err.std,
                max
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::GenTrajectories {
            vmax,
            count,
            steps,
            seed,
            scenario,
            out,
        } => {
            let sc = load(scenario.as_deref(), DEFAULT_MAP)?;
            if sc.target_init.len() != 3 {
                return Err(SimError::Config("trajectory generation needs a unicycle target".into()));
            }
            let ws = Workspace {
                width: sc.width,
                height: sc.height,
                obstacles: &sc.obstacles,
            };
            #[derive(Serialize)]
            struct Script {
                seed: u64,
                controls: Vec<[f64; 2]>,
            }
            let mut scripts = Vec::with_capacity(count);
            for i in 0..count as u64 {
                let s = seed.wrapping_add(i);
                let c = generate_target_trajectory(&ws, &sc.target_init, vmax, steps, sc.planner.dt, s)?;
                scripts.push(Script {
                    seed: s,
                    controls: c.iter().map(|u| [u[0], u[1]]).collect(),
                });
            }
            match out {
                Some(p) => {
                    let mut f = std::fs::File::create(p)?;
                    serde_json::to_writer(&mut f, &scripts)?;
                    f.write_all(b"\n")?;
                }
                None => println!("{}", serde_json::to_string(&scripts)?),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { scenario, reps } => {
            bench(&load(scenario.as_deref(), BENCH_SCENARIO)?, reps.max(1))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn median_us(reps: usize, mut f: impl FnMut() -> SimResult<()>) -> SimResult<f64> {
    let mut t = Vec::with_capacity(reps);
    for _ in 0..reps {
        let s = Instant::now();
        f()?;
        t.push(s.elapsed().as_secs_f64() * 1e6);
    }
    t.sort_by(f64::total_cmp);
    Ok(t[reps / 2])
}

fn bench(sc: &Scenario, reps: usize) -> SimResult<()> {
    let rb = RobotBelief::exact(sc.robot_init);
    let tb = TargetBelief {
        mean: sc.target_init.clone(),
        cov: nalgebra::DMatrix::identity(sc.target_init.len(), sc.target_init.len()),
    };
    let ctx = PlanningContext::new(
        &sc.obstacles,
        sc.fov,
        &sc.sensor,
        &sc.noise,
        sc.target_model,
        vec![DVector::zeros(sc.target_model.input_dim())],
    )?;
    let fov_world = convexify_fov(&sc.robot_init.pose(), &sc.fov)?;
    let point = ConvexBody::Point(vistrack_core::models::target_position(&sc.target_init));
    let u = DecisionVector::zeros(sc.planner.horizon);
    let (_, params) = rollout_with_params(&u, &rb, &tb, &ctx, &sc.planner)?;
    let state = vistrack_sim::output::LoggedState {
        seed: 0,
        step: 0,
        robot_mean: rb.mean.to_vector().into(),
        robot_cov: vec![0.0; 16],
        target_mean: tb.mean.iter().copied().collect(),
        target_cov: tb.cov.transpose().iter().copied().collect(),
        gamma: 0.0,
        gamma_tf: 0.0,
    };
    let rows: Vec<(&str, f64)> = vec![
        (
            "signed_distance (fov vs point)",
            median_us(reps, || {
                signed_distance(&point, &fov_world)?;
                Ok(())
            })?,
        ),
        (
            "exact_visibility",
            median_us(reps, || {
                exact_visibility(
                    &sc.robot_init.pose(),
                    vistrack_core::models::target_position(&sc.target_init),
                    &sc.obstacles,
                    &sc.fov,
                );
                Ok(())
            })?,
        ),
        (
            "gamma_tf",
            median_us(reps, || {
                gamma_tf(&rb, &tb, &sc.fov, sc.planner.relax_tf)?;
                Ok(())
            })?,
        ),
        (
            "bpod (tf + valid obstacles)",
            median_us(reps, || {
                bpod_unrelaxed(&state, sc)?;
                Ok(())
            })?,
        ),
        (
            "rollout (frozen parameters)",
            median_us(reps, || {
                rollout(&u, &rb, &tb, &ctx, &sc.planner, Some(&params))?;
                Ok(())
            })?,
        ),
        (
            "rollout (fresh parameters)",
            median_us(reps, || {
                rollout(&u, &rb, &tb, &ctx, &sc.planner, None)?;
                Ok(())
            })?,
        ),
        (
            "scp_solve",
            median_us(reps.min(50), || {
                scp_solve(&rb, &tb, &ctx, &sc.planner, &sc.scp, None)?;
                Ok(())
            })?,
        ),
    ];
    for (name, us) in rows {
        println!("{name:<34} {us:>12.2} us (median)");
    }
    Ok(())
}
