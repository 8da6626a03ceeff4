//! Seeded training runs and their on-disk artifacts.
//!
//! For a run stem `{task}_{method}_seed{k}` the output directory receives
//! `{stem}.metrics.csv`, `{stem}.timing.csv`, `{stem}.ckpt` (final),
//! `{stem}.ep{n}.ckpt` (scheduled), optionally `{stem}.traj.csv`, and
//! `{stem}.FAILED` when the run aborts. `{task}_{method}.summary.csv` holds
//! the final-window statistics across seeds.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sam_core::advice::AdviceMode;
use sam_core::baselines::run_ircr_episode;
use sam_core::samac::{run_episode, run_episode_observed, AgentLearner, EpisodeLog, Team};
use sam_core::score::score;
use sam_core::world::World;

use crate::checkpoint::Checkpoint;
use crate::config::{ExperimentConfig, Method};
use crate::metrics::{final_window_mean, mean_std, read_metrics, MetricsRow, MetricsWriter, MovingAverage};
use crate::{io_err, trajectory, HarnessError};

/// Learners for every entity: the team gets the configured advice, opponents
/// (adversary, prey) learn from the sparse reward.
pub fn build_team(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Team, HarnessError> {
    let task = cfg.task;
    let learners = (0..task.n_entities())
        .map(|i| {
            let (mode, potential) = if i < task.n_team() {
                (cfg.mode, cfg.potential)
            } else {
                (AdviceMode::None, None)
            };
            AgentLearner::new(task.obs_len(i), task.joint_obs_len(), 2, &cfg.hyper, mode, potential, rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Team::new(learners))
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub metrics_path: PathBuf,
    pub scores: Vec<f64>,
    /// Set when the run stopped early; the error text is also in the marker file.
    pub failure: Option<String>,
}

pub fn metrics_path(cfg: &ExperimentConfig, seed: u64) -> PathBuf {
    cfg.output_dir.join(format!("{}.metrics.csv", cfg.run_stem(seed)))
}

pub fn summary_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir
        .join(format!("{}_{}.summary.csv", cfg.task.short_name(), cfg.method.name()))
}

/// Trains one seed. Numeric failures inside the run are reported in the
/// result (with partial artifacts and a marker file); IO and setup failures
/// are errors.
pub fn train_seed(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult, HarnessError> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let stem = cfg.run_stem(seed);
    let failed_marker = dir.join(format!("{stem}.FAILED"));
    if failed_marker.exists() {
        std::fs::remove_file(&failed_marker).map_err(io_err(&failed_marker))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = World::new(cfg.task, cfg.world)?;
    let mut team = build_team(cfg, &mut rng)?;
    let n = cfg.task.n_entities();

    let mpath = metrics_path(cfg, seed);
    let mut metrics = MetricsWriter::create(&mpath, n)?;
    let tpath = dir.join(format!("{stem}.timing.csv"));
    let mut timing = BufWriter::new(File::create(&tpath).map_err(io_err(&tpath))?);
    writeln!(timing, "episode,wall_seconds").map_err(io_err(&tpath))?;
    let mut traj = if cfg.trajectory_every > 0 {
        let p = dir.join(format!("{stem}.traj.csv"));
        let mut w = BufWriter::new(File::create(&p).map_err(io_err(&p))?);
        writeln!(w, "{}", trajectory::header(n)).map_err(io_err(&p))?;
        Some((p, w))
    } else {
        None
    };

    let start = Instant::now();
    let mut ma = MovingAverage::new(cfg.window);
    let mut scores = Vec::with_capacity(cfg.hyper.episodes as usize);
    let mut failure = None;
    for ep in 0..cfg.hyper.episodes {
        let dump = cfg.trajectory_every > 0 && ep % cfg.trajectory_every == 0;
        let result: sam_core::Result<EpisodeLog> = match (cfg.method, dump, traj.as_mut()) {
            (Method::Ircr, _, _) => run_ircr_episode(&world, &mut team, &cfg.hyper, &mut rng),
            (_, true, Some((_, w))) => {
                let mut io_status = Ok(());
                let log = run_episode_observed(&world, &mut team, &cfg.hyper, &mut rng, &mut |tr, st| {
                    if io_status.is_ok() {
                        io_status = trajectory::write_step(w, ep, tr, st);
                    }
                });
                if let Err(e) = io_status {
                    return Err(HarnessError::Io {
                        path: dir.join(format!("{stem}.traj.csv")),
                        source: e,
                    });
                }
                log
            }
            _ => run_episode(&world, &mut team, &cfg.hyper, &mut rng),
        };
        let log = match result {
            Ok(log) => log,
            Err(e) => {
                failure = Some(format!("episode {ep}: {e}"));
                break;
            }
        };
        let s = score(&log, cfg.task);
        scores.push(s);
        let row = MetricsRow {
            episode: ep,
            returns: log.env_returns.clone(),
            score: s,
            moving_average: ma.push(s),
        };
        metrics.write_row(&row).map_err(io_err(&mpath))?;
        writeln!(timing, "{ep},{:.3}", start.elapsed().as_secs_f64()).map_err(io_err(&tpath))?;
        let done = ep + 1;
        if cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done < cfg.hyper.episodes {
            let p = dir.join(format!("{stem}.ep{done}.ckpt"));
            checkpoint(cfg, &team, done).save(&p)?;
        }
    }

    metrics.flush().map_err(io_err(&mpath))?;
    timing.flush().map_err(io_err(&tpath))?;
    if let Some((p, mut w)) = traj {
        w.flush().map_err(io_err(&p))?;
    }
    let final_name = if failure.is_some() {
        format!("{stem}.partial.ckpt")
    } else {
        format!("{stem}.ckpt")
    };
    let final_path = dir.join(final_name);
    checkpoint(cfg, &team, scores.len() as u64).save(&final_path)?;
    if let Some(msg) = &failure {
        std::fs::write(&failed_marker, format!("{msg}\n")).map_err(io_err(&failed_marker))?;
    }
    Ok(RunResult {
        seed,
        metrics_path: mpath,
        scores,
        failure,
    })
}

fn checkpoint(cfg: &ExperimentConfig, team: &Team, episode: u64) -> Checkpoint {
    Checkpoint {
        task: cfg.task,
        world: cfg.world,
        gamma: cfg.hyper.gamma,
        episode,
        team: team.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub per_seed: Vec<(u64, f64)>,
    pub mean: f64,
    pub std: f64,
}

/// Final-window statistics recomputed from the metrics files on disk.
pub fn summarize(cfg: &ExperimentConfig) -> Result<Summary, HarnessError> {
    let mut per_seed = Vec::new();
    for &seed in &cfg.seeds {
        let rows = read_metrics(&metrics_path(cfg, seed))?;
        per_seed.push((seed, final_window_mean(&rows, cfg.final_window)));
    }
    let values: Vec<f64> = per_seed.iter().map(|(_, v)| *v).collect();
    let (mean, std) = mean_std(&values);
    Ok(Summary { per_seed, mean, std })
}

pub fn write_summary(path: &Path, method: Method, s: &Summary) -> Result<(), HarnessError> {
    let mut out = String::from("method,seed,final_window_mean\n");
    for (seed, v) in &s.per_seed {
        out.push_str(&format!("{},{seed},{v}\n", method.name()));
    }
    out.push_str(&format!("{},mean,{}\n{},std,{}\n", method.name(), s.mean, method.name(), s.std));
    std::fs::write(path, out).map_err(io_err(path))
}

/// Trains every configured seed, then writes the summary. Returns the
/// per-seed results; failed seeds are excluded from the summary.
pub fn train(cfg: &ExperimentConfig) -> Result<(Vec<RunResult>, Summary), HarnessError> {
    let mut results = Vec::new();
    for &seed in &cfg.seeds {
        results.push(train_seed(cfg, seed)?);
    }
    let ok: Vec<u64> = results.iter().filter(|r| r.failure.is_none()).map(|r| r.seed).collect();
    let summary_cfg = ExperimentConfig {
        seeds: ok,
        ..cfg.clone()
    };
    let summary = summarize(&summary_cfg)?;
    write_summary(&summary_path(cfg), cfg.method, &summary)?;
    Ok((results, summary))
}
