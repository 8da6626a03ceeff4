//! Experiment configuration: a flat file of dotted keys (`task.kind = "cn"`),
//! parsed as TOML. Unknown keys are errors.

use std::path::{Path, PathBuf};

use sam_core::advice::{AdviceMode, PotentialSpec, PotentialVariant};
use sam_core::samac::Hyperparams;
use sam_core::world::{TaskKind, WorldParams};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SamUniform,
    SamNonuniform,
    Sparse,
    Ircr,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::SamUniform => "sam_uniform",
            Method::SamNonuniform => "sam_nonuniform",
            Method::Sparse => "sparse",
            Method::Ircr => "ircr",
        }
    }

    pub fn is_sam(&self) -> bool {
        matches!(self, Method::SamUniform | Method::SamNonuniform)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    None,
    LookAhead,
    LookBack,
}

impl From<ModeName> for AdviceMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::None => AdviceMode::None,
            ModeName::LookAhead => AdviceMode::LookAhead,
            ModeName::LookBack => AdviceMode::LookBack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskName {
    Cn,
    Pd,
    Pp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    method: Method,
    task: RawTask,
    #[serde(default)]
    advice: RawAdvice,
    #[serde(default)]
    train: RawTrain,
    #[serde(default)]
    net: RawNet,
    #[serde(default)]
    world: RawWorld,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    metrics: RawMetrics,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    kind: TaskName,
    n: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdvice {
    mode: Option<ModeName>,
    alpha: Option<f64>,
    beta: Option<f64>,
    m: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrain {
    gamma: Option<f64>,
    actor_lr0: Option<f64>,
    critic_lr0: Option<f64>,
    actor_decay_exp: Option<f64>,
    critic_decay_exp: Option<f64>,
    projection_radius: Option<f64>,
    episodes: Option<u64>,
    grad_clip: Option<f64>,
    schedule_scale: Option<f64>,
    init_log_std: Option<f64>,
    seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNet {
    hidden: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorld {
    dt: Option<f64>,
    damping: Option<f64>,
    accel_gain: Option<f64>,
    max_speed: Option<f64>,
    prey_speed_factor: Option<f64>,
    agent_radius: Option<f64>,
    landmark_radius: Option<f64>,
    obstacle_radius: Option<f64>,
    cover_radius: Option<f64>,
    arena_half_width: Option<f64>,
    contact_stiffness: Option<f64>,
    episode_length: Option<u32>,
    r_reach: Option<f64>,
    p_collide: Option<f64>,
    r_catch: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    checkpoint_every: Option<u64>,
    trajectory_every: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetrics {
    window: Option<usize>,
    final_window: Option<usize>,
}

/// Validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub method: Method,
    /// Advice mode of the cooperating agents; `None` for sparse and IRCR.
    pub mode: AdviceMode,
    pub potential: Option<PotentialSpec>,
    pub hyper: Hyperparams,
    pub world: WorldParams,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Checkpoint every this many episodes (0 = only at the end).
    pub checkpoint_every: u64,
    /// Dump a trajectory every this many episodes (0 = never).
    pub trajectory_every: u64,
    /// Moving-average window of the metrics file.
    pub window: usize,
    /// Episodes at the end of a run that the summary averages.
    pub final_window: usize,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

pub fn task_from(kind: TaskName, n: usize) -> TaskKind {
    match kind {
        TaskName::Cn => TaskKind::CooperativeNavigation { n_agents: n },
        TaskName::Pd => TaskKind::PhysicalDeception {
            n_agents: n,
            n_landmarks: n,
        },
        TaskName::Pp => TaskKind::PredatorPrey { n_predators: n },
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.message().to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, HarnessError> {
        let task = task_from(raw.task.kind, raw.task.n);
        task.validate()
            .map_err(|_| config_err(format!("task.n = {} is invalid for task.kind {:?}", raw.task.n, raw.task.kind)))?;

        let mode = match (raw.method, raw.advice.mode) {
            (m, Some(ModeName::LookAhead | ModeName::LookBack)) if !m.is_sam() => {
                return Err(config_err(format!(
                    "advice.mode must be none (or absent) when method = {}",
                    m.name()
                )))
            }
            (m, Some(ModeName::None)) if m.is_sam() => {
                return Err(config_err(format!(
                    "advice.mode must be look_ahead or look_back when method = {}",
                    m.name()
                )))
            }
            (m, None) if m.is_sam() => AdviceMode::LookAhead,
            (_, Some(mode)) => mode.into(),
            (_, None) => AdviceMode::None,
        };

        let potential = if raw.method.is_sam() {
            let variant = if raw.method == Method::SamUniform {
                PotentialVariant::Uniform
            } else {
                PotentialVariant::NonUniform
            };
            let mut spec = PotentialSpec::new(task, variant);
            spec.alpha = raw.advice.alpha.unwrap_or(spec.alpha);
            spec.beta = raw.advice.beta.unwrap_or(spec.beta);
            spec.m = raw.advice.m.unwrap_or(spec.m);
            spec.validate().map_err(|e| config_err(e.to_string()))?;
            Some(spec)
        } else {
            if raw.advice.alpha.is_some() || raw.advice.beta.is_some() || raw.advice.m.is_some() {
                return Err(config_err(format!(
                    "advice.alpha/beta/m have no effect with method = {}",
                    raw.method.name()
                )));
            }
            None
        };

        let mut hyper = Hyperparams::default();
        let t = &raw.train;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(hyper.gamma, t.gamma);
        set!(hyper.actor_lr0, t.actor_lr0);
        set!(hyper.critic_lr0, t.critic_lr0);
        set!(hyper.actor_decay_exp, t.actor_decay_exp);
        set!(hyper.critic_decay_exp, t.critic_decay_exp);
        set!(hyper.projection_radius, t.projection_radius);
        set!(hyper.episodes, t.episodes);
        set!(hyper.grad_clip, t.grad_clip);
        set!(hyper.schedule_scale, t.schedule_scale);
        set!(hyper.init_log_std, t.init_log_std);
        set!(hyper.hidden, raw.net.hidden.clone());
        hyper.validate().map_err(|e| config_err(e.to_string()))?;
        if mode == AdviceMode::LookBack && hyper.gamma == 0.0 {
            return Err(config_err("train.gamma must be positive with look_back advice"));
        }

        let mut world = WorldParams::default();
        let w = &raw.world;
        set!(world.dt, w.dt);
        set!(world.damping, w.damping);
        set!(world.accel_gain, w.accel_gain);
        set!(world.max_speed, w.max_speed);
        set!(world.prey_speed_factor, w.prey_speed_factor);
        set!(world.agent_radius, w.agent_radius);
        set!(world.landmark_radius, w.landmark_radius);
        set!(world.obstacle_radius, w.obstacle_radius);
        set!(world.cover_radius, w.cover_radius);
        set!(world.arena_half_width, w.arena_half_width);
        set!(world.contact_stiffness, w.contact_stiffness);
        set!(world.episode_length, w.episode_length);
        set!(world.r_reach, w.r_reach);
        set!(world.p_collide, w.p_collide);
        set!(world.r_catch, w.r_catch);
        world.validate().map_err(|e| config_err(e.to_string()))?;

        let seeds = raw.train.seeds.clone().unwrap_or_else(|| vec![0]);
        if seeds.is_empty() {
            return Err(config_err("train.seeds must not be empty"));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err("train.seeds must be distinct"));
        }

        let window = raw.metrics.window.unwrap_or(1000);
        let final_window = raw.metrics.final_window.unwrap_or(1000);
        if window == 0 || final_window == 0 {
            return Err(config_err("metrics.window and metrics.final_window must be positive"));
        }

        Ok(Self {
            task,
            method: raw.method,
            mode,
            potential,
            hyper,
            world,
            seeds,
            output_dir: raw.output.dir.unwrap_or_else(|| PathBuf::from("runs")),
            checkpoint_every: raw.output.checkpoint_every.unwrap_or(0),
            trajectory_every: raw.output.trajectory_every.unwrap_or(0),
            window,
            final_window,
        })
    }

    /// File stem shared by all artifacts of one (method, seed) run.
    pub fn run_stem(&self, seed: u64) -> String {
        format!("{}_{}_seed{}", self.task.short_name(), self.method.name(), seed)
    }
}
