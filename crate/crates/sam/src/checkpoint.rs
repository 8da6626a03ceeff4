//! Line-oriented text checkpoints. Floats are written with Rust's shortest
//! round-trip formatting, so a reload is bit-exact.
//!
//! ```text
//! sam-checkpoint 1
//! task cn 3
//! episode 500
//! updates 12500
//! gamma 0.95
//! world dt=0.1 damping=0.5 ...
//! agent 0 look_ahead uniform 1 1 0.1
//! actor 10 64 64 2
//! <actor parameters>
//! log_std -0.7 -0.7
//! critic 24 64 64 1
//! <critic parameters>
//! ...
//! end
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sam_core::advice::{AdviceMode, PotentialSpec, PotentialVariant};
use sam_core::numkit::{MlpParams, PolicyParams, ValueParams};
use sam_core::samac::{AgentLearner, Team};
use sam_core::world::{TaskKind, WorldParams};

use crate::{io_err, HarnessError};

const MAGIC: &str = "sam-checkpoint 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub task: TaskKind,
    pub world: WorldParams,
    pub gamma: f64,
    /// Episodes completed when the checkpoint was taken.
    pub episode: u64,
    pub team: Team,
}

fn mode_name(m: AdviceMode) -> &'static str {
    match m {
        AdviceMode::None => "none",
        AdviceMode::LookAhead => "look_ahead",
        AdviceMode::LookBack => "look_back",
    }
}

fn join(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 22);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

fn join_sizes(sizes: &[usize]) -> String {
    sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

fn world_fields(w: &WorldParams) -> Vec<(&'static str, f64)> {
    vec![
        ("dt", w.dt),
        ("damping", w.damping),
        ("accel_gain", w.accel_gain),
        ("max_speed", w.max_speed),
        ("prey_speed_factor", w.prey_speed_factor),
        ("agent_radius", w.agent_radius),
        ("landmark_radius", w.landmark_radius),
        ("obstacle_radius", w.obstacle_radius),
        ("cover_radius", w.cover_radius),
        ("arena_half_width", w.arena_half_width),
        ("contact_stiffness", w.contact_stiffness),
        ("episode_length", f64::from(w.episode_length)),
        ("r_reach", w.r_reach),
        ("p_collide", w.p_collide),
        ("r_catch", w.r_catch),
    ]
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{MAGIC}").unwrap();
        match self.task {
            TaskKind::CooperativeNavigation { n_agents } => writeln!(s, "task cn {n_agents}"),
            TaskKind::PhysicalDeception {
                n_agents,
                n_landmarks,
            } => writeln!(s, "task pd {n_agents} {n_landmarks}"),
            TaskKind::PredatorPrey { n_predators } => writeln!(s, "task pp {n_predators}"),
        }
        .unwrap();
        writeln!(s, "episode {}", self.episode).unwrap();
        writeln!(s, "updates {}", self.team.updates).unwrap();
        writeln!(s, "gamma {}", self.gamma).unwrap();
        let world: Vec<String> = world_fields(&self.world)
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(s, "world {}", world.join(" ")).unwrap();
        for (i, l) in self.team.learners.iter().enumerate() {
            write!(s, "agent {i} {}", mode_name(l.mode)).unwrap();
            match &l.potential {
                None => writeln!(s, " none"),
                Some(p) => {
                    let v = match p.variant {
                        PotentialVariant::Uniform => "uniform",
                        PotentialVariant::NonUniform => "non_uniform",
                    };
                    writeln!(s, " {v} {} {} {}", p.alpha, p.beta, p.m)
                }
            }
            .unwrap();
            writeln!(s, "actor {}", join_sizes(l.policy.mean_net.sizes())).unwrap();
            writeln!(s, "{}", join(l.policy.mean_net.flat())).unwrap();
            writeln!(s, "log_std {}", join(&l.policy.log_std)).unwrap();
            writeln!(s, "critic {}", join_sizes(l.critic.value_net.sizes())).unwrap();
            writeln!(s, "{}", join(l.critic.value_net.flat())).unwrap();
        }
        writeln!(s, "end").unwrap();
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_text()).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, HarnessError> {
        let mut p = LineParser {
            lines: text.lines().enumerate(),
            path: path.to_path_buf(),
            line: 0,
        };
        let magic = p.next_line()?;
        if magic != MAGIC {
            return Err(p.err(format!("expected `{MAGIC}`")));
        }

        let t = p.keyed("task")?;
        let task = match t.as_slice() {
            ["cn", n] => TaskKind::CooperativeNavigation {
                n_agents: p.num(n)?,
            },
            ["pd", n, l] => TaskKind::PhysicalDeception {
                n_agents: p.num(n)?,
                n_landmarks: p.num(l)?,
            },
            ["pp", n] => TaskKind::PredatorPrey {
                n_predators: p.num(n)?,
            },
            _ => return Err(p.err("malformed task line".into())),
        };
        task.validate().map_err(|e| p.err(e.to_string()))?;
        let episode = p.single("episode")?;
        let updates = p.single("updates")?;
        let gamma = p.single("gamma")?;

        let mut world = WorldParams::default();
        let fields = p.keyed("world")?;
        let expected = world_fields(&world).len();
        if fields.len() != expected {
            return Err(p.err(format!("expected {expected} world fields, got {}", fields.len())));
        }
        for kv in fields {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| p.err(format!("malformed world field `{kv}`")))?;
            let v: f64 = p.num(v)?;
            match k {
                "dt" => world.dt = v,
                "damping" => world.damping = v,
                "accel_gain" => world.accel_gain = v,
                "max_speed" => world.max_speed = v,
                "prey_speed_factor" => world.prey_speed_factor = v,
                "agent_radius" => world.agent_radius = v,
                "landmark_radius" => world.landmark_radius = v,
                "obstacle_radius" => world.obstacle_radius = v,
                "cover_radius" => world.cover_radius = v,
                "arena_half_width" => world.arena_half_width = v,
                "contact_stiffness" => world.contact_stiffness = v,
                "episode_length" => world.episode_length = v as u32,
                "r_reach" => world.r_reach = v,
                "p_collide" => world.p_collide = v,
                "r_catch" => world.r_catch = v,
                _ => return Err(p.err(format!("unknown world field `{k}`"))),
            }
        }
        world.validate().map_err(|e| p.err(e.to_string()))?;

        let mut learners = Vec::new();
        for i in 0..task.n_entities() {
            let a = p.keyed("agent")?;
            if a.first().map(|s| p.num::<usize>(s)).transpose()? != Some(i) {
                return Err(p.err(format!("expected agent {i}")));
            }
            let mode = match a.get(1).copied() {
                Some("none") => AdviceMode::None,
                Some("look_ahead") => AdviceMode::LookAhead,
                Some("look_back") => AdviceMode::LookBack,
                _ => return Err(p.err("unknown advice mode".into())),
            };
            let potential = match &a[2..] {
                ["none"] => None,
                [v, alpha, beta, m] => {
                    let variant = match *v {
                        "uniform" => PotentialVariant::Uniform,
                        "non_uniform" => PotentialVariant::NonUniform,
                        _ => return Err(p.err(format!("unknown potential variant `{v}`"))),
                    };
                    let spec = PotentialSpec {
                        task,
                        variant,
                        alpha: p.num(alpha)?,
                        beta: p.num(beta)?,
                        m: p.num(m)?,
                    };
                    spec.validate().map_err(|e| p.err(e.to_string()))?;
                    Some(spec)
                }
                _ => return Err(p.err("malformed potential".into())),
            };
            let mean_net = p.mlp("actor")?;
            let log_std = p.floats("log_std")?;
            let policy = PolicyParams::new(mean_net, log_std).map_err(|e| p.err(e.to_string()))?;
            let value_net = p.mlp("critic")?;
            let critic = ValueParams::new(value_net).map_err(|e| p.err(e.to_string()))?;
            learners.push(AgentLearner {
                policy,
                critic,
                mode,
                potential,
            });
        }
        if p.next_line()? != "end" {
            return Err(p.err("expected `end`".into()));
        }
        let mut team = Team::new(learners);
        team.updates = updates;
        Ok(Self {
            task,
            world,
            gamma,
            episode,
            team,
        })
    }
}

struct LineParser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    path: PathBuf,
    line: u64,
}

impl<'a> LineParser<'a> {
    fn err(&self, msg: String) -> HarnessError {
        HarnessError::Parse {
            path: self.path.clone(),
            line: self.line,
            msg,
        }
    }

    fn next_line(&mut self) -> Result<&'a str, HarnessError> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i as u64 + 1;
                Ok(l)
            }
            None => {
                self.line += 1;
                Err(self.err("unexpected end of file".into()))
            }
        }
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        s.parse::<T>().map_err(|e| self.err(format!("`{s}`: {e}")))
    }

    /// Next line, which must start with `key`; returns the remaining tokens.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>, HarnessError> {
        let l = self.next_line()?;
        let mut tokens = l.split_ascii_whitespace();
        if tokens.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(tokens.collect())
    }

    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        match self.keyed(key)?.as_slice() {
            [v] => self.num(v),
            _ => Err(self.err(format!("`{key}` takes one value"))),
        }
    }

    fn floats(&mut self, key: &str) -> Result<Vec<f64>, HarnessError> {
        let tokens = self.keyed(key)?;
        tokens.iter().map(|t| self.num(t)).collect()
    }

    fn mlp(&mut self, key: &str) -> Result<MlpParams, HarnessError> {
        let sizes = self
            .keyed(key)?
            .iter()
            .map(|t| self.num(t))
            .collect::<Result<Vec<usize>, _>>()?;
        let l = self.next_line()?;
        let params = l
            .split_ascii_whitespace()
            .map(|t| self.num(t))
            .collect::<Result<Vec<f64>, _>>()?;
        MlpParams::from_flat(&sizes, params).map_err(|e| self.err(e.to_string()))
    }
}
