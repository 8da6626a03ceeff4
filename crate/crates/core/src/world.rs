//! Seeded 2D particle simulator for the three sparse-reward tasks.
//!
//! Entity layout: CN has `n` agents. PD has `n` cooperating agents followed by
//! the adversary. PP has `n` predators followed by the prey. Landmarks are the
//! CN/PD goal landmarks or the two PP obstacles.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_len, Error, Result};

pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    CooperativeNavigation { n_agents: usize },
    PhysicalDeception { n_agents: usize, n_landmarks: usize },
    PredatorPrey { n_predators: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Agent,
    Adversary,
    Predator,
    Prey,
}

impl TaskKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TaskKind::CooperativeNavigation { n_agents } if n_agents >= 1 => Ok(()),
            TaskKind::PhysicalDeception {
                n_agents,
                n_landmarks,
            } if n_agents >= 2 && n_agents == n_landmarks => Ok(()),
            TaskKind::PredatorPrey { n_predators } if n_predators >= 1 => Ok(()),
            other => Err(Error::Config(format!("invalid task {other:?}"))),
        }
    }

    /// Number of acting entities (learners).
    pub fn n_entities(&self) -> usize {
        match *self {
            TaskKind::CooperativeNavigation { n_agents } => n_agents,
            TaskKind::PhysicalDeception { n_agents, .. } => n_agents + 1,
            TaskKind::PredatorPrey { n_predators } => n_predators + 1,
        }
    }

    pub fn n_landmarks(&self) -> usize {
        match *self {
            TaskKind::CooperativeNavigation { n_agents } => n_agents,
            TaskKind::PhysicalDeception { n_landmarks, .. } => n_landmarks,
            TaskKind::PredatorPrey { .. } => 2,
        }
    }

    /// Count of cooperating agents (CN agents, PD non-adversaries, PP predators).
    pub fn n_team(&self) -> usize {
        match *self {
            TaskKind::CooperativeNavigation { n_agents } => n_agents,
            TaskKind::PhysicalDeception { n_agents, .. } => n_agents,
            TaskKind::PredatorPrey { n_predators } => n_predators,
        }
    }

    pub fn role(&self, entity: usize) -> Role {
        match *self {
            TaskKind::CooperativeNavigation { .. } => Role::Agent,
            TaskKind::PhysicalDeception { n_agents, .. } if entity == n_agents => Role::Adversary,
            TaskKind::PhysicalDeception { .. } => Role::Agent,
            TaskKind::PredatorPrey { n_predators } if entity == n_predators => Role::Prey,
            TaskKind::PredatorPrey { .. } => Role::Predator,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            TaskKind::CooperativeNavigation { .. } => "cn",
            TaskKind::PhysicalDeception { .. } => "pd",
            TaskKind::PredatorPrey { .. } => "pp",
        }
    }

    pub fn obs_len(&self, entity: usize) -> usize {
        let base = 4 + 2 * self.n_landmarks() + 2 * (self.n_entities() - 1);
        if self.role(entity) == Role::Predator {
            base + 2
        } else {
            base
        }
    }

    pub fn joint_obs_len(&self) -> usize {
        (0..self.n_entities()).map(|i| self.obs_len(i)).sum()
    }
}

/// Physics and reward constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldParams {
    pub dt: f64,
    pub damping: f64,
    pub accel_gain: f64,
    pub max_speed: f64,
    /// Prey speed cap and acceleration relative to a predator.
    pub prey_speed_factor: f64,
    pub agent_radius: f64,
    pub landmark_radius: f64,
    pub obstacle_radius: f64,
    /// Center distance at which an agent covers a landmark.
    pub cover_radius: f64,
    pub arena_half_width: f64,
    pub contact_stiffness: f64,
    pub episode_length: u32,
    pub r_reach: f64,
    pub p_collide: f64,
    pub r_catch: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            damping: 0.5,
            accel_gain: 5.0,
            max_speed: 1.0,
            prey_speed_factor: 1.3,
            agent_radius: 0.05,
            landmark_radius: 0.05,
            obstacle_radius: 0.15,
            cover_radius: 0.1,
            arena_half_width: 1.5,
            contact_stiffness: 20.0,
            episode_length: 25,
            r_reach: 1.0,
            p_collide: 1.0,
            r_catch: 10.0,
        }
    }
}

impl WorldParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("accel_gain", self.accel_gain),
            ("max_speed", self.max_speed),
            ("prey_speed_factor", self.prey_speed_factor),
            ("agent_radius", self.agent_radius),
            ("landmark_radius", self.landmark_radius),
            ("obstacle_radius", self.obstacle_radius),
            ("cover_radius", self.cover_radius),
            ("arena_half_width", self.arena_half_width),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("world.{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.damping) {
            return Err(Error::Config(format!("world.damping must be in [0, 1], got {}", self.damping)));
        }
        if self.episode_length == 0 {
            return Err(Error::Config("world.episode_length must be positive".into()));
        }
        if self.arena_half_width < 1.0 {
            return Err(Error::Config("world.arena_half_width must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub task: TaskKind,
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub landmark_positions: Vec<Vec2>,
    pub radii: Vec<f64>,
    /// True landmark in PD.
    pub target_index: Option<usize>,
    pub step: u32,
    /// Per-landmark coverage after the previous step (CN reward bookkeeping).
    pub covered: Vec<bool>,
}

/// Per-agent 2D force, each component in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAction(pub Vec<Vec2>);

impl JointAction {
    pub fn zeros(n: usize) -> Self {
        Self(vec![[0.0; 2]; n])
    }

    /// Clamps raw policy outputs into the action box.
    pub fn from_raw(raw: &[Vec<f64>]) -> Result<Self> {
        raw.iter()
            .map(|a| {
                check_len("agent action", 2, a.len())?;
                Ok([a[0].clamp(-1.0, 1.0), a[1].clamp(-1.0, 1.0)])
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Events {
    /// Overlapping pairs of cooperating agents (CN/PD).
    pub agent_collisions: Vec<(usize, usize)>,
    /// Predators touching the prey.
    pub captures: Vec<usize>,
    /// Landmarks covered now but not after the previous step.
    pub newly_covered: Vec<usize>,
    pub covered_count: usize,
    pub target_by_agents: bool,
    pub target_by_adversary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: WorldState,
    pub rewards: Vec<f64>,
    pub events: Events,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub task: TaskKind,
    pub params: WorldParams,
}

pub fn dist(a: Vec2, b: Vec2) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

impl World {
    pub fn new(task: TaskKind, params: WorldParams) -> Result<Self> {
        task.validate()?;
        params.validate()?;
        Ok(Self { task, params })
    }

    fn max_speed(&self, entity: usize) -> f64 {
        match self.task.role(entity) {
            Role::Prey => self.params.max_speed * self.params.prey_speed_factor,
            _ => self.params.max_speed,
        }
    }

    fn accel_gain(&self, entity: usize) -> f64 {
        match self.task.role(entity) {
            Role::Prey => self.params.accel_gain * self.params.prey_speed_factor,
            _ => self.params.accel_gain,
        }
    }

    fn landmarks_are_solid(&self) -> bool {
        matches!(self.task, TaskKind::PredatorPrey { .. })
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> WorldState {
        let n = self.task.n_entities();
        let n_land = self.task.n_landmarks();
        let mut sample = || -> Vec2 { [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)] };
        let positions: Vec<Vec2> = (0..n).map(|_| sample()).collect();
        let landmark_positions: Vec<Vec2> = (0..n_land).map(|_| sample()).collect();
        let target_index = match self.task {
            TaskKind::PhysicalDeception { n_landmarks, .. } => Some(rng.random_range(0..n_landmarks)),
            _ => None,
        };
        let mut state = WorldState {
            task: self.task,
            positions,
            velocities: vec![[0.0; 2]; n],
            landmark_positions,
            radii: vec![self.params.agent_radius; n],
            target_index,
            step: 0,
            covered: vec![false; n_land],
        };
        state.covered = self.coverage(&state);
        state
    }

    fn coverage(&self, state: &WorldState) -> Vec<bool> {
        let team = self.task.n_team();
        state
            .landmark_positions
            .iter()
            .map(|&l| {
                !self.landmarks_are_solid()
                    && state.positions[..team]
                        .iter()
                        .any(|&p| dist(p, l) < self.params.cover_radius)
            })
            .collect()
    }

    fn contact_forces(&self, state: &WorldState) -> Vec<Vec2> {
        let n = state.positions.len();
        let k = self.params.contact_stiffness;
        let mut forces = vec![[0.0; 2]; n];
        let push = |pi: Vec2, pj: Vec2, min_dist: f64| -> Option<Vec2> {
            let (dx, dy) = (pi[0] - pj[0], pi[1] - pj[1]);
            let d = libm::hypot(dx, dy);
            if d >= min_dist {
                return None;
            }
            let (ux, uy) = if d > 1e-12 { (dx / d, dy / d) } else { (1.0, 0.0) };
            let mag = k * (min_dist - d);
            Some([mag * ux, mag * uy])
        };
        for i in 0..n {
            for j in (i + 1)..n {
                if let Some(f) = push(state.positions[i], state.positions[j], state.radii[i] + state.radii[j]) {
                    forces[i][0] += f[0];
                    forces[i][1] += f[1];
                    forces[j][0] -= f[0];
                    forces[j][1] -= f[1];
                }
            }
            if self.landmarks_are_solid() {
                for &l in &state.landmark_positions {
                    if let Some(f) = push(state.positions[i], l, state.radii[i] + self.params.obstacle_radius) {
                        forces[i][0] += f[0];
                        forces[i][1] += f[1];
                    }
                }
            }
        }
        forces
    }

    /// Advances one time step under the double-integrator dynamics.
    pub fn step(&self, state: &WorldState, action: &JointAction) -> Result<StepOutcome> {
        let n = self.task.n_entities();
        check_len("joint action", n, action.0.len())?;
        if action.0.iter().flatten().any(|v| v.is_nan()) {
            return Err(Error::Input("NaN in joint action".into()));
        }
        let p = &self.params;
        let contact = self.contact_forces(state);
        let mut next = state.clone();
        let bound = p.arena_half_width;
        for i in 0..n {
            let gain = self.accel_gain(i);
            let mut v = state.velocities[i];
            for d in 0..2 {
                let accel = gain * action.0[i][d].clamp(-1.0, 1.0) + contact[i][d];
                v[d] = p.damping * v[d] + accel * p.dt;
            }
            let speed = libm::hypot(v[0], v[1]);
            let cap = self.max_speed(i);
            if speed > cap {
                v = [v[0] * cap / speed, v[1] * cap / speed];
            }
            let mut pos = state.positions[i];
            for d in 0..2 {
                pos[d] += v[d] * p.dt;
                if pos[d] > bound || pos[d] < -bound {
                    pos[d] = pos[d].clamp(-bound, bound);
                    v[d] = 0.0;
                }
            }
            next.positions[i] = pos;
            next.velocities[i] = v;
        }
        next.step = state.step + 1;
        let events = self.events(state, &next);
        next.covered = self.coverage(&next);
        let rewards = self.sparse_reward(&next, &events);
        let done = next.step >= p.episode_length;
        Ok(StepOutcome {
            state: next,
            rewards,
            events,
            done,
        })
    }

    fn events(&self, before: &WorldState, after: &WorldState) -> Events {
        let mut ev = Events::default();
        let team = self.task.n_team();
        let touching = |i: usize, j: usize| {
            dist(after.positions[i], after.positions[j]) < after.radii[i] + after.radii[j]
        };
        match self.task {
            TaskKind::PredatorPrey { n_predators } => {
                ev.captures = (0..n_predators).filter(|&j| touching(j, n_predators)).collect();
            }
            _ => {
                for i in 0..team {
                    for j in (i + 1)..team {
                        if touching(i, j) {
                            ev.agent_collisions.push((i, j));
                        }
                    }
                }
                let covered = self.coverage(after);
                ev.covered_count = covered.iter().filter(|&&c| c).count();
                ev.newly_covered = covered
                    .iter()
                    .zip(&before.covered)
                    .enumerate()
                    .filter(|(_, (now, prev))| **now && !**prev)
                    .map(|(k, _)| k)
                    .collect();
                if let Some(t) = after.target_index {
                    let target = after.landmark_positions[t];
                    let r = self.params.cover_radius;
                    ev.target_by_agents = after.positions[..team].iter().any(|&q| dist(q, target) < r);
                    ev.target_by_adversary = dist(after.positions[team], target) < r;
                }
            }
        }
        ev
    }

    /// Sparse per-entity rewards for the events of the last step.
    pub fn sparse_reward(&self, state_after: &WorldState, events: &Events) -> Vec<f64> {
        let p = &self.params;
        let n = self.task.n_entities();
        let mut r = vec![0.0; n];
        match self.task {
            TaskKind::CooperativeNavigation { .. } => {
                let reach = p.r_reach * events.newly_covered.len() as f64;
                for ri in r.iter_mut() {
                    *ri += reach;
                }
                for &(i, j) in &events.agent_collisions {
                    r[i] -= p.p_collide;
                    r[j] -= p.p_collide;
                }
            }
            TaskKind::PhysicalDeception { n_agents, .. } => {
                let mut team = 0.0;
                if events.target_by_agents {
                    team += p.r_reach;
                }
                if events.target_by_adversary {
                    team -= p.r_reach;
                    r[n_agents] = p.r_reach;
                }
                for ri in &mut r[..n_agents] {
                    *ri = team;
                }
            }
            TaskKind::PredatorPrey { n_predators } => {
                let caught = events.captures.len() as f64 * p.r_catch;
                for ri in &mut r[..n_predators] {
                    *ri = caught;
                }
                r[n_predators] = -caught;
            }
        }
        debug_assert_eq!(state_after.positions.len(), n);
        r
    }

    /// Local observation of one entity; positions of others are relative to itself.
    pub fn observe(&self, state: &WorldState, entity: usize) -> Result<Vec<f64>> {
        let n = self.task.n_entities();
        if entity >= n {
            return Err(Error::Input(format!("entity index {entity} out of range ({n} entities)")));
        }
        let me = state.positions[entity];
        let mut obs = Vec::with_capacity(self.task.obs_len(entity));
        obs.extend_from_slice(&state.velocities[entity]);
        obs.extend_from_slice(&me);
        for l in &state.landmark_positions {
            obs.push(l[0] - me[0]);
            obs.push(l[1] - me[1]);
        }
        for (j, q) in state.positions.iter().enumerate() {
            if j != entity {
                obs.push(q[0] - me[0]);
                obs.push(q[1] - me[1]);
            }
        }
        if let TaskKind::PredatorPrey { n_predators } = self.task {
            if entity < n_predators {
                obs.extend_from_slice(&state.velocities[n_predators]);
            }
        }
        Ok(obs)
    }

    /// Concatenated observations of every entity (the critic input).
    pub fn joint_observation(&self, state: &WorldState) -> Vec<f64> {
        let mut joint = Vec::with_capacity(self.task.joint_obs_len());
        for i in 0..self.task.n_entities() {
            joint.extend(self.observe(state, i).unwrap_or_default());
        }
        joint
    }
}
