//! Potential functions, landmark anchoring, and potential-based shaping advice.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::world::{dist, JointAction, Role, TaskKind, Vec2, WorldState};

/// How shaping advice is derived from consecutive potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdviceMode {
    None,
    LookAhead,
    LookBack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialVariant {
    /// Depends on the joint state only.
    Uniform,
    /// Adds a penalty on the angle between an agent's action and its anchor.
    NonUniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub task: TaskKind,
    pub variant: PotentialVariant,
    pub alpha: f64,
    pub beta: f64,
    /// Angle-penalty weight; ignored by the uniform variant.
    pub m: f64,
}

impl PotentialSpec {
    pub fn new(task: TaskKind, variant: PotentialVariant) -> Self {
        Self {
            task,
            variant,
            alpha: 1.0,
            beta: 1.0,
            m: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("advice.alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("advice.beta must be positive, got {}", self.beta)));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("advice.m must be nonnegative, got {}", self.m)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Landmark(usize),
    Entity(usize),
}

/// Per-episode assignment of each cooperating agent to its target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorMap {
    targets: Vec<Option<Anchor>>,
}

impl AnchorMap {
    pub fn get(&self, entity: usize) -> Option<Anchor> {
        self.targets.get(entity).copied().flatten()
    }

    pub fn as_slice(&self) -> &[Option<Anchor>] {
        &self.targets
    }

    fn position(&self, state: &WorldState, entity: usize) -> Option<Vec2> {
        self.get(entity).map(|a| match a {
            Anchor::Landmark(l) => state.landmark_positions[l],
            Anchor::Entity(e) => state.positions[e],
        })
    }
}

/// Greedy anchoring: repeatedly match the closest unmatched (agent, landmark)
/// pair. In PP every predator is anchored to the prey.
pub fn make_anchors(state: &WorldState) -> AnchorMap {
    let task = state.task;
    let n = task.n_entities();
    let mut targets = vec![None; n];
    match task {
        TaskKind::PredatorPrey { n_predators } => {
            for t in targets.iter_mut().take(n_predators) {
                *t = Some(Anchor::Entity(n_predators));
            }
        }
        _ => {
            let team = task.n_team();
            let n_land = state.landmark_positions.len();
            let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(team * n_land);
            for i in 0..team {
                for l in 0..n_land {
                    pairs.push((dist(state.positions[i], state.landmark_positions[l]), i, l));
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut land_used = vec![false; n_land];
            for (_, i, l) in pairs {
                if targets[i].is_none() && !land_used[l] {
                    targets[i] = Some(Anchor::Landmark(l));
                    land_used[l] = true;
                }
            }
        }
    }
    AnchorMap { targets }
}

/// Angle in `[0, pi]` between `action` and the direction `from -> to`.
/// Degenerate vectors give 0.
pub fn action_anchor_angle(action: Vec2, from: Vec2, to: Vec2) -> f64 {
    let d = [to[0] - from[0], to[1] - from[1]];
    let na = libm::hypot(action[0], action[1]);
    let nd = libm::hypot(d[0], d[1]);
    if na < 1e-8 || nd < 1e-8 {
        return 0.0;
    }
    let cos = (action[0] * d[0] + action[1] * d[1]) / (na * nd);
    libm::acos(cos.clamp(-1.0, 1.0))
}

/// Potential of `agent` for the joint state and joint action.
pub fn potential(
    spec: &PotentialSpec,
    state: &WorldState,
    action: &JointAction,
    anchors: &AnchorMap,
    agent: usize,
) -> f64 {
    let n = state.positions.len();
    let mut total_dist = 0.0;
    for j in 0..n {
        if let Some(target) = anchors.position(state, j) {
            total_dist += dist(state.positions[j], target);
        }
    }
    let closeness = spec.alpha * libm::exp(-spec.beta * total_dist);
    match spec.variant {
        PotentialVariant::Uniform => closeness,
        PotentialVariant::NonUniform => {
            let angle_of = |j: usize| -> f64 {
                match (anchors.position(state, j), action.0.get(j)) {
                    (Some(target), Some(&a)) => action_anchor_angle(a, state.positions[j], target),
                    _ => 0.0,
                }
            };
            let angles = if matches!(state.task, TaskKind::PredatorPrey { .. }) {
                (0..n)
                    .filter(|&j| state.task.role(j) == Role::Predator)
                    .map(angle_of)
                    .sum()
            } else {
                angle_of(agent)
            };
            -spec.m * angles + closeness
        }
    }
}

/// `gamma * phi_next - phi_t`.
pub fn look_ahead_advice(phi_t: f64, phi_next: f64, gamma: f64) -> f64 {
    gamma * phi_next - phi_t
}

/// `phi_t - phi_prev / gamma`; pass `phi_prev = 0` at the first step.
pub fn look_back_advice(phi_t: f64, phi_prev: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Config(format!(
            "look-back advice needs gamma > 0, got {gamma}"
        )));
    }
    Ok(phi_t - phi_prev / gamma)
}

/// Look-back advice on the transition into the terminal state. The terminal
/// state has zero potential, and the closing term `gamma * (0 - phi_t / gamma)`
/// is folded into this transition.
pub fn terminal_look_back_advice(phi_t: f64, phi_prev: f64, gamma: f64) -> Result<f64> {
    Ok(look_back_advice(phi_t, phi_prev, gamma)? - phi_t)
}

/// Advice for a whole episode given each step's potential `phi_t`.
///
/// `phis[t]` is the potential of the state-action pair at step `t`, the last
/// entry belonging to the transition into the terminal state.
pub fn episode_advice(mode: AdviceMode, phis: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let len = phis.len();
    (0..len)
        .map(|t| {
            let last = t + 1 == len;
            match mode {
                AdviceMode::None => Ok(0.0),
                AdviceMode::LookAhead => {
                    let next = if last { 0.0 } else { phis[t + 1] };
                    Ok(look_ahead_advice(phis[t], next, gamma))
                }
                AdviceMode::LookBack => {
                    let prev = if t == 0 { 0.0 } else { phis[t - 1] };
                    if last {
                        terminal_look_back_advice(phis[t], prev, gamma)
                    } else {
                        look_back_advice(phis[t], prev, gamma)
                    }
                }
            }
        })
        .collect()
}
