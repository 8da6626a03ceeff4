use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::advice::{
    look_ahead_advice, look_back_advice, make_anchors, potential, terminal_look_back_advice,
    AdviceMode, AnchorMap,
};
use crate::error::{check_len, Error, Result};
use crate::samac::{corrected_td, lr_schedule, td_error, AgentLearner, Hyperparams};
use crate::world::{JointAction, World, WorldState};

/// One time step of experience.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observations: Vec<Vec<f64>>,
    pub joint_obs: Vec<f64>,
    /// Raw (unclipped) policy samples.
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub potentials: Vec<f64>,
    pub advice: Vec<f64>,
    pub next_joint_obs: Vec<f64>,
    pub terminal: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeLog {
    /// Undiscounted environment return per entity.
    pub env_returns: Vec<f64>,
    /// Undiscounted environment-plus-advice return per entity.
    pub shaped_returns: Vec<f64>,
    pub advice_sums: Vec<f64>,
    pub length: u32,
    pub collisions: u32,
    pub newly_covered: u32,
    pub captures: u32,
    /// Potential of the first step, per entity.
    pub first_potentials: Vec<f64>,
}

/// All learners of a run plus the shared update counter driving the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Team {
    pub learners: Vec<AgentLearner>,
    pub updates: u64,
}

impl Team {
    pub fn new(learners: Vec<AgentLearner>) -> Self {
        Self {
            learners,
            updates: 0,
        }
    }

    /// Checks learner shapes against the task.
    pub fn check(&self, world: &World) -> Result<()> {
        let task = world.task;
        check_len("learner count", task.n_entities(), self.learners.len())?;
        for (i, l) in self.learners.iter().enumerate() {
            check_len("actor input", task.obs_len(i), l.policy.mean_net.input_len())?;
            check_len("actor output", 2, l.policy.action_dim())?;
            check_len("critic input", task.joint_obs_len(), l.critic.value_net.input_len())?;
        }
        Ok(())
    }
}

fn potentials(team: &Team, state: &WorldState, action: &JointAction, anchors: &AnchorMap) -> Vec<f64> {
    team.learners
        .iter()
        .enumerate()
        .map(|(i, l)| match (l.mode, &l.potential) {
            (AdviceMode::None, _) | (_, None) => 0.0,
            (_, Some(spec)) => potential(spec, state, action, anchors, i),
        })
        .collect()
}

fn sample_actions<R: Rng + ?Sized>(
    team: &Team,
    obs: &[Vec<f64>],
    rng: &mut R,
    greedy: bool,
) -> Result<Vec<Vec<f64>>> {
    team.learners
        .iter()
        .zip(obs)
        .map(|(l, o)| {
            if greedy {
                l.policy.mean(o)
            } else {
                l.policy.sample(o, rng).map(|(a, _)| a)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Play {
    Learn,
    Collect,
    /// Mean actions, no updates.
    Greedy,
}

fn observe_all(world: &World, state: &WorldState) -> Result<Vec<Vec<f64>>> {
    (0..world.task.n_entities()).map(|i| world.observe(state, i)).collect()
}

/// Plays one episode. With `learn` set, every agent's actor and critic are
/// updated after every step; otherwise parameters are left untouched.
pub(crate) fn rollout<R: Rng + ?Sized>(
    world: &World,
    team: &mut Team,
    h: &Hyperparams,
    rng: &mut R,
    play: Play,
    mut observer: Option<&mut dyn FnMut(&Transition, &WorldState)>,
) -> Result<EpisodeLog> {
    team.check(world)?;
    let learn = play == Play::Learn;
    let greedy = play == Play::Greedy;
    let n = world.task.n_entities();
    let gamma = h.gamma;
    let mut state = world.reset(rng);
    let anchors = make_anchors(&state);
    let mut obs = observe_all(world, &state)?;
    let mut joint = world.joint_observation(&state);
    let mut raw = sample_actions(team, &obs, rng, greedy)?;
    let mut action = JointAction::from_raw(&raw)?;
    let mut phi = potentials(team, &state, &action, &anchors);
    let mut phi_prev = vec![0.0; n];

    let mut log = EpisodeLog {
        env_returns: vec![0.0; n],
        shaped_returns: vec![0.0; n],
        advice_sums: vec![0.0; n],
        first_potentials: phi.clone(),
        ..EpisodeLog::default()
    };

    loop {
        let out = world.step(&state, &action)?;
        let terminal = out.done;
        let next_obs = observe_all(world, &out.state)?;
        let next_joint = world.joint_observation(&out.state);
        let next = if terminal {
            None
        } else {
            let next_raw = sample_actions(team, &next_obs, rng, greedy)?;
            let next_action = JointAction::from_raw(&next_raw)?;
            let next_phi = potentials(team, &out.state, &next_action, &anchors);
            Some((next_raw, next_action, next_phi))
        };

        let mut advice = vec![0.0; n];
        for i in 0..n {
            advice[i] = match team.learners[i].mode {
                AdviceMode::None => 0.0,
                AdviceMode::LookAhead => {
                    let phi_next = next.as_ref().map_or(0.0, |(_, _, p)| p[i]);
                    look_ahead_advice(phi[i], phi_next, gamma)
                }
                AdviceMode::LookBack if terminal => terminal_look_back_advice(phi[i], phi_prev[i], gamma)?,
                AdviceMode::LookBack => look_back_advice(phi[i], phi_prev[i], gamma)?,
            };
        }

        if learn {
            let (actor_rate, critic_rate) = lr_schedule(h, team.updates);
            for (i, learner) in team.learners.iter_mut().enumerate() {
                let v_s = learner.critic.value(&joint)?;
                let v_next = if terminal { 0.0 } else { learner.critic.value(&next_joint)? };
                let delta = td_error(out.rewards[i], advice[i], v_s, v_next, gamma, terminal);
                let delta_tilde = corrected_td(delta, phi[i], learner.mode);
                let at = |e: Error| e.at(i, team.updates);
                learner
                    .actor_update(delta_tilde, &obs[i], &raw[i], actor_rate, h)
                    .map_err(at)?;
                learner.critic_update(delta, &joint, critic_rate, h).map_err(at)?;
            }
            team.updates += 1;
        }

        for i in 0..n {
            log.env_returns[i] += out.rewards[i];
            log.shaped_returns[i] += out.rewards[i] + advice[i];
            log.advice_sums[i] += advice[i];
        }
        log.length += 1;
        log.collisions += out.events.agent_collisions.len() as u32;
        log.newly_covered += out.events.newly_covered.len() as u32;
        log.captures += out.events.captures.len() as u32;

        if let Some(f) = observer.as_mut() {
            let tr = Transition {
                observations: obs.clone(),
                joint_obs: joint.clone(),
                actions: raw.clone(),
                rewards: out.rewards.clone(),
                potentials: phi.clone(),
                advice: advice.clone(),
                next_joint_obs: next_joint.clone(),
                terminal,
            };
            f(&tr, &out.state);
        }

        match next {
            None => break,
            Some((next_raw, next_action, next_phi)) => {
                state = out.state;
                obs = next_obs;
                joint = next_joint;
                raw = next_raw;
                action = next_action;
                phi_prev = core::mem::replace(&mut phi, next_phi);
            }
        }
    }
    Ok(log)
}

/// Runs one training episode with online per-step actor and critic updates.
pub fn run_episode<R: Rng + ?Sized>(
    world: &World,
    team: &mut Team,
    h: &Hyperparams,
    rng: &mut R,
) -> Result<EpisodeLog> {
    rollout(world, team, h, rng, Play::Learn, None)
}

/// Like [`run_episode`], also handing every transition and the post-step state
/// to `observer`.
pub fn run_episode_observed<R: Rng + ?Sized>(
    world: &World,
    team: &mut Team,
    h: &Hyperparams,
    rng: &mut R,
    observer: &mut dyn FnMut(&Transition, &WorldState),
) -> Result<EpisodeLog> {
    rollout(world, team, h, rng, Play::Learn, Some(observer))
}

/// Collects an episode without touching any parameters.
pub fn collect_episode<R: Rng + ?Sized>(
    world: &World,
    team: &mut Team,
    h: &Hyperparams,
    rng: &mut R,
    observer: &mut dyn FnMut(&Transition, &WorldState),
) -> Result<EpisodeLog> {
    rollout(world, team, h, rng, Play::Collect, Some(observer))
}

/// Plays one episode with every agent taking its mean action. The rng only
/// drives the initial state.
pub fn greedy_episode<R: Rng + ?Sized>(
    world: &World,
    team: &mut Team,
    h: &Hyperparams,
    rng: &mut R,
) -> Result<EpisodeLog> {
    rollout(world, team, h, rng, Play::Greedy, None)
}
