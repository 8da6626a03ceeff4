use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::advice::{AdviceMode, PotentialSpec};
use crate::error::{Error, Result};
use crate::numkit::{
    clip_norm, project_in_place, MlpParams, Parameters, PolicyParams, ValueParams, LOG_STD_INIT,
};

/// Learning hyperparameters shared by every agent of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    pub gamma: f64,
    pub actor_lr0: f64,
    pub critic_lr0: f64,
    pub actor_decay_exp: f64,
    pub critic_decay_exp: f64,
    pub projection_radius: f64,
    /// Training episodes per run.
    pub episodes: u64,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
    /// Norm cap on each update direction, applied before the learning rate.
    pub grad_clip: f64,
    /// Updates per unit of schedule time; 1 gives `lr0 / (1 + t)^p`.
    pub schedule_scale: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            actor_lr0: 1e-2,
            critic_lr0: 5e-2,
            actor_decay_exp: 0.85,
            critic_decay_exp: 0.6,
            projection_radius: 100.0,
            episodes: 1000,
            hidden: alloc::vec![64, 64],
            init_log_std: LOG_STD_INIT,
            grad_clip: 10.0,
            schedule_scale: 1.0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::Config(format!("{field} {msg}")));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("train.gamma", "must be in [0, 1]");
        }
        if !(self.actor_lr0 > 0.0 && self.actor_lr0.is_finite()) {
            return bad("train.actor_lr0", "must be positive");
        }
        if !(self.critic_lr0 > 0.0 && self.critic_lr0.is_finite()) {
            return bad("train.critic_lr0", "must be positive");
        }
        for (field, e) in [
            ("train.actor_decay_exp", self.actor_decay_exp),
            ("train.critic_decay_exp", self.critic_decay_exp),
        ] {
            if !(e > 0.5 && e <= 1.0) {
                return bad(field, "must be in (0.5, 1]");
            }
        }
        if self.actor_decay_exp <= self.critic_decay_exp {
            return bad("train.actor_decay_exp", "must exceed train.critic_decay_exp");
        }
        if !(self.projection_radius > 0.0) {
            return bad("train.projection_radius", "must be positive");
        }
        if self.episodes == 0 {
            return bad("train.episodes", "must be positive");
        }
        if self.hidden.contains(&0) {
            return bad("net.hidden", "entries must be positive");
        }
        if !(self.schedule_scale >= 1.0 && self.schedule_scale.is_finite()) {
            return bad("train.schedule_scale", "must be at least 1");
        }
        if !(self.grad_clip > 0.0) {
            return bad("train.grad_clip", "must be positive");
        }
        Ok(())
    }
}

/// `r + f + gamma * V(s') - V(s)`, with `V(s') = 0` at a terminal state.
pub fn td_error(r: f64, f: f64, v_s: f64, v_next: f64, gamma: f64, terminal: bool) -> f64 {
    let bootstrap = if terminal { 0.0 } else { gamma * v_next };
    r + f + bootstrap - v_s
}

/// Actor signal: look-ahead adds back the current potential, the other modes
/// pass the TD-error through.
pub fn corrected_td(delta: f64, phi_t: f64, mode: AdviceMode) -> f64 {
    match mode {
        AdviceMode::LookAhead => delta + phi_t,
        AdviceMode::LookBack | AdviceMode::None => delta,
    }
}

/// `(actor_rate, critic_rate)` at update count `t`:
/// `lr0 / (1 + t / scale)^p` for each timescale.
pub fn lr_schedule(h: &Hyperparams, t: u64) -> (f64, f64) {
    let base = 1.0 + t as f64 / h.schedule_scale;
    (
        h.actor_lr0 / libm::pow(base, h.actor_decay_exp),
        h.critic_lr0 / libm::pow(base, h.critic_decay_exp),
    )
}

/// One agent's decentralized actor and centralized critic.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentLearner {
    pub policy: PolicyParams,
    pub critic: ValueParams,
    pub mode: AdviceMode,
    pub potential: Option<PotentialSpec>,
}

impl AgentLearner {
    pub fn new<R: Rng + ?Sized>(
        obs_len: usize,
        joint_obs_len: usize,
        action_dim: usize,
        h: &Hyperparams,
        mode: AdviceMode,
        potential: Option<PotentialSpec>,
        rng: &mut R,
    ) -> Result<Self> {
        if mode != AdviceMode::None && potential.is_none() {
            return Err(Error::Config("advice mode set without a potential".into()));
        }
        let mut actor_sizes = alloc::vec![obs_len];
        actor_sizes.extend_from_slice(&h.hidden);
        actor_sizes.push(action_dim);
        let mut critic_sizes = alloc::vec![joint_obs_len];
        critic_sizes.extend_from_slice(&h.hidden);
        critic_sizes.push(1);
        let mean_net = MlpParams::glorot(&actor_sizes, rng)?;
        let value_net = MlpParams::glorot(&critic_sizes, rng)?;
        let mut policy = PolicyParams::with_init_log_std(mean_net, h.init_log_std);
        policy.clamp_log_std();
        project_in_place(&mut policy, h.projection_radius);
        Ok(Self {
            policy,
            critic: ValueParams::new(value_net)?,
            mode,
            potential,
        })
    }

    /// `theta <- project(theta + rate * clip(delta_tilde * grad log pi))`,
    /// then clamps `log_std`.
    pub fn actor_update(
        &mut self,
        delta_tilde: f64,
        obs: &[f64],
        action: &[f64],
        rate: f64,
        h: &Hyperparams,
    ) -> Result<()> {
        let mut dir = self.policy.grad_log_pi(obs, action)?;
        dir.scale(delta_tilde);
        if !dir.all_finite() {
            return Err(non_finite("actor gradient"));
        }
        clip_norm(&mut dir, h.grad_clip);
        self.policy.add_scaled(&dir, rate);
        project_in_place(&mut self.policy, h.projection_radius);
        self.policy.clamp_log_std();
        Ok(())
    }

    /// Semi-gradient TD(0): `omega <- omega + rate * clip(delta * grad V(s))`.
    pub fn critic_update(&mut self, delta: f64, joint_obs: &[f64], rate: f64, h: &Hyperparams) -> Result<()> {
        critic_step(&mut self.critic, delta, joint_obs, rate, h.grad_clip)
    }
}

/// The critic half of [`AgentLearner::critic_update`], usable on its own.
pub fn critic_step(critic: &mut ValueParams, delta: f64, input: &[f64], rate: f64, grad_clip: f64) -> Result<()> {
    let mut dir = critic.grad(input)?;
    dir.scale(delta);
    if !dir.all_finite() {
        return Err(non_finite("critic gradient"));
    }
    clip_norm(&mut dir, grad_clip);
    for (w, g) in critic.value_net.flat_mut().iter_mut().zip(&dir) {
        *w += rate * g;
    }
    Ok(())
}

fn non_finite(context: &'static str) -> Error {
    Error::NonFinite {
        context,
        agent: usize::MAX,
        update: 0,
    }
}
