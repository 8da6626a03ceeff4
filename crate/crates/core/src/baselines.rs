//! Comparison learners: sparse-only (the SAM learner with advice off) and
//! uniform episodic reward redistribution (IRCR).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::samac::{
    collect_episode, corrected_td, lr_schedule, td_error, EpisodeLog, Hyperparams, Team, Transition,
};
use crate::world::World;

/// Spreads the episode's total reward evenly over all of its steps.
pub fn ircr_redistribute(rewards: &[f64]) -> Result<Vec<f64>> {
    if rewards.is_empty() {
        return Err(Error::Input("cannot redistribute an empty episode".into()));
    }
    let total: f64 = rewards.iter().sum();
    Ok(vec![total / rewards.len() as f64; rewards.len()])
}

/// Per-agent transitions of the current episode, flushed once at episode end.
#[derive(Debug, Default)]
pub struct IrcrBuffer {
    transitions: Vec<Transition>,
}

impl IrcrBuffer {
    pub fn push(&mut self, t: Transition) {
        self.transitions.push(t);
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Replays the buffered episode with redistributed rewards through the
    /// usual actor and critic updates, leaving the buffer empty.
    pub fn flush(&mut self, team: &mut Team, h: &Hyperparams) -> Result<()> {
        let transitions = core::mem::take(&mut self.transitions);
        let n = team.learners.len();
        let mut per_agent = Vec::with_capacity(n);
        for i in 0..n {
            let rewards: Vec<f64> = transitions.iter().map(|t| t.rewards[i]).collect();
            per_agent.push(ircr_redistribute(&rewards)?);
        }
        for (step, t) in transitions.iter().enumerate() {
            let (actor_rate, critic_rate) = lr_schedule(h, team.updates);
            for (i, learner) in team.learners.iter_mut().enumerate() {
                let v_s = learner.critic.value(&t.joint_obs)?;
                let v_next = if t.terminal { 0.0 } else { learner.critic.value(&t.next_joint_obs)? };
                let delta = td_error(per_agent[i][step], 0.0, v_s, v_next, h.gamma, t.terminal);
                let delta_tilde = corrected_td(delta, 0.0, learner.mode);
                let at = |e: Error| e.at(i, team.updates);
                learner
                    .actor_update(delta_tilde, &t.observations[i], &t.actions[i], actor_rate, h)
                    .map_err(at)?;
                learner.critic_update(delta, &t.joint_obs, critic_rate, h).map_err(at)?;
            }
            team.updates += 1;
        }
        Ok(())
    }
}

/// One IRCR training episode: act without updating, then learn from the
/// redistributed rewards at the end.
pub fn run_ircr_episode<R: Rng + ?Sized>(
    world: &World,
    team: &mut Team,
    h: &Hyperparams,
    rng: &mut R,
) -> Result<EpisodeLog> {
    let mut buffer = IrcrBuffer::default();
    let log = collect_episode(world, team, h, rng, &mut |t, _| buffer.push(t.clone()))?;
    buffer.flush(team, h)?;
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_split() {
        assert_eq!(ircr_redistribute(&[0.0, 0.0, 3.0, 0.0]).unwrap(), vec![0.75; 4]);
    }

    #[test]
    fn all_zero_episode() {
        assert_eq!(ircr_redistribute(&[0.0; 5]).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn empty_episode_is_an_error() {
        assert!(matches!(ircr_redistribute(&[]), Err(Error::Input(_))));
    }
}
