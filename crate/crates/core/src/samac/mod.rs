//! Shaping-advice actor-critic: decentralized Gaussian actors, per-agent
//! centralized critics, and the advice-corrected TD signal.

mod episode;
pub mod oracle;
pub mod td_chain;
mod update;

pub use episode::{
    collect_episode, greedy_episode, run_episode, run_episode_observed, EpisodeLog, Team, Transition,
};
pub use update::{corrected_td, critic_step, lr_schedule, td_error, AgentLearner, Hyperparams};
