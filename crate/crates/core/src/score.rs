//! Per-episode score: average agent reward for cooperative tasks, average
//! agent reward minus the opponent's reward for competitive ones.

use crate::samac::EpisodeLog;
use crate::world::TaskKind;

pub fn score(log: &EpisodeLog, task: TaskKind) -> f64 {
    let team = task.n_team();
    let returns = &log.env_returns;
    let team_mean = returns[..team].iter().sum::<f64>() / team as f64;
    match task {
        TaskKind::CooperativeNavigation { .. } => team_mean,
        TaskKind::PhysicalDeception { .. } | TaskKind::PredatorPrey { .. } => team_mean - returns[team],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(returns: &[f64]) -> EpisodeLog {
        EpisodeLog {
            env_returns: returns.to_vec(),
            ..EpisodeLog::default()
        }
    }

    #[test]
    fn cooperative_navigation_is_mean() {
        let task = TaskKind::CooperativeNavigation { n_agents: 2 };
        assert_eq!(score(&log(&[2.0, 4.0]), task), 3.0);
    }

    #[test]
    fn deception_is_agent_advantage() {
        let task = TaskKind::PhysicalDeception {
            n_agents: 2,
            n_landmarks: 2,
        };
        assert_eq!(score(&log(&[1.0, 1.0, -1.0]), task), 2.0);
    }

    #[test]
    fn predator_prey_zero() {
        let task = TaskKind::PredatorPrey { n_predators: 3 };
        assert_eq!(score(&log(&[0.0; 4]), task), 0.0);
    }

    #[test]
    fn predator_prey_advantage() {
        let task = TaskKind::PredatorPrey { n_predators: 2 };
        assert_eq!(score(&log(&[20.0, 20.0, -20.0]), task), 40.0);
    }
}
