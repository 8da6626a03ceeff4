//! Greedy evaluation of a saved team.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sam_core::samac::{greedy_episode, Hyperparams};
use sam_core::score::score;
use sam_core::world::World;

use crate::checkpoint::Checkpoint;
use crate::metrics::mean_std;
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalStats {
    pub episodes: u64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Plays `episodes` episodes with mean actions; `seed` drives the initial states.
pub fn evaluate(ckpt: &Checkpoint, episodes: u64, seed: u64) -> Result<EvalStats, HarnessError> {
    if episodes == 0 {
        return Err(HarnessError::Config("--episodes must be positive".into()));
    }
    let world = World::new(ckpt.task, ckpt.world)?;
    let h = Hyperparams {
        gamma: ckpt.gamma,
        ..Hyperparams::default()
    };
    let mut team = ckpt.team.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::with_capacity(episodes as usize);
    for _ in 0..episodes {
        let log = greedy_episode(&world, &mut team, &h, &mut rng)?;
        scores.push(score(&log, ckpt.task));
    }
    let (mean, std) = mean_std(&scores);
    Ok(EvalStats {
        episodes,
        mean,
        std,
        min: scores.iter().copied().fold(f64::INFINITY, f64::min),
        max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
