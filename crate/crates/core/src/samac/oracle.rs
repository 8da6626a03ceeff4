//! Exact policy gradients on a tiny enumerable two-agent game.
//!
//! The exact gradient of the original (unshaped) objective comes from
//! enumerating every trajectory. It is compared against the sampled
//! actor-critic estimator built from the shaped TD-error and its corrected
//! form, with the critic fixed to the exact value of the shaped game.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::advice::{episode_advice, AdviceMode};
use crate::error::{check_len, Error, Result};
use crate::numkit::MlpParams;
use crate::samac::{corrected_td, td_error};

pub const MAX_STATES: usize = 3;
pub const MAX_ACTIONS: usize = 2;
pub const MAX_HORIZON: usize = 3;

/// Finite-horizon two-agent stochastic game. Joint actions are indexed
/// `a0 * n_actions + a1`; tables are indexed `s * n_joint + joint`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallGame {
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub initial: Vec<f64>,
    /// Next-state distribution per (state, joint action).
    pub transition: Vec<Vec<f64>>,
    /// Per-agent reward per (state, joint action).
    pub rewards: [Vec<f64>; 2],
    /// Per-agent potential per (state, joint action).
    pub potentials: [Vec<f64>; 2],
}

/// Softmax policy whose logits are a linear function of the one-hot state.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPolicy {
    pub logits: MlpParams,
}

impl SoftmaxPolicy {
    pub fn new(logits: MlpParams) -> Result<Self> {
        if logits.num_layers() != 1 {
            return Err(Error::Config("oracle policies must have no hidden layers".into()));
        }
        Ok(Self { logits })
    }

    pub fn probs(&self, state: usize) -> Result<Vec<f64>> {
        let logits = self.logits.forward(&one_hot(self.logits.input_len(), state))?;
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
        let total: f64 = exps.iter().sum();
        Ok(exps.into_iter().map(|e| e / total).collect())
    }

    /// Gradient of `log pi(action | state)` over the flat logit parameters.
    pub fn grad_log_prob(&self, state: usize, action: usize) -> Result<Vec<f64>> {
        let probs = self.probs(state)?;
        let upstream: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(k, p)| if k == action { 1.0 - p } else { -p })
            .collect();
        Ok(self
            .logits
            .grad(&one_hot(self.logits.input_len(), state), &upstream)?
            .params)
    }
}

fn one_hot(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

impl SmallGame {
    pub fn n_joint(&self) -> usize {
        self.n_actions * self.n_actions
    }

    fn idx(&self, s: usize, joint: usize) -> usize {
        s * self.n_joint() + joint
    }

    fn split(&self, joint: usize) -> [usize; 2] {
        [joint / self.n_actions, joint % self.n_actions]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_states == 0 || self.n_actions == 0 || self.horizon == 0 {
            return Err(Error::Config("small game needs states, actions and a horizon".into()));
        }
        if self.n_states > MAX_STATES || self.n_actions > MAX_ACTIONS || self.horizon > MAX_HORIZON {
            return Err(Error::GameTooLarge(format!(
                "{} states, {} actions, horizon {} (limits {MAX_STATES}, {MAX_ACTIONS}, {MAX_HORIZON})",
                self.n_states, self.n_actions, self.horizon
            )));
        }
        let cells = self.n_states * self.n_joint();
        check_len("initial distribution", self.n_states, self.initial.len())?;
        check_len("transition table", cells, self.transition.len())?;
        for row in &self.transition {
            check_len("transition row", self.n_states, row.len())?;
        }
        for table in self.rewards.iter().chain(&self.potentials) {
            check_len("reward/potential table", cells, table.len())?;
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config("small game gamma must be in (0, 1]".into()));
        }
        Ok(())
    }

    fn check_policies(&self, policies: &[SoftmaxPolicy; 2]) -> Result<()> {
        for p in policies {
            check_len("oracle policy input", self.n_states, p.logits.input_len())?;
            check_len("oracle policy output", self.n_actions, p.logits.output_len())?;
        }
        Ok(())
    }

    fn joint_probs(&self, policies: &[SoftmaxPolicy; 2], s: usize) -> Result<Vec<f64>> {
        let p0 = policies[0].probs(s)?;
        let p1 = policies[1].probs(s)?;
        Ok((0..self.n_joint())
            .map(|j| {
                let [a0, a1] = self.split(j);
                p0[a0] * p1[a1]
            })
            .collect())
    }
}

/// Exact gradient of each agent's discounted return in the original game, by
/// summing `p(tau) * G_i(tau) * grad log p_i(tau)` over every trajectory.
/// Agent 0's parameters come first.
pub fn exact_gradient(game: &SmallGame, policies: &[SoftmaxPolicy; 2]) -> Result<Vec<f64>> {
    game.validate()?;
    game.check_policies(policies)?;
    let n_params = policies[0].logits.flat().len();
    let mut total = vec![0.0; 2 * n_params];

    struct Frame {
        prob: f64,
        returns: [f64; 2],
        score: Vec<f64>,
    }

    fn walk(
        game: &SmallGame,
        policies: &[SoftmaxPolicy; 2],
        t: usize,
        s: usize,
        frame: Frame,
        total: &mut [f64],
    ) -> Result<()> {
        if t == game.horizon {
            let n = total.len() / 2;
            for i in 0..2 {
                for k in 0..n {
                    total[i * n + k] += frame.prob * frame.returns[i] * frame.score[i * n + k];
                }
            }
            return Ok(());
        }
        let discount = libm::pow(game.gamma, t as f64);
        let jp = game.joint_probs(policies, s)?;
        for joint in 0..game.n_joint() {
            let acts = game.split(joint);
            let cell = game.idx(s, joint);
            let mut score = frame.score.clone();
            let n = score.len() / 2;
            for i in 0..2 {
                let g = policies[i].grad_log_prob(s, acts[i])?;
                for k in 0..n {
                    score[i * n + k] += g[k];
                }
            }
            let returns = [
                frame.returns[0] + discount * game.rewards[0][cell],
                frame.returns[1] + discount * game.rewards[1][cell],
            ];
            for (s_next, &p_next) in game.transition[cell].iter().enumerate() {
                let prob = frame.prob * jp[joint] * p_next;
                if prob == 0.0 {
                    continue;
                }
                let next = Frame {
                    prob,
                    returns,
                    score: score.clone(),
                };
                walk(game, policies, t + 1, s_next, next, total)?;
            }
        }
        Ok(())
    }

    for (s0, &p0) in game.initial.iter().enumerate() {
        if p0 == 0.0 {
            continue;
        }
        let frame = Frame {
            prob: p0,
            returns: [0.0; 2],
            score: vec![0.0; 2 * n_params],
        };
        walk(game, policies, 0, s0, frame, &mut total)?;
    }
    Ok(total)
}

/// Information the exact critic conditions on: the time step, the current
/// state and, for look-back advice, the previous state and joint action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CriticKey {
    t: usize,
    state: usize,
    prev: Option<(usize, usize)>,
}

/// Exact expected shaped return-to-go, computed by enumeration.
fn exact_value(
    game: &SmallGame,
    policies: &[SoftmaxPolicy; 2],
    agent: usize,
    mode: AdviceMode,
    key: CriticKey,
) -> Result<f64> {
    if key.t >= game.horizon {
        return Ok(0.0);
    }
    let gamma = game.gamma;
    let phi = &game.potentials[agent];
    let jp = game.joint_probs(policies, key.state)?;
    let last = key.t + 1 == game.horizon;
    let mut value = 0.0;
    for joint in 0..game.n_joint() {
        let cell = game.idx(key.state, joint);
        let mut q = game.rewards[agent][cell];
        match mode {
            AdviceMode::None => {}
            // The next potential is collected one level down; here only -phi_t.
            AdviceMode::LookAhead => q -= phi[cell],
            AdviceMode::LookBack => {
                let phi_prev = key.prev.map_or(0.0, |(s, j)| phi[game.idx(s, j)]);
                let mut seq = vec![phi_prev, phi[cell]];
                if !last {
                    seq.push(0.0);
                }
                // advice for the middle entry of [phi_prev, phi_t, (next)]
                let advice = episode_advice(AdviceMode::LookBack, &seq, gamma)?;
                q += advice[1];
            }
        }
        let mut cont = 0.0;
        for (s_next, &p_next) in game.transition[cell].iter().enumerate() {
            if p_next == 0.0 {
                continue;
            }
            let mut v = exact_value(
                game,
                policies,
                agent,
                mode,
                CriticKey {
                    t: key.t + 1,
                    state: s_next,
                    prev: Some((key.state, joint)),
                },
            )?;
            if mode == AdviceMode::LookAhead && !last {
                let jn = game.joint_probs(policies, s_next)?;
                v += (0..game.n_joint())
                    .map(|j| jn[j] * phi[game.idx(s_next, j)])
                    .sum::<f64>();
            }
            cont += p_next * v;
        }
        value += jp[joint] * (q + gamma * cont);
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Sample mean of the actor-critic gradient estimator, agent 0 first.
    pub estimate: Vec<f64>,
    /// Standard error of each estimate entry.
    pub std_err: Vec<f64>,
    /// Exact gradient of the original game.
    pub exact: Vec<f64>,
}

impl OracleReport {
    /// Largest `|estimate - exact| / std_err` over all entries.
    pub fn max_z(&self) -> f64 {
        self.estimate
            .iter()
            .zip(&self.exact)
            .zip(&self.std_err)
            .map(|((e, x), s)| {
                let d = (e - x).abs();
                if *s > 0.0 {
                    d / s
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

fn sample_index<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    dist.len() - 1
}

/// Compares the sampled estimator `sum_t gamma^t * delta_tilde_t * grad log pi`
/// against the exact gradient of the original game.
///
/// `delta_tilde` uses the shaped TD-error under `mode` with an exact critic of
/// the shaped game. With `correct` false the look-ahead potential term is
/// left out of the actor signal.
pub fn oracle_policy_gradient<R: Rng + ?Sized>(
    game: &SmallGame,
    policies: &[SoftmaxPolicy; 2],
    mode: AdviceMode,
    correct: bool,
    n_samples: usize,
    rng: &mut R,
) -> Result<OracleReport> {
    game.validate()?;
    game.check_policies(policies)?;
    if n_samples < 2 {
        return Err(Error::Config("oracle needs at least two samples".into()));
    }
    let exact = exact_gradient(game, policies)?;
    let n_params = policies[0].logits.flat().len();
    let h = game.horizon;

    // Critic tables for every key the sampler can visit.
    let mut critic: [Vec<Option<f64>>; 2] = [Vec::new(), Vec::new()];
    let prev_slots = 1 + game.n_states * game.n_joint();
    let slot = |k: &CriticKey| -> usize {
        let p = k.prev.map_or(0, |(s, j)| 1 + s * game.n_joint() + j);
        (k.t * game.n_states + k.state) * prev_slots + p
    };
    for c in critic.iter_mut() {
        *c = vec![None; (h + 1) * game.n_states * prev_slots];
    }
    let mut value_of = |agent: usize, key: CriticKey| -> Result<f64> {
        // look-ahead and unshaped critics ignore the previous step
        let key = if mode == AdviceMode::LookBack { key } else { CriticKey { prev: None, ..key } };
        let k = slot(&key);
        if let Some(v) = critic[agent][k] {
            return Ok(v);
        }
        let v = exact_value(game, policies, agent, mode, key)?;
        critic[agent][k] = Some(v);
        Ok(v)
    };

    let mut sum = vec![0.0; 2 * n_params];
    let mut sum_sq = vec![0.0; 2 * n_params];
    let mut sample = vec![0.0; 2 * n_params];
    let mut states = Vec::with_capacity(h + 1);
    let mut joints = Vec::with_capacity(h);
    for _ in 0..n_samples {
        states.clear();
        joints.clear();
        states.push(sample_index(&game.initial, rng));
        for t in 0..h {
            let s = states[t];
            let p0 = policies[0].probs(s)?;
            let p1 = policies[1].probs(s)?;
            let a0 = sample_index(&p0, rng);
            let a1 = sample_index(&p1, rng);
            let joint = a0 * game.n_actions + a1;
            joints.push(joint);
            states.push(sample_index(&game.transition[game.idx(s, joint)], rng));
        }
        sample.iter_mut().for_each(|v| *v = 0.0);
        for agent in 0..2 {
            let phis: Vec<f64> = (0..h)
                .map(|t| match mode {
                    AdviceMode::None => 0.0,
                    _ => game.potentials[agent][game.idx(states[t], joints[t])],
                })
                .collect();
            let advice = episode_advice(mode, &phis, game.gamma)?;
            for t in 0..h {
                let terminal = t + 1 == h;
                let key = |t: usize| CriticKey {
                    t,
                    state: states[t],
                    prev: if t == 0 { None } else { Some((states[t - 1], joints[t - 1])) },
                };
                let v_s = value_of(agent, key(t))?;
                let v_next = if terminal { 0.0 } else { value_of(agent, key(t + 1))? };
                let cell = game.idx(states[t], joints[t]);
                let delta = td_error(game.rewards[agent][cell], advice[t], v_s, v_next, game.gamma, terminal);
                let signal = if correct { corrected_td(delta, phis[t], mode) } else { delta };
                let a = game.split(joints[t])[agent];
                let g = policies[agent].grad_log_prob(states[t], a)?;
                let w = libm::pow(game.gamma, t as f64) * signal;
                for k in 0..n_params {
                    sample[agent * n_params + k] += w * g[k];
                }
            }
        }
        for k in 0..sample.len() {
            sum[k] += sample[k];
            sum_sq[k] += sample[k] * sample[k];
        }
    }
    let n = n_samples as f64;
    let estimate: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_err = sum_sq
        .iter()
        .zip(&estimate)
        .map(|(sq, m)| {
            let var = ((sq / n) - m * m).max(0.0) * n / (n - 1.0);
            libm::sqrt(var / n)
        })
        .collect();
    Ok(OracleReport {
        estimate,
        std_err,
        exact,
    })
}

/// Fixed 3-state, 2-action, horizon-3 game used by the verification suites.
pub fn reference_game(potentials: [Vec<f64>; 2]) -> SmallGame {
    let transition = vec![
        vec![0.7, 0.2, 0.1],
        vec![0.1, 0.6, 0.3],
        vec![0.2, 0.2, 0.6],
        vec![0.0, 0.5, 0.5],
        vec![0.3, 0.3, 0.4],
        vec![0.9, 0.1, 0.0],
        vec![0.1, 0.1, 0.8],
        vec![0.5, 0.0, 0.5],
        vec![0.4, 0.4, 0.2],
        vec![0.0, 0.2, 0.8],
        vec![0.6, 0.3, 0.1],
        vec![0.25, 0.25, 0.5],
    ];
    SmallGame {
        n_states: 3,
        n_actions: 2,
        horizon: 3,
        gamma: 0.9,
        initial: vec![0.5, 0.3, 0.2],
        transition,
        rewards: [
            vec![1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 1.5, 0.0, 0.0, 1.0],
        ],
        potentials,
    }
}

/// Two fixed, non-uniform linear softmax policies for [`reference_game`].
pub fn reference_policies() -> Result<[SoftmaxPolicy; 2]> {
    let a = MlpParams::from_layers(&[3, 2], &[vec![0.3, -0.2, 0.5, -0.4, 0.1, 0.0]], &[vec![0.1, -0.1]])?;
    let b = MlpParams::from_layers(&[3, 2], &[vec![-0.5, 0.2, 0.0, 0.3, -0.1, 0.4]], &[vec![0.0, 0.2]])?;
    Ok([SoftmaxPolicy::new(a)?, SoftmaxPolicy::new(b)?])
}

/// Potentials for [`reference_game`] that strongly favour each agent's own
/// action, so that an uncorrected look-ahead estimator is visibly biased.
pub fn adversarial_potentials() -> [Vec<f64>; 2] {
    let mut p = [vec![0.0; 12], vec![0.0; 12]];
    for s in 0..3 {
        for joint in 0..4 {
            let (a0, a1) = (joint / 2, joint % 2);
            p[0][s * 4 + joint] = if a0 == 0 { 4.0 } else { -1.0 } + 0.3 * s as f64;
            p[1][s * 4 + joint] = if a1 == 0 { -3.0 } else { 2.0 } - 0.2 * s as f64;
        }
    }
    p
}
