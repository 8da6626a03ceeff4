//! TD(0) with a linear critic on a small Markov chain induced by a fixed
//! policy, and the directly solved TD fixed point it should converge to.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::numkit::linalg::solve;
use crate::numkit::{MlpParams, ValueParams};
use crate::samac::{critic_step, lr_schedule, Hyperparams};

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    /// Row-stochastic `P[s][s']` under the fixed policy.
    pub transition: Vec<Vec<f64>>,
    /// Reward on the transition `s -> s'`.
    pub rewards: Vec<Vec<f64>>,
    /// Critic input per state.
    pub features: Vec<Vec<f64>>,
    pub gamma: f64,
}

impl MarkovChain {
    pub fn n_states(&self) -> usize {
        self.transition.len()
    }

    fn feature_len(&self) -> usize {
        self.features.first().map_or(0, |f| f.len())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_states();
        check_len("chain rewards", n, self.rewards.len())?;
        check_len("chain features", n, self.features.len())?;
        for s in 0..n {
            check_len("chain transition row", n, self.transition[s].len())?;
            check_len("chain reward row", n, self.rewards[s].len())?;
            check_len("chain feature row", self.feature_len(), self.features[s].len())?;
            let total: f64 = self.transition[s].iter().sum();
            if libm::fabs(total - 1.0) > 1e-12 || self.transition[s].iter().any(|p| *p < 0.0) {
                return Err(Error::Config("chain transition rows must be distributions".into()));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("chain gamma must be in [0, 1)".into()));
        }
        Ok(())
    }

    /// Stationary distribution, from `d P = d` with `sum d = 1`.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let n = self.n_states();
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n];
        for i in 0..n - 1 {
            for j in 0..n {
                a[i * n + j] = self.transition[j][i] - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..n {
            a[(n - 1) * n + j] = 1.0;
        }
        b[n - 1] = 1.0;
        solve(&a, &b)
    }

    /// Critic input `[features(s)]`; the critic's bias supplies the constant.
    fn augmented(&self, s: usize) -> Vec<f64> {
        let mut x = self.features[s].clone();
        x.push(1.0);
        x
    }

    /// Solves `X^T D (X - gamma P X) w = X^T D r_bar` over the augmented
    /// features. The result is in the critic's flat layout (weights, bias).
    pub fn td_fixed_point(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.n_states();
        let k = self.feature_len() + 1;
        let d = self.stationary()?;
        let mut a = vec![0.0; k * k];
        let mut b = vec![0.0; k];
        for s in 0..n {
            let x = self.augmented(s);
            let mut next = vec![0.0; k];
            let mut r_bar = 0.0;
            for s2 in 0..n {
                let p = self.transition[s][s2];
                r_bar += p * self.rewards[s][s2];
                for (acc, v) in next.iter_mut().zip(self.augmented(s2)) {
                    *acc += p * v;
                }
            }
            for i in 0..k {
                b[i] += d[s] * x[i] * r_bar;
                for j in 0..k {
                    a[i * k + j] += d[s] * x[i] * (x[j] - self.gamma * next[j]);
                }
            }
        }
        solve(&a, &b)
    }

    /// A zero-initialised linear critic over the chain's features.
    pub fn linear_critic(&self) -> Result<ValueParams> {
        ValueParams::new(MlpParams::zeros(&[self.feature_len(), 1])?)
    }

    /// Runs `updates` sampled TD(0) steps along one trajectory from `start`,
    /// with the critic rate of `h`'s schedule.
    pub fn run_td<R: Rng + ?Sized>(
        &self,
        critic: &mut ValueParams,
        h: &Hyperparams,
        start: usize,
        updates: u64,
        rng: &mut R,
    ) -> Result<()> {
        self.validate()?;
        let mut s = start;
        for t in 0..updates {
            let u: f64 = rng.random();
            let mut s2 = self.n_states() - 1;
            let mut acc = 0.0;
            for (j, p) in self.transition[s].iter().enumerate() {
                acc += p;
                if u < acc {
                    s2 = j;
                    break;
                }
            }
            let v_s = critic.value(&self.features[s])?;
            let v_next = critic.value(&self.features[s2])?;
            let delta = self.rewards[s][s2] + self.gamma * v_next - v_s;
            let (_, rate) = lr_schedule(h, t);
            critic_step(critic, delta, &self.features[s], rate, h.grad_clip)?;
            s = s2;
        }
        Ok(())
    }
}

/// Three states visited mostly in a cycle, one feature plus bias: too few
/// parameters to represent the value function exactly, so the fixed point is
/// a genuine projection.
pub fn reference_chain() -> MarkovChain {
    MarkovChain {
        transition: vec![vec![0.1, 0.9, 0.0], vec![0.0, 0.1, 0.9], vec![0.9, 0.0, 0.1]],
        rewards: vec![vec![1.0; 3], vec![0.0; 3], vec![0.5; 3]],
        features: vec![vec![1.0], vec![0.5], vec![-1.0]],
        gamma: 0.5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_is_invariant() {
        let c = reference_chain();
        let d = c.stationary().unwrap();
        for j in 0..3 {
            let next: f64 = (0..3).map(|i| d[i] * c.transition[i][j]).sum();
            assert!((next - d[j]).abs() < 1e-14);
        }
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tabular_fixed_point_is_the_value_function() {
        // one-hot features without redundancy: fix the bias column by
        // dropping one indicator, the span is still all of R^3
        let mut c = reference_chain();
        c.features = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]];
        let w = c.td_fixed_point().unwrap();
        let v: Vec<f64> = (0..3)
            .map(|s| c.features[s].iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() + w[2])
            .collect();
        for s in 0..3 {
            let r_bar: f64 = (0..3).map(|j| c.transition[s][j] * c.rewards[s][j]).sum();
            let next: f64 = (0..3).map(|j| c.transition[s][j] * v[j]).sum();
            assert!((v[s] - r_bar - c.gamma * next).abs() < 1e-12);
        }
    }
}
