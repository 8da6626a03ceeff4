use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Result};
use crate::numkit::{MlpParams, Parameters};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
pub const LOG_STD_INIT: f64 = -0.7;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Draws `a = mean + exp(log_std) * z` and returns it with its log-density.
pub fn gaussian_sample_logprob<R: Rng + ?Sized>(
    mean: &[f64],
    log_std: &[f64],
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    check_len("gaussian log_std", mean.len(), log_std.len())?;
    let mut action = Vec::with_capacity(mean.len());
    let mut log_prob = 0.0;
    for (&mu, &ls) in mean.iter().zip(log_std) {
        let z: f64 = rng.sample(StandardNormal);
        action.push(mu + libm::exp(ls) * z);
        log_prob += -HALF_LN_2PI - ls - 0.5 * z * z;
    }
    Ok((action, log_prob))
}

/// Diagonal Gaussian log-density.
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> Result<f64> {
    check_len("gaussian log_std", mean.len(), log_std.len())?;
    check_len("gaussian action", mean.len(), action.len())?;
    Ok(mean
        .iter()
        .zip(log_std)
        .zip(action)
        .map(|((&mu, &ls), &a)| {
            let z = (a - mu) * libm::exp(-ls);
            -HALF_LN_2PI - ls - 0.5 * z * z
        })
        .sum())
}

/// Decentralized Gaussian actor: state-independent `log_std`, MLP mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub mean_net: MlpParams,
    pub log_std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGrad {
    pub mean_net: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl PolicyParams {
    pub fn new(mean_net: MlpParams, log_std: Vec<f64>) -> Result<Self> {
        check_len("policy log_std", mean_net.output_len(), log_std.len())?;
        Ok(Self { mean_net, log_std })
    }

    pub fn with_init_log_std(mean_net: MlpParams, init: f64) -> Self {
        let d = mean_net.output_len();
        Self {
            mean_net,
            log_std: alloc::vec![init; d],
        }
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn mean(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.mean_net.forward(obs)
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<(Vec<f64>, f64)> {
        let mean = self.mean(obs)?;
        gaussian_sample_logprob(&mean, &self.log_std, rng)
    }

    pub fn log_prob(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        gaussian_log_prob(&self.mean(obs)?, &self.log_std, action)
    }

    /// Exact gradient of `log pi(action | obs)`.
    pub fn grad_log_pi(&self, obs: &[f64], action: &[f64]) -> Result<PolicyGrad> {
        check_len("policy action", self.action_dim(), action.len())?;
        let mean = self.mean(obs)?;
        let mut upstream = Vec::with_capacity(mean.len());
        let mut log_std = Vec::with_capacity(mean.len());
        for ((&mu, &ls), &a) in mean.iter().zip(&self.log_std).zip(action) {
            let inv_std = libm::exp(-ls);
            let z = (a - mu) * inv_std;
            upstream.push(z * inv_std);
            log_std.push(z * z - 1.0);
        }
        let g = self.mean_net.grad(obs, &upstream)?;
        Ok(PolicyGrad {
            mean_net: g.params,
            log_std,
        })
    }

    pub fn clamp_log_std(&mut self) {
        for v in &mut self.log_std {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    pub fn add_scaled(&mut self, grad: &PolicyGrad, k: f64) {
        for (p, g) in self.mean_net.flat_mut().iter_mut().zip(&grad.mean_net) {
            *p += k * g;
        }
        for (p, g) in self.log_std.iter_mut().zip(&grad.log_std) {
            *p += k * g;
        }
    }
}

impl Parameters for PolicyParams {
    fn for_each_slice(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.mean_net.flat());
        f(&self.log_std);
    }

    fn for_each_slice_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.mean_net.flat_mut());
        f(&mut self.log_std);
    }
}

impl Parameters for PolicyGrad {
    fn for_each_slice(&self, f: &mut dyn FnMut(&[f64])) {
        f(&self.mean_net);
        f(&self.log_std);
    }

    fn for_each_slice_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(&mut self.mean_net);
        f(&mut self.log_std);
    }
}

/// Centralized state-value critic.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueParams {
    pub value_net: MlpParams,
}

impl ValueParams {
    pub fn new(value_net: MlpParams) -> Result<Self> {
        check_len("critic output", 1, value_net.output_len())?;
        Ok(Self { value_net })
    }

    pub fn value(&self, joint_obs: &[f64]) -> Result<f64> {
        Ok(self.value_net.forward(joint_obs)?[0])
    }

    /// Gradient of `V(s)` with respect to the critic parameters.
    pub fn grad(&self, joint_obs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_net.grad(joint_obs, &[1.0])?.params)
    }
}

impl Parameters for ValueParams {
    fn for_each_slice(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.value_net.flat());
    }

    fn for_each_slice_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.value_net.flat_mut());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_at_mode() {
        let lp = gaussian_log_prob(&[0.3], &[0.0], &[0.3]).unwrap();
        assert!((lp - (-0.918_938_533_204_672_7)).abs() < 1e-12);
        assert!((lp + 0.91894).abs() < 1e-5);
    }

    #[test]
    fn density_is_symmetric_about_mean() {
        let mean = [0.5, -1.0];
        let ls = [-0.3, 0.4];
        let d = [0.7, -0.2];
        let plus: Vec<f64> = mean.iter().zip(&d).map(|(m, e)| m + e).collect();
        let minus: Vec<f64> = mean.iter().zip(&d).map(|(m, e)| m - e).collect();
        let a = gaussian_log_prob(&mean, &ls, &plus).unwrap();
        let b = gaussian_log_prob(&mean, &ls, &minus).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_log_prob_matches_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mean = [0.1, 0.2, -0.3];
        let ls = [-0.7, 0.0, 0.5];
        for _ in 0..20 {
            let (a, lp) = gaussian_sample_logprob(&mean, &ls, &mut rng).unwrap();
            let direct = gaussian_log_prob(&mean, &ls, &a).unwrap();
            assert!((lp - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn density_integrates_to_one_in_two_dims() {
        // midpoint rule over +-8 sigma
        let mean = [0.4, -0.6];
        let ls = [-0.5f64, 0.3];
        let n = 400;
        let (mut total, mut cell) = (0.0, 1.0);
        let lo: Vec<f64> = (0..2).map(|k| mean[k] - 8.0 * ls[k].exp()).collect();
        let h: Vec<f64> = (0..2).map(|k| 16.0 * ls[k].exp() / n as f64).collect();
        cell *= h[0] * h[1];
        for i in 0..n {
            for j in 0..n {
                let a = [lo[0] + (i as f64 + 0.5) * h[0], lo[1] + (j as f64 + 0.5) * h[1]];
                total += gaussian_log_prob(&mean, &ls, &a).unwrap().exp() * cell;
            }
        }
        assert!((total - 1.0).abs() < 0.01, "integral {total}");
    }

    fn linear_policy() -> PolicyParams {
        let net = MlpParams::from_layers(&[2, 2], &[vec![0.5, -0.25, 1.0, 0.3]], &[vec![0.1, -0.2]])
            .unwrap();
        PolicyParams::new(net, vec![-0.4, 0.2]).unwrap()
    }

    #[test]
    fn gradient_at_mean_action() {
        let p = linear_policy();
        let obs = [0.3, -0.8];
        let mean = p.mean(&obs).unwrap();
        let g = p.grad_log_pi(&obs, &mean).unwrap();
        assert!(g.mean_net.iter().all(|&v| v == 0.0));
        assert_eq!(g.log_std, vec![-1.0, -1.0]);
    }

    #[test]
    fn gradient_at_one_sigma() {
        let p = linear_policy();
        let obs = [0.3, -0.8];
        let a: Vec<f64> = p
            .mean(&obs)
            .unwrap()
            .iter()
            .zip(&p.log_std)
            .map(|(m, ls)| m + ls.exp())
            .collect();
        let g = p.grad_log_pi(&obs, &a).unwrap();
        for v in g.log_std {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn critic_rejects_vector_output() {
        assert!(ValueParams::new(MlpParams::zeros(&[3, 2]).unwrap()).is_err());
    }
}
