//! Central finite-difference oracles for the analytic gradients.
//!
//! These only call forward evaluations, so they stay independent of the
//! backward passes they check.

use alloc::vec::Vec;

use crate::error::Result;
use crate::numkit::{gaussian_log_prob, MlpParams, PolicyParams};

pub const FD_STEP: f64 = 1e-5;
/// Denominator floor for the relative error of near-zero entries.
pub const REL_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

fn central<F: FnMut(&[f64]) -> Result<f64>>(x: &[f64], h: f64, mut f: F) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = f(&probe)?;
        probe[i] = orig - h;
        let down = f(&probe)?;
        probe[i] = orig;
        out.push((up - down) / (2.0 * h));
    }
    Ok(out)
}

/// Numeric gradient of `upstream . net(input)` with respect to the flat
/// parameters and to the input.
pub fn mlp_numeric_grad(
    net: &MlpParams,
    input: &[f64],
    upstream: &[f64],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let objective = |n: &MlpParams, x: &[f64]| -> Result<f64> {
        Ok(n.forward(x)?.iter().zip(upstream).map(|(o, u)| o * u).sum())
    };
    let params = central(net.flat(), h, |p| {
        let probe = MlpParams::from_flat(net.sizes(), p.to_vec())?;
        objective(&probe, input)
    })?;
    let inputs = central(input, h, |x| objective(net, x))?;
    Ok((params, inputs))
}

/// Numeric gradient of `log pi(action | obs)`; mean-net entries first, then `log_std`.
pub fn policy_numeric_grad(
    policy: &PolicyParams,
    obs: &[f64],
    action: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let n_net = policy.mean_net.flat().len();
    let mut flat = policy.mean_net.flat().to_vec();
    flat.extend_from_slice(&policy.log_std);
    central(&flat, h, |p| {
        let net = MlpParams::from_flat(policy.mean_net.sizes(), p[..n_net].to_vec())?;
        let mean = net.forward(obs)?;
        gaussian_log_prob(&mean, &p[n_net..], action)
    })
}

/// Largest relative error between analytic and numeric MLP gradients.
pub fn mlp_max_relative_error(net: &MlpParams, input: &[f64], upstream: &[f64]) -> Result<f64> {
    let analytic = net.grad(input, upstream)?;
    let (params, inputs) = mlp_numeric_grad(net, input, upstream, FD_STEP)?;
    Ok(analytic
        .params
        .iter()
        .zip(&params)
        .chain(analytic.input.iter().zip(&inputs))
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max))
}

pub fn policy_max_relative_error(policy: &PolicyParams, obs: &[f64], action: &[f64]) -> Result<f64> {
    let analytic = policy.grad_log_pi(obs, action)?;
    let numeric = policy_numeric_grad(policy, obs, action, FD_STEP)?;
    Ok(analytic
        .mean_net
        .iter()
        .chain(&analytic.log_std)
        .zip(&numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max))
}
