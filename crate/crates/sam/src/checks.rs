//! Verification suites run by `sam verify` and the acceptance tests. Each
//! returns a pass flag and a one-line summary of what it measured.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sam_core::advice::{episode_advice, AdviceMode, PotentialSpec, PotentialVariant};
use sam_core::baselines::ircr_redistribute;
use sam_core::numkit::gradcheck::{mlp_max_relative_error, policy_max_relative_error};
use sam_core::numkit::{MlpParams, PolicyParams};
use sam_core::samac::oracle::{
    adversarial_potentials, oracle_policy_gradient, reference_game, reference_policies,
};
use sam_core::samac::td_chain::reference_chain;
use sam_core::samac::{collect_episode, run_episode, AgentLearner, Hyperparams, Team};
use sam_core::world::{TaskKind, World, WorldParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl SuiteOutcome {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn outcome(name: &'static str, pass: bool, detail: String) -> SuiteOutcome {
    SuiteOutcome { name, pass, detail }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> SuiteOutcome {
    outcome(name, false, format!("error: {e}"))
}

pub const GRAD_TOL: f64 = 1e-4;
pub const TELESCOPE_TOL: f64 = 1e-9;
pub const ORACLE_Z: f64 = 3.0;
pub const FIXED_POINT_TOL: f64 = 1e-3;
pub const IRCR_SUM_TOL: f64 = 1e-12;

fn random_net(rng: &mut ChaCha8Rng, input: Option<usize>, output: Option<usize>) -> MlpParams {
    let layers = rng.random_range(1..=3usize);
    let mut sizes = vec![input.unwrap_or_else(|| rng.random_range(1..=16))];
    for _ in 1..layers {
        sizes.push(rng.random_range(1..=16));
    }
    sizes.push(output.unwrap_or_else(|| rng.random_range(1..=16)));
    let mut net = MlpParams::glorot(&sizes, rng).expect("valid sizes");
    // nonzero biases so every parameter carries signal
    for (k, v) in net.flat_mut().iter_mut().enumerate() {
        if *v == 0.0 {
            *v = 0.1 * ((k % 7) as f64 - 3.0);
        }
    }
    net
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

/// Analytic MLP and policy gradients against central finite differences on
/// `n_nets` random networks of at most 3 layers and width 16.
pub fn gradients(n_nets: usize, seed: u64) -> SuiteOutcome {
    let name = "gradients";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_nets {
        let net = random_net(&mut rng, None, None);
        let x = random_vec(&mut rng, net.input_len(), 1.5);
        let up = random_vec(&mut rng, net.output_len(), 1.0);
        match mlp_max_relative_error(&net, &x, &up) {
            Ok(e) => worst = worst.max(e),
            Err(e) => return failed(name, e),
        }

        let mean_net = random_net(&mut rng, None, Some(2));
        let log_std = random_vec(&mut rng, 2, 1.0);
        let policy = match PolicyParams::new(mean_net, log_std) {
            Ok(p) => p,
            Err(e) => return failed(name, e),
        };
        let obs = random_vec(&mut rng, policy.mean_net.input_len(), 1.5);
        let action = random_vec(&mut rng, 2, 2.0);
        match policy_max_relative_error(&policy, &obs, &action) {
            Ok(e) => worst = worst.max(e),
            Err(e) => return failed(name, e),
        }
    }
    outcome(
        name,
        worst < GRAD_TOL,
        format!("{n_nets} networks and {n_nets} policies, max relative error {worst:.2e} (tol {GRAD_TOL:.0e})"),
    )
}

fn advised_team(task: TaskKind, h: &Hyperparams, variant: PotentialVariant, rng: &mut ChaCha8Rng) -> Team {
    let spec = PotentialSpec::new(task, variant);
    let learners = (0..task.n_entities())
        .map(|i| {
            let (mode, pot) = if i < task.n_team() {
                (AdviceMode::LookAhead, Some(spec))
            } else {
                (AdviceMode::None, None)
            };
            AgentLearner::new(task.obs_len(i), task.joint_obs_len(), 2, h, mode, pot, rng).expect("valid shapes")
        })
        .collect();
    Team::new(learners)
}

/// With gamma = 1, the summed look-ahead advice of an episode equals the
/// difference of its end-point potentials (terminal potential zero), and the
/// advice between the first and last logged steps telescopes to
/// `phi_last - phi_first`.
pub fn telescoping(n_episodes: usize, seed: u64) -> SuiteOutcome {
    let name = "telescoping";
    let tasks = [
        TaskKind::CooperativeNavigation { n_agents: 3 },
        TaskKind::PredatorPrey { n_predators: 2 },
        TaskKind::PhysicalDeception {
            n_agents: 2,
            n_landmarks: 2,
        },
    ];
    let h = Hyperparams {
        gamma: 1.0,
        hidden: vec![16],
        ..Hyperparams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for ep in 0..n_episodes {
        let task = tasks[ep % tasks.len()];
        let variant = if ep % 2 == 0 {
            PotentialVariant::Uniform
        } else {
            PotentialVariant::NonUniform
        };
        let world = World::new(task, WorldParams::default()).expect("valid task");
        let mut team = advised_team(task, &h, variant, &mut rng);
        let mut phis: Vec<Vec<f64>> = Vec::new();
        let mut advice: Vec<Vec<f64>> = Vec::new();
        if let Err(e) = collect_episode(&world, &mut team, &h, &mut rng, &mut |tr, _| {
            phis.push(tr.potentials.clone());
            advice.push(tr.advice.clone());
        }) {
            return failed(name, e);
        }
        for i in 0..task.n_team() {
            let total: f64 = advice.iter().map(|a| a[i]).sum();
            let phi0 = phis[0][i];
            worst = worst.max((total - (0.0 - phi0)).abs());

            let series: Vec<f64> = phis.iter().map(|p| p[i]).collect();
            let recomputed = match episode_advice(AdviceMode::LookAhead, &series, 1.0) {
                Ok(f) => f,
                Err(e) => return failed(name, e),
            };
            let inner: f64 = recomputed[..series.len() - 1].iter().sum();
            worst = worst.max((inner - (series[series.len() - 1] - phi0)).abs());
        }
    }
    outcome(
        name,
        worst <= TELESCOPE_TOL,
        format!("{n_episodes} episodes over cn/pp/pd, max |sum F - delta phi| {worst:.2e} (tol {TELESCOPE_TOL:.0e})"),
    )
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn teams_identical(a: &Team, b: &Team) -> bool {
    a.updates == b.updates
        && a.learners.iter().zip(&b.learners).all(|(x, y)| {
            same_bits(x.policy.mean_net.flat(), y.policy.mean_net.flat())
                && same_bits(&x.policy.log_std, &y.policy.log_std)
                && same_bits(x.critic.value_net.flat(), y.critic.value_net.flat())
        })
}

/// A learner holding a potential but with advice switched off must follow the
/// sparse learner's parameter trajectory bit for bit.
pub fn degeneracy(episodes: usize, seed: u64) -> SuiteOutcome {
    let name = "degeneracy";
    let task = TaskKind::CooperativeNavigation { n_agents: 3 };
    let world = World::new(task, WorldParams::default()).expect("valid task");
    let h = Hyperparams {
        hidden: vec![16, 16],
        ..Hyperparams::default()
    };
    let spec = PotentialSpec::new(task, PotentialVariant::Uniform);
    let build = |with_potential: bool, rng: &mut ChaCha8Rng| -> Team {
        let learners = (0..task.n_entities())
            .map(|i| {
                let pot = with_potential.then_some(spec);
                AgentLearner::new(task.obs_len(i), task.joint_obs_len(), 2, &h, AdviceMode::None, pot, rng)
                    .expect("valid shapes")
            })
            .collect();
        Team::new(learners)
    };
    let mut rng_a = ChaCha8Rng::seed_from_u64(seed);
    let mut rng_b = ChaCha8Rng::seed_from_u64(seed);
    let mut sam = build(true, &mut rng_a);
    let mut sparse = build(false, &mut rng_b);
    if !teams_identical(&sam, &sparse) {
        return outcome(name, false, "initial parameters differ".into());
    }
    for ep in 0..episodes {
        let la = run_episode(&world, &mut sam, &h, &mut rng_a);
        let lb = run_episode(&world, &mut sparse, &h, &mut rng_b);
        match (la, lb) {
            (Ok(la), Ok(lb)) if la == lb && teams_identical(&sam, &sparse) => {}
            (Err(e), _) | (_, Err(e)) => return failed(name, e),
            _ => return outcome(name, false, format!("trajectories diverge in episode {ep}")),
        }
    }
    outcome(
        name,
        true,
        format!("{episodes} episodes, {} updates, parameters bit-identical", sam.updates),
    )
}

/// Sampled corrected estimators against the exact gradient of the unshaped
/// small game, plus the uncorrected look-ahead estimator, which must miss.
pub fn oracle(n_samples: usize, seed: u64) -> SuiteOutcome {
    let name = "oracle";
    let game = reference_game(adversarial_potentials());
    let policies = match reference_policies() {
        Ok(p) => p,
        Err(e) => return failed(name, e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = |mode, correct| oracle_policy_gradient(&game, &policies, mode, correct, n_samples, &mut rng);
    let (ahead, back, raw) = match (
        run(AdviceMode::LookAhead, true),
        run(AdviceMode::LookBack, true),
        run(AdviceMode::LookAhead, false),
    ) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return failed(name, e),
    };
    let (za, zb, zr) = (ahead.max_z(), back.max_z(), raw.max_z());
    outcome(
        name,
        za < ORACLE_Z && zb < ORACLE_Z && zr > ORACLE_Z,
        format!(
            "{n_samples} samples, max z: look-ahead corrected {za:.2}, look-back {zb:.2}, look-ahead uncorrected {zr:.2} (want <{ORACLE_Z}, <{ORACLE_Z}, >{ORACLE_Z})"
        ),
    )
}

/// Schedule used by the critic fixed-point suite.
pub fn fixed_point_hyper() -> Hyperparams {
    Hyperparams {
        critic_lr0: 0.5,
        critic_decay_exp: 1.0,
        actor_decay_exp: 1.0,
        schedule_scale: 20.0,
        ..Hyperparams::default()
    }
}

/// Sampled TD(0) on the fixed-policy chain ends within tolerance of the
/// directly solved fixed point.
pub fn critic_fixed_point(updates: u64, seed: u64) -> SuiteOutcome {
    let name = "critic_fixed_point";
    let chain = reference_chain();
    let target = match chain.td_fixed_point() {
        Ok(w) => w,
        Err(e) => return failed(name, e),
    };
    let mut critic = match chain.linear_critic() {
        Ok(c) => c,
        Err(e) => return failed(name, e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if let Err(e) = chain.run_td(&mut critic, &fixed_point_hyper(), 0, updates, &mut rng) {
        return failed(name, e);
    }
    let err = critic
        .value_net
        .flat()
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    outcome(
        name,
        err < FIXED_POINT_TOL,
        format!("{updates} updates, |w - w*| = {err:.2e} (tol {FIXED_POINT_TOL:.0e})"),
    )
}

/// Redistribution preserves each episode's total, and episodes with a single
/// reward event get a constant signal regardless of when the event happened.
pub fn ircr(n_episodes: usize, seed: u64) -> SuiteOutcome {
    let name = "ircr";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let task = TaskKind::CooperativeNavigation { n_agents: 3 };
    let world = World::new(task, WorldParams::default()).expect("valid task");
    let h = Hyperparams {
        hidden: vec![8],
        ..Hyperparams::default()
    };
    let mut team = match (0..task.n_entities())
        .map(|i| AgentLearner::new(task.obs_len(i), task.joint_obs_len(), 2, &h, AdviceMode::None, None, &mut rng))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(l) => Team::new(l),
        Err(e) => return failed(name, e),
    };
    let mut worst_sum: f64 = 0.0;
    let mut env_nonzero = 0usize;
    for ep in 0..n_episodes {
        // half environment episodes, half synthetic reward streams
        let streams: Vec<Vec<f64>> = if ep % 2 == 0 {
            let mut rewards: Vec<Vec<f64>> = Vec::new();
            if let Err(e) = collect_episode(&world, &mut team, &h, &mut rng, &mut |tr, _| rewards.push(tr.rewards.clone())) {
                return failed(name, e);
            }
            (0..task.n_entities()).map(|i| rewards.iter().map(|r| r[i]).collect()).collect()
        } else {
            let len = rng.random_range(1..=50);
            vec![(0..len)
                .map(|_| if rng.random_bool(0.1) { rng.random_range(-10.0..10.0) } else { 0.0 })
                .collect()]
        };
        for s in streams {
            if s.iter().any(|r| *r != 0.0) && ep % 2 == 0 {
                env_nonzero += 1;
            }
            let out = match ircr_redistribute(&s) {
                Ok(o) => o,
                Err(e) => return failed(name, e),
            };
            let diff = (out.iter().sum::<f64>() - s.iter().sum::<f64>()).abs();
            worst_sum = worst_sum.max(diff);
        }
    }

    let mut constant = true;
    for _ in 0..n_episodes {
        let len = rng.random_range(1..=50);
        let r = rng.random_range(-10.0..10.0);
        let mut first = None;
        for at in [rng.random_range(0..len), rng.random_range(0..len)] {
            let mut s = vec![0.0; len];
            s[at] = r;
            let out = match ircr_redistribute(&s) {
                Ok(o) => o,
                Err(e) => return failed(name, e),
            };
            constant &= out.iter().all(|v| v.to_bits() == out[0].to_bits());
            match &first {
                None => first = Some(out),
                Some(f) => constant &= same_bits(f, &out),
            }
        }
    }
    outcome(
        name,
        worst_sum <= IRCR_SUM_TOL && constant,
        format!(
            "{n_episodes} episodes ({env_nonzero} env streams with reward), max sum error {worst_sum:.1e} (tol {IRCR_SUM_TOL:.0e}), single-event output constant and position-independent: {constant}"
        ),
    )
}

/// Every suite at its acceptance size.
pub fn all(seed: u64) -> Vec<SuiteOutcome> {
    vec![
        gradients(100, seed),
        telescoping(100, seed),
        degeneracy(10, seed),
        oracle(100_000, seed),
        critic_fixed_point(1_000_000, seed),
        ircr(1_000, seed),
    ]
}
