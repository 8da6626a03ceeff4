use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sam_core::advice::AdviceMode;
use sam_core::samac::oracle::{
    adversarial_potentials, exact_gradient, oracle_policy_gradient, reference_game, reference_policies, SmallGame,
    SoftmaxPolicy,
};
use sam_core::Error;

fn game(potentials: [Vec<f64>; 2]) -> SmallGame {
    reference_game(potentials)
}

fn policies() -> [SoftmaxPolicy; 2] {
    reference_policies().unwrap()
}

fn adversarial() -> [Vec<f64>; 2] {
    adversarial_potentials()
}

#[test]
fn zero_potential_agrees() {
    let g = game([vec![0.0; 12], vec![0.0; 12]]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for mode in [AdviceMode::None, AdviceMode::LookAhead, AdviceMode::LookBack] {
        let r = oracle_policy_gradient(&g, &policies(), mode, true, 100_000, &mut rng).unwrap();
        assert!(r.max_z() < 3.0, "{mode:?}: {r:?}");
    }
}

#[test]
fn corrected_estimators_are_unbiased() {
    let g = game(adversarial());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for mode in [AdviceMode::LookAhead, AdviceMode::LookBack] {
        let r = oracle_policy_gradient(&g, &policies(), mode, true, 100_000, &mut rng).unwrap();
        assert!(r.max_z() < 3.0, "{mode:?}: z={} {r:?}", r.max_z());
    }
}

#[test]
fn removing_look_ahead_correction_biases_estimate() {
    let g = game(adversarial());
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let r = oracle_policy_gradient(&g, &policies(), AdviceMode::LookAhead, false, 100_000, &mut rng).unwrap();
    assert!(r.max_z() > 3.0, "z={}", r.max_z());
}

#[test]
fn exact_gradient_matches_finite_differences_of_return() {
    // J computed by forward enumeration, differentiated numerically
    let g = game([vec![0.0; 12], vec![0.0; 12]]);
    let pols = policies();
    let exact = exact_gradient(&g, &pols).unwrap();
    let value = |pols: &[SoftmaxPolicy; 2], agent: usize| -> f64 {
        fn rec(g: &SmallGame, p: &[SoftmaxPolicy; 2], agent: usize, t: usize, s: usize) -> f64 {
            if t == g.horizon {
                return 0.0;
            }
            let (p0, p1) = (p[0].probs(s).unwrap(), p[1].probs(s).unwrap());
            let mut v = 0.0;
            for joint in 0..4 {
                let pj = p0[joint / 2] * p1[joint % 2];
                let cell = s * 4 + joint;
                let cont: f64 = (0..3).map(|sn| g.transition[cell][sn] * rec(g, p, agent, t + 1, sn)).sum();
                v += pj * (g.rewards[agent][cell] + g.gamma * cont);
            }
            v
        }
        (0..3).map(|s| g.initial[s] * rec(&g, pols, agent, 0, s)).sum()
    };
    let h = 1e-6;
    for agent in 0..2 {
        for k in 0..8 {
            let mut up = pols.clone();
            let mut down = pols.clone();
            up[agent].logits.flat_mut()[k] += h;
            down[agent].logits.flat_mut()[k] -= h;
            let fd = (value(&up, agent) - value(&down, agent)) / (2.0 * h);
            assert!((fd - exact[agent * 8 + k]).abs() < 1e-7, "agent {agent} k {k}: {fd} vs {}", exact[agent * 8 + k]);
        }
    }
}

#[test]
fn oversized_game_is_refused() {
    let mut g = game([vec![0.0; 12], vec![0.0; 12]]);
    g.horizon = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let r = oracle_policy_gradient(&g, &policies(), AdviceMode::None, true, 10, &mut rng);
    assert!(matches!(r, Err(Error::GameTooLarge(_))));
}
