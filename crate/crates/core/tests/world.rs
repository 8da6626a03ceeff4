use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sam_core::world::{JointAction, StepOutcome, TaskKind, World, WorldParams, WorldState};
use sam_core::Error;

const CN3: TaskKind = TaskKind::CooperativeNavigation { n_agents: 3 };
const PD2: TaskKind = TaskKind::PhysicalDeception {
    n_agents: 2,
    n_landmarks: 2,
};
const PP2: TaskKind = TaskKind::PredatorPrey { n_predators: 2 };

fn world(task: TaskKind) -> World {
    World::new(task, WorldParams::default()).unwrap()
}

fn random_action(rng: &mut ChaCha8Rng, n: usize) -> JointAction {
    JointAction((0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect())
}

/// State with the given positions, zero velocities and nothing covered.
fn laid_out(task: TaskKind, positions: Vec<[f64; 2]>, landmarks: Vec<[f64; 2]>, target: Option<usize>) -> WorldState {
    let n = positions.len();
    WorldState {
        task,
        velocities: vec![[0.0; 2]; n],
        radii: vec![0.05; n],
        covered: vec![false; landmarks.len()],
        positions,
        landmark_positions: landmarks,
        target_index: target,
        step: 0,
    }
}

#[test]
fn same_seed_same_reset() {
    for task in [CN3, PD2, PP2] {
        let w = world(task);
        let a = w.reset(&mut ChaCha8Rng::seed_from_u64(5));
        let b = w.reset(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }
}

#[test]
fn cooperative_navigation_construction() {
    let s = world(CN3).reset(&mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(s.positions.len(), 3);
    assert_eq!(s.landmark_positions.len(), 3);
    assert!(s.velocities.iter().all(|v| *v == [0.0, 0.0]));
    assert_eq!(s.step, 0);
    assert_eq!(s.target_index, None);
}

#[test]
fn reset_positions_are_centred_uniform() {
    let w = world(CN3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 10_000;
    let mut sums = vec![0.0; 12];
    for _ in 0..n {
        let s = w.reset(&mut rng);
        for (k, p) in s.positions.iter().chain(&s.landmark_positions).enumerate() {
            assert!(p.iter().all(|c| (-1.0..1.0).contains(c)));
            sums[2 * k] += p[0];
            sums[2 * k + 1] += p[1];
        }
    }
    for s in sums {
        assert!((s / n as f64).abs() < 0.02, "{}", s / n as f64);
    }
}

#[test]
fn deception_target_is_uniform() {
    let w = world(PD2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let hits = (0..4000).filter(|_| w.reset(&mut rng).target_index == Some(0)).count();
    assert!((hits as f64 / 4000.0 - 0.5).abs() < 0.03);
}

#[test]
fn zero_action_is_a_fixed_point() {
    let w = world(CN3);
    let s = laid_out(CN3, vec![[0.5, 0.5], [-0.5, 0.2], [0.0, -0.7]], vec![[1.0, 1.0], [-1.0, 1.0], [0.9, -0.9]], None);
    let out = w.step(&s, &JointAction::zeros(3)).unwrap();
    assert_eq!(out.state.positions, s.positions);
    assert!(out.state.velocities.iter().all(|v| *v == [0.0, 0.0]));
    assert_eq!(out.state.step, 1);
}

#[test]
fn unit_push_from_rest() {
    let w = world(TaskKind::CooperativeNavigation { n_agents: 1 });
    let s = laid_out(w.task, vec![[0.0, 0.0]], vec![[0.9, 0.9]], None);
    let out = w.step(&s, &JointAction(vec![[1.0, 0.0]])).unwrap();
    assert!((out.state.velocities[0][0] - 0.5).abs() < 1e-15);
    assert_eq!(out.state.velocities[0][1], 0.0);
    assert!((out.state.positions[0][0] - 0.05).abs() < 1e-15);
    assert_eq!(out.state.positions[0][1], 0.0);
}

#[test]
fn nan_action_is_an_input_error() {
    let w = world(CN3);
    let s = w.reset(&mut ChaCha8Rng::seed_from_u64(0));
    let mut a = JointAction::zeros(3);
    a.0[1][0] = f64::NAN;
    assert!(matches!(w.step(&s, &a), Err(Error::Input(_))));
}

#[test]
fn episode_ends_at_length() {
    let w = world(CN3);
    let mut s = w.reset(&mut ChaCha8Rng::seed_from_u64(0));
    for t in 1..=25 {
        let out = w.step(&s, &JointAction::zeros(3)).unwrap();
        assert_eq!(out.done, t == 25);
        s = out.state;
    }
}

#[test]
fn predator_touching_prey_is_rewarded() {
    let w = world(TaskKind::PredatorPrey { n_predators: 1 });
    let s = laid_out(w.task, vec![[0.0, 0.0], [0.06, 0.0]], vec![[0.8, 0.8], [-0.8, -0.8]], None);
    let out = w.step(&s, &JointAction::zeros(2)).unwrap();
    assert_eq!(out.events.captures, vec![0]);
    assert_eq!(out.rewards, vec![10.0, -10.0]);
}

#[test]
fn observation_of_agent_on_landmark() {
    let w = world(TaskKind::CooperativeNavigation { n_agents: 2 });
    let s = laid_out(w.task, vec![[0.3, -0.2], [0.9, 0.9]], vec![[0.3, -0.2], [-1.0, 0.0]], None);
    let o = w.observe(&s, 0).unwrap();
    assert_eq!(&o[4..6], &[0.0, 0.0]);
}

#[test]
fn observation_is_translation_invariant_in_relative_entries() {
    let w = world(PP2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = w.reset(&mut rng);
    let mut shifted = s.clone();
    let c = 0.25;
    for p in shifted.positions.iter_mut().chain(shifted.landmark_positions.iter_mut()) {
        p[0] += c;
        p[1] += c;
    }
    for i in 0..3 {
        let a = w.observe(&s, i).unwrap();
        let b = w.observe(&shifted, i).unwrap();
        assert_eq!(a.len(), b.len());
        assert_eq!(a[..2], b[..2]);
        for k in 4..a.len() {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn hand_computed_observation() {
    let w = world(TaskKind::CooperativeNavigation { n_agents: 2 });
    let mut s = laid_out(w.task, vec![[0.1, 0.2], [-0.5, 0.5]], vec![[1.0, 1.0], [0.0, -1.0]], None);
    s.velocities[0] = [0.3, -0.4];
    let want = [0.3, -0.4, 0.1, 0.2, 0.9, 0.8, -0.1, -1.2, -0.6, 0.3];
    let got = w.observe(&s, 0).unwrap();
    assert_eq!(got.len(), want.len());
    for (g, e) in got.iter().zip(want) {
        assert!((g - e).abs() < 1e-15, "{got:?}");
    }
    assert!(matches!(w.observe(&s, 2), Err(Error::Input(_))));
}

#[test]
fn predators_see_prey_velocity() {
    let w = world(PP2);
    let mut s = w.reset(&mut ChaCha8Rng::seed_from_u64(0));
    s.velocities[2] = [0.7, -0.1];
    let o = w.observe(&s, 0).unwrap();
    assert_eq!(o.len(), PP2.obs_len(0));
    assert_eq!(&o[o.len() - 2..], &[0.7, -0.1]);
    assert_eq!(w.observe(&s, 2).unwrap().len(), PP2.obs_len(2));
}

#[test]
fn quiet_step_has_zero_rewards() {
    for task in [CN3, PD2, PP2] {
        let w = world(task);
        let n = task.n_entities();
        let positions = (0..n).map(|i| [-0.9 + 0.4 * i as f64, 0.9]).collect();
        let landmarks = (0..task.n_landmarks()).map(|k| [-0.9 + 0.5 * k as f64, -0.9]).collect();
        let target = matches!(task, TaskKind::PhysicalDeception { .. }).then_some(0);
        let s = laid_out(task, positions, landmarks, target);
        let out = w.step(&s, &JointAction::zeros(n)).unwrap();
        assert!(out.rewards.iter().all(|r| *r == 0.0), "{task:?} {:?}", out.rewards);
    }
}

#[test]
fn deception_adversary_on_target_penalises_agents() {
    let w = world(PD2);
    let s = laid_out(PD2, vec![[-0.9, 0.9], [0.9, 0.9], [0.5, -0.5]], vec![[-0.5, -0.5], [0.5, -0.5]], Some(1));
    let out = w.step(&s, &JointAction::zeros(3)).unwrap();
    assert!(out.events.target_by_adversary);
    assert_eq!(out.rewards, vec![-1.0, -1.0, 1.0]);
}

#[test]
fn navigation_collision_and_cover_enumerated() {
    // agents 0 and 1 overlap, agent 2 sits on landmark 2
    let w = world(CN3);
    let s = laid_out(
        CN3,
        vec![[0.0, 0.0], [0.06, 0.0], [0.8, 0.8]],
        vec![[-0.8, 0.8], [-0.8, -0.8], [0.8, 0.8]],
        None,
    );
    let out: StepOutcome = w.step(&s, &JointAction::zeros(3)).unwrap();
    assert_eq!(out.events.agent_collisions, vec![(0, 1)]);
    assert_eq!(out.events.newly_covered, vec![2]);
    // shared +1 for the new cover, -1 for each agent in the collision
    let r0 = 1.0 - 1.0;
    let r1 = 1.0 - 1.0;
    let r2 = 1.0;
    assert_eq!(out.rewards, vec![r0, r1, r2]);

    // holding the landmark gives nothing more
    let again = w.step(&out.state, &JointAction::zeros(3)).unwrap();
    assert!(again.events.newly_covered.is_empty());
}

fn rollout(w: &World, seed: u64) -> Vec<StepOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = w.reset(&mut rng);
    let mut outs = Vec::new();
    loop {
        let out = w.step(&s, &random_action(&mut rng, w.task.n_entities())).unwrap();
        s = out.state.clone();
        let done = out.done;
        outs.push(out);
        if done {
            return outs;
        }
    }
}

#[test]
fn trajectories_replay_bit_identically() {
    for task in [CN3, PD2, PP2] {
        let w = world(task);
        assert_eq!(rollout(&w, 9), rollout(&w, 9));
    }
}

#[test]
fn states_stay_bounded_and_rewards_in_task_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for task in [CN3, PD2, PP2] {
        let w = world(task);
        for _ in 0..200 {
            let mut s = w.reset(&mut rng);
            loop {
                // oversized raw actions are clamped by the simulator
                let a = JointAction(
                    (0..task.n_entities())
                        .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                        .collect(),
                );
                let out = w.step(&s, &a).unwrap();
                for (i, (p, v)) in out.state.positions.iter().zip(&out.state.velocities).enumerate() {
                    assert!(p.iter().all(|c| c.abs() <= 1.5));
                    let cap = if task.role(i) == sam_core::world::Role::Prey { 1.3 } else { 1.0 };
                    assert!(v[0].hypot(v[1]) <= cap + 1e-12);
                }
                for r in &out.rewards {
                    let ok = match task {
                        // shared cover reward of up to 3 landmarks minus up to 2 collisions
                        TaskKind::CooperativeNavigation { .. } => r.fract() == 0.0 && (-2.0..=3.0).contains(r),
                        TaskKind::PhysicalDeception { .. } => [-1.0, 0.0, 1.0].contains(r),
                        TaskKind::PredatorPrey { .. } => [-20.0, -10.0, 0.0, 10.0, 20.0].contains(r),
                    };
                    assert!(ok, "{task:?} reward {r}");
                }
                if out.done {
                    break;
                }
                s = out.state;
            }
        }
    }
}

#[test]
fn navigation_rewards_are_sparse_under_random_play() {
    let w = world(CN3);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut steps, mut nonzero) = (0usize, 0usize);
    for _ in 0..1000 {
        let mut s = w.reset(&mut rng);
        loop {
            let out = w.step(&s, &random_action(&mut rng, 3)).unwrap();
            steps += 1;
            if out.rewards.iter().any(|r| *r != 0.0) {
                nonzero += 1;
            }
            if out.done {
                break;
            }
            s = out.state;
        }
    }
    let frac = nonzero as f64 / steps as f64;
    assert!(frac < 0.2, "{frac}");
}
