use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sam_core::numkit::gradcheck::{mlp_max_relative_error, policy_max_relative_error};
use sam_core::numkit::{gaussian_log_prob, project_params, MlpParams, Parameters, PolicyParams};

fn sizes() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=16, 2..=4)
}

fn net_and_inputs() -> impl Strategy<Value = (MlpParams, Vec<f64>, Vec<f64>)> {
    (sizes(), any::<u64>()).prop_flat_map(|(s, seed)| {
        let net = MlpParams::glorot(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let (i, o) = (s[0], *s.last().unwrap());
        (
            Just(net),
            prop::collection::vec(-2.0f64..2.0, i),
            prop::collection::vec(-1.0f64..1.0, o),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mlp_gradient_matches_finite_differences((mut net, x, up) in net_and_inputs(), bias in -0.5f64..0.5) {
        for v in net.flat_mut().iter_mut().filter(|v| **v == 0.0) {
            *v = bias;
        }
        prop_assert!(mlp_max_relative_error(&net, &x, &up).unwrap() < 1e-4);
    }

    #[test]
    fn policy_gradient_matches_finite_differences(
        (net, x, _) in net_and_inputs(),
        ls in prop::collection::vec(-1.5f64..0.5, 16),
        a in prop::collection::vec(-2.0f64..2.0, 16),
    ) {
        let d = net.output_len();
        let policy = PolicyParams::new(net, ls[..d].to_vec()).unwrap();
        prop_assert!(policy_max_relative_error(&policy, &x, &a[..d]).unwrap() < 1e-4);
    }

    #[test]
    fn projection_stays_in_ball(
        v in prop::collection::vec(-50.0f64..50.0, 1..40),
        radius in 0.1f64..30.0,
    ) {
        let n = v.len();
        let mut flat = v.clone();
        flat.push(0.0);
        let net = MlpParams::from_flat(&[n, 1], flat).unwrap();
        let p = project_params(&net, radius);
        prop_assert!(p.norm() <= radius + 1e-12);
        if net.norm() <= radius {
            prop_assert_eq!(p.flat(), net.flat());
        }
        let twice = project_params(&p, radius);
        prop_assert!(twice.flat().iter().zip(p.flat()).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0)));
    }
}

#[test]
fn two_dim_density_integrates_to_one() {
    let mean = [0.3, -0.2];
    let log_std = [-0.4, 0.2];
    let (h, half) = (0.02, 8.0);
    let steps = (2.0 * half / h) as i64;
    let mut total = 0.0;
    for i in 0..steps {
        for j in 0..steps {
            let a = [-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h];
            total += gaussian_log_prob(&mean, &log_std, &a).unwrap().exp() * h * h;
        }
    }
    assert!((total - 1.0).abs() < 0.01, "{total}");
}
