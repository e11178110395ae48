use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dyncoh::channels::{
    identity, mixture, permutation_phase, random_channel, random_di, random_pure_state, ChannelFile,
};
use dyncoh::linalg::kron;
use dyncoh::sdp::{evaluate_f, EvalOptions};
use dyncoh::{Channel, ComplexMatrix, DensityMatrix, GameConfig};

fn m(theta: &Channel, cfg: &GameConfig) -> f64 {
    evaluate_f(theta, cfg, &EvalOptions::default()).unwrap().value
}

fn pure(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    DensityMatrix::pure(&random_pure_state(d, rng)).unwrap().matrix().clone()
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn kraus_file_round_trip(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(din, dout, &mut rng);
        let json = serde_json::to_string(&ChannelFile::from_channel(&ch).unwrap()).unwrap();
        let back: ChannelFile = serde_json::from_str(&json).unwrap();
        prop_assert!(back.to_channel().unwrap().max_abs_diff(&ch) < 1e-10);
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_channel(2, 3, &mut rng);
        let b = random_channel(3, 2, &mut rng);
        let c = random_channel(2, 2, &mut rng);
        let left = Channel::compose(&Channel::compose(&c, &b).unwrap(), &a).unwrap();
        let right = Channel::compose(&c, &Channel::compose(&b, &a).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);

        let rho = pure(2, &mut rng);
        let stepwise = c.apply(&b.apply(&a.apply(&rho).unwrap()).unwrap()).unwrap();
        prop_assert!(left.apply(&rho).unwrap().max_abs_diff(&stepwise) < 1e-12);
    }

    #[test]
    fn tensor_acts_on_products(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_channel(2, 2, &mut rng);
        let b = random_channel(3, 2, &mut rng);
        let (r, s) = (pure(2, &mut rng), pure(3, &mut rng));
        let joint = a.tensor(&b).apply(&kron(&r, &s)).unwrap();
        let separate = kron(&a.apply(&r).unwrap(), &b.apply(&s).unwrap());
        prop_assert!(joint.max_abs_diff(&separate) < 1e-12);
    }

    #[test]
    fn measure_bounded_by_perfect_discrimination(seed in any::<u64>(), lambda in 0.05f64..0.95, dphi in 0.1f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = GameConfig::new(lambda, vec![dphi, 0.0]).unwrap();
        let value = m(&random_channel(2, 2, &mut rng), &cfg);
        prop_assert!(value >= -1e-7);
        prop_assert!(value <= 1.0 - (2.0 * lambda - 1.0).abs() + 1e-7);
    }

    #[test]
    fn global_phase_shift_is_irrelevant(seed in any::<u64>(), shift in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = random_channel(2, 2, &mut rng);
        let phi = [1.1, 0.3];
        let a = m(&theta, &GameConfig::new(0.4, phi.to_vec()).unwrap());
        let b = m(&theta, &GameConfig::new(0.4, phi.iter().map(|p| p + shift).collect()).unwrap());
        prop_assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn reversible_free_relabeling_preserves_the_measure() {
    // A permutation with phases is DI with a DI inverse, so monotonicity
    // in both directions forces equality.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = GameConfig::new(0.3, vec![2.0, 0.5, 0.0]).unwrap();
    let theta = random_channel(3, 2, &mut rng);
    let relabel = permutation_phase(&[2, 0, 1], &[0.4, -1.0, 2.5]).unwrap();
    let before = m(&theta, &cfg);
    let after = m(&Channel::compose(&theta, &relabel).unwrap(), &cfg);
    assert_abs_diff_eq!(before, after, epsilon = 1e-6);
}

#[test]
fn mixing_with_a_free_channel_never_helps() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = GameConfig::new(0.5, vec![2.0 * PI / 3.0, 0.0]).unwrap();
    let theta = random_channel(2, 2, &mut rng);
    let free = random_di(2, 2, &mut rng);
    let full = m(&theta, &cfg);
    for t in [0.25, 0.5, 0.75] {
        let mix = mixture(&[theta.clone(), free.clone()], &[t, 1.0 - t]).unwrap();
        // Convexity with M(free) = 0.
        assert!(m(&mix, &cfg) <= t * full + 1e-6);
    }
    assert_abs_diff_eq!(m(&identity(2), &cfg), 0.0, epsilon = 1e-7);
}
