//! Monte Carlo play of the phase-detection guessing game.

use rand::Rng;
use serde::Serialize;

use super::{par_map, stream_rng};
use crate::channels::{phase_channel, Channel};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measures::{
    optimal_incoherent_povm, povm_success_probability, DensityMatrix, GameConfig, IncoherentPovm,
};

/// Trials per independent random stream.
pub const CHUNK_TRIALS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GameTranscript {
    pub trials: u64,
    pub successes: u64,
    pub empirical_rate: f64,
    pub predicted_rate: f64,
    pub z_score: f64,
}

/// States reaching the measurement when Alice does nothing (`sigma0`) and
/// when she imprints the phases (`sigma1`).
fn game_states(theta: &Channel, phi_pre: &Channel, rho: &DensityMatrix, cfg: &GameConfig) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if rho.dim() != cfg.dim() || phi_pre.dim_in() != cfg.dim() || phi_pre.dim_out() != theta.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "state {} -> pre-processing {}->{} -> channel {}->{} with {} phases",
            rho.dim(),
            phi_pre.dim_in(),
            phi_pre.dim_out(),
            theta.dim_in(),
            theta.dim_out(),
            cfg.dim()
        )));
    }
    let sigma0 = theta.apply(&phi_pre.apply(rho.matrix())?)?;
    let phased = phase_channel(cfg.phi()).apply(rho.matrix())?;
    let sigma1 = theta.apply(&phi_pre.apply(&phased)?)?;
    Ok((sigma0, sigma1))
}

/// The incoherent measurement maximizing the success probability for the
/// given pre-processing and input.
pub fn optimal_protocol(theta: &Channel, phi_pre: &Channel, rho: &DensityMatrix, cfg: &GameConfig) -> Result<IncoherentPovm> {
    let (s0, s1) = game_states(theta, phi_pre, rho, cfg)?;
    optimal_incoherent_povm(cfg, &DensityMatrix::new(s0)?, &DensityMatrix::new(s1)?)
}

/// Plays `trials` rounds: Alice imprints the phases with probability `mu`,
/// Bob sends `rho` through `phi_pre` and `theta`, measures `povm`, and
/// guesses "not applied" exactly on outcome 0.
pub fn monte_carlo_game(
    theta: &Channel,
    phi_pre: &Channel,
    rho: &DensityMatrix,
    povm: &IncoherentPovm,
    cfg: &GameConfig,
    trials: u64,
    rng_seed: u64,
) -> Result<GameTranscript> {
    if trials == 0 {
        return Err(Error::Validation("at least one trial is required".into()));
    }
    if povm.dim() != theta.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "POVM on dimension {} for channel output {}",
            povm.dim(),
            theta.dim_out()
        )));
    }
    let (s0, s1) = game_states(theta, phi_pre, rho, cfg)?;
    let p0 = povm.probabilities(&s0);
    let p1 = povm.probabilities(&s1);
    let predicted = povm_success_probability(cfg, povm, &s0, &s1);

    let chunks: Vec<u64> = (0..trials.div_ceil(CHUNK_TRIALS)).collect();
    let counts = par_map(&chunks, |&c| {
        let mut rng = stream_rng(rng_seed, c);
        let n = CHUNK_TRIALS.min(trials - c * CHUNK_TRIALS);
        let mut wins = 0u64;
        for _ in 0..n {
            let applied = rng.gen::<f64>() < cfg.mu();
            let probs = if applied { &p1 } else { &p0 };
            let u = rng.gen::<f64>();
            let mut acc = 0.0;
            let mut outcome = probs.len() - 1;
            for (k, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    outcome = k;
                    break;
                }
            }
            if (outcome != 0) == applied {
                wins += 1;
            }
        }
        wins
    });
    let successes: u64 = counts.iter().sum();
    let empirical = successes as f64 / trials as f64;
    let n = trials as f64;
    let sd = (predicted * (1.0 - predicted) / n).sqrt().max(1.0 / n);
    Ok(GameTranscript {
        trials,
        successes,
        empirical_rate: empirical,
        predicted_rate: predicted,
        z_score: (empirical - predicted) / sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{hadamard, identity, random_di};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn prior_betting_on_a_free_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let theta = random_di(2, 2, &mut rng);
        let cfg = GameConfig::new(0.8, vec![0.0, 1.0]).unwrap();
        let always_not_applied = IncoherentPovm::binary(&[1.0, 1.0]).unwrap();
        let t = monte_carlo_game(&theta, &identity(2), &DensityMatrix::basis(2, 0), &always_not_applied, &cfg, 20_000, 1).unwrap();
        assert!((t.predicted_rate - 0.8).abs() < 1e-12);
        assert!(t.z_score.abs() < 4.0);
    }

    #[test]
    fn certain_prior_always_wins() {
        let cfg = GameConfig::new(1.0, vec![0.0, 1.0]).unwrap();
        let povm = IncoherentPovm::binary(&[1.0, 1.0]).unwrap();
        let t = monte_carlo_game(&hadamard(), &identity(2), &DensityMatrix::basis(2, 1), &povm, &cfg, 5000, 2).unwrap();
        assert_eq!(t.successes, 5000);
        assert_eq!(t.empirical_rate, 1.0);
        assert!(t.z_score.abs() < 1e-9);
    }

    #[test]
    fn hadamard_protocol_matches_prediction() {
        let cfg = GameConfig::new(0.5, vec![2.0 * PI / 3.0, 0.0]).unwrap();
        let xi = (num_complex::Complex64::new(1.0, 0.0) - num_complex::Complex64::from_polar(1.0, 2.0 * PI / 3.0)).arg();
        let s = 1.0 / 2f64.sqrt();
        let rho = DensityMatrix::pure(&[num_complex::Complex64::new(s, 0.0), num_complex::Complex64::from_polar(s, xi)]).unwrap();
        let povm = optimal_protocol(&hadamard(), &identity(2), &rho, &cfg).unwrap();
        let t = monte_carlo_game(&hadamard(), &identity(2), &rho, &povm, &cfg, 100_000, 3).unwrap();
        assert!((t.predicted_rate - (0.5 + 3f64.sqrt() / 4.0)).abs() < 1e-9);
        assert!(t.z_score.abs() < 4.0, "{t:?}");
    }

    #[test]
    fn results_do_not_depend_on_chunking_order() {
        let cfg = GameConfig::new(0.5, vec![1.0, 0.0]).unwrap();
        let povm = IncoherentPovm::binary(&[1.0, 0.0]).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let a = monte_carlo_game(&hadamard(), &identity(2), &rho, &povm, &cfg, 10_000, 4).unwrap();
        let b = monte_carlo_game(&hadamard(), &identity(2), &rho, &povm, &cfg, 10_000, 4).unwrap();
        assert_eq!(a, b);
    }
}
