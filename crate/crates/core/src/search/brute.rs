//! Sampled lower bounds for the pre-processed functional and the pure-state
//! functional without pre-processing.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::climb::{hill_climb, perturb_amplitudes};
use super::{par_map, stream_rng, SearchBudget};
use crate::channels::{hadamard, identity, random_permutation_phase, random_pure_state, swap, Channel, DiParams};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measures::{apply_signal, f_direct, DensityMatrix, GameConfig};

const REFINED_CANDIDATES: usize = 8;
/// Largest output dimension for which every signed sum is climbed.
const SIGNED_TARGET_LIMIT: usize = 4;

#[derive(Clone)]
enum PreProcessing {
    Fixed(Channel),
    Free(DiParams),
}

impl PreProcessing {
    fn channel(&self) -> Channel {
        match self {
            PreProcessing::Fixed(ch) => ch.clone(),
            PreProcessing::Free(p) => p.to_channel(),
        }
    }
}

#[derive(Clone)]
struct Point {
    pre: PreProcessing,
    amp: Vec<Complex64>,
}

/// Output populations `diag theta Phi (lambda - mu Lambda_phi)(rho)`.
fn populations(theta: &Channel, cfg: &GameConfig, p: &Point) -> Option<Vec<f64>> {
    let rho = ComplexMatrix::outer(&p.amp, &p.amp);
    let signal = apply_signal(cfg, &rho).ok()?;
    let out = theta.apply(&p.pre.channel().apply(&signal).ok()?).ok()?;
    Some(out.diag().iter().map(|z| z.re).collect())
}

/// `sum_n s_n d_n`; with `s = None` the trace norm `sum_n |d_n|`.
fn evaluate_signed(theta: &Channel, cfg: &GameConfig, p: &Point, s: Option<&[f64]>) -> f64 {
    match populations(theta, cfg, p) {
        Some(d) => match s {
            Some(s) => d.iter().zip(s).map(|(x, y)| x * y).sum(),
            None => d.iter().map(|x| x.abs()).sum(),
        },
        None => f64::NEG_INFINITY,
    }
}

fn evaluate(theta: &Channel, cfg: &GameConfig, p: &Point) -> f64 {
    evaluate_signed(theta, cfg, p, None)
}

fn perturb(p: &Point, step: f64, rng: &mut impl Rng) -> Point {
    let pre = match &p.pre {
        PreProcessing::Fixed(ch) => PreProcessing::Fixed(ch.clone()),
        PreProcessing::Free(params) => PreProcessing::Free(params.perturbed(step, rng)),
    };
    Point {
        pre,
        amp: perturb_amplitudes(&p.amp, step, rng),
    }
}

/// Free channels `A -> B` that are worth trying exactly: the identity and
/// random permutation-phase unitaries when the dimensions agree, and the
/// subsystem swap when `A` is a square of a smaller dimension.
fn structured_candidates(da: usize, db: usize, rng: &mut impl Rng) -> Vec<Channel> {
    let mut out = Vec::new();
    if da == db {
        out.push(identity(da));
        for _ in 0..4 {
            out.push(random_permutation_phase(da, rng));
        }
        let r = (da as f64).sqrt().round() as usize;
        if r > 1 && r * r == da {
            out.push(swap(r, r));
        }
    }
    out
}

fn check_dims(theta: &Channel, cfg: &GameConfig, need_square: bool) -> Result<()> {
    if need_square && theta.dim_in() != cfg.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel input {} does not match the {} phases",
            theta.dim_in(),
            cfg.dim()
        )));
    }
    Ok(())
}

/// Maximum of the directly evaluated functional over sampled
/// detection-incoherent pre-processings and pure inputs, refined by local
/// ascent. Always a lower bound on the exact value `F`.
pub fn brute_force_f_lower(theta: &Channel, cfg: &GameConfig, budget: &SearchBudget) -> Result<f64> {
    budget.validate()?;
    check_dims(theta, cfg, false)?;
    let (da, db) = (cfg.dim(), theta.dim_in());
    let fixed = structured_candidates(da, db, &mut stream_rng(budget.rng_seed, u64::MAX));

    let indices: Vec<usize> = (0..budget.random_samples.max(fixed.len())).collect();
    let sampled: Vec<(f64, Point)> = par_map(&indices, |&idx| {
        let mut rng = stream_rng(budget.rng_seed, idx as u64);
        let pre = match fixed.get(idx) {
            Some(ch) => PreProcessing::Fixed(ch.clone()),
            None => PreProcessing::Free(DiParams::random(da, db, &mut rng)),
        };
        let p = Point {
            pre,
            amp: random_pure_state(da, &mut rng),
        };
        (evaluate(theta, cfg, &p), p)
    });

    // The trace norm is flat wherever no output population changes sign, so
    // besides climbing it directly, climb each smooth signed sum
    // sum_n s_n d_n from the samples that score best on it. The reported
    // value is always the trace norm at a visited point.
    let n_out = theta.dim_out();
    let mut targets: Vec<Option<Vec<f64>>> = vec![None];
    if n_out <= SIGNED_TARGET_LIMIT {
        targets.extend(
            (0..1u64 << n_out).map(|b| Some((0..n_out).map(|n| if b >> n & 1 == 1 { -1.0 } else { 1.0 }).collect())),
        );
    }
    let mut jobs: Vec<(usize, usize)> = (0..fixed.len()).map(|i| (0, i)).collect();
    for (t, target) in targets.iter().enumerate() {
        let score = |p: &Point| evaluate_signed(theta, cfg, p, target.as_deref());
        let mut scored: Vec<(f64, usize)> = (fixed.len()..sampled.len()).map(|i| (score(&sampled[i].1), i)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        jobs.extend(scored.into_iter().take(REFINED_CANDIDATES).map(|(_, i)| (t, i)));
    }

    let refined = par_map(&jobs, |&(t, i)| {
        let stream = (budget.random_samples + t * sampled.len() + i) as u64;
        let mut rng = stream_rng(budget.rng_seed, stream);
        let target = targets[t].as_deref();
        let p0 = sampled[i].1.clone();
        let v0 = evaluate_signed(theta, cfg, &p0, target);
        let (p, _) = hill_climb(
            p0,
            v0,
            budget.refinement_iterations,
            &mut rng,
            perturb,
            |p| evaluate_signed(theta, cfg, p, target),
        );
        evaluate(theta, cfg, &p)
    });
    let best = sampled
        .iter()
        .map(|s| s.0)
        .chain(refined)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best)
}

fn pure_from_bloch(t: f64, p: f64) -> Vec<Complex64> {
    vec![
        Complex64::new((t / 2.0).cos(), 0.0),
        Complex64::from_polar((t / 2.0).sin(), p),
    ]
}

/// `max_rho || D theta (lambda - mu Lambda_phi)(rho) ||_1 - |lambda - mu|` over
/// pure inputs: a Bloch-angle grid for qubits, Haar samples otherwise, each
/// followed by local ascent from the best points.
pub fn l_functional(theta: &Channel, cfg: &GameConfig, budget: &SearchBudget) -> Result<f64> {
    budget.validate()?;
    check_dims(theta, cfg, true)?;
    let d = cfg.dim();
    let id = identity(d);
    let value = |amp: &Vec<Complex64>| {
        let rho = DensityMatrix::pure(amp).expect("amplitudes are normalized");
        f_direct(theta, &id, &rho, cfg).unwrap_or(f64::NEG_INFINITY)
    };

    let starts: Vec<Vec<Complex64>> = if d == 2 {
        let n = budget.grid_resolution;
        (0..=n)
            .flat_map(|a| (0..2 * n).map(move |b| (a, b)))
            .map(|(a, b)| pure_from_bloch(PI * a as f64 / n as f64, PI * b as f64 / n as f64))
            .collect()
    } else {
        (0..budget.random_samples)
            .map(|idx| random_pure_state(d, &mut stream_rng(budget.rng_seed, idx as u64)))
            .collect()
    };
    let scored: Vec<(f64, Vec<Complex64>)> = par_map(&starts, |a| (value(a), a.clone()));
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0));
    order.truncate(REFINED_CANDIDATES);
    let refined = par_map(&order, |&i| {
        let mut rng = stream_rng(budget.rng_seed, (starts.len() + i) as u64);
        hill_climb(
            scored[i].1.clone(),
            scored[i].0,
            budget.refinement_iterations,
            &mut rng,
            |a, s, r| perturb_amplitudes(a, s, r),
            |a| value(a),
        )
        .1
    });
    let best = scored
        .iter()
        .map(|s| s.0)
        .chain(refined)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best - cfg.prior_gap())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub l_before: f64,
    pub l_after: f64,
}

impl CounterexampleReport {
    /// The functional without pre-processing grew under a free superchannel.
    pub fn shows_non_monotonicity(&self) -> bool {
        self.l_before <= 1e-6 && self.l_after > 1e-6
    }
}

/// The two-qubit channel `H (x) id` with phases `(pi, 0)` imprinted on the
/// second qubit at `lambda = 1/2`: the Hadamard never sees the phase, so `L`
/// vanishes. Swapping the inputs first routes the phase into the Hadamard
/// and `L` becomes 1.
pub fn swap_counterexample_instance() -> (Channel, Channel, GameConfig) {
    let theta = hadamard().tensor(&identity(2));
    let swapped = Channel::compose(&theta, &swap(2, 2)).expect("shapes agree");
    let cfg = GameConfig::new(0.5, vec![PI, 0.0, PI, 0.0]).expect("valid configuration");
    (theta, swapped, cfg)
}

pub fn swap_counterexample(budget: &SearchBudget) -> Result<CounterexampleReport> {
    let (theta, swapped, cfg) = swap_counterexample_instance();
    Ok(CounterexampleReport {
        l_before: l_functional(&theta, &cfg, budget)?,
        l_after: l_functional(&swapped, &cfg, budget)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_di;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> SearchBudget {
        SearchBudget {
            random_samples: 300,
            grid_resolution: 12,
            refinement_iterations: 150,
            rng_seed: 3,
        }
    }

    #[test]
    fn detection_incoherent_channels_give_the_prior_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let cfg = GameConfig::new(0.7, vec![0.0, 2.0]).unwrap();
        let theta = random_di(2, 2, &mut rng);
        let v = brute_force_f_lower(&theta, &cfg, &small()).unwrap();
        assert!((v - cfg.prior_gap()).abs() < 1e-9);
        assert!(l_functional(&theta, &cfg, &small()).unwrap().abs() < 1e-9);
    }

    #[test]
    fn hadamard_optimum_is_found() {
        let cfg = GameConfig::new(0.5, vec![2.0 * PI / 3.0, 0.0]).unwrap();
        let target = 3f64.sqrt() / 2.0;
        assert!(brute_force_f_lower(&hadamard(), &cfg, &small()).unwrap() > target - 1e-3);
        assert!((l_functional(&hadamard(), &cfg, &small()).unwrap() - target).abs() < 1e-3);
    }

    #[test]
    fn counterexample_instance() {
        let r = swap_counterexample(&small()).unwrap();
        assert!(r.l_before.abs() <= 1e-6, "{r:?}");
        assert!(r.l_after > 0.99, "{r:?}");
        assert!(r.shows_non_monotonicity());
    }

    #[test]
    fn budget_is_validated() {
        let cfg = GameConfig::new(0.5, vec![0.0, 1.0]).unwrap();
        let b = SearchBudget {
            random_samples: 0,
            ..small()
        };
        assert!(brute_force_f_lower(&hadamard(), &cfg, &b).is_err());
        let wrong = GameConfig::new(0.5, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(l_functional(&hadamard(), &wrong, &small()).is_err());
    }
}
