//! Derivative-free local ascent used to refine sampled points.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Random-direction hill climbing with a step that grows on success and
/// shrinks on failure. Returns the best point and its value.
pub(crate) fn hill_climb<S, R: Rng>(
    start: S,
    start_value: f64,
    iterations: usize,
    rng: &mut R,
    mut perturb: impl FnMut(&S, f64, &mut R) -> S,
    mut value: impl FnMut(&S) -> f64,
) -> (S, f64) {
    let (mut best, mut best_value) = (start, start_value);
    let mut step = 0.3;
    for _ in 0..iterations {
        let cand = perturb(&best, step, rng);
        let v = value(&cand);
        if v > best_value {
            best = cand;
            best_value = v;
            step = (step * 1.5).min(1.0);
        } else {
            step = (step * 0.85).max(1e-5);
        }
    }
    (best, best_value)
}

pub(crate) fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub(crate) fn perturb_amplitudes<R: Rng>(v: &[Complex64], step: f64, rng: &mut R) -> Vec<Complex64> {
    let w: Vec<Complex64> = v
        .iter()
        .map(|z| z + Complex64::new(normal(rng), normal(rng)) * step)
        .collect();
    let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    w.into_iter().map(|z| z / n).collect()
}
