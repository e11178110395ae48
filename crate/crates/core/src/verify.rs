//! A quick self-check of the library's structural properties on random
//! instances, as run by `dyncoh verify`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{
    di_direct_deviation, hadamard, identity, is_detection_incoherent, is_mio, mio_direct_deviation, mixture,
    random_channel, random_di, random_mio, Channel, DEFAULT_MEMBERSHIP_TOL,
};
use crate::error::Result;
use crate::measures::GameConfig;
use crate::sdp::{evaluate_f, EvalOptions};
use crate::search::{
    swap_counterexample, brute_force_f_lower, l_functional, monte_carlo_game, optimal_protocol,
    post_processed_lower, SearchBudget,
};

#[derive(Clone, Debug, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    /// The worst observed deviation or the decisive value.
    pub observed: f64,
    pub tolerance: f64,
}

struct Suite {
    rng: ChaCha8Rng,
    opts: EvalOptions,
    budget: SearchBudget,
    checks: Vec<PropertyCheck>,
}

impl Suite {
    fn record(&mut self, name: &'static str, observed: f64, tolerance: f64) {
        self.checks.push(PropertyCheck {
            name,
            passed: observed.is_finite() && observed <= tolerance,
            observed,
            tolerance,
        });
    }

    fn m(&self, theta: &Channel, cfg: &GameConfig) -> Result<f64> {
        Ok(evaluate_f(theta, cfg, &self.opts)?.value)
    }

    fn random_cfg(&mut self, dim: usize) -> GameConfig {
        let lambda = self.rng.gen_range(0.2..0.8);
        let phi = (0..dim).map(|_| self.rng.gen_range(0.0..2.0 * PI)).collect();
        GameConfig::new(lambda, phi).expect("valid configuration")
    }
}

/// Runs every check; `samples` scales the number of random instances.
pub fn run_suite(seed: u64, samples: usize, opts: &EvalOptions) -> Result<Vec<PropertyCheck>> {
    let samples = samples.max(1);
    let mut s = Suite {
        rng: ChaCha8Rng::seed_from_u64(seed),
        opts: *opts,
        budget: SearchBudget {
            random_samples: 500,
            grid_resolution: 16,
            refinement_iterations: 200,
            rng_seed: seed,
        },
        checks: Vec::new(),
    };
    let hadamard_cfg = GameConfig::new(0.5, vec![2.0 * PI / 3.0, 0.0])?;
    let root3_2 = 3f64.sqrt() / 2.0;

    let mut worst: f64 = 0.0;
    for _ in 0..10 * samples {
        let ch = random_channel(2, 3, &mut s.rng);
        let ids = ch.index_coeffs().identities();
        worst = worst.max(ids.min_population.min(0.0).abs());
        worst = worst.max(ids.conjugation_deviation).max(ids.trace_deviation);
    }
    s.record("index coefficient identities", worst, 1e-9);

    let mut disagreements = 0.0;
    for n in 0..6 * samples {
        let ch = match n % 3 {
            0 => random_di(2, 2, &mut s.rng),
            1 => random_mio(2, 2, &mut s.rng),
            _ => random_channel(2, 2, &mut s.rng),
        };
        let tol = DEFAULT_MEMBERSHIP_TOL;
        if is_detection_incoherent(&ch, tol) != (di_direct_deviation(&ch) <= tol)
            || is_mio(&ch, tol) != (mio_direct_deviation(&ch) <= tol)
        {
            disagreements += 1.0;
        }
    }
    s.record("membership criteria agree with direct comparison", disagreements, 0.0);

    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let cfg = s.random_cfg(2);
        let theta = random_di(2, 2, &mut s.rng);
        worst = worst.max(s.m(&theta, &cfg)?.abs());
    }
    s.record("pre-processed nullity on DI channels", worst, 1e-6);

    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let cfg = s.random_cfg(2);
        let theta = random_mio(2, 2, &mut s.rng);
        worst = worst.max(post_processed_lower(&theta, &cfg, &s.budget)?.value.abs());
    }
    s.record("post-processed nullity on MIO channels", worst, 1e-6);

    let report = evaluate_f(&hadamard(), &hadamard_cfg, &s.opts)?;
    s.record("Hadamard pre-processed value", (report.value - root3_2).abs(), 1e-4);
    s.record("Hadamard extraction round trip", report.verification_residual, 1e-6);
    let post = post_processed_lower(&hadamard(), &hadamard_cfg, &s.budget)?;
    s.record("Hadamard post-processed lower bound", (post.value - root3_2).abs(), 1e-4);

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let cfg = s.random_cfg(2);
        let theta = random_channel(2, 2, &mut s.rng);
        let di = random_di(2, 2, &mut s.rng);
        let base = s.m(&theta, &cfg)?;
        let left = s.m(&Channel::compose(&di, &theta)?, &cfg)?;
        let right = s.m(&Channel::compose(&theta, &di)?, &cfg)?;
        worst = worst.max(left - base).max(right - base);
    }
    s.record("monotonicity under free composition", worst, 1e-5);

    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let cfg = s.random_cfg(2);
        let theta = random_channel(2, 2, &mut s.rng);
        let base = s.m(&theta, &cfg)?;
        worst = worst.max((s.m(&theta.tensor(&identity(2)), &cfg)? - base).abs());
        worst = worst.max((s.m(&theta, &cfg.with_auxiliary(2))? - base).abs());
    }
    s.record("tensor and auxiliary invariance", worst, 1e-4);

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let cfg = s.random_cfg(2);
        let a = random_channel(2, 2, &mut s.rng);
        let b = random_channel(2, 2, &mut s.rng);
        let (ma, mb) = (s.m(&a, &cfg)?, s.m(&b, &cfg)?);
        let t = 0.5;
        let mix = mixture(&[a, b], &[t, 1.0 - t])?;
        worst = worst.max(s.m(&mix, &cfg)? - t * ma - (1.0 - t) * mb);
    }
    s.record("convexity", worst, 1e-5);

    let even = GameConfig::new(0.5, vec![2.0 * PI / 3.0, 0.0])?;
    let mut smallest = f64::INFINITY;
    for _ in 0..samples {
        let theta = random_channel(2, 2, &mut s.rng);
        smallest = smallest.min(s.m(&theta, &even)?);
    }
    s.record("faithfulness at even priors (negated smallest M)", -smallest, -1e-6);
    let skewed = GameConfig::new(0.9, vec![2.0 * PI / 3.0, 0.0])?;
    let weak = mixture(&[hadamard(), identity(2)], &[0.05, 0.95])?;
    s.record("non-faithfulness at lambda = 0.9", s.m(&weak, &skewed)?, 1e-7);

    let mut worst: f64 = 0.0;
    let mut not_di = 0.0;
    for _ in 0..samples {
        let cfg = s.random_cfg(2);
        let theta = random_channel(2, 2, &mut s.rng);
        let r = evaluate_f(&theta, &cfg, &s.opts)?;
        worst = worst.max(r.verification_residual);
        if !is_detection_incoherent(&r.extraction.phi_opt, 1e-7) {
            not_di += 1.0;
        }
    }
    s.record("extraction round trip", worst, 1e-5);
    s.record("extracted pre-processings are DI", not_di, 0.0);

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let cfg = s.random_cfg(2);
        let theta = random_channel(2, 2, &mut s.rng);
        let f = evaluate_f(&theta, &cfg, &s.opts)?.f_value;
        worst = worst.max(brute_force_f_lower(&theta, &cfg, &s.budget)? - f);
        worst = worst.max(l_functional(&theta, &cfg, &s.budget)? + cfg.prior_gap() - f);
    }
    s.record("sampled values never beat the SDP", worst, 1e-6);

    let c = swap_counterexample(&s.budget)?;
    s.record("counterexample: L before the swap", c.l_before.abs(), 1e-6);
    s.record("counterexample: 1 - L after the swap", 1.0 - c.l_after, 0.01);

    let ex = &report.extraction;
    let povm = optimal_protocol(&hadamard(), &ex.phi_opt, &ex.rho_opt, &hadamard_cfg)?;
    let game = monte_carlo_game(&hadamard(), &ex.phi_opt, &ex.rho_opt, &povm, &hadamard_cfg, 100_000, seed)?;
    let expected = 0.5 + 0.5 * report.f_value;
    let sd = (expected * (1.0 - expected) / game.trials as f64).sqrt();
    s.record("guessing game within 3 sigma (in sigmas)", (game.empirical_rate - expected).abs() / sd, 3.0);

    Ok(s.checks)
}
