//! Independent oracles and heuristics that do not go through the exact SDP
//! reduction: sampled lower bounds on `F`, the functional without
//! pre-processing, a lower bound on the post-processed improvement, the
//! Monte Carlo guessing game, and the Hadamard-mixture sweep.

mod brute;
mod climb;
mod game;
mod post;
mod sweep;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use brute::{
    swap_counterexample, swap_counterexample_instance, brute_force_f_lower, l_functional, CounterexampleReport,
};
pub use game::{monte_carlo_game, optimal_protocol, GameTranscript, CHUNK_TRIALS};
pub use post::{post_processed_lower, PostProcessedBound, RANDOM_RESTARTS};
pub use sweep::{mixture_sweep, format_sig12, gradient_kink, sweep_csv, SweepRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub random_samples: usize,
    pub grid_resolution: usize,
    pub refinement_iterations: usize,
    pub rng_seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            random_samples: 2000,
            grid_resolution: 32,
            refinement_iterations: 300,
            rng_seed: 0,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.random_samples == 0 || self.grid_resolution == 0 || self.refinement_iterations == 0 {
            return Err(Error::Validation("search budget counts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }
}

/// Independent generator for work item `stream`, so results do not depend
/// on how items are spread over threads.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Ordered parallel map when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
