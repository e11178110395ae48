//! Measures of how well a quantum channel detects or creates coherence.
//!
//! The pre-processed improvement `M` is evaluated exactly through a family of
//! small semidefinite programs ([`sdp::evaluate_f`]); the post-processed
//! improvement `N` is bounded from below by an alternating heuristic
//! ([`search::post_processed_lower`]). Both are tied to a guessing game in
//! which Bob tries to tell whether Alice imprinted phases on his state, and
//! [`search::monte_carlo_game`] plays that game directly.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod sdp;
pub mod search;
pub mod verify;

pub use channels::{Channel, LinearMap};
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use measures::{DensityMatrix, GameConfig};

/// Runs `f` with the library's parallel sections limited to `threads`
/// workers. Results never depend on the thread count.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
