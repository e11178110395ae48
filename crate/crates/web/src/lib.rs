//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every entry point takes plain numbers and strings and returns a JSON
//! document, so the page needs no generated type glue beyond the
//! `wasm-bindgen` shim. The same functions run natively, which is how they
//! are tested.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dyncoh::channels::{resolve_channel, Classification};
use dyncoh::sdp::{evaluate_f, EvalOptions};
use dyncoh::search::{mixture_sweep, gradient_kink, monte_carlo_game, optimal_protocol, GameTranscript};
use dyncoh::GameConfig;

/// Largest trial count the page may request in one call.
pub const MAX_TRIALS: u32 = 2_000_000;

#[derive(Serialize)]
struct Curve {
    lambda: f64,
    p1: Vec<f64>,
    m: Vec<f64>,
    /// Index into `p1` where the slope jumps, if any.
    kink: Option<usize>,
}

#[derive(Serialize)]
struct Measurement {
    value: f64,
    f_value: f64,
    per_sign_values: Vec<f64>,
    classification: Classification,
    /// Populations of the optimal input state.
    input_populations: Vec<f64>,
    verification_residual: f64,
}

#[derive(Serialize)]
struct Game {
    m_value: f64,
    #[serde(flatten)]
    transcript: GameTranscript,
}

fn parse_phi(phi: &str) -> Result<Vec<f64>, String> {
    phi.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad phase '{}': {e}", s.trim())))
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// `M` along the Hadamard/identity mixture line for one prior.
#[wasm_bindgen]
pub fn sweep_curve(lambda: f64, p1_steps: usize, phi: &str) -> Result<String, String> {
    if p1_steps < 2 {
        return Err("need at least two p1 steps".into());
    }
    let grid: Vec<f64> = (0..p1_steps).map(|k| k as f64 / (p1_steps - 1) as f64).collect();
    let rows = mixture_sweep(&[lambda], &grid, &parse_phi(phi)?, &EvalOptions::default()).map_err(|e| e.to_string())?;
    let m: Vec<f64> = rows.iter().map(|r| r.m).collect();
    let kink = gradient_kink(&grid, &m);
    to_json(&Curve { lambda, p1: grid, m, kink })
}

/// Exact pre-processed value and class membership of a built-in channel.
#[wasm_bindgen]
pub fn measure_channel(uri: &str, lambda: f64, phi: &str) -> Result<String, String> {
    let theta = resolve_channel(uri).map_err(|e| e.to_string())?;
    let cfg = GameConfig::new(lambda, parse_phi(phi)?).map_err(|e| e.to_string())?;
    let r = evaluate_f(&theta, &cfg, &EvalOptions::default()).map_err(|e| e.to_string())?;
    let rho = r.extraction.rho_opt.matrix();
    to_json(&Measurement {
        value: r.value,
        f_value: r.f_value,
        per_sign_values: r.per_sign_values.clone(),
        classification: Classification::of(&theta, dyncoh::channels::DEFAULT_MEMBERSHIP_TOL),
        input_populations: (0..rho.rows()).map(|i| rho[(i, i)].re).collect(),
        verification_residual: r.verification_residual,
    })
}

/// Plays the guessing game with the optimal protocol for `uri`.
#[wasm_bindgen]
pub fn simulate_game(uri: &str, lambda: f64, phi: &str, trials: u32, seed: u32) -> Result<String, String> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must be between 1 and {MAX_TRIALS}"));
    }
    let theta = resolve_channel(uri).map_err(|e| e.to_string())?;
    let cfg = GameConfig::new(lambda, parse_phi(phi)?).map_err(|e| e.to_string())?;
    let r = evaluate_f(&theta, &cfg, &EvalOptions::default()).map_err(|e| e.to_string())?;
    let ex = &r.extraction;
    let povm = optimal_protocol(&theta, &ex.phi_opt, &ex.rho_opt, &cfg).map_err(|e| e.to_string())?;
    let transcript = monte_carlo_game(&theta, &ex.phi_opt, &ex.rho_opt, &povm, &cfg, trials as u64, seed as u64)
        .map_err(|e| e.to_string())?;
    to_json(&Game { m_value: r.value, transcript })
}
