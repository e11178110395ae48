//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line with
//! the observed value against its pinned tolerance and runtime limit; the
//! process fails if any criterion does.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dyncoh::channels::{
    hadamard, identity, is_detection_incoherent, is_mio, mixture, random_channel, random_di, random_mio,
    DEFAULT_MEMBERSHIP_TOL,
};
use dyncoh::sdp::{evaluate_f, EvalOptions, MeasureReport};
use dyncoh::search::{
    swap_counterexample, swap_counterexample_instance, brute_force_f_lower, mixture_sweep, gradient_kink,
    monte_carlo_game, optimal_protocol, post_processed_lower, SearchBudget,
};
use dyncoh::{Channel, ComplexMatrix, DensityMatrix, GameConfig, Result};

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Result<Outcome> {
    Ok(Outcome { passed, summary })
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Result<Outcome>,
}

fn opts() -> EvalOptions {
    EvalOptions::default()
}

fn cfg(lambda: f64, phi: &[f64]) -> GameConfig {
    GameConfig::new(lambda, phi.to_vec()).unwrap()
}

fn random_cfg(dim: usize, rng: &mut ChaCha8Rng) -> GameConfig {
    let lambda = rng.gen_range(0.1..0.9);
    let phi = (0..dim).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    GameConfig::new(lambda, phi).unwrap()
}

fn m(theta: &Channel, cfg: &GameConfig) -> Result<f64> {
    Ok(evaluate_f(theta, cfg, &opts())?.value)
}

// ---- oracles computed here, from channel action on matrix units only ----

fn unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |r, c| if r == i && c == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// `coeff[i][j][k][l] = <k| theta(|i><j|) |l>`.
fn coefficients(theta: &Channel) -> Vec<Vec<ComplexMatrix>> {
    let d = theta.dim_in();
    (0..d)
        .map(|i| (0..d).map(|j| theta.apply(&unit(d, i, j)).unwrap()).collect())
        .collect()
}

/// Largest population that leaks out of an off-diagonal input.
fn di_violation(theta: &Channel) -> f64 {
    let c = coefficients(theta);
    let mut worst: f64 = 0.0;
    for (i, row) in c.iter().enumerate() {
        for (j, out) in row.iter().enumerate() {
            if i != j {
                for k in 0..out.rows() {
                    worst = worst.max(out[(k, k)].norm());
                }
            }
        }
    }
    worst
}

/// Largest coherence created from an incoherent input.
fn mio_violation(theta: &Channel) -> f64 {
    let c = coefficients(theta);
    let mut worst: f64 = 0.0;
    for (i, row) in c.iter().enumerate() {
        let out = &row[i];
        for k in 0..out.rows() {
            for l in 0..out.cols() {
                if k != l {
                    worst = worst.max(out[(k, l)].norm());
                }
            }
        }
    }
    worst
}

fn phase(phi: &[f64], rho: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(rho.rows(), rho.cols(), |i, j| rho[(i, j)] * Complex64::from_polar(1.0, phi[i] - phi[j]))
}

/// `|| D theta pre (lambda - mu Lambda_phi)(rho) ||_1`; the dephased output
/// is diagonal, so its trace norm is the sum of absolute populations.
fn f_of_pair(theta: &Channel, pre: &Channel, rho: &DensityMatrix, cfg: &GameConfig) -> f64 {
    let r = rho.matrix();
    let pr = phase(cfg.phi(), r);
    let signal = ComplexMatrix::from_fn(r.rows(), r.cols(), |i, j| r[(i, j)] * cfg.lambda() - pr[(i, j)] * cfg.mu());
    let out = theta.apply(&pre.apply(&signal).unwrap()).unwrap();
    (0..out.rows()).map(|k| out[(k, k)].re.abs()).sum()
}

/// Eigenvalues of a Hermitian 2x2 matrix in closed form.
fn eig2(a: f64, d: f64, b: Complex64) -> (f64, f64) {
    let mean = (a + d) / 2.0;
    let rad = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    (mean - rad, mean + rad)
}

// ---- criteria ----

fn nullity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let dims = [(2, 2), (2, 3), (3, 2)];
    let (mut worst_m, mut worst_n, mut not_free) = (0.0f64, 0.0f64, 0usize);
    for n in 0..50 {
        let (din, dout) = dims[n % 3];
        let c = random_cfg(2, &mut rng);
        let di = random_di(din, dout, &mut rng);
        if di_violation(&di) > 1e-9 {
            not_free += 1;
        }
        worst_m = worst_m.max(m(&di, &c)?.abs());
    }
    for n in 0..50 {
        let (din, dout) = dims[n % 3];
        let c = random_cfg(din, &mut rng);
        let mio = random_mio(din, dout, &mut rng);
        if mio_violation(&mio) > 1e-9 {
            not_free += 1;
        }
        let budget = SearchBudget::default().with_seed(n as u64);
        worst_n = worst_n.max(post_processed_lower(&mio, &c, &budget)?.value);
    }
    outcome(
        worst_m <= 1e-6 && worst_n <= 1e-6 && not_free == 0,
        format!("max |M| on DI = {worst_m:.2e}, max N-lower on MIO = {worst_n:.2e} (tol 1e-6), non-free generated = {not_free}"),
    )
}

fn hadamard_pre() -> Result<Outcome> {
    let target = 0.5 * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * PI / 3.0)).norm();
    let c = cfg(0.5, &[2.0 * PI / 3.0, 0.0]);
    let r: MeasureReport = evaluate_f(&hadamard(), &c, &opts())?;
    let upper = r.f_value + r.max_duality_gap;
    let lower = f_of_pair(&hadamard(), &r.extraction.phi_opt, &r.extraction.rho_opt, &c);
    let ok = (r.value - target).abs() <= 1e-4 && upper >= target - 1e-4 && (lower - target).abs() <= 1e-4;
    outcome(
        ok,
        format!("M = {:.10}, extracted pair attains {lower:.10}, oracle {target:.10} (tol 1e-4)", r.value),
    )
}

fn hadamard_post() -> Result<Outcome> {
    let phi = [2.0 * PI / 3.0, 0.0];
    let c = cfg(0.5, &phi);
    let b = post_processed_lower(&hadamard(), &c, &SearchBudget::default())?;
    // Upper bound: max over the Bloch sphere of 1/2 ||rho - Lambda_phi(rho)||_1.
    let mut upper: f64 = 0.0;
    let steps = 400;
    for t in 0..=steps {
        let theta = PI * t as f64 / steps as f64;
        for p in 0..steps {
            let ph = 2.0 * PI * p as f64 / steps as f64;
            let coh = Complex64::from_polar(0.5 * theta.sin(), -ph);
            let rho = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => Complex64::new(0.5 * (1.0 + theta.cos()), 0.0),
                (1, 1) => Complex64::new(0.5 * (1.0 - theta.cos()), 0.0),
                (0, 1) => coh,
                _ => coh.conj(),
            });
            let diff = phase(&phi, &rho);
            let off = rho[(0, 1)] - diff[(0, 1)];
            let (lo, hi) = eig2(0.0, 0.0, off);
            upper = upper.max(0.5 * (lo.abs() + hi.abs()));
        }
    }
    let target = 3f64.sqrt() / 2.0;
    let ok = b.value >= target - 1e-4 && b.value <= target + 1e-6 && b.value <= upper + 1e-6;
    outcome(ok, format!("N-lower = {:.10}, Bloch-grid upper bound = {upper:.10}, window [{:.6}, {:.6}]", b.value, target - 1e-4, target + 1e-6))
}

fn monotonicity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let c = random_cfg(2, &mut rng);
        let theta = random_channel(2, 2, &mut rng);
        let free = random_di(2, 2, &mut rng);
        let base = m(&theta, &c)?;
        worst = worst.max(m(&Channel::compose(&free, &theta)?, &c)? - base);
        worst = worst.max(m(&Channel::compose(&theta, &free)?, &c)? - base);
    }
    outcome(worst <= 1e-5, format!("max M(composed) - M(theta) = {worst:.2e} (tol 1e-5)"))
}

fn tensor_invariance() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let c = random_cfg(2, &mut rng);
        let theta = random_channel(2, 2, &mut rng);
        let base = m(&theta, &c)?;
        worst = worst.max((m(&theta.tensor(&identity(2)), &c)? - base).abs());
        worst = worst.max((m(&theta, &c.with_auxiliary(2))? - base).abs());
    }
    outcome(worst <= 1e-4, format!("max deviation = {worst:.2e} (tol 1e-4)"))
}

fn faithfulness() -> Result<Outcome> {
    let phi = [2.0 * PI / 3.0, 0.0];
    let grid: Vec<f64> = (1..=50).map(|k| 0.02 * k as f64).collect();
    let rows = mixture_sweep(&[0.5, 0.9], &grid, &phi, &opts())?;
    let even: Vec<f64> = rows.iter().filter(|r| r.lambda == 0.5).map(|r| r.m).collect();
    let skew: Vec<f64> = rows.iter().filter(|r| r.lambda == 0.9).map(|r| r.m).collect();

    // Cross-check the sweep against single evaluations of the mixture.
    let mut sweep_dev: f64 = 0.0;
    for &k in &[0usize, 24, 49] {
        let mix = mixture(&[hadamard(), identity(2)], &[grid[k], 1.0 - grid[k]])?;
        sweep_dev = sweep_dev.max((m(&mix, &cfg(0.9, &phi))? - skew[k]).abs());
    }

    let min_even = even.iter().cloned().fold(f64::INFINITY, f64::min);
    let zero_at = grid.iter().zip(&skew).find(|(p, v)| **p >= 0.05 - 1e-12 && **v <= 1e-7).map(|(p, _)| *p);
    let end = *skew.last().unwrap();
    // Finite-difference slopes; a kink is an adjacent-cell jump by more than 10x.
    let slopes: Vec<f64> = skew.windows(2).map(|w| (w[1] - w[0]) / 0.02).collect();
    let kink = slopes.windows(2).position(|s| s[1].abs() > 10.0 * s[0].abs().max(1e-9) && s[1].abs() >= 1e-4);
    let ok = min_even > 1e-6
        && zero_at.is_some()
        && end > 1e-3
        && kink.is_some()
        && gradient_kink(&grid, &skew).is_some()
        && sweep_dev <= 1e-7;
    outcome(
        ok,
        format!(
            "min M at lambda=0.5: {min_even:.3e}; lambda=0.9 zero at p1={zero_at:?}, M(p1=1)={end:.4}, kink after p1={:?}",
            kink.map(|k| grid[k + 1])
        ),
    )
}

fn extraction() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut worst_res, mut worst_pair, mut worst_di, mut failures) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for n in 0..60 {
        let din = if n < 50 { 2 } else { 3 };
        let c = random_cfg(2, &mut rng);
        let theta = random_channel(din, 2, &mut rng);
        let r = evaluate_f(&theta, &c, &opts())?;
        worst_res = worst_res.max(r.verification_residual);
        worst_pair = worst_pair.max((f_of_pair(&theta, &r.extraction.phi_opt, &r.extraction.rho_opt, &c) - r.f_value).abs());
        worst_di = worst_di.max(di_violation(&r.extraction.phi_opt));
        if !is_detection_incoherent(&r.extraction.phi_opt, 1e-7) {
            failures += 1;
        }
    }
    outcome(
        worst_res <= 1e-5 && worst_pair <= 1e-5 && failures == 0 && worst_di <= 1e-7,
        format!("max residual = {worst_res:.2e}, independent recheck = {worst_pair:.2e} (tol 1e-5), DI leakage = {worst_di:.2e}, non-DI = {failures}"),
    )
}

fn oracle_pincer() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let budget = SearchBudget {
        random_samples: 10_000,
        ..SearchBudget::default()
    };
    let (mut below, mut above) = (0.0f64, f64::NEG_INFINITY);
    for n in 0..20 {
        let c = random_cfg(2, &mut rng);
        let theta = random_channel(2, 2, &mut rng);
        let exact = evaluate_f(&theta, &c, &opts())?.f_value;
        let sampled = brute_force_f_lower(&theta, &c, &budget.with_seed(n))?;
        below = below.max(exact - sampled);
        above = above.max(sampled - exact);
    }
    outcome(
        below <= 5e-3 && above <= 1e-6,
        format!("sampled falls short by at most {below:.2e} (tol 5e-3) and exceeds by at most {above:.2e} (tol 1e-6)"),
    )
}

fn guessing_game() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut cases = vec![(hadamard(), cfg(0.5, &[2.0 * PI / 3.0, 0.0]))];
    loop {
        let theta = random_channel(2, 2, &mut rng);
        if di_violation(&theta) > 1e-2 {
            cases.push((theta, random_cfg(2, &mut rng)));
            break;
        }
    }
    let trials = 100_000u64;
    let mut worst: f64 = 0.0;
    for (seed, (theta, c)) in cases.iter().enumerate() {
        let r = evaluate_f(theta, c, &opts())?;
        let ex = &r.extraction;
        let povm = optimal_protocol(theta, &ex.phi_opt, &ex.rho_opt, c)?;
        let game = monte_carlo_game(theta, &ex.phi_opt, &ex.rho_opt, &povm, c, trials, seed as u64 + 1)?;
        let p = 0.5 + 0.5 * (r.value + (c.lambda() - c.mu()).abs());
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        worst = worst.max((game.successes as f64 / trials as f64 - p).abs() / sigma);
    }
    outcome(worst <= 3.0, format!("largest deviation = {worst:.2} sigma over {} instances (tol 3)", cases.len()))
}

fn counterexample() -> Result<Outcome> {
    let c = swap_counterexample(&SearchBudget::default())?;
    let (theta, swapped, gc) = swap_counterexample_instance();
    let before = evaluate_f(&theta, &gc, &opts())?.f_value;
    let after = evaluate_f(&swapped, &gc, &opts())?.f_value;
    let ok = c.l_before <= 1e-6 && c.l_after >= 0.99 && (after - before).abs() <= 1e-5;
    outcome(
        ok,
        format!("L before = {:.2e}, L after = {:.6}, F before/after = {before:.8}/{after:.8}", c.l_before, c.l_after),
    )
}

fn index_identities() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let dims = [(2, 2), (2, 3), (3, 2), (3, 3)];
    let mut worst: f64 = 0.0;
    for n in 0..1000 {
        let (din, dout) = dims[n % 4];
        let c = coefficients(&random_channel(din, dout, &mut rng));
        for i in 0..din {
            for j in 0..din {
                let trace: Complex64 = (0..dout).map(|m| c[i][j][(m, m)]).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((trace - delta).norm());
                for k in 0..dout {
                    for l in 0..dout {
                        worst = worst.max((c[i][j][(k, l)] - c[j][i][(l, k)].conj()).norm());
                    }
                    if i == j {
                        worst = worst.max((-c[i][i][(k, k)].re).max(0.0));
                    }
                }
            }
        }
    }
    let mut disagreements = 0;
    for n in 0..300 {
        let (din, dout) = dims[n % 4];
        let ch = match n % 3 {
            0 => random_di(din, dout, &mut rng),
            1 => random_mio(din, dout, &mut rng),
            _ => random_channel(din, dout, &mut rng),
        };
        let tol = DEFAULT_MEMBERSHIP_TOL;
        if is_detection_incoherent(&ch, tol) != (di_violation(&ch) <= tol) || is_mio(&ch, tol) != (mio_violation(&ch) <= tol) {
            disagreements += 1;
        }
    }
    outcome(
        worst <= 1e-9 && disagreements == 0,
        format!("max identity violation = {worst:.2e} (tol 1e-9), membership disagreements = {disagreements}/300"),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "nullity on free channels", limit: Duration::from_secs(60), run: nullity },
        Criterion { id: 2, name: "Hadamard pre-processed value", limit: Duration::from_secs(1), run: hadamard_pre },
        Criterion { id: 3, name: "Hadamard post-processed lower bound", limit: Duration::from_secs(10), run: hadamard_post },
        Criterion { id: 4, name: "monotonicity under DI composition", limit: Duration::from_secs(300), run: monotonicity },
        Criterion { id: 5, name: "tensor and auxiliary invariance", limit: Duration::from_secs(120), run: tensor_invariance },
        Criterion { id: 6, name: "faithfulness dichotomy", limit: Duration::from_secs(300), run: faithfulness },
        Criterion { id: 7, name: "optimal-pair extraction", limit: Duration::from_secs(600), run: extraction },
        Criterion { id: 8, name: "sampled oracle pincer", limit: Duration::from_secs(600), run: oracle_pincer },
        Criterion { id: 9, name: "guessing game", limit: Duration::from_secs(60), run: guessing_game },
        Criterion { id: 10, name: "swap counterexample", limit: Duration::from_secs(300), run: counterexample },
        Criterion { id: 11, name: "index identities and membership", limit: Duration::from_secs(60), run: index_identities },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let (passed, summary) = match result {
            Ok(o) => (o.passed && elapsed <= c.limit, o.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} | {} | {:.2}s (limit {}s)",
            c.id,
            if passed { "PASS" } else { "FAIL" },
            c.name,
            summary,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
