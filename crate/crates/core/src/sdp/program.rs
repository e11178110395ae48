//! The sign-vector programs for the pre-processed functional and their
//! aggregation into a [`MeasureReport`].
//!
//! For a sign vector `s` the program is
//!
//! ```text
//! maximize   sum_n s_n <n| theta(Z) |n>,   Z = sum_ij (lambda - mu e^{i(phi_i - phi_j)}) <i|_A X |j>_A
//! subject to X_AB >= 0, tr X = 1,
//!            off-diagonal entries of tr_B X vanish,
//!            <i, b| X |j, b> = 0 for i != j and every b.
//! ```
//!
//! The functional is the maximum of these optima over all sign vectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::extract::{extract_optimal, verify_extraction, ExtractionResult};
use super::{solve_sdp, LinearConstraint, PsdBlock, SdpProblem, SdpSolution, SolverTolerances};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE, ZERO};
use crate::measures::GameConfig;

/// Largest output dimension for which sign vectors are enumerated.
pub const MAX_SIGN_LENGTH: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("empty sign vector".into()));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::Validation(
                "sign vector entries must be +1 or -1".into(),
            ));
        }
        Ok(Self(entries))
    }

    /// Bit `n` of `bits` set means entry `n` is `-1`.
    fn from_bits(len: usize, bits: u64) -> Self {
        Self(
            (0..len)
                .map(|n| if bits >> n & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|e| -e).collect())
    }
}

fn check_sign_length(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Validation(
            "sign vectors need length at least 1".into(),
        ));
    }
    if n > MAX_SIGN_LENGTH {
        return Err(Error::Validation(format!(
            "output dimension {n} exceeds the enumeration limit {MAX_SIGN_LENGTH}"
        )));
    }
    Ok(())
}

/// The `2^(N-1)` sign vectors with first entry `+1`, one per `s <-> -s` pair.
pub fn enumerate_sign_vectors(n: usize) -> Result<Vec<SignVector>> {
    check_sign_length(n)?;
    Ok((0..1u64 << (n - 1))
        .map(|b| SignVector::from_bits(n, b << 1))
        .collect())
}

/// All `2^N` sign vectors.
pub fn enumerate_all_sign_vectors(n: usize) -> Result<Vec<SignVector>> {
    check_sign_length(n)?;
    Ok((0..1u64 << n)
        .map(|b| SignVector::from_bits(n, b))
        .collect())
}

/// The program for one sign vector; `A` has the dimension of `cfg.phi`, `B`
/// is the input of `theta`, and `X` is indexed as `(a, b) -> a * dB + b`.
pub fn build_sign_program(
    theta: &Channel,
    cfg: &GameConfig,
    s: &SignVector,
) -> Result<SdpProblem> {
    if s.len() != theta.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "sign vector of length {} for a channel with output dimension {}",
            s.len(),
            theta.dim_out()
        )));
    }
    let da = cfg.dim();
    let db = theta.dim_in();
    let n = da * db;
    let at = |a: usize, b: usize| a * db + b;

    let mut constraints = Vec::new();
    for a in 0..da {
        for a2 in (a + 1)..da {
            // (tr_B X)_{a a2} = sum_b X_{(a,b),(a2,b)} = tr(E X) with E = sum_b |a2,b><a,b|.
            let mut e = ComplexMatrix::zeros(n, n);
            for b in 0..db {
                e[(at(a2, b), at(a, b))] = ONE;
            }
            constraints.push(LinearConstraint {
                terms: vec![(0, e)],
                target: ZERO,
            });
        }
    }
    constraints.push(LinearConstraint {
        terms: vec![(0, ComplexMatrix::identity(n))],
        target: ONE,
    });
    for a in 0..da {
        for a2 in (a + 1)..da {
            for b in 0..db {
                constraints.push(LinearConstraint {
                    terms: vec![(0, ComplexMatrix::unit(n, at(a2, b), at(a, b)))],
                    target: ZERO,
                });
            }
        }
    }

    // Objective tr(W X) with W_{(j,l),(i,k)} = c_ij D_kl,
    // c_ij = lambda - mu e^{i(phi_i - phi_j)}, D_kl = sum_n s_n theta^{kl}_{nn}.
    let phi = cfg.phi();
    let c = |i: usize, j: usize| {
        Complex64::new(cfg.lambda(), 0.0) - Complex64::from_polar(cfg.mu(), phi[i] - phi[j])
    };
    let d = ComplexMatrix::from_fn(db, db, |k, l| {
        s.entries()
            .iter()
            .enumerate()
            .map(|(m, &sign)| theta.coeff(k, l, m, m) * sign as f64)
            .sum()
    });
    let w = ComplexMatrix::from_fn(n, n, |r, col| {
        let (j, l) = (r / db, r % db);
        let (i, k) = (col / db, col % db);
        c(i, j) * d[(k, l)]
    });

    Ok(SdpProblem {
        psd_variables: vec![PsdBlock {
            name: "X_AB".into(),
            dim: n,
        }],
        equality_constraints: constraints,
        objective: vec![(0, w.hermitian_part())],
    })
}

/// Whether the programs for `s` and `-s` always share their optimum up to
/// sign, so one representative per pair suffices.
///
/// The objective is odd in `s`. At `lambda = 1/2` the diagonal weights
/// `c_ii` vanish, and for a qubit `A` conjugating `X` by `Z (x) I` keeps it
/// feasible while flipping the sign of the remaining off-diagonal terms, so
/// the optimum for `-s` equals that for `s`. Away from that case the pair
/// genuinely differs (for instance the all-ones program is worth
/// `lambda - mu`, its negation `mu - lambda`).
pub fn halving_is_exact(cfg: &GameConfig) -> bool {
    cfg.lambda() == 0.5 && cfg.dim() <= 2
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub tolerances: SolverTolerances,
    /// Enumerate all `2^N` sign vectors even where [`halving_is_exact`] holds.
    pub full_enumeration: bool,
}

#[derive(Clone, Debug)]
pub struct MeasureReport {
    /// `F - |lambda - mu|`.
    pub value: f64,
    /// The maximized trace norm `F`.
    pub f_value: f64,
    pub prior_gap: f64,
    pub sign_vectors: Vec<SignVector>,
    pub per_sign_values: Vec<f64>,
    pub winning_sign: usize,
    /// Largest duality gap over all programs.
    pub max_duality_gap: f64,
    pub x_opt: ComplexMatrix,
    pub extraction: ExtractionResult,
    pub verification_residual: f64,
}

fn solve_one(
    theta: &Channel,
    cfg: &GameConfig,
    s: &SignVector,
    tol: &SolverTolerances,
) -> Result<SdpSolution> {
    solve_sdp(&build_sign_program(theta, cfg, s)?, tol)?.into_result()
}

fn solve_all(
    theta: &Channel,
    cfg: &GameConfig,
    signs: &[SignVector],
    tol: &SolverTolerances,
) -> Vec<Result<SdpSolution>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        signs
            .par_iter()
            .map(|s| solve_one(theta, cfg, s, tol))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        signs
            .iter()
            .map(|s| solve_one(theta, cfg, s, tol))
            .collect()
    }
}

/// Exact value of the pre-processed functional and improvement for `theta`,
/// with an extracted optimal pair and its round-trip residual.
pub fn evaluate_f(theta: &Channel, cfg: &GameConfig, opts: &EvalOptions) -> Result<MeasureReport> {
    let signs = if opts.full_enumeration || !halving_is_exact(cfg) {
        enumerate_all_sign_vectors(theta.dim_out())?
    } else {
        enumerate_sign_vectors(theta.dim_out())?
    };
    let solutions = solve_all(theta, cfg, &signs, &opts.tolerances)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let per_sign_values: Vec<f64> = solutions.iter().map(|s| s.objective_value).collect();
    let max_duality_gap = solutions.iter().map(|s| s.duality_gap).fold(0.0, f64::max);
    let winning_sign = per_sign_values.iter().enumerate().fold(0, |best, (i, &v)| {
        if v > per_sign_values[best] {
            i
        } else {
            best
        }
    });
    let f_value = per_sign_values[winning_sign];
    let x_opt = solutions[winning_sign].variable_values[0].clone();
    let extraction = extract_optimal(&x_opt, (cfg.dim(), theta.dim_in()))?;
    let verification_residual = verify_extraction(theta, cfg, &extraction, f_value)?;

    Ok(MeasureReport {
        value: f_value - cfg.prior_gap(),
        f_value,
        prior_gap: cfg.prior_gap(),
        sign_vectors: signs,
        per_sign_values,
        winning_sign,
        max_duality_gap,
        x_opt,
        extraction,
        verification_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{hadamard, identity, is_detection_incoherent, random_channel, random_di};
    use crate::measures::{f_direct, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn hadamard_cfg() -> GameConfig {
        GameConfig::new(0.5, vec![2.0 * PI / 3.0, 0.0]).unwrap()
    }

    #[test]
    fn sign_vector_enumeration() {
        let one = enumerate_sign_vectors(1).unwrap();
        assert_eq!(one, vec![SignVector::new(vec![1]).unwrap()]);
        let two = enumerate_sign_vectors(2).unwrap();
        assert_eq!(
            two,
            vec![
                SignVector::new(vec![1, 1]).unwrap(),
                SignVector::new(vec![1, -1]).unwrap()
            ]
        );
        assert_eq!(enumerate_sign_vectors(3).unwrap().len(), 4);
        assert_eq!(enumerate_all_sign_vectors(3).unwrap().len(), 8);
        assert!(enumerate_sign_vectors(21).is_err());
        assert!(enumerate_sign_vectors(0).is_err());
        assert!(SignVector::new(vec![1, 0]).is_err());
    }

    #[test]
    fn program_shape() {
        let s = SignVector::new(vec![1, -1]).unwrap();
        let p = build_sign_program(&hadamard(), &hadamard_cfg(), &s).unwrap();
        assert_eq!(p.psd_variables[0].dim, 4);
        // one partial-trace constraint, unit trace, two diagonal couplings
        assert_eq!(p.equality_constraints.len(), 4);
        let bad = SignVector::new(vec![1]).unwrap();
        assert!(matches!(
            build_sign_program(&hadamard(), &hadamard_cfg(), &bad),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn all_ones_program_is_pinned_by_trace_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let theta = random_channel(2, 3, &mut rng);
        let cfg = GameConfig::new(0.7, vec![1.0, 0.2]).unwrap();
        let s = SignVector::new(vec![1, 1, 1]).unwrap();
        let sol = solve_one(&theta, &cfg, &s, &SolverTolerances::default()).unwrap();
        assert!((sol.objective_value - (0.7 - 0.3)).abs() < 1e-7);
    }

    #[test]
    fn hadamard_value() {
        let r = evaluate_f(&hadamard(), &hadamard_cfg(), &EvalOptions::default()).unwrap();
        let analytic =
            0.5 * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * PI / 3.0)).norm();
        assert!(
            (r.value - analytic).abs() < 1e-6,
            "{} vs {analytic}",
            r.value
        );
        assert!(r.verification_residual < 1e-6);
        assert!(r.max_duality_gap <= 1e-8);
        assert!(is_detection_incoherent(&r.extraction.phi_opt, 1e-7));
        // The analytic optimum is reached without pre-processing.
        let xi = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * PI / 3.0)).arg();
        let v = [
            Complex64::new(1.0, 0.0) / 2f64.sqrt(),
            Complex64::from_polar(1.0 / 2f64.sqrt(), xi),
        ];
        let rho = DensityMatrix::pure(&v).unwrap();
        let direct = f_direct(&hadamard(), &identity(2), &rho, &hadamard_cfg()).unwrap();
        assert!((direct - r.f_value).abs() < 1e-6);
    }

    #[test]
    fn detection_incoherent_channels_have_zero_improvement() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let cfg = GameConfig::new(0.6, vec![0.3, 2.0]).unwrap();
        for _ in 0..3 {
            let theta = random_di(2, 2, &mut rng);
            let r = evaluate_f(&theta, &cfg, &EvalOptions::default()).unwrap();
            assert!(r.value.abs() < 1e-6, "{}", r.value);
            assert!(r
                .per_sign_values
                .iter()
                .all(|&v| v <= cfg.prior_gap() + 1e-7));
            assert!(r.verification_residual < 1e-8);
        }
    }

    #[test]
    fn halving_misses_the_optimum_away_from_even_priors() {
        // With lambda != 1/2 the all-minus program is worth mu - lambda while its
        // partner is worth lambda - mu, so the two members of a pair differ.
        let theta = identity(2);
        let cfg = GameConfig::new(0.2, vec![0.0, 1.0]).unwrap();
        let plus = SignVector::new(vec![1, 1]).unwrap();
        let tol = SolverTolerances::default();
        let vp = solve_one(&theta, &cfg, &plus, &tol)
            .unwrap()
            .objective_value;
        let vm = solve_one(&theta, &cfg, &plus.negated(), &tol)
            .unwrap()
            .objective_value;
        assert!((vp + 0.6).abs() < 1e-7);
        assert!((vm - 0.6).abs() < 1e-7);
        assert!(!halving_is_exact(&cfg));
    }

    #[test]
    fn halving_agrees_with_full_enumeration_where_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let cfg = GameConfig::new(0.5, vec![0.4, 2.9]).unwrap();
        assert!(halving_is_exact(&cfg));
        let full = EvalOptions {
            full_enumeration: true,
            ..Default::default()
        };
        for _ in 0..4 {
            let theta = random_channel(2, 3, &mut rng);
            let a = evaluate_f(&theta, &cfg, &full).unwrap();
            let b = evaluate_f(&theta, &cfg, &EvalOptions::default()).unwrap();
            assert_eq!(a.sign_vectors.len(), 8);
            assert_eq!(b.sign_vectors.len(), 4);
            assert!((a.f_value - b.f_value).abs() < 1e-7);
        }
    }
}
