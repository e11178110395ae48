//! Guessing-game quantities: the signal map `lambda id - mu Lambda_phi`, the
//! direct evaluation of the pre-processed functional for a fixed
//! pre-processing and input, Helstrom and measurement biases, and the
//! success probability of the detection game.

use serde::{Deserialize, Serialize};

use crate::channels::{identity, phase_channel, Channel, LinearMap};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, HermitianView, ZERO};

/// Prior `lambda` that Alice leaves the state alone, `mu = 1 - lambda` that
/// she imprints the phases `phi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    lambda: f64,
    phi: Vec<f64>,
}

impl GameConfig {
    pub fn new(lambda: f64, phi: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Validation(format!(
                "lambda = {lambda} outside [0, 1]"
            )));
        }
        if phi.is_empty() {
            return Err(Error::Validation("phase vector is empty".into()));
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { lambda, phi })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        1.0 - self.lambda
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Dimension of the system the phases act on.
    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    /// `|lambda - mu|`, the trace norm of the signal on any state after a
    /// channel that cannot detect coherence.
    pub fn prior_gap(&self) -> f64 {
        (self.lambda - self.mu()).abs()
    }

    pub fn has_distinct_phases(&self) -> bool {
        self.phi.iter().any(|&p| p != self.phi[0])
    }

    /// The same game with an auxiliary system of dimension `aux` on which
    /// Alice acts trivially: `Lambda_phi (x) id`.
    pub fn with_auxiliary(&self, aux: usize) -> Self {
        let phi = self
            .phi
            .iter()
            .flat_map(|&p| std::iter::repeat_n(p, aux))
            .collect();
        Self {
            lambda: self.lambda,
            phi,
        }
    }
}

/// A positive semidefinite operator of unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub const TOL: f64 = 1e-9;

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let herm = HermitianView::with_tolerance(&m, Self::TOL)?;
        let min = linalg::min_eigenvalue(&herm);
        if min < -Self::TOL {
            return Err(Error::Validation(format!(
                "state has negative eigenvalue {min:.3e}"
            )));
        }
        let tr = herm.matrix().trace();
        if (tr.re - 1.0).abs() > Self::TOL || tr.im.abs() > Self::TOL {
            return Err(Error::Validation(format!("state has trace {tr}")));
        }
        Ok(Self(herm.into_matrix()))
    }

    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(psi, psi))
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        Self(ComplexMatrix::unit(dim, i, i))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// `lambda id - mu Lambda_phi`. Hermiticity preserving; neither completely
/// positive nor trace preserving in general.
pub fn signal_map(cfg: &GameConfig) -> LinearMap {
    let id = identity(cfg.dim());
    let lam = phase_channel(cfg.phi());
    LinearMap::linear_combination(&[(cfg.lambda(), id.as_map()), (-cfg.mu(), lam.as_map())])
        .expect("equal shapes")
}

/// Applies the signal map without building its Choi matrix:
/// `(lambda - mu e^{i(phi_i - phi_j)}) rho_ij`.
pub fn apply_signal(cfg: &GameConfig, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = cfg.dim();
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "state of size {}x{} for {d} phases",
            rho.rows(),
            rho.cols()
        )));
    }
    let phi = cfg.phi();
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        let w = num_complex::Complex64::from_polar(cfg.mu(), phi[i] - phi[j]);
        (num_complex::Complex64::new(cfg.lambda(), 0.0) - w) * rho[(i, j)]
    }))
}

/// Diagonal part of an operator as a real vector.
fn real_diagonal(m: &ComplexMatrix) -> Vec<f64> {
    m.diag().iter().map(|z| z.re).collect()
}

/// `|| D theta phi_pre (lambda - mu Lambda_phi)(rho) ||_1` for a fixed
/// pre-processing and input state.
pub fn f_direct(
    theta: &Channel,
    phi_pre: &Channel,
    rho: &DensityMatrix,
    cfg: &GameConfig,
) -> Result<f64> {
    if phi_pre.dim_in() != cfg.dim() || rho.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pre-processing input {} and state {} must match the {} phases",
            phi_pre.dim_in(),
            rho.dim(),
            cfg.dim()
        )));
    }
    if phi_pre.dim_out() != theta.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "pre-processing output {} does not feed a channel with input {}",
            phi_pre.dim_out(),
            theta.dim_in()
        )));
    }
    let signal = apply_signal(cfg, rho.matrix())?;
    let out = theta.apply(&phi_pre.apply(&signal)?)?;
    let dephased = ComplexMatrix::diagonal(&out.diag());
    Ok(linalg::trace_norm_hermitian(&HermitianView::symmetrized(
        &dephased,
    )))
}

fn check_pair(sigma0: &DensityMatrix, sigma1: &DensityMatrix) -> Result<()> {
    if sigma0.dim() != sigma1.dim() {
        return Err(Error::DimensionMismatch(format!(
            "hypothesis states of dimension {} and {}",
            sigma0.dim(),
            sigma1.dim()
        )));
    }
    Ok(())
}

/// `lambda sigma0 - mu sigma1`.
pub fn weighted_difference(
    cfg: &GameConfig,
    sigma0: &DensityMatrix,
    sigma1: &DensityMatrix,
) -> Result<ComplexMatrix> {
    check_pair(sigma0, sigma1)?;
    Ok(&sigma0.matrix().scale_real(cfg.lambda()) - &sigma1.matrix().scale_real(cfg.mu()))
}

/// `|| lambda sigma0 - mu sigma1 ||_1`.
pub fn helstrom_norm(
    cfg: &GameConfig,
    sigma0: &DensityMatrix,
    sigma1: &DensityMatrix,
) -> Result<f64> {
    let diff = weighted_difference(cfg, sigma0, sigma1)?;
    Ok(linalg::trace_norm_hermitian(&HermitianView::symmetrized(
        &diff,
    )))
}

/// `B_m = 1/2 || D(lambda sigma0 - mu sigma1) ||_1`, the best bias over a fair
/// coin achievable with incoherent measurements.
pub fn measurement_bias(
    cfg: &GameConfig,
    sigma0: &DensityMatrix,
    sigma1: &DensityMatrix,
) -> Result<f64> {
    let diff = weighted_difference(cfg, sigma0, sigma1)?;
    Ok(0.5 * real_diagonal(&diff).iter().map(|x| x.abs()).sum::<f64>())
}

/// `B_t = 1/2 |lambda - mu|`, the bias from betting on the prior alone.
pub fn trivial_bias(cfg: &GameConfig) -> f64 {
    0.5 * cfg.prior_gap()
}

/// Two-outcome incoherent POVM: outcome 0 means "phases not applied".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncoherentPovm {
    elements: Vec<ComplexMatrix>,
}

impl IncoherentPovm {
    pub const TOL: f64 = 1e-9;

    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::Validation("POVM has no elements".into()))?;
        let d = first.rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (n, e) in elements.iter().enumerate() {
            if e.rows() != d || e.cols() != d {
                return Err(Error::DimensionMismatch(
                    "POVM elements of different sizes".into(),
                ));
            }
            for i in 0..d {
                for j in 0..d {
                    if i != j && e[(i, j)].norm() > Self::TOL {
                        return Err(Error::Validation(format!(
                            "POVM element {n} is not diagonal"
                        )));
                    }
                }
                if e[(i, i)].re < -Self::TOL || e[(i, i)].im.abs() > Self::TOL {
                    return Err(Error::Validation(format!(
                        "POVM element {n} is not positive"
                    )));
                }
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if dev > Self::TOL {
            return Err(Error::Validation(format!(
                "POVM elements sum to identity only within {dev:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    /// `P0 = diag(weights)`, `P1 = I - P0`.
    pub fn binary(p0_diag: &[f64]) -> Result<Self> {
        let p0 = ComplexMatrix::real_diagonal(p0_diag);
        let p1 = &ComplexMatrix::identity(p0_diag.len()) - &p0;
        Self::new(vec![p0, p1])
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    /// Born probabilities of every outcome on `rho`.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| {
                (0..e.rows())
                    .map(|i| e[(i, i)].re * rho[(i, i)].re)
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect()
    }
}

/// Projector onto the nonnegative part of `D(lambda sigma0 - mu sigma1)`
/// and its complement. Zero entries go to `P0`.
pub fn optimal_incoherent_povm(
    cfg: &GameConfig,
    sigma0: &DensityMatrix,
    sigma1: &DensityMatrix,
) -> Result<IncoherentPovm> {
    let diff = weighted_difference(cfg, sigma0, sigma1)?;
    let p0: Vec<f64> = real_diagonal(&diff)
        .iter()
        .map(|&x| if x >= 0.0 { 1.0 } else { 0.0 })
        .collect();
    IncoherentPovm::binary(&p0)
}

/// Success probability of the binary guess when the POVM outcome 0 is read
/// as "not applied": `lambda tr(P0 sigma0) + mu tr(P1 sigma1)`.
pub fn povm_success_probability(
    cfg: &GameConfig,
    povm: &IncoherentPovm,
    sigma0: &ComplexMatrix,
    sigma1: &ComplexMatrix,
) -> f64 {
    let p0 = povm.probabilities(sigma0)[0];
    let p1 = povm.probabilities(sigma1).get(1).copied().unwrap_or(0.0);
    cfg.lambda() * p0 + cfg.mu() * p1
}

/// Slack allowed above 1 before a success probability is rejected.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// `1/2 + 1/2 (measure + |lambda - mu|)`.
pub fn success_probability(measure_value: f64, cfg: &GameConfig) -> Result<f64> {
    if !measure_value.is_finite() || measure_value < -PROBABILITY_SLACK {
        return Err(Error::Validation(format!(
            "measure value {measure_value} is negative"
        )));
    }
    let p = 0.5 + 0.5 * (measure_value.max(0.0) + cfg.prior_gap());
    if p > 1.0 + PROBABILITY_SLACK {
        return Err(Error::Validation(format!(
            "measure value {measure_value} implies success probability {p} > 1"
        )));
    }
    Ok(p.min(1.0))
}

/// Off-diagonal mass used by a few tests: `max_{i != j} |m_ij|`.
pub fn max_off_diagonal(m: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j && m[(i, j)] != ZERO {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}
