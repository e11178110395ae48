//! Named channels: identity, dephasing, phases, Hadamard, Fourier, SWAP and
//! probabilistic mixtures.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Channel, LinearMap};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE, ZERO};

const UNITARITY_TOL: f64 = 1e-10;

fn delta(a: usize, b: usize) -> Complex64 {
    if a == b {
        ONE
    } else {
        ZERO
    }
}

pub fn identity(dim: usize) -> Channel {
    let map = LinearMap::from_coefficients(dim, dim, |i, j, k, l| delta(i, k) * delta(j, l))
        .expect("dim >= 1");
    Channel::new_unchecked(map)
}

/// Total dephasing in the computational basis.
pub fn dephasing(dim: usize) -> Channel {
    let map = LinearMap::from_coefficients(dim, dim, |i, j, k, l| {
        delta(i, j) * delta(i, k) * delta(i, l)
    })
    .expect("dim >= 1");
    Channel::new_unchecked(map)
}

/// `id - dephasing`: keeps only off-diagonal entries. Not completely positive
/// and not trace preserving.
pub fn complementary_dephasing(dim: usize) -> LinearMap {
    LinearMap::from_coefficients(dim, dim, |i, j, k, l| {
        if i == j {
            ZERO
        } else {
            delta(i, k) * delta(j, l)
        }
    })
    .expect("dim >= 1")
}

/// `sigma -> sum_{i,j} e^{i(phi_i - phi_j)} |i><i| sigma |j><j|`.
pub fn phase_channel(phi: &[f64]) -> Channel {
    let d = phi.len();
    let phases: Vec<Complex64> = phi.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    let map = LinearMap::from_coefficients(d, d, |i, j, k, l| {
        if i == k && j == l {
            phases[i] * phases[j].conj()
        } else {
            ZERO
        }
    })
    .expect("phase vector must be non-empty");
    Channel::new_unchecked(map)
}

/// Conjugation by a unitary matrix.
pub fn unitary_channel(u: &ComplexMatrix) -> Result<Channel> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch("unitary must be square".into()));
    }
    let dev = (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(u.rows()));
    if dev > UNITARITY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let d = u.rows();
    let map = LinearMap::from_coefficients(d, d, |i, j, k, l| u[(k, i)] * u[(l, j)].conj())?;
    Ok(Channel::new_unchecked(map))
}

pub fn hadamard() -> Channel {
    let s = 0.5f64.sqrt();
    let h = ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]);
    unitary_channel(&h).expect("Hadamard is unitary")
}

/// Quantum Fourier transform `F_{jk} = w^{jk} / sqrt(d)`, `w = e^{2 pi i / d}`.
pub fn qft_matrix(dim: usize) -> ComplexMatrix {
    let norm = 1.0 / (dim as f64).sqrt();
    ComplexMatrix::from_fn(dim, dim, |j, k| {
        Complex64::from_polar(norm, 2.0 * PI * ((j * k) % dim) as f64 / dim as f64)
    })
}

pub fn qft(dim: usize) -> Channel {
    unitary_channel(&qft_matrix(dim)).expect("Fourier matrix is unitary")
}

/// Exchanges the factors: `|a>|b> -> |b>|a>` from `A (x) B` to `B (x) A`.
pub fn swap(da: usize, db: usize) -> Channel {
    let n = da * db;
    let mut u = ComplexMatrix::zeros(n, n);
    for a in 0..da {
        for b in 0..db {
            u[(b * da + a, a * db + b)] = ONE;
        }
    }
    unitary_channel(&u).expect("permutation matrix is unitary")
}

/// `U = sum_i e^{i theta_i} |perm(i)><i|`. Both detection- and
/// creation-incoherent.
pub fn permutation_phase(perm: &[usize], phases: &[f64]) -> Result<Channel> {
    let d = perm.len();
    if phases.len() != d {
        return Err(Error::DimensionMismatch(
            "permutation and phase vectors differ in length".into(),
        ));
    }
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Validation("not a permutation".into()));
        }
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for (i, (&p, &t)) in perm.iter().zip(phases).enumerate() {
        u[(p, i)] = Complex64::from_polar(1.0, t);
    }
    unitary_channel(&u)
}

/// Convex combination `sum_n p_n T_n`.
pub fn mixture(channels: &[Channel], probs: &[f64]) -> Result<Channel> {
    if channels.is_empty() || channels.len() != probs.len() {
        return Err(Error::InvalidProbabilities(format!(
            "{} channels with {} weights",
            channels.len(),
            probs.len()
        )));
    }
    if probs.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::InvalidProbabilities(
            "weights must be nonnegative".into(),
        ));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!(
            "weights sum to {total}"
        )));
    }
    let terms: Vec<(f64, &LinearMap)> = probs
        .iter()
        .copied()
        .zip(channels.iter().map(|c| c.as_map()))
        .collect();
    Ok(Channel::new_unchecked(LinearMap::linear_combination(
        &terms,
    )?))
}
