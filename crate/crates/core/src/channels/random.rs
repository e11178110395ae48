//! Random channel generators used by the property suites and the search
//! heuristics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{
    dephasing, from_kraus, is_detection_incoherent, is_mio, mixture, permutation_phase, Channel,
    KrausSet,
};
use crate::linalg::{inverse_sqrt_psd, ComplexMatrix, HermitianView};

const GENERATOR_CHECK_TOL: f64 = 1e-9;

fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// Polar factor `G (G^dagger G)^{-1/2}`: an isometry when `G` has full column rank.
pub(crate) fn polar_isometry(g: &ComplexMatrix) -> ComplexMatrix {
    let gram = HermitianView::symmetrized(&(&g.adjoint() * g));
    let inv = inverse_sqrt_psd(&gram).expect("Gaussian matrices have full column rank");
    g * &inv
}

/// Haar-random isometry `C^{dim_in} -> C^{dim_out}` (`dim_out >= dim_in`).
pub fn random_isometry(dim_in: usize, dim_out: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(dim_out >= dim_in, "isometry needs dim_out >= dim_in");
    polar_isometry(&ginibre(dim_out, dim_in, rng))
}

pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    random_isometry(dim, dim, rng)
}

/// Haar-random unit vector.
pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Stinespring construction: random isometry into output (x) environment
/// with environment dimension `dim_in * dim_out`, then trace out the
/// environment.
pub fn random_channel(dim_in: usize, dim_out: usize, rng: &mut impl Rng) -> Channel {
    let env = dim_in * dim_out;
    let v = random_isometry(dim_in, dim_out * env, rng);
    let ops = (0..env)
        .map(|e| ComplexMatrix::from_fn(dim_out, dim_in, |k, i| v[(k * env + e, i)]))
        .collect();
    from_kraus(&KrausSet::new(ops).expect("isometry gives a complete Kraus set"))
}

pub fn random_permutation_phase(dim: usize, rng: &mut impl Rng) -> Channel {
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(rng);
    let phases: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    permutation_phase(&perm, &phases).expect("valid permutation")
}

fn flat_dirichlet(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|v| v / s).collect()
}

/// Mixes `base` with two random permutation-phase unitaries using flat
/// Dirichlet weights. Only possible for square channels.
fn mix_with_permutations(base: Channel, rng: &mut impl Rng) -> Channel {
    let d = base.dim_in();
    let weights = flat_dirichlet(3, rng);
    let parts = [
        base,
        random_permutation_phase(d, rng),
        random_permutation_phase(d, rng),
    ];
    mixture(&parts, &weights).expect("weights are a probability vector")
}

/// A detection-incoherent channel `Xi o D`, mixed with permutation-phase
/// unitaries when the channel is square.
pub fn random_di(dim_in: usize, dim_out: usize, rng: &mut impl Rng) -> Channel {
    let xi = random_channel(dim_in, dim_out, rng);
    let mut ch = Channel::compose(&xi, &dephasing(dim_in)).expect("shapes agree");
    if dim_in == dim_out {
        ch = mix_with_permutations(ch, rng);
    }
    assert!(is_detection_incoherent(&ch, GENERATOR_CHECK_TOL));
    ch
}

/// A maximally incoherent operation `D o Xi`, mixed with permutation-phase
/// unitaries when the channel is square.
pub fn random_mio(dim_in: usize, dim_out: usize, rng: &mut impl Rng) -> Channel {
    let xi = random_channel(dim_in, dim_out, rng);
    let mut ch = Channel::compose(&dephasing(dim_out), &xi).expect("shapes agree");
    if dim_in == dim_out {
        ch = mix_with_permutations(ch, rng);
    }
    assert!(is_mio(&ch, GENERATOR_CHECK_TOL));
    ch
}

/// Unconstrained parameters of a general detection-incoherent channel.
///
/// A channel is detection-incoherent exactly when, for every output index
/// `k`, the Kraus columns `u_{k,a} = (K_n[k][a])_n` are mutually orthogonal
/// over the input index `a`; trace preservation then reduces to
/// `sum_k |u_{k,a}|^2 = 1`. Writing `u_{k,a} = w_{k,a} V_k e_a` with `V_k` an
/// isometry covers the whole class. `raw_isometries[k]` is any full-rank
/// matrix (its polar factor is `V_k`) and `raw_weights[k][a]` any real number
/// (normalized over `k` for each `a`).
#[derive(Clone, Debug)]
pub struct DiParams {
    pub dim_in: usize,
    pub dim_out: usize,
    pub raw_isometries: Vec<ComplexMatrix>,
    pub raw_weights: Vec<Vec<f64>>,
}

impl DiParams {
    pub fn random(dim_in: usize, dim_out: usize, rng: &mut impl Rng) -> Self {
        let rank = dim_in * dim_out;
        Self {
            dim_in,
            dim_out,
            raw_isometries: (0..dim_out).map(|_| ginibre(rank, dim_in, rng)).collect(),
            raw_weights: (0..dim_out)
                .map(|_| (0..dim_in).map(|_| StandardNormal.sample(rng)).collect())
                .collect(),
        }
    }

    /// Random perturbation of every raw parameter with the given scale.
    pub fn perturbed(&self, scale: f64, rng: &mut impl Rng) -> Self {
        let mut next = self.clone();
        for g in &mut next.raw_isometries {
            *g = &*g + &ginibre(g.rows(), g.cols(), rng).scale_real(scale);
        }
        for row in &mut next.raw_weights {
            for w in row.iter_mut() {
                *w += scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
            }
        }
        next
    }

    pub fn to_channel(&self) -> Channel {
        let (din, dout) = (self.dim_in, self.dim_out);
        let rank = din * dout;
        let isos: Vec<ComplexMatrix> = self.raw_isometries.iter().map(polar_isometry).collect();
        let mut weights = vec![vec![0.0; din]; dout];
        for a in 0..din {
            let norm = (0..dout)
                .map(|k| self.raw_weights[k][a].powi(2))
                .sum::<f64>()
                .sqrt();
            for k in 0..dout {
                weights[k][a] = if norm > 0.0 {
                    self.raw_weights[k][a].abs() / norm
                } else {
                    (1.0 / dout as f64).sqrt()
                };
            }
        }
        let ops: Vec<ComplexMatrix> = (0..rank)
            .map(|n| ComplexMatrix::from_fn(dout, din, |k, a| isos[k][(n, a)] * weights[k][a]))
            .collect();
        // Completeness holds by construction up to rounding, so skip the check.
        Channel::from_kraus(&KrausSet {
            dim_in: din,
            dim_out: dout,
            operators: ops,
        })
    }
}

/// Samples from the full detection-incoherent class through [`DiParams`].
pub fn random_di_general(dim_in: usize, dim_out: usize, rng: &mut impl Rng) -> Channel {
    let ch = DiParams::random(dim_in, dim_out, rng).to_channel();
    debug_assert!(is_detection_incoherent(&ch, GENERATOR_CHECK_TOL));
    ch
}
