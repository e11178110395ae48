//! Linear maps between operator spaces and the CPTP channels among them.
//!
//! The canonical representation is the Choi matrix
//! `J = sum_{i,j} T(|i><j|) (x) |i><j|`, output factor first. Its entries are
//! the index coefficients `T^{i,j}_{k,l} = <k| T(|i><j|) |l>` laid out as
//! `J[(k, i), (l, j)]`. Kraus operators and the four-index coefficient table
//! are derived views.

mod io;
mod library;
mod membership;
mod random;
pub(crate) mod repair;

use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, HermitianView, Subsystem, ZERO};

pub use io::{parse_channel_json, resolve_channel, ChannelFile};
pub use library::{
    complementary_dephasing, dephasing, hadamard, identity, mixture, permutation_phase,
    phase_channel, qft, swap, unitary_channel,
};
pub use membership::{
    di_direct_deviation, is_cptp, is_detection_incoherent, is_mio, mio_direct_deviation,
    Classification, DEFAULT_MEMBERSHIP_TOL,
};
pub use random::{
    random_channel, random_di, random_di_general, random_isometry, random_mio,
    random_permutation_phase, random_pure_state, random_unitary, DiParams,
};

/// Tolerance used when deriving the structural flags of a freshly built map.
pub const FLAG_TOL: f64 = 1e-9;

/// Eigenvalues of the Choi matrix below this are treated as zero when
/// extracting Kraus operators.
pub const KRAUS_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFlags {
    pub hermiticity_preserving: bool,
    pub completely_positive: bool,
    pub trace_preserving: bool,
}

impl MapFlags {
    fn and(self, other: Self) -> Self {
        Self {
            hermiticity_preserving: self.hermiticity_preserving && other.hermiticity_preserving,
            completely_positive: self.completely_positive && other.completely_positive,
            trace_preserving: self.trace_preserving && other.trace_preserving,
        }
    }

    pub fn is_cptp(&self) -> bool {
        self.hermiticity_preserving && self.completely_positive && self.trace_preserving
    }
}

#[derive(Clone, Debug)]
pub struct LinearMap {
    dim_in: usize,
    dim_out: usize,
    choi: ComplexMatrix,
    flags: MapFlags,
}

impl LinearMap {
    /// Wraps a Choi matrix and derives the structural flags from it.
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: ComplexMatrix) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::DimensionMismatch(
                "map dimensions must be positive".into(),
            ));
        }
        let n = dim_in * dim_out;
        if choi.rows() != n || choi.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix of a {dim_in}->{dim_out} map must be {n}x{n}, got {}x{}",
                choi.rows(),
                choi.cols()
            )));
        }
        if !choi.is_finite() {
            return Err(Error::NonFinite);
        }
        let flags = derive_flags(dim_in, dim_out, &choi);
        Ok(Self {
            dim_in,
            dim_out,
            choi,
            flags,
        })
    }

    fn with_flags(dim_in: usize, dim_out: usize, choi: ComplexMatrix, flags: MapFlags) -> Self {
        Self {
            dim_in,
            dim_out,
            choi,
            flags,
        }
    }

    /// Builds a map from its index coefficients `f(i, j, k, l) = T^{i,j}_{k,l}`.
    pub fn from_coefficients(
        dim_in: usize,
        dim_out: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut choi = ComplexMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
        for k in 0..dim_out {
            for i in 0..dim_in {
                for l in 0..dim_out {
                    for j in 0..dim_in {
                        choi[(k * dim_in + i, l * dim_in + j)] = f(i, j, k, l);
                    }
                }
            }
        }
        Self::from_choi(dim_in, dim_out, choi)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn flags(&self) -> MapFlags {
        self.flags
    }

    /// `T^{i,j}_{k,l}`: input indices `i, j`, output indices `k, l`.
    #[inline]
    pub fn coeff(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.choi[(k * self.dim_in + i, l * self.dim_in + j)]
    }

    pub fn apply(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        if op.rows() != self.dim_in || op.cols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "map expects {0}x{0} input, got {1}x{2}",
                self.dim_in,
                op.rows(),
                op.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in 0..self.dim_out {
            for l in 0..self.dim_out {
                let mut acc = ZERO;
                for i in 0..self.dim_in {
                    for j in 0..self.dim_in {
                        let x = op[(i, j)];
                        if x != ZERO {
                            acc += self.coeff(i, j, k, l) * x;
                        }
                    }
                }
                out[(k, l)] = acc;
            }
        }
        Ok(out)
    }

    /// `second o first`, i.e. `first` acts on the input before `second`.
    pub fn compose(second: &LinearMap, first: &LinearMap) -> Result<LinearMap> {
        if first.dim_out != second.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose a {}->{} map after a {}->{} map",
                second.dim_in, second.dim_out, first.dim_in, first.dim_out
            )));
        }
        let (din, dmid, dout) = (first.dim_in, first.dim_out, second.dim_out);
        let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
        for i in 0..din {
            for j in 0..din {
                for a in 0..dmid {
                    for b in 0..dmid {
                        let f = first.coeff(i, j, a, b);
                        if f == ZERO {
                            continue;
                        }
                        for k in 0..dout {
                            for l in 0..dout {
                                choi[(k * din + i, l * din + j)] += f * second.coeff(a, b, k, l);
                            }
                        }
                    }
                }
            }
        }
        Ok(LinearMap::with_flags(
            din,
            dout,
            choi,
            first.flags.and(second.flags),
        ))
    }

    /// `self (x) other` acting on `A (x) B` with `self` on the first factor.
    pub fn tensor(&self, other: &LinearMap) -> LinearMap {
        let (ai, ao, bi, bo) = (self.dim_in, self.dim_out, other.dim_in, other.dim_out);
        let din = ai * bi;
        let dout = ao * bo;
        let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
        for i1 in 0..ai {
            for j1 in 0..ai {
                for k1 in 0..ao {
                    for l1 in 0..ao {
                        let x = self.coeff(i1, j1, k1, l1);
                        if x == ZERO {
                            continue;
                        }
                        for i2 in 0..bi {
                            for j2 in 0..bi {
                                for k2 in 0..bo {
                                    for l2 in 0..bo {
                                        let (i, j) = (i1 * bi + i2, j1 * bi + j2);
                                        let (k, l) = (k1 * bo + k2, l1 * bo + l2);
                                        choi[(k * din + i, l * din + j)] =
                                            x * other.coeff(i2, j2, k2, l2);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        LinearMap::with_flags(din, dout, choi, self.flags.and(other.flags))
    }

    /// `sum_n w_n T_n` over maps of equal shape. Flags are re-derived.
    pub fn linear_combination(terms: &[(f64, &LinearMap)]) -> Result<LinearMap> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Validation("empty linear combination".into()))?;
        let (din, dout) = (first.dim_in, first.dim_out);
        let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
        for (w, m) in terms {
            if m.dim_in != din || m.dim_out != dout {
                return Err(Error::DimensionMismatch(
                    "linear combination of differently shaped maps".into(),
                ));
            }
            choi = &choi + &m.choi.scale_real(*w);
        }
        LinearMap::from_choi(din, dout, choi)
    }

    pub fn index_coeffs(&self) -> IndexCoeffs {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut data = Vec::with_capacity(din * din * dout * dout);
        for i in 0..din {
            for j in 0..din {
                for k in 0..dout {
                    for l in 0..dout {
                        data.push(self.coeff(i, j, k, l));
                    }
                }
            }
        }
        IndexCoeffs {
            dim_in: din,
            dim_out: dout,
            data,
        }
    }

    /// Kraus operators from the Choi eigendecomposition, dropping eigenvalues
    /// below [`KRAUS_RANK_TOL`]. Fails for maps that are not completely
    /// positive.
    pub fn to_kraus(&self) -> Result<KrausSet> {
        let herm = HermitianView::with_tolerance(&self.choi, 1e-9)?;
        let (vals, vecs) = linalg::eig_hermitian(&herm);
        if vals.first().copied().unwrap_or(0.0) < -1e-9 {
            return Err(Error::NotCptp(
                "Choi matrix is not positive semidefinite".into(),
            ));
        }
        let mut ops = Vec::new();
        for (n, &lam) in vals.iter().enumerate() {
            if lam <= KRAUS_RANK_TOL {
                continue;
            }
            let s = lam.sqrt();
            ops.push(ComplexMatrix::from_fn(self.dim_out, self.dim_in, |k, i| {
                vecs[(k * self.dim_in + i, n)] * s
            }));
        }
        Ok(KrausSet {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            operators: ops,
        })
    }

    pub fn max_abs_diff(&self, other: &LinearMap) -> f64 {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return f64::INFINITY;
        }
        self.choi.max_abs_diff(&other.choi)
    }
}

fn derive_flags(dim_in: usize, dim_out: usize, choi: &ComplexMatrix) -> MapFlags {
    let hermiticity_preserving = choi.is_hermitian(FLAG_TOL);
    let completely_positive = hermiticity_preserving
        && linalg::min_eigenvalue(&HermitianView::symmetrized(choi)) >= -FLAG_TOL;
    let trace_preserving = partial_trace_output(dim_in, dim_out, choi)
        .map(|t| t.max_abs_diff(&ComplexMatrix::identity(dim_in)) <= FLAG_TOL)
        .unwrap_or(false);
    MapFlags {
        hermiticity_preserving,
        completely_positive,
        trace_preserving,
    }
}

/// `tr_out J`, an operator on the input space.
pub(crate) fn partial_trace_output(
    dim_in: usize,
    dim_out: usize,
    choi: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    linalg::partial_trace(choi, (dim_out, dim_in), Subsystem::B)
}

/// A completely positive, trace-preserving linear map.
#[derive(Clone, Debug)]
pub struct Channel(LinearMap);

impl Channel {
    /// Accepts a map whose Choi matrix is PSD and whose output trace is the
    /// identity, both within [`FLAG_TOL`].
    pub fn new(map: LinearMap) -> Result<Self> {
        Self::with_tolerance(map, FLAG_TOL)
    }

    pub fn with_tolerance(mut map: LinearMap, tol: f64) -> Result<Self> {
        if !is_cptp(&map, tol) {
            return Err(Error::NotCptp(format!(
                "{}->{} map fails the CPTP check at tolerance {tol:.1e}",
                map.dim_in, map.dim_out
            )));
        }
        map.flags = MapFlags {
            hermiticity_preserving: true,
            completely_positive: true,
            trace_preserving: true,
        };
        Ok(Self(map))
    }

    pub(crate) fn new_unchecked(mut map: LinearMap) -> Self {
        map.flags = MapFlags {
            hermiticity_preserving: true,
            completely_positive: true,
            trace_preserving: true,
        };
        Self(map)
    }

    pub fn from_kraus(ks: &KrausSet) -> Channel {
        let (din, dout) = (ks.dim_in, ks.dim_out);
        let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
        for kop in &ks.operators {
            for k in 0..dout {
                for i in 0..din {
                    let a = kop[(k, i)];
                    if a == ZERO {
                        continue;
                    }
                    for l in 0..dout {
                        for j in 0..din {
                            choi[(k * din + i, l * din + j)] += a * kop[(l, j)].conj();
                        }
                    }
                }
            }
        }
        Channel::new_unchecked(LinearMap::with_flags(
            din,
            dout,
            choi,
            MapFlags {
                hermiticity_preserving: true,
                completely_positive: true,
                trace_preserving: true,
            },
        ))
    }

    pub fn as_map(&self) -> &LinearMap {
        &self.0
    }

    pub fn into_map(self) -> LinearMap {
        self.0
    }

    /// `second o first` for channels.
    pub fn then(&self, second: &Channel) -> Result<Channel> {
        Ok(Channel::new_unchecked(LinearMap::compose(
            &second.0, &self.0,
        )?))
    }

    pub fn compose(second: &Channel, first: &Channel) -> Result<Channel> {
        first.then(second)
    }

    pub fn tensor(&self, other: &Channel) -> Channel {
        Channel::new_unchecked(self.0.tensor(&other.0))
    }
}

impl Deref for Channel {
    type Target = LinearMap;

    fn deref(&self) -> &LinearMap {
        &self.0
    }
}

/// A list of Kraus operators `K_n : C^{dim_in} -> C^{dim_out}` with
/// `sum_n K_n^dagger K_n = I`.
#[derive(Clone, Debug)]
pub struct KrausSet {
    dim_in: usize,
    dim_out: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub const COMPLETENESS_TOL: f64 = 1e-9;

    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::Validation("empty Kraus set".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &operators {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::DimensionMismatch(
                    "Kraus operators of different shapes".into(),
                ));
            }
            if !k.is_finite() {
                return Err(Error::NonFinite);
            }
            sum = &sum + &(&k.adjoint() * k);
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if dev > Self::COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus(dev));
        }
        Ok(Self {
            dim_in,
            dim_out,
            operators,
        })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }
}

pub fn from_kraus(ks: &KrausSet) -> Channel {
    Channel::from_kraus(ks)
}

/// Four-index coefficient table `T^{i,j}_{k,l}`.
#[derive(Clone, Debug)]
pub struct IndexCoeffs {
    dim_in: usize,
    dim_out: usize,
    data: Vec<Complex64>,
}

/// Worst-case violations of the three identities every channel's
/// coefficients satisfy.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoefficientIdentities {
    /// Smallest real part of `T^{n,n}_{m,m}` (should be >= 0).
    pub min_population: f64,
    /// Max `|T^{i,j}_{k,l} - conj(T^{j,i}_{l,k})|`.
    pub conjugation_deviation: f64,
    /// Max `|sum_m T^{i,j}_{m,m} - delta_{ij}|`.
    pub trace_deviation: f64,
}

impl CoefficientIdentities {
    pub fn hold(&self, tol: f64) -> bool {
        self.min_population >= -tol
            && self.conjugation_deviation <= tol
            && self.trace_deviation <= tol
    }
}

impl IndexCoeffs {
    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        let (din, dout) = (self.dim_in, self.dim_out);
        self.data[((i * din + j) * dout + k) * dout + l]
    }

    pub fn identities(&self) -> CoefficientIdentities {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut min_population = f64::INFINITY;
        let mut conjugation_deviation: f64 = 0.0;
        let mut trace_deviation: f64 = 0.0;
        for i in 0..din {
            for m in 0..dout {
                min_population = min_population.min(self.get(i, i, m, m).re);
            }
            for j in 0..din {
                for k in 0..dout {
                    for l in 0..dout {
                        let d = self.get(i, j, k, l) - self.get(j, i, l, k).conj();
                        conjugation_deviation = conjugation_deviation.max(d.norm());
                    }
                }
                let s: Complex64 = (0..dout).map(|m| self.get(i, j, m, m)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                trace_deviation = trace_deviation.max((s - target).norm());
            }
        }
        CoefficientIdentities {
            min_population,
            conjugation_deviation,
            trace_deviation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_choi_is_unnormalized_bell_projector() {
        let ch = from_kraus(&KrausSet::new(vec![ComplexMatrix::identity(2)]).unwrap());
        let phi = [ONE, ZERO, ZERO, ONE];
        assert_eq!(ch.choi(), &ComplexMatrix::outer(&phi, &phi));
    }

    #[test]
    fn projector_kraus_gives_dephasing() {
        let ks = KrausSet::new(vec![
            ComplexMatrix::real_diagonal(&[1.0, 0.0]),
            ComplexMatrix::real_diagonal(&[0.0, 1.0]),
        ])
        .unwrap();
        assert!(from_kraus(&ks).max_abs_diff(&dephasing(2)) < 1e-15);
    }

    #[test]
    fn hadamard_maps_zero_to_plus() {
        let h = hadamard();
        let zero = ComplexMatrix::real_diagonal(&[1.0, 0.0]);
        let out = h.apply(&zero).unwrap();
        let plus = ComplexMatrix::from_fn(2, 2, |_, _| c(0.5, 0.0));
        assert!(out.max_abs_diff(&plus) < 1e-15);
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let ks = KrausSet::new(vec![ComplexMatrix::real_diagonal(&[1.0, 0.0])]);
        assert!(matches!(ks, Err(Error::IncompleteKraus(_))));
    }

    #[test]
    fn apply_examples() {
        let m = ComplexMatrix::from_fn(2, 2, |i, j| c((i * 2 + j) as f64 + 1.0, 0.5));
        let out = dephasing(2).apply(&m).unwrap();
        assert_eq!(out, ComplexMatrix::diagonal(&[m[(0, 0)], m[(1, 1)]]));

        let lam = phase_channel(&[0.4, -1.3, 2.0]);
        let diag = ComplexMatrix::real_diagonal(&[0.2, 0.5, 0.3]);
        assert!(lam.apply(&diag).unwrap().max_abs_diff(&diag) < 1e-15);

        let third = 2.0 * std::f64::consts::PI / 3.0;
        let lam = phase_channel(&[third, 0.0]);
        let plus = ComplexMatrix::from_fn(2, 2, |_, _| c(0.5, 0.0));
        let out = lam.apply(&plus).unwrap();
        let w = Complex64::from_polar(1.0, third);
        assert!((out[(0, 1)] - w * 0.5).norm() < 1e-15);
        assert!((out[(1, 0)] - w.conj() * 0.5).norm() < 1e-15);
        assert!((out[(0, 0)] - 0.5).norm() < 1e-15);
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        assert!(matches!(
            hadamard().apply(&ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn composition_examples() {
        let d = dephasing(2);
        assert!(LinearMap::compose(&d, &d).unwrap().max_abs_diff(&d) < 1e-15);

        let lam = phase_channel(&[1.1, -0.3]);
        let dl = LinearMap::compose(&d, &lam).unwrap();
        assert!(dl.max_abs_diff(&d) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let psi = random_pure_state(2, &mut rng);
            let rho = ComplexMatrix::outer(&psi, &psi);
            let a = dl.apply(&rho).unwrap();
            let b = d.apply(&rho).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
        }

        let h = hadamard();
        assert!(
            LinearMap::compose(&h, &h)
                .unwrap()
                .max_abs_diff(&identity(2))
                < 1e-15
        );
    }

    #[test]
    fn compose_checks_dimensions() {
        assert!(LinearMap::compose(&hadamard(), &identity(3)).is_err());
    }

    #[test]
    fn tensor_examples() {
        assert!(identity(2).tensor(&identity(3)).max_abs_diff(&identity(6)) < 1e-15);

        let s = 0.5f64.sqrt();
        let bell = [c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        let rho = ComplexMatrix::outer(&bell, &bell);
        let out = dephasing(2).tensor(&identity(2)).apply(&rho).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::real_diagonal(&[0.5, 0.0, 0.0, 0.5])) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let theta = random_channel(2, 3, &mut rng);
        let a = random_pure_state(2, &mut rng);
        let b = random_pure_state(2, &mut rng);
        let rho = ComplexMatrix::outer(&a, &a);
        let sigma = ComplexMatrix::outer(&b, &b);
        let lhs = theta.tensor(&identity(2)).apply(&rho.kron(&sigma)).unwrap();
        let rhs = theta.apply(&rho).unwrap().kron(&sigma);
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn index_coefficient_examples() {
        let id = identity(3).index_coeffs();
        let dph = dephasing(3).index_coeffs();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let e = if i == k && j == l { 1.0 } else { 0.0 };
                        assert_eq!(id.get(i, j, k, l), c(e, 0.0));
                        let e = if i == j && i == k && i == l { 1.0 } else { 0.0 };
                        assert_eq!(dph.get(i, j, k, l), c(e, 0.0));
                    }
                }
            }
        }
        let h = hadamard().index_coeffs();
        // H_00 * conj(H_01) = 1/2.
        assert!((h.get(0, 1, 0, 0) - 0.5).norm() < 1e-15);
    }

    #[test]
    fn dephasing_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = dephasing(3);
        let dc = complementary_dephasing(3);
        assert!(!dc.flags().completely_positive);
        assert!(dc.flags().hermiticity_preserving);
        let sum = LinearMap::linear_combination(&[(1.0, &d), (1.0, &dc)]).unwrap();
        assert!(sum.max_abs_diff(&identity(3)) < 1e-15);
        for _ in 0..5 {
            let psi = random_pure_state(3, &mut rng);
            let rho = ComplexMatrix::outer(&psi, &psi);
            let out = d.apply(&rho).unwrap();
            let off = dc.apply(&rho).unwrap();
            for i in 0..3 {
                assert_eq!(off[(i, i)], ZERO);
                for j in 0..3 {
                    if i != j {
                        assert_eq!(out[(i, j)], ZERO);
                    }
                }
            }
        }
    }

    #[test]
    fn kraus_round_trip_reproduces_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (din, dout) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let ch = random_channel(din, dout, &mut rng);
            let back = from_kraus(&ch.to_kraus().unwrap());
            assert!(back.max_abs_diff(&ch) < 1e-8);
        }
        let ks = dephasing(4).to_kraus().unwrap();
        assert_eq!(ks.operators().len(), 4);
    }

    #[test]
    fn coefficient_identities_hold_for_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let ch = random_channel(2, 3, &mut rng);
            assert!(ch.index_coeffs().identities().hold(1e-9));
        }
        let ids = complementary_dephasing(2).index_coeffs().identities();
        assert!(ids.trace_deviation > 0.5);
    }
}
