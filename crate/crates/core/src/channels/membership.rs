//! Membership tests for CPTP maps and the two free classes: detection-incoherent
//! channels (`D T = D T D`) and maximally incoherent operations (`T D = D T D`).

use serde::Serialize;

use super::{dephasing, partial_trace_output, Channel, LinearMap};
use crate::linalg::{self, ComplexMatrix, HermitianView};

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

pub fn is_cptp(map: &LinearMap, tol: f64) -> bool {
    let choi = map.choi();
    if !choi.is_hermitian(tol) {
        return false;
    }
    if linalg::min_eigenvalue(&HermitianView::symmetrized(choi)) < -tol {
        return false;
    }
    match partial_trace_output(map.dim_in(), map.dim_out(), choi) {
        Ok(t) => t.max_abs_diff(&ComplexMatrix::identity(map.dim_in())) <= tol,
        Err(_) => false,
    }
}

/// Coefficient criterion: `T^{i,j}_{k,k} = 0` for all `i != j`.
pub fn is_detection_incoherent(ch: &Channel, tol: f64) -> bool {
    di_coefficient_deviation(ch) <= tol
}

/// Coefficient criterion: `T^{i,i}_{k,l} = 0` for all `k != l`.
pub fn is_mio(ch: &Channel, tol: f64) -> bool {
    mio_coefficient_deviation(ch) <= tol
}

pub(crate) fn di_coefficient_deviation(map: &LinearMap) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..map.dim_in() {
        for j in 0..map.dim_in() {
            if i == j {
                continue;
            }
            for k in 0..map.dim_out() {
                worst = worst.max(map.coeff(i, j, k, k).norm());
            }
        }
    }
    worst
}

pub(crate) fn mio_coefficient_deviation(map: &LinearMap) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..map.dim_in() {
        for k in 0..map.dim_out() {
            for l in 0..map.dim_out() {
                if k != l {
                    worst = worst.max(map.coeff(i, i, k, l).norm());
                }
            }
        }
    }
    worst
}

/// `max |choi(D T) - choi(D T D)|`, computed by explicit composition.
pub fn di_direct_deviation(map: &LinearMap) -> f64 {
    let d_out = dephasing(map.dim_out());
    let d_in = dephasing(map.dim_in());
    let lhs = LinearMap::compose(&d_out, map).expect("shapes agree");
    let rhs = LinearMap::compose(&lhs, &d_in).expect("shapes agree");
    lhs.max_abs_diff(&rhs)
}

/// `max |choi(T D) - choi(D T D)|`, computed by explicit composition.
pub fn mio_direct_deviation(map: &LinearMap) -> f64 {
    let d_out = dephasing(map.dim_out());
    let d_in = dephasing(map.dim_in());
    let lhs = LinearMap::compose(map, &d_in).expect("shapes agree");
    let rhs = LinearMap::compose(&d_out, &lhs).expect("shapes agree");
    lhs.max_abs_diff(&rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub cptp: bool,
    pub detection_incoherent: bool,
    pub mio: bool,
}

impl Classification {
    pub fn of(map: &LinearMap, tol: f64) -> Self {
        let cptp = is_cptp(map, tol);
        Self {
            cptp,
            detection_incoherent: cptp && di_coefficient_deviation(map) <= tol,
            mio: cptp && mio_coefficient_deviation(map) <= tol,
        }
    }
}
