//! Projection of a nearly valid Choi matrix onto an exactly CPTP map inside
//! one of the free classes. Used to clean up Choi matrices read off
//! numerical SDP solutions.

use num_complex::Complex64;

use super::{Channel, LinearMap};
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix, HermitianView};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum FreeClass {
    DetectionIncoherent,
    Mio,
}

/// Orthogonal projection onto the affine set of trace-preserving maps in the
/// class. The zero pattern of the class and the trace condition touch
/// disjoint entries (MIO) or nested ones (DI), so both are applied entrywise.
fn affine_projection(j: &mut ComplexMatrix, din: usize, dout: usize, class: FreeClass) {
    *j = j.hermitian_part();
    let idx = |k: usize, a: usize| k * din + a;
    match class {
        FreeClass::DetectionIncoherent => {
            for k in 0..dout {
                for a in 0..din {
                    for b in 0..din {
                        if a != b {
                            j[(idx(k, a), idx(k, b))] = Complex64::new(0.0, 0.0);
                        }
                    }
                }
            }
        }
        FreeClass::Mio => {
            for a in 0..din {
                for k in 0..dout {
                    for l in 0..dout {
                        if k != l {
                            j[(idx(k, a), idx(l, a))] = Complex64::new(0.0, 0.0);
                        }
                    }
                }
            }
        }
    }
    for a in 0..din {
        for b in 0..din {
            let target = if a == b { 1.0 } else { 0.0 };
            let sum: Complex64 = (0..dout).map(|k| j[(idx(k, a), idx(k, b))]).sum();
            let shift = (Complex64::new(target, 0.0) - sum) / dout as f64;
            for k in 0..dout {
                j[(idx(k, a), idx(k, b))] += shift;
            }
        }
    }
}

/// Alternating projections between the PSD cone and the affine class
/// constraints, finished by mixing in a little of the completely depolarizing
/// map (which lies in the interior of both classes) to cancel any leftover
/// negative eigenvalue.
pub(crate) fn repair_choi(
    choi: &ComplexMatrix,
    din: usize,
    dout: usize,
    class: FreeClass,
) -> Result<Channel> {
    let mut j = choi.clone();
    for _ in 0..500 {
        affine_projection(&mut j, din, dout, class);
        if linalg::min_eigenvalue(&HermitianView::symmetrized(&j)) >= -1e-13 {
            break;
        }
        j = linalg::psd_projection(&HermitianView::symmetrized(&j));
    }
    affine_projection(&mut j, din, dout, class);
    let lam = linalg::min_eigenvalue(&HermitianView::symmetrized(&j));
    if lam < 0.0 {
        let neg = -lam * (1.0 + 1e-6);
        let eps = neg / (neg + 1.0 / dout as f64);
        let center = ComplexMatrix::identity(din * dout).scale_real(1.0 / dout as f64);
        j = &j.scale_real(1.0 - eps) + &center.scale_real(eps);
    }
    Channel::new(LinearMap::from_choi(din, dout, j)?)
}
