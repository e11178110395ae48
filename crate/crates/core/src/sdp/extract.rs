//! Recovery of an optimal input state and detection-incoherent
//! pre-processing from the optimal variable `X_AB` of a sign-vector program.

use crate::channels::repair::{repair_choi, FreeClass};
use crate::channels::{is_detection_incoherent, Channel, KrausSet};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, HermitianView, Subsystem, ONE};
use crate::measures::{f_direct, DensityMatrix, GameConfig};

/// Indices with `sigma_i` at or below this are treated as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;
/// How far `X` may be from the feasible set before extraction refuses it.
pub const FEASIBILITY_TOL: f64 = 1e-6;
const DI_CHECK_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct ExtractionResult {
    pub sigma_diag: Vec<f64>,
    /// Indices `i` with `sigma_i > SUPPORT_THRESHOLD`.
    pub support: Vec<usize>,
    pub rho_opt: DensityMatrix,
    pub phi_opt: Channel,
}

fn check_feasible(x: &ComplexMatrix, da: usize, db: usize) -> Result<()> {
    let herm = x.hermiticity_deviation();
    if herm > FEASIBILITY_TOL {
        return Err(Error::Extraction(format!(
            "X is not Hermitian (deviation {herm:.2e})"
        )));
    }
    let tr = x.trace();
    if (tr - ONE).norm() > FEASIBILITY_TOL {
        return Err(Error::Extraction(format!(
            "tr X = {:.6} differs from 1",
            tr.re
        )));
    }
    let mut coupling: f64 = 0.0;
    for i in 0..da {
        for j in 0..da {
            if i != j {
                for b in 0..db {
                    coupling = coupling.max(x[(i * db + b, j * db + b)].norm());
                }
            }
        }
    }
    if coupling > FEASIBILITY_TOL {
        return Err(Error::Extraction(format!(
            "diagonal coupling entries reach {coupling:.2e}"
        )));
    }
    let lam = linalg::min_eigenvalue(&HermitianView::symmetrized(x));
    if lam < -FEASIBILITY_TOL {
        return Err(Error::Extraction(format!("X has eigenvalue {lam:.2e}")));
    }
    Ok(())
}

/// Builds `rho_opt = sum sqrt(s_i s_j)|i><j|` and `Phi_opt = Phi~ o Pi` from a
/// feasible `X` on `A (x) B` with `dims = (dA, dB)`.
pub fn extract_optimal(x_opt: &ComplexMatrix, dims: (usize, usize)) -> Result<ExtractionResult> {
    let (da, db) = dims;
    if x_opt.rows() != da * db || x_opt.cols() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "X is {}x{}, expected {}x{}",
            x_opt.rows(),
            x_opt.cols(),
            da * db,
            da * db
        )));
    }
    check_feasible(x_opt, da, db)?;
    let x = x_opt.hermitian_part();
    let reduced = linalg::partial_trace(&x, (da, db), Subsystem::A)?;
    let raw: Vec<f64> = reduced.diag().iter().map(|z| z.re.max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    let sigma: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let support: Vec<usize> = (0..da).filter(|&i| sigma[i] > SUPPORT_THRESHOLD).collect();
    let ds = support.len();

    let amp: Vec<_> = sigma.iter().map(|s| ONE * s.sqrt()).collect();
    let rho = DensityMatrix::new(ComplexMatrix::outer(&amp, &amp))?;

    // Phi~(|a><b|) = <i_a|X|i_b> / sqrt(s_{i_a} s_{i_b}), in Choi layout (k, a), (l, b).
    let choi = ComplexMatrix::from_fn(db * ds, db * ds, |r, c| {
        let (k, a) = (r / ds, r % ds);
        let (l, b) = (c / ds, c % ds);
        let (ia, ib) = (support[a], support[b]);
        x[(ia * db + k, ib * db + l)] / (sigma[ia] * sigma[ib]).sqrt()
    });
    let phi_tilde = repair_choi(&choi, ds, db, FreeClass::DetectionIncoherent)?;

    let mut kraus = vec![ComplexMatrix::from_fn(ds, da, |a, i| {
        if support[a] == i {
            ONE
        } else {
            linalg::ZERO
        }
    })];
    for j in (0..da).filter(|j| !support.contains(j)) {
        let mut l = ComplexMatrix::zeros(ds, da);
        l[(0, j)] = ONE;
        kraus.push(l);
    }
    let pi = Channel::from_kraus(&KrausSet::new(kraus)?);
    let phi_opt = Channel::compose(&phi_tilde, &pi)?;
    if !is_detection_incoherent(&phi_opt, DI_CHECK_TOL) {
        return Err(Error::Extraction(
            "extracted pre-processing is not detection-incoherent".into(),
        ));
    }
    Ok(ExtractionResult {
        sigma_diag: sigma,
        support,
        rho_opt: rho,
        phi_opt,
    })
}

/// `|F_direct(theta, Phi_opt, rho_opt) - reported_value|`.
pub fn verify_extraction(
    theta: &Channel,
    cfg: &GameConfig,
    result: &ExtractionResult,
    reported_value: f64,
) -> Result<f64> {
    Ok((f_direct(theta, &result.phi_opt, &result.rho_opt, cfg)? - reported_value).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{identity, is_cptp};

    /// `X = (id (x) Phi)(|v><v|)`-style point: sum_ij sqrt(s_i s_j)|i><j| (x) Phi(|i><j|).
    fn feasible_point(sigma: &[f64], phi: &Channel) -> ComplexMatrix {
        let da = sigma.len();
        let db = phi.dim_out();
        let mut x = ComplexMatrix::zeros(da * db, da * db);
        for i in 0..da {
            for j in 0..da {
                let blk = phi.apply(&ComplexMatrix::unit(da, i, j)).unwrap();
                for k in 0..db {
                    for l in 0..db {
                        x[(i * db + k, j * db + l)] = blk[(k, l)] * (sigma[i] * sigma[j]).sqrt();
                    }
                }
            }
        }
        x
    }

    #[test]
    fn full_support_round_trip() {
        let x = feasible_point(&[0.5, 0.5], &identity(2));
        let r = extract_optimal(&x, (2, 2)).unwrap();
        assert_eq!(r.support, vec![0, 1]);
        assert!(r.phi_opt.max_abs_diff(&identity(2)) < 1e-12);
        assert!((r.rho_opt.matrix()[(0, 1)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_sigma_discards_index() {
        let x = feasible_point(&[1.0, 0.0], &identity(2));
        let r = extract_optimal(&x, (2, 2)).unwrap();
        assert_eq!(r.support, vec![0]);
        assert!((r.rho_opt.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(r.rho_opt.matrix()[(1, 1)].norm() < 1e-12);
        assert!(is_cptp(&r.phi_opt, 1e-9));
        // Both inputs land on |0> of B.
        let out = r.phi_opt.apply(&ComplexMatrix::unit(2, 1, 1)).unwrap();
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_points_are_rejected() {
        let mut x = feasible_point(&[0.5, 0.5], &identity(2));
        x[(0, 0)] += ONE * 0.1;
        assert!(matches!(
            extract_optimal(&x, (2, 2)),
            Err(Error::Extraction(_))
        ));
        assert!(matches!(
            extract_optimal(&x, (2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
