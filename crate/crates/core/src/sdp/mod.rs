//! Exact evaluation of the pre-processed functional through a family of small
//! semidefinite programs, one per sign vector, plus recovery of an optimal
//! input state and pre-processing from the winning program.
//!
//! Complex Hermitian PSD variables are handled through the real embedding
//! `X -> [[Re X, -Im X], [Im X, Re X]]` and solved by the dense interior-point
//! method in [`ipm`].

mod extract;
mod ipm;
mod program;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub use extract::{extract_optimal, verify_extraction, ExtractionResult, SUPPORT_THRESHOLD};
pub use program::{
    build_sign_program, enumerate_all_sign_vectors, enumerate_sign_vectors, evaluate_f,
    halving_is_exact, EvalOptions, MeasureReport, SignVector, MAX_SIGN_LENGTH,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverTolerances {
    /// Bound on `|primal - dual|` and on the complementarity `<X, S>`.
    pub gap: f64,
    /// Relative residual of the equality constraints (primal) and of the
    /// slack equation (dual).
    pub feasibility: f64,
    pub max_iterations: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            gap: 1e-8,
            feasibility: 1e-9,
            max_iterations: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub name: String,
    pub dim: usize,
}

/// `sum_t tr(E_t X_{b_t}) = target`, with `terms = [(b_t, E_t)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, ComplexMatrix)>,
    pub target: Complex64,
}

/// Maximize `sum_t tr(W_t X_{b_t})` (each `W_t` Hermitian) over Hermitian PSD
/// blocks subject to linear equality constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub psd_variables: Vec<PsdBlock>,
    pub equality_constraints: Vec<LinearConstraint>,
    pub objective: Vec<(usize, ComplexMatrix)>,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub variable_values: Vec<ComplexMatrix>,
    pub objective_value: f64,
    /// Dual bound on the optimum (an upper bound for this maximization).
    pub dual_value: f64,
    pub duality_gap: f64,
    /// Largest absolute residual of the original equality constraints.
    pub primal_residual: f64,
    pub iterations: usize,
    pub status: SolverStatus,
    pub detail: String,
}

impl SdpSolution {
    pub fn into_result(self) -> Result<Self> {
        match self.status {
            SolverStatus::Optimal => Ok(self),
            status => Err(Error::Solver {
                status,
                detail: self.detail,
            }),
        }
    }
}

impl SdpProblem {
    fn validate(&self) -> Result<()> {
        if self.psd_variables.iter().any(|b| b.dim == 0) {
            return Err(Error::Validation("PSD block of dimension zero".into()));
        }
        let check = |(b, m): &(usize, ComplexMatrix), what: &str| -> Result<()> {
            let block = self.psd_variables.get(*b).ok_or_else(|| {
                Error::Validation(format!("{what} references undeclared block {b}"))
            })?;
            if m.rows() != block.dim || m.cols() != block.dim {
                return Err(Error::DimensionMismatch(format!(
                    "{what} coefficient is {}x{} but block '{}' is {}x{}",
                    m.rows(),
                    m.cols(),
                    block.name,
                    block.dim,
                    block.dim
                )));
            }
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
            Ok(())
        };
        for c in &self.equality_constraints {
            for t in &c.terms {
                check(t, "constraint")?;
            }
        }
        for t in &self.objective {
            check(t, "objective")?;
            let dev = t.1.hermiticity_deviation();
            if dev > 1e-10 * (1.0 + t.1.max_abs()) {
                return Err(Error::NotHermitian(dev));
            }
        }
        Ok(())
    }

    /// `sum_t tr(E_t X_{b_t})` evaluated at the given block values.
    fn evaluate(terms: &[(usize, ComplexMatrix)], x: &[ComplexMatrix]) -> Complex64 {
        terms
            .iter()
            .map(|(b, e)| {
                // tr(E X) = sum_{ij} E_ij X_ji
                let xb = &x[*b];
                let n = xb.rows();
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += e[(i, j)] * xb[(j, i)];
                    }
                }
                acc
            })
            .sum()
    }
}

/// `[[Re H, -Im H], [Im H, Re H]] / 2`, so that `<emb(H), Y> = tr(H X)` for the
/// Hermitian `X` recovered from `Y`.
fn half_embedding(h: &ComplexMatrix) -> DMatrix<f64> {
    let n = h.rows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)] * 0.5;
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

fn recover_complex(y: &DMatrix<f64>) -> ComplexMatrix {
    let n = y.nrows() / 2;
    ComplexMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
        let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
        Complex64::new(re, im)
    })
}

/// Solves the problem to the given tolerances. Infeasibility and numerical
/// trouble are reported through [`SdpSolution::status`]; malformed problems
/// are errors.
pub fn solve_sdp(p: &SdpProblem, tol: &SolverTolerances) -> Result<SdpSolution> {
    p.validate()?;
    let block_sizes: Vec<usize> = p.psd_variables.iter().map(|b| 2 * b.dim).collect();
    let zeros =
        || -> Vec<DMatrix<f64>> { block_sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect() };

    let mut c = zeros();
    for (b, w) in &p.objective {
        c[*b] -= half_embedding(&w.hermitian_part());
    }

    let mut a = Vec::new();
    let mut rhs = Vec::new();
    for con in &p.equality_constraints {
        // tr(E X) = tr(Eh X) + i tr(Ea X) with Eh, Ea Hermitian.
        let mut re_part = zeros();
        let mut im_part = zeros();
        for (b, e) in &con.terms {
            let adj = e.adjoint();
            let eh = (e + &adj).scale_real(0.5);
            let ea = (e - &adj).scale(Complex64::new(0.0, -0.5));
            re_part[*b] += half_embedding(&eh);
            im_part[*b] += half_embedding(&ea);
        }
        a.push(re_part);
        rhs.push(con.target.re);
        a.push(im_part);
        rhs.push(con.target.im);
    }

    let real = ipm::RealSdp {
        block_sizes,
        c,
        a,
        b: rhs,
    };
    let sol = ipm::solve(&real, tol);
    let values: Vec<ComplexMatrix> = sol.x.iter().map(recover_complex).collect();
    let primal_residual = p
        .equality_constraints
        .iter()
        .map(|con| (SdpProblem::evaluate(&con.terms, &values) - con.target).norm())
        .fold(0.0, f64::max);
    let objective_value = SdpProblem::evaluate(&p.objective, &values).re;
    let dual_value = -sol.dual_objective;
    Ok(SdpSolution {
        variable_values: values,
        objective_value,
        dual_value,
        duality_gap: (sol.primal_objective - sol.dual_objective).abs(),
        primal_residual,
        iterations: sol.iterations,
        status: sol.status,
        detail: sol.detail,
    })
}
