//! Dense primal-dual interior-point method for real symmetric block SDPs in
//! standard form
//!
//! ```text
//! minimize   <C, X>            maximize  b^T y
//! subject to <A_k, X> = b_k    subject to sum_k y_k A_k + S = C
//!            X >= 0                       S >= 0
//! ```
//!
//! Infeasible-start path following with the HKM search direction and a
//! Mehrotra predictor-corrector step. Problems here are at most a few dozen
//! rows per block, so everything is dense.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{SolverStatus, SolverTolerances};

pub(crate) struct RealSdp {
    pub block_sizes: Vec<usize>,
    pub c: Vec<DMatrix<f64>>,
    /// `a[k][blk]`.
    pub a: Vec<Vec<DMatrix<f64>>>,
    pub b: Vec<f64>,
}

pub(crate) struct RealSolution {
    pub x: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub status: SolverStatus,
    pub detail: String,
}

type Blocks = Vec<DMatrix<f64>>;

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob(a: &Blocks) -> f64 {
    inner(a, a).sqrt()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest step `alpha` with `X + alpha dX >= 0`, given the Cholesky factor of `X`.
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let linv_dx = l
        .solve_lower_triangular(dx)
        .expect("triangular factor is invertible");
    let m = l
        .solve_lower_triangular(&linv_dx.transpose())
        .expect("triangular factor is invertible");
    let lam_min = sym(&m).symmetric_eigenvalues().min();
    if lam_min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam_min
    }
}

/// Cholesky factor of the Schur complement, retried with a growing diagonal
/// shift when rounding has made it indefinite close to the optimum.
fn factor_regularized(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let scale = m.diagonal().amax().max(f64::MIN_POSITIVE);
    [1e-14, 1e-12, 1e-10].iter().find_map(|eps| {
        let shifted = &m + DMatrix::identity(m.nrows(), m.ncols()) * (eps * scale);
        Cholesky::new(shifted)
    })
}

struct Problem {
    block_sizes: Vec<usize>,
    c: Blocks,
    a: Vec<Blocks>,
    b: DVector<f64>,
}

impl Problem {
    fn op(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|ak| inner(ak, x)))
    }

    fn adj(&self, y: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self
            .block_sizes
            .iter()
            .map(|&n| DMatrix::zeros(n, n))
            .collect();
        for (ak, &yk) in self.a.iter().zip(y.iter()) {
            if yk == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(ak) {
                *o += a * yk;
            }
        }
        out
    }
}

/// Removes linearly dependent constraint rows and orthonormalizes the rest
/// (modified Gram-Schmidt applied to `(vec(A_k), b_k)` jointly). Returns
/// `None` when a dependent row has an inconsistent right-hand side.
fn orthonormalize(p: &RealSdp) -> Option<(Vec<Blocks>, Vec<f64>)> {
    const DEP_TOL: f64 = 1e-10;
    let mut basis: Vec<(Blocks, f64)> = Vec::new();
    for (ak, &bk) in p.a.iter().zip(&p.b) {
        let norm0 = frob(ak);
        if norm0 == 0.0 {
            if bk.abs() > 1e-12 {
                return None;
            }
            continue;
        }
        let mut r = ak.clone();
        let mut beta = bk;
        for _ in 0..2 {
            for (q, bq) in &basis {
                let coef = inner(&r, q);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= qi * coef;
                }
                beta -= coef * bq;
            }
        }
        let nr = frob(&r);
        if nr <= DEP_TOL * norm0 {
            if beta.abs() > 1e-8 * (1.0 + bk.abs()) {
                return None;
            }
            continue;
        }
        for ri in r.iter_mut() {
            *ri /= nr;
        }
        basis.push((r, beta / nr));
    }
    Some(basis.into_iter().unzip())
}

pub(crate) fn solve(p: &RealSdp, tol: &SolverTolerances) -> RealSolution {
    let fail = |status, detail: String, x: Blocks| RealSolution {
        x,
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        iterations: 0,
        status,
        detail,
    };
    let zero_blocks: Blocks = p
        .block_sizes
        .iter()
        .map(|&n| DMatrix::zeros(n, n))
        .collect();

    let Some((a, b)) = orthonormalize(p) else {
        return fail(
            SolverStatus::Infeasible,
            "equality constraints are inconsistent".into(),
            zero_blocks,
        );
    };
    let prob = Problem {
        block_sizes: p.block_sizes.clone(),
        c: p.c.clone(),
        a,
        b: DVector::from_vec(b),
    };
    let m = prob.a.len();
    let n_total: usize = prob.block_sizes.iter().sum();

    let b_norm = prob.b.norm();
    let c_norm = frob(&prob.c);
    let xi = (n_total as f64).sqrt().max(10.0).max(
        prob.a
            .iter()
            .zip(prob.b.iter())
            .map(|(ak, bk)| n_total as f64 * (1.0 + bk.abs()) / (1.0 + frob(ak)))
            .fold(0.0, f64::max),
    );
    let eta = (n_total as f64).sqrt().max(10.0).max(c_norm).max(1.0);
    let mut x: Blocks = prob
        .block_sizes
        .iter()
        .map(|&n| DMatrix::identity(n, n) * xi)
        .collect();
    let mut s: Blocks = prob
        .block_sizes
        .iter()
        .map(|&n| DMatrix::identity(n, n) * eta)
        .collect();
    let mut y = DVector::zeros(m);

    let mut last_detail = String::new();
    for iter in 0..tol.max_iterations {
        let rp = &prob.b - prob.op(&x);
        let aty = prob.adj(&y);
        let rd: Blocks = prob
            .c
            .iter()
            .zip(&s)
            .zip(&aty)
            .map(|((c, s), a)| c - s - a)
            .collect();
        let pobj = inner(&prob.c, &x);
        let dobj = prob.b.dot(&y);
        let gap = inner(&x, &s);
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = frob(&rd) / (1.0 + c_norm);
        let abs_gap = (pobj - dobj).abs();
        last_detail = format!("iter {iter}: pobj {pobj:.3e} dobj {dobj:.3e} gap {gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e}");

        if pinf <= tol.feasibility
            && dinf <= tol.feasibility
            && abs_gap <= tol.gap
            && gap <= tol.gap
        {
            return RealSolution {
                x,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                status: SolverStatus::Optimal,
                detail: last_detail,
            };
        }
        if dinf <= 1e-6 && dobj > 1e8 * (1.0 + pobj.abs().min(1e8)) {
            return RealSolution {
                x,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                status: SolverStatus::Infeasible,
                detail: format!("dual objective diverges (primal infeasible); {last_detail}"),
            };
        }
        if frob(&x) > 1e12 || frob(&s) > 1e14 {
            return RealSolution {
                x,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                status: SolverStatus::NumericalFailure,
                detail: format!("iterates diverge; {last_detail}"),
            };
        }

        let chol_x: Vec<_> = match x
            .iter()
            .map(|xb| Cholesky::new(xb.clone()))
            .collect::<Option<Vec<_>>>()
        {
            Some(c) => c,
            None => {
                return fail(
                    SolverStatus::NumericalFailure,
                    format!("X lost definiteness; {last_detail}"),
                    x,
                )
            }
        };
        let chol_s: Vec<_> = match s
            .iter()
            .map(|sb| Cholesky::new(sb.clone()))
            .collect::<Option<Vec<_>>>()
        {
            Some(c) => c,
            None => {
                return fail(
                    SolverStatus::NumericalFailure,
                    format!("S lost definiteness; {last_detail}"),
                    x,
                )
            }
        };
        let s_inv: Blocks = chol_s.iter().map(|c| c.inverse()).collect();

        // Schur complement M_kl = <A_k, X A_l S^{-1}>.
        let g: Vec<Blocks> = prob
            .a
            .iter()
            .map(|al| {
                al.iter()
                    .zip(&x)
                    .zip(&s_inv)
                    .map(|((a, xb), si)| xb * a * si)
                    .collect()
            })
            .collect();
        let mut schur = DMatrix::zeros(m, m);
        for k in 0..m {
            for l in k..m {
                let v = inner(&prob.a[k], &g[l]);
                schur[(k, l)] = v;
                schur[(l, k)] = v;
            }
        }
        let Some(schur_chol) = factor_regularized(schur) else {
            return fail(
                SolverStatus::NumericalFailure,
                format!("Schur complement is not positive definite; {last_detail}"),
                x,
            );
        };

        // X Rd S^{-1}, shared by predictor and corrector.
        let x_rd_sinv: Blocks = x
            .iter()
            .zip(&rd)
            .zip(&s_inv)
            .map(|((xb, r), si)| xb * r * si)
            .collect();
        let a_x_rd_sinv = prob.op(&x_rd_sinv);

        // Solves for the direction given the target T in dX = sym(T - X dS S^{-1}).
        let direction = |t: &Blocks| -> (Blocks, DVector<f64>, Blocks) {
            let rhs = &rp - prob.op(t) + &a_x_rd_sinv;
            let dy = schur_chol.solve(&rhs);
            let at_dy = prob.adj(&dy);
            let ds: Blocks = rd.iter().zip(&at_dy).map(|(r, a)| r - a).collect();
            let dx: Blocks = t
                .iter()
                .zip(&x)
                .zip(&ds)
                .zip(&s_inv)
                .map(|(((tb, xb), dsb), si)| sym(&(tb - xb * dsb * si)))
                .collect();
            (dx, dy, ds)
        };
        let steps = |dx: &Blocks, ds: &Blocks| -> (f64, f64) {
            let ap = chol_x
                .iter()
                .zip(dx)
                .map(|(c, d)| max_step(c, d))
                .fold(f64::INFINITY, f64::min);
            let ad = chol_s
                .iter()
                .zip(ds)
                .map(|(c, d)| max_step(c, d))
                .fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        let mu = gap / n_total as f64;
        let t_aff: Blocks = x.iter().map(|xb| -xb).collect();
        let (dx_a, _, ds_a) = direction(&t_aff);
        let (ap, ad) = steps(&dx_a, &ds_a);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let x_aff: Blocks = x.iter().zip(&dx_a).map(|(a, d)| a + d * ap).collect();
        let s_aff: Blocks = s.iter().zip(&ds_a).map(|(a, d)| a + d * ad).collect();
        let mu_aff = inner(&x_aff, &s_aff) / n_total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let t_cor: Blocks = x
            .iter()
            .zip(&s_inv)
            .zip(dx_a.iter().zip(&ds_a))
            .map(|((xb, si), (dxa, dsa))| si * (sigma * mu) - xb - dxa * dsa * si)
            .collect();
        let (dx, dy, ds) = direction(&t_cor);
        let (ap, ad) = steps(&dx, &ds);
        let gamma = 0.98;
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            return fail(
                SolverStatus::NumericalFailure,
                format!("step length collapsed; {last_detail}"),
                x,
            );
        }
        for (xb, d) in x.iter_mut().zip(&dx) {
            *xb += d * ap;
            *xb = sym(xb);
        }
        for (sb, d) in s.iter_mut().zip(&ds) {
            *sb += d * ad;
            *sb = sym(sb);
        }
        y += dy * ad;
    }
    let pobj = inner(&prob.c, &x);
    let dobj = prob.b.dot(&y);
    RealSolution {
        x,
        primal_objective: pobj,
        dual_objective: dobj,
        iterations: tol.max_iterations,
        status: SolverStatus::NumericalFailure,
        detail: format!("iteration limit reached; {last_detail}"),
    }
}
