//! The Hadamard-mixture sweep: `M` as a function of the mixing weight `p1`
//! for several priors.

use serde::Serialize;

use super::par_map;
use crate::channels::{hadamard, identity, mixture};
use crate::error::{Error, Result};
use crate::measures::GameConfig;
use crate::sdp::{evaluate_f, EvalOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub p1: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

/// `M` for the channel `p1 H + (1 - p1) id` on every `(lambda, p1)` pair,
/// lambda-major.
pub fn mixture_sweep(lambdas: &[f64], p1_grid: &[f64], phi: &[f64], opts: &EvalOptions) -> Result<Vec<SweepRow>> {
    if let Some(p) = p1_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidProbabilities(format!("p1 = {p} outside [0, 1]")));
    }
    let cfgs = lambdas
        .iter()
        .map(|&l| GameConfig::new(l, phi.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, f64)> = (0..cfgs.len())
        .flat_map(|c| p1_grid.iter().map(move |&p| (c, p)))
        .collect();
    par_map(&points, |&(c, p1)| {
        let theta = mixture(&[hadamard(), identity(2)], &[p1, 1.0 - p1])?;
        let report = evaluate_f(&theta, &cfgs[c], opts)?;
        Ok(SweepRow {
            lambda: cfgs[c].lambda(),
            p1,
            m: report.value,
        })
    })
    .into_iter()
    .collect()
}

/// Decimal rendering with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { format!("{:.11}", 0.0) } else { x.to_string() };
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda,p1,M\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", format_sig12(r.lambda), format_sig12(r.p1), format_sig12(r.m)));
    }
    out
}

/// First grid cell `i` where the finite-difference slope of `(x, y)` jumps
/// by more than a factor 10 between cells `i` and `i + 1`, with the larger
/// slope at least `1e-4` (noise in a flat region is not a kink).
pub fn gradient_kink(xs: &[f64], ys: &[f64]) -> Option<usize> {
    let slopes: Vec<f64> = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    slopes.windows(2).position(|s| {
        let (a, b) = (s[0].abs(), s[1].abs());
        b >= 1e-4 && b > 10.0 * a.max(1e-9)
    })
}
