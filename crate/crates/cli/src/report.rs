//! JSON shapes of the subcommand reports.

use serde::Serialize;

use dyncoh::channels::ChannelFile;
use dyncoh::sdp::MeasureReport;
use dyncoh::search::{CounterexampleReport, GameTranscript, PostProcessedBound};
use dyncoh::verify::PropertyCheck;
use dyncoh::{DensityMatrix, Error};

#[derive(Serialize)]
pub struct Extraction {
    pub sigma_diag: Vec<f64>,
    pub support: Vec<usize>,
    pub rho_opt: DensityMatrix,
    pub phi_opt: ChannelFile,
}

#[derive(Serialize)]
pub struct MeasurePreOutput {
    pub value: f64,
    pub f_value: f64,
    pub prior_gap: f64,
    pub sign_vectors: Vec<Vec<i8>>,
    pub per_sign_values: Vec<f64>,
    pub winning_sign: usize,
    pub max_duality_gap: f64,
    pub verification_residual: f64,
    pub extraction: Extraction,
}

impl MeasurePreOutput {
    pub fn new(r: &MeasureReport) -> Result<Self, Error> {
        Ok(Self {
            value: r.value,
            f_value: r.f_value,
            prior_gap: r.prior_gap,
            sign_vectors: r.sign_vectors.iter().map(|s| s.entries().to_vec()).collect(),
            per_sign_values: r.per_sign_values.clone(),
            winning_sign: r.winning_sign,
            max_duality_gap: r.max_duality_gap,
            verification_residual: r.verification_residual,
            extraction: Extraction {
                sigma_diag: r.extraction.sigma_diag.clone(),
                support: r.extraction.support.clone(),
                rho_opt: r.extraction.rho_opt.clone(),
                phi_opt: ChannelFile::from_channel(&r.extraction.phi_opt)?,
            },
        })
    }
}

#[derive(Serialize)]
pub struct MeasurePostOutput {
    pub lower_bound: bool,
    pub value: f64,
    pub helstrom_value: f64,
    pub best_input: usize,
    pub ascent_trace: Vec<f64>,
}

impl From<PostProcessedBound> for MeasurePostOutput {
    fn from(b: PostProcessedBound) -> Self {
        Self {
            lower_bound: true,
            value: b.value,
            helstrom_value: b.helstrom_value,
            best_input: b.best_input,
            ascent_trace: b.ascent_trace,
        }
    }
}

#[derive(Serialize)]
pub struct GameOutput {
    /// Exact value of the played instance, for reference.
    pub m_value: f64,
    pub f_value: f64,
    #[serde(flatten)]
    pub transcript: GameTranscript,
}

impl GameOutput {
    pub fn new(r: &MeasureReport, transcript: GameTranscript) -> Self {
        Self {
            m_value: r.value,
            f_value: r.f_value,
            transcript,
        }
    }
}

#[derive(Serialize)]
pub struct CounterexampleOutput {
    /// Sampled functional without pre-processing, before and after the swap.
    pub l_before: f64,
    pub l_after: f64,
    pub non_monotone: bool,
    /// Exact pre-processed values of the same two channels.
    pub m_before: f64,
    pub m_after: f64,
}

impl CounterexampleOutput {
    pub fn new(c: CounterexampleReport, m_before: f64, m_after: f64) -> Self {
        Self {
            l_before: c.l_before,
            l_after: c.l_after,
            non_monotone: c.shows_non_monotonicity(),
            m_before,
            m_after,
        }
    }
}

#[derive(Serialize)]
pub struct VerifyOutput {
    pub all_passed: bool,
    pub checks: Vec<PropertyCheck>,
}

impl VerifyOutput {
    pub fn new(checks: Vec<PropertyCheck>) -> Self {
        Self {
            all_passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}
