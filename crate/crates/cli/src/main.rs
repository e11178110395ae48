use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dyncoh::channels::{resolve_channel, Classification};
use dyncoh::sdp::{evaluate_f, EvalOptions, SolverTolerances};
use dyncoh::search::{
    swap_counterexample, swap_counterexample_instance, mixture_sweep, monte_carlo_game, optimal_protocol,
    post_processed_lower, sweep_csv, SearchBudget,
};
use dyncoh::{Error, GameConfig};

mod report;

use report::{CounterexampleOutput, GameOutput, MeasurePostOutput, MeasurePreOutput, VerifyOutput};

/// Exit code when `verify` finds a failing property.
const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "dyncoh", version, about = "Coherence detection and creation measures for quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Built-in channel (hadamard, qft:<d>, mix:hadamard:<p1>, swap:<dA>:<dB>, id:<d>, dephase:<d>) or a channel JSON file
    #[arg(long, global = true, default_value = "hadamard")]
    channel: String,

    /// Prior probability that the phases are not applied
    #[arg(long, global = true, default_value_t = 0.5)]
    lambda: f64,

    /// Phases in radians, comma separated
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true, default_value = "2.0943951023931953,0")]
    phi: Vec<f64>,

    /// Solver duality-gap tolerance (also the membership tolerance for classify)
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    out: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Solve all 2^N sign-vector programs even where half of them suffice
    #[arg(long, global = true)]
    full_sign_enumeration: bool,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Exact pre-processed improvement with an extracted optimal pair
    MeasurePre,
    /// Lower bound on the post-processed improvement
    MeasurePost,
    /// CPTP, detection-incoherent and MIO membership
    Classify,
    /// M over Hadamard/identity mixtures, one row per (lambda, p1)
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.75,0.9")]
        lambdas: Vec<f64>,
        /// Number of equally spaced p1 values in [0, 1]
        #[arg(long, default_value_t = 51)]
        p1_steps: usize,
    },
    /// Monte Carlo play of the guessing game with the optimal protocol
    Game {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// The swap instance where the functional without pre-processing grows
    Counterexample,
    /// Property suite on random instances
    Verify {
        /// Scale of the random instance counts
        #[arg(long, default_value_t = 2)]
        samples: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

/// Fully resolved invocation, embedded in every report.
#[derive(Clone, Debug, Serialize)]
struct RunConfig {
    command: &'static str,
    channel_uri: String,
    lambda: f64,
    phi: Vec<f64>,
    tol: f64,
    seed: u64,
    threads: usize,
    output_path: Option<String>,
    format: Format,
    full_sign_enumeration: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p1_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
}

impl RunConfig {
    fn resolve(cli: &Cli) -> Self {
        let c = &cli.common;
        let mut rc = RunConfig {
            command: "",
            channel_uri: c.channel.clone(),
            lambda: c.lambda,
            phi: c.phi.clone(),
            tol: c.tol,
            seed: c.seed,
            threads: c.threads,
            output_path: c.out.clone(),
            format: c.format,
            full_sign_enumeration: c.full_sign_enumeration,
            lambdas: None,
            p1_steps: None,
            trials: None,
            samples: None,
        };
        rc.command = match &cli.command {
            Command::MeasurePre => "measure-pre",
            Command::MeasurePost => "measure-post",
            Command::Classify => "classify",
            Command::Sweep { lambdas, p1_steps } => {
                rc.lambdas = Some(lambdas.clone());
                rc.p1_steps = Some(*p1_steps);
                "sweep"
            }
            Command::Game { trials } => {
                rc.trials = Some(*trials);
                "game"
            }
            Command::Counterexample => "counterexample",
            Command::Verify { samples } => {
                rc.samples = Some(*samples);
                "verify"
            }
        };
        rc
    }

    fn validate(&self) -> Result<(), Error> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Validation(format!("lambda = {} outside [0, 1]", self.lambda)));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Validation(format!("tol = {} must be positive", self.tol)));
        }
        if self.threads == 0 {
            return Err(Error::Validation("threads must be at least 1".into()));
        }
        if self.phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.format == Format::Csv && self.command != "sweep" {
            return Err(Error::Validation(format!("csv output is only available for sweep, not {}", self.command)));
        }
        if let Some(ls) = &self.lambdas {
            if ls.is_empty() {
                return Err(Error::Validation("no lambdas given".into()));
            }
        }
        if self.p1_steps == Some(0) {
            return Err(Error::Validation("p1-steps must be at least 1".into()));
        }
        Ok(())
    }

    fn game(&self) -> Result<GameConfig, Error> {
        GameConfig::new(self.lambda, self.phi.clone())
    }

    fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            tolerances: SolverTolerances {
                gap: self.tol,
                feasibility: (self.tol / 10.0).min(SolverTolerances::default().feasibility),
                ..SolverTolerances::default()
            },
            full_enumeration: self.full_sign_enumeration,
        }
    }

    fn budget(&self) -> SearchBudget {
        SearchBudget::default().with_seed(self.seed)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    result: T,
}

fn to_json<T: Serialize>(rc: &RunConfig, result: T) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(&Envelope { config: rc, result })
        .map_err(|e| Error::Validation(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Produces the report text and whether the command succeeded.
fn execute(rc: &RunConfig, command: &Command) -> Result<(String, bool), Error> {
    rc.validate()?;
    let opts = rc.eval_options();
    match command {
        Command::MeasurePre => {
            let theta = resolve_channel(&rc.channel_uri)?;
            let cfg = rc.game()?;
            let r = evaluate_f(&theta, &cfg, &opts)?;
            Ok((to_json(rc, MeasurePreOutput::new(&r)?)?, true))
        }
        Command::MeasurePost => {
            let theta = resolve_channel(&rc.channel_uri)?;
            let b = post_processed_lower(&theta, &rc.game()?, &rc.budget())?;
            Ok((to_json(rc, MeasurePostOutput::from(b))?, true))
        }
        Command::Classify => {
            let theta = resolve_channel(&rc.channel_uri)?;
            let c = Classification::of(&theta, rc.tol);
            Ok((to_json(rc, c)?, true))
        }
        Command::Sweep { lambdas, p1_steps } => {
            let grid: Vec<f64> = if *p1_steps == 1 {
                vec![0.0]
            } else {
                (0..*p1_steps).map(|k| k as f64 / (*p1_steps - 1) as f64).collect()
            };
            let rows = mixture_sweep(lambdas, &grid, &rc.phi, &opts)?;
            match rc.format {
                Format::Csv => Ok((sweep_csv(&rows), true)),
                Format::Json => Ok((to_json(rc, rows)?, true)),
            }
        }
        Command::Game { trials } => {
            let theta = resolve_channel(&rc.channel_uri)?;
            let cfg = rc.game()?;
            let r = evaluate_f(&theta, &cfg, &opts)?;
            let ex = &r.extraction;
            let povm = optimal_protocol(&theta, &ex.phi_opt, &ex.rho_opt, &cfg)?;
            let t = monte_carlo_game(&theta, &ex.phi_opt, &ex.rho_opt, &povm, &cfg, *trials, rc.seed)?;
            Ok((to_json(rc, GameOutput::new(&r, t))?, true))
        }
        Command::Counterexample => {
            let c = swap_counterexample(&rc.budget())?;
            let (theta, swapped, cfg) = swap_counterexample_instance();
            let before = evaluate_f(&theta, &cfg, &opts)?.value;
            let after = evaluate_f(&swapped, &cfg, &opts)?.value;
            Ok((to_json(rc, CounterexampleOutput::new(c, before, after))?, true))
        }
        Command::Verify { samples } => {
            let checks = dyncoh::verify::run_suite(rc.seed, *samples, &opts)?;
            let out = VerifyOutput::new(checks);
            let ok = out.all_passed;
            Ok((to_json(rc, out)?, ok))
        }
    }
}

fn emit(rc: &RunConfig, text: &str) -> Result<(), Error> {
    match &rc.output_path {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Validation(format!("writing {path}: {e}"))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Validation(format!("writing output: {e}"))),
    }
}

fn diagnostic(kind: &str, code: u8, message: &str) {
    let line = serde_json::json!({ "error": kind, "exit_code": code, "message": message });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            diagnostic("parse", 1, first);
            return ExitCode::from(1);
        }
    };
    let rc = RunConfig::resolve(&cli);
    let outcome = dyncoh::with_threads(rc.threads.max(1), || execute(&rc, &cli.command));
    match outcome.and_then(|(text, ok)| emit(&rc, &text).map(|_| ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            diagnostic("verify", EXIT_VERIFY_FAILED, "one or more properties failed");
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
        Err(e) => {
            let code = e.exit_code() as u8;
            diagnostic(e.kind(), code, &e.to_string());
            ExitCode::from(code)
        }
    }
}
