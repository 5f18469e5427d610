use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use weakbayes::mzi::MziState;
use weakbayes::probe::GaussianProbe;

use crate::error::CliError;

/// Weak values, their Bayes-like dual and a simulated Mach-Zehnder weak
/// measurement.
#[derive(Debug, Parser)]
#[command(name = "weakbayes", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form weak values, probabilities, Bayes decompositions, phases
    /// and uncertainty bounds for a state.
    Analytic {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the four experiments (glass in B or C, position or momentum
    /// readout) and write the summary.
    Simulate {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Directory for per-photon record CSVs, one file per experiment.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Compute every estimator, from a live run or a saved summary.
    Estimate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Consistency threshold in standard errors.
        #[arg(long, default_value_t = 3.0)]
        k: f64,
    },
    /// Reconstruct (β, γ) from the complex shifts.
    Tomography {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Repeat the pipeline over a list of couplings or photon counts.
    Sweep {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Couplings to sweep, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "n_list", required_unless_present = "n_list")]
        g_list: Vec<f64>,
        /// Photons per experiment to sweep, comma separated (1e5 style allowed).
        #[arg(long, value_delimiter = ',', value_parser = parse_count)]
        n_list: Vec<u64>,
    },
    /// Full pipeline on β = √(1/5), γ = −√(4/5) with acceptance checks.
    PaperExample {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Input amplitudes; defaults to β = √(1/5), γ = −√(4/5).
#[derive(Debug, Clone, Copy, Args)]
pub struct StateArgs {
    #[arg(long, default_value_t = 0.2f64.sqrt(), allow_negative_numbers = true)]
    pub beta_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta_im: f64,
    #[arg(long, default_value_t = -(0.8f64.sqrt()), allow_negative_numbers = true)]
    pub gamma_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma_im: f64,
}

/// Inputs whose norm² is off by more than this get a warning.
pub const NORM_WARN_TOL: f64 = 1e-6;

impl StateArgs {
    pub fn state(&self) -> Result<MziState<f64>, CliError> {
        let beta = Complex64::new(self.beta_re, self.beta_im);
        let gamma = Complex64::new(self.gamma_re, self.gamma_im);
        let n2 = beta.norm_sqr() + gamma.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(CliError::Usage("state amplitudes must be finite and not all zero".into()));
        }
        if (n2 - 1.0).abs() > NORM_WARN_TOL {
            eprintln!("warning: input state has norm² = {n2}; normalizing");
        }
        MziState::normalized(beta, gamma).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct RunArgs {
    /// Coupling (probe displacement per unit weak value).
    #[arg(long, default_value_t = 0.05)]
    pub g: f64,
    /// Probe position width.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Photons per experiment.
    #[arg(long, default_value = "1000000", value_parser = parse_count)]
    pub photons: u64,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Worker shards; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
}

impl RunArgs {
    pub fn probe(&self) -> Result<GaussianProbe, CliError> {
        GaussianProbe::new(self.sigma).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.g > 0.0) || !self.g.is_finite() {
            return Err(CliError::Usage(format!("--g must be positive, got {}", self.g)));
        }
        if self.photons < 2 {
            return Err(CliError::Usage("--photons must be at least 2".into()));
        }
        if self.shards == 0 {
            return Err(CliError::Usage("--shards must be at least 1".into()));
        }
        self.probe().map(|_| ())
    }
}

/// Either a saved summary or the parameters of a live run.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Summary JSON written by `simulate`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.trim().parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.trim().parse().map_err(|_| format!("not a count: {s:?}"))?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("not a non-negative integer: {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e5"), Ok(100_000));
        assert_eq!(parse_count("42"), Ok(42));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn state_is_normalized() {
        let s = StateArgs {
            beta_re: 1.0,
            beta_im: 0.0,
            gamma_re: 1.0,
            gamma_im: 0.0,
        };
        let st = s.state().unwrap();
        assert!((st.norm_sqr() - 1.0).abs() < 1e-15);
        let zero = StateArgs {
            beta_re: 0.0,
            beta_im: 0.0,
            gamma_re: 0.0,
            gamma_im: 0.0,
        };
        assert!(zero.state().is_err());
    }
}
