use crate::error::{CliError, CliResult};
use biharm::ibvp::{build_forcing_config, ForcingConfig, SolveParams, MIN_NT, MIN_NX};
use biharm::profiles::Profile;
use biharm::propagator::GridSpec;
use clap::{Parser, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Solve,
    Verify,
    Bench,
}

/// Forcing-operator solver for i u_t − u_xxxx + λ|u|²u = 0 on the half-line.
#[derive(Debug, Clone, Parser)]
#[command(name = "biharm", version)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Mode::Solve)]
    pub mode: Mode,
    /// Sobolev regularity s ∈ [0, 1/2)
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Bourgain exponent b < 1/2
    #[arg(long, default_value_t = 0.45)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 1.0 / 3.0, allow_negative_numbers = true)]
    pub lambda2: f64,
    /// coefficient of the cubic term
    #[arg(long = "lambda-nl", default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda_nl: f64,
    /// spatial samples on [−L, L) (power of two)
    #[arg(long, default_value_t = 512)]
    pub nx: usize,
    /// time samples on [0, T]
    #[arg(long, default_value_t = 257)]
    pub nt: usize,
    /// half-width of the spatial box
    #[arg(long = "L", default_value_t = 20.0)]
    pub half_width: f64,
    /// time horizon
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    /// named analytic data set
    #[arg(long, default_value = "gaussian-pulse")]
    pub profile: String,
    /// multiplier applied to the profile data
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub amplitude: f64,
    /// directory holding f.csv, g.csv and u0.csv (columns t, x, re, im); overrides the profile
    #[arg(long = "data-dir")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// stopping tolerance of the fixed-point iteration
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iters", default_value_t = 40)]
    pub max_iters: usize,
    /// members per ratio-suite ensemble in verify mode
    #[arg(long, default_value_t = 4)]
    pub ensemble: usize,
}

/// Validated run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub s: f64,
    pub b: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_nl: f64,
    pub nx: usize,
    pub nt: usize,
    pub half_width: f64,
    pub horizon: f64,
    pub profile: String,
    pub amplitude: f64,
    pub data_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub tol: f64,
    pub max_iters: usize,
    pub ensemble: usize,
}

impl RunConfig {
    /// Checks every solver invariant before any computation.
    pub fn from_cli(cli: &Cli) -> CliResult<Self> {
        let cfg = Self {
            mode: cli.mode,
            s: cli.s,
            b: cli.b,
            lambda1: cli.lambda1,
            lambda2: cli.lambda2,
            lambda_nl: cli.lambda_nl,
            nx: cli.nx,
            nt: cli.nt,
            half_width: cli.half_width,
            horizon: cli.horizon,
            profile: cli.profile.clone(),
            amplitude: cli.amplitude,
            data_dir: cli.data_dir.clone(),
            out: cli.out.clone(),
            seed: cli.seed,
            tol: cli.tol,
            max_iters: cli.max_iters,
            ensemble: cli.ensemble,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.grid()?;
        if self.nt < MIN_NT || self.nx < MIN_NX {
            return Err(CliError::Config(format!("grid too coarse: need nt ≥ {MIN_NT} and nx ≥ {MIN_NX}")));
        }
        self.params().validate()?;
        self.forcing_config()?;
        self.profile()?;
        if !self.amplitude.is_finite() {
            return Err(CliError::Config("amplitude must be finite".into()));
        }
        if self.ensemble == 0 {
            return Err(CliError::Config("ensemble size must be positive".into()));
        }
        if let Some(dir) = &self.data_dir {
            if !dir.is_dir() {
                return Err(CliError::Config(format!("data directory {} does not exist", dir.display())));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<GridSpec> {
        Ok(GridSpec::new(self.half_width, self.nx, self.horizon, self.nt)?)
    }

    pub fn params(&self) -> SolveParams {
        SolveParams {
            s: self.s,
            b: self.b,
            lambda_nl: self.lambda_nl,
            max_iters: self.max_iters,
            tol: self.tol,
            ..SolveParams::default()
        }
    }

    pub fn forcing_config(&self) -> CliResult<ForcingConfig> {
        Ok(build_forcing_config(self.lambda1, self.lambda2, self.s, self.b)?)
    }

    pub fn profile(&self) -> CliResult<Profile> {
        Ok(Profile::parse(&self.profile)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("biharm").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::from_cli(&parse(&[])).unwrap();
        assert_eq!((cfg.nx, cfg.nt, cfg.mode), (512, 257, Mode::Solve));
        assert!((cfg.lambda2 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invariant_violations() {
        let bad = [
            vec!["--nx", "500"],
            vec!["--nt", "4"],
            vec!["--s", "0.5"],
            vec!["--b", "0.6"],
            vec!["--lambda1", "0.2", "--lambda2", "0.2"],
            vec!["--lambda1", "-3.5"],
            vec!["--lambda2", "0.6"],
            vec!["--profile", "square"],
            vec!["--T", "0"],
            vec!["--ensemble", "0"],
        ];
        for args in bad {
            let err = RunConfig::from_cli(&parse(&args)).unwrap_err();
            assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG, "{args:?}: {err}");
        }
    }

    #[test]
    fn uppercase_flags_and_negative_orders() {
        let cli = parse(&["--L", "10", "--T", "0.5", "--lambda1", "-1", "--lambda-nl", "-2"]);
        assert_eq!((cli.half_width, cli.horizon, cli.lambda1, cli.lambda_nl), (10.0, 0.5, -1.0, -2.0));
    }
}
