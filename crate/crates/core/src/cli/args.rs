use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::spec::{Grid, Output, Settings, SweepSpec};
use super::sweep::run_sweep;
use super::validate::validate;
use crate::error::Result;
use crate::information::FisherSource;
use crate::spectrum::DensityMode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "edho",
    version,
    about = "Energy-dependent harmonic oscillator: spectra, thermodynamics and information measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energies, λ, saturation limit and relative gap per level.
    Spectrum(SweepArgs),
    /// Z, U and Cv over the β grid.
    Thermo(SweepArgs),
    /// Fisher information: quadrature, closed form and literal form.
    Fisher(SweepArgs),
    /// Cramér-Rao product F·V.
    CramerRao(SweepArgs),
    /// Shannon entropy per level.
    Shannon(SweepArgs),
    /// Weighted densities on the x grid.
    Density(SweepArgs),
    /// Perey factor √f(x) on the x grid.
    Perey(SweepArgs),
    /// Several outputs in one run.
    Sweep {
        /// Comma-separated outputs; all of them by default.
        #[arg(long, value_delimiter = ',')]
        outputs: Option<Vec<Output>>,
        #[command(flatten)]
        args: SweepArgs,
    },
    /// Oracle checks over the grid; exits 1 if any fails.
    Validate(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Exponent of the energy dependence.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub nu: Option<u8>,
    /// Comma-separated couplings, e.g. --gamma=-0.5,-2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Option<Vec<f64>>,
    #[arg(long)]
    pub n_min: Option<u64>,
    #[arg(long)]
    pub n_max: Option<u64>,
    /// start:stop:count
    #[arg(long)]
    pub beta_grid: Option<Grid>,
    /// start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    pub x_grid: Option<Grid>,
    /// Relative gap below which the spectrum counts as saturated.
    #[arg(long)]
    pub eps_sat: Option<f64>,
    /// gamma-only (alias: paper) or nu-consistent.
    #[arg(long)]
    pub density_mode: Option<DensityMode>,
    /// numeric, closed or literal.
    #[arg(long)]
    pub fisher_source: Option<FisherSource>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Key-value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Accept gamma > 0.
    #[arg(long)]
    pub permissive: bool,
}

impl SweepArgs {
    fn settings(&self) -> Settings {
        Settings {
            nu: self.nu,
            gammas: self.gamma.clone(),
            n_min: self.n_min,
            n_max: self.n_max,
            beta_grid: self.beta_grid,
            x_grid: self.x_grid,
            outputs: None,
            eps_sat: self.eps_sat,
            density_mode: self.density_mode,
            fisher_source: self.fisher_source,
            permissive: self.permissive.then_some(true),
            out_dir: self.out.clone(),
        }
    }

    /// Merges flags over the config file, if any.
    pub fn resolve(&self, outputs: Option<Vec<Output>>) -> Result<SweepSpec> {
        let base = match &self.config {
            Some(path) => Settings::from_config_file(path)?,
            None => Settings::default(),
        };
        let mut flags = self.settings();
        flags.outputs = outputs;
        flags.over(base).resolve()
    }
}

fn single(output: Output) -> Option<Vec<Output>> {
    Some(vec![output])
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let (args, outputs, validating) = match cli.command {
        Command::Spectrum(a) => (a, single(Output::Spectrum), false),
        Command::Thermo(a) => (a, single(Output::Thermo), false),
        Command::Fisher(a) => (a, single(Output::Fisher), false),
        Command::CramerRao(a) => (a, single(Output::CramerRao), false),
        Command::Shannon(a) => (a, single(Output::Shannon), false),
        Command::Density(a) => (a, single(Output::Density), false),
        Command::Perey(a) => (a, single(Output::Perey), false),
        Command::Sweep { outputs, args } => (args, outputs, false),
        Command::Validate(a) => (a, None, true),
    };
    let spec = match args.resolve(outputs) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if validating {
        return match validate(&spec) {
            Ok(report) => {
                print!("{report}");
                if report.passed() {
                    EXIT_OK
                } else {
                    EXIT_FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILURE
            }
        };
    }
    match run_sweep(&spec) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.row_errors > 0 {
                eprintln!(
                    "warning: {} of {} rows failed; see the error column",
                    report.row_errors, report.rows
                );
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

/// Parses `argv` and runs it. Parse failures exit with 2 (help and
/// version with 0).
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> Cli {
        Cli::try_parse_from(argv).unwrap()
    }

    #[test]
    fn negative_gamma_lists() {
        let Command::Spectrum(a) =
            parse(&["edho", "spectrum", "--gamma", "-0.5,-2", "--nu", "2"]).command
        else {
            panic!()
        };
        assert_eq!(a.gamma, Some(vec![-0.5, -2.0]));
        let spec = a.resolve(single(Output::Spectrum)).unwrap();
        assert_eq!(spec.case.nu(), 2);
        let Command::Density(a) = parse(&["edho", "density", "--x-grid", "-4:4:9"]).command else {
            panic!()
        };
        assert_eq!(a.x_grid.unwrap().points()[0], -4.0);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_from(["edho", "spectrum", "--nu", "3"]), EXIT_USAGE);
        assert_eq!(
            run_from(["edho", "fisher", "--n-min", "4", "--n-max", "2"]),
            EXIT_USAGE
        );
        assert_eq!(run_from(["edho", "fisher", "--gamma", "0.5"]), EXIT_USAGE);
        assert_eq!(run_from(["edho", "nonsense"]), EXIT_USAGE);
        assert_eq!(
            run_from(["edho", "thermo", "--density-mode", "weird"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn mode_names() {
        let Command::Sweep { outputs, args } = parse(&[
            "edho",
            "sweep",
            "--outputs",
            "fisher,cramer-rao",
            "--density-mode",
            "paper",
            "--fisher-source",
            "closed",
        ])
        .command
        else {
            panic!()
        };
        assert_eq!(outputs.unwrap(), vec![Output::Fisher, Output::CramerRao]);
        assert_eq!(args.density_mode, Some(DensityMode::GammaOnly));
        assert_eq!(args.fisher_source, Some(FisherSource::Closed));
    }
}
