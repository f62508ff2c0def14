use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stokes_bell::bell::Inequality;
use stokes_bell::observables::ObservableKind;
use stokes_bell::reports::{run, Command, SweepConfig};

#[derive(Parser)]
#[command(name = "stokes-bell", version, about = "Bell-inequality sweeps for bright squeezed light")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// CHSH expression versus gain (sign and normalized observables)
    ChshCurve,
    /// Non-vacuum share of CHSH at two cutoffs, with its lower bound
    NonvacuumCurve,
    /// CHSH and CH on each photon-number sector
    PerSector,
    /// Period-8 block averages of per-sector CHSH at gains 1, 2, 3 and infinity
    BlockAverage,
    /// Critical detector efficiency versus gain
    CriticalEfficiency,
    /// Critical signal fraction under white noise versus gain
    CriticalNoise,
    /// CH expression versus gain (projector and rate observables)
    ChCurve,
    /// Mermin expression on the bright GHZ state versus gain
    MerminCurve,
    /// Sign-Stokes vector of |3,0> under rotation
    NormDemo,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::ChshCurve => Command::ChshCurve,
            Cmd::NonvacuumCurve => Command::NonvacuumCurve,
            Cmd::PerSector => Command::PerSector,
            Cmd::BlockAverage => Command::BlockAverage,
            Cmd::CriticalEfficiency => Command::CriticalEfficiency,
            Cmd::CriticalNoise => Command::CriticalNoise,
            Cmd::ChCurve => Command::ChCurve,
            Cmd::MerminCurve => Command::MerminCurve,
            Cmd::NormDemo => Command::NormDemo,
        }
    }
}

#[derive(Args)]
struct Flags {
    #[arg(long, global = true)]
    gamma_min: Option<f64>,
    #[arg(long, global = true)]
    gamma_max: Option<f64>,
    #[arg(long, global = true)]
    gamma_step: Option<f64>,
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Second cutoff for nonvacuum-curve
    #[arg(long, global = true)]
    cutoff_b: Option<usize>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    /// sign | normalized | projector | rate
    #[arg(long, global = true)]
    kind: Option<ObservableKind>,
    /// chsh | mermin (critical-efficiency)
    #[arg(long, global = true)]
    inequality: Option<Inequality>,
    /// theta,theta',phi,phi' in radians
    #[arg(long, global = true, value_parser = parse_settings, allow_hyphen_values = true)]
    settings: Option<[f64; 4]>,
    #[arg(long, global = true)]
    noise_gamma: Option<f64>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true)]
    blocks: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML file with the same keys (underscored); flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

fn parse_settings(text: &str) -> Result<[f64; 4], String> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    values.try_into().map_err(|v: Vec<f64>| format!("expected 4 comma-separated angles, got {}", v.len()))
}

impl Flags {
    fn into_config(self) -> SweepConfig {
        SweepConfig {
            gamma_min: self.gamma_min,
            gamma_max: self.gamma_max,
            gamma_step: self.gamma_step,
            cutoff: self.cutoff,
            cutoff_b: self.cutoff_b,
            eta: self.eta,
            q: self.q,
            kind: self.kind,
            inequality: self.inequality,
            settings: self.settings,
            noise_gamma: self.noise_gamma,
            tolerance: self.tolerance,
            blocks: self.blocks,
            out: self.out,
            jobs: self.jobs,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config_path = cli.flags.config.clone();
    let result = (|| {
        let base = match &config_path {
            Some(p) => SweepConfig::from_path(p)?,
            None => SweepConfig::default(),
        };
        let config = base.merged(cli.flags.into_config());
        let table = run(cli.command.into(), &config)?;
        match &config.out {
            Some(path) => table.write_path(path),
            None => {
                table.write_to(io::stdout().lock())?;
                io::stdout().flush().map_err(Into::into)
            }
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stokes-bell: {e}");
            ExitCode::FAILURE
        }
    }
}
