//! Sweep drivers behind the command-line tool. Each command returns a
//! [`Table`] whose header echoes the resolved configuration.

mod commands;
mod table;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::bell::{Inequality, SettingsQuad};
use crate::error::{Error, Result};
use crate::observables::ObservableKind;

pub use commands::run;
pub use table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    ChshCurve,
    NonvacuumCurve,
    PerSector,
    BlockAverage,
    CriticalEfficiency,
    CriticalNoise,
    ChCurve,
    MerminCurve,
    NormDemo,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::ChshCurve,
        Command::NonvacuumCurve,
        Command::PerSector,
        Command::BlockAverage,
        Command::CriticalEfficiency,
        Command::CriticalNoise,
        Command::ChCurve,
        Command::MerminCurve,
        Command::NormDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::ChshCurve => "chsh-curve",
            Command::NonvacuumCurve => "nonvacuum-curve",
            Command::PerSector => "per-sector",
            Command::BlockAverage => "block-average",
            Command::CriticalEfficiency => "critical-efficiency",
            Command::CriticalNoise => "critical-noise",
            Command::ChCurve => "ch-curve",
            Command::MerminCurve => "mermin-curve",
            Command::NormDemo => "norm-demo",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

/// Sweep parameters as given by a config file or flags; unset fields take
/// per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub gamma_step: Option<f64>,
    pub cutoff: Option<usize>,
    /// Second cutoff of the non-vacuum comparison.
    pub cutoff_b: Option<usize>,
    pub eta: Option<f64>,
    pub q: Option<f64>,
    #[serde(default, deserialize_with = "de_kind")]
    pub kind: Option<ObservableKind>,
    #[serde(default, deserialize_with = "de_inequality")]
    pub inequality: Option<Inequality>,
    /// `[theta, theta', phi, phi']` in radians.
    pub settings: Option<[f64; 4]>,
    /// Gain of the white-noise states, when it differs from the signal.
    pub noise_gamma: Option<f64>,
    pub tolerance: Option<f64>,
    /// Number of period-8 blocks in the block-average table.
    pub blocks: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

fn de_kind<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<ObservableKind>, D::Error> {
    Option::<String>::deserialize(d)?
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .transpose()
}

fn de_inequality<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Inequality>, D::Error> {
    Option::<String>::deserialize(d)?
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .transpose()
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: SweepConfig) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { SweepConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            gamma_min, gamma_max, gamma_step, cutoff, cutoff_b, eta, q, kind, inequality, settings,
            noise_gamma, tolerance, blocks, out, jobs
        )
    }

    pub fn quad(&self) -> SettingsQuad {
        match self.settings {
            Some([a, b, c, d]) => SettingsQuad::from_angles(a, b, c, d),
            None => SettingsQuad::default(),
        }
    }
}

/// Inclusive grid `min, min + step, ...` up to `max` (within rounding).
pub fn gamma_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config(format!("gamma step must be positive, got {step}")));
    }
    if !(min >= 0.0) || !(max >= min) || !max.is_finite() {
        return Err(Error::Config(format!("need 0 <= gamma-min <= gamma-max, got {min}..{max}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min + i as f64 * step).collect())
}
