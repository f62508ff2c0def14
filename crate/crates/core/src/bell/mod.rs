//! Bell-inequality evaluation on photon-number sector ensembles.

mod bipartite;
mod correlation;
mod critical;
mod mermin;
pub mod patterns;

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::fock::PolarizationSetting;

pub use bipartite::{
    asymptotic_bound, block_average, block_average_from, ch_lhs, chsh_lhs, pair_correlation,
    per_sector_ch, per_sector_chsh, vacuum_term_chsh, BipartiteModel, BlockGain,
};
pub use correlation::JointDistribution;
pub use critical::{
    bisect, critical_efficiency, critical_efficiency_chsh, critical_efficiency_mermin,
    critical_noise, gamma_threshold, gamma_threshold_on, noise_threshold, Critical, GammaThreshold,
    NoiseModels, NoiseThreshold, DEFAULT_TOLERANCE, GAMMA_SCAN_MAX, SCAN_STEP,
};
pub use mermin::{mermin_lhs, TripartiteModel, MERMIN_TERMS};

pub const CHSH_BOUND: f64 = 2.0;
pub const MERMIN_BOUND: f64 = 2.0;
/// Classical window of the CH expression.
pub const CH_WINDOW: (f64, f64) = (-1.0, 0.0);

/// Two analyzer settings per observer.
///
/// With `complementary_second` set, observer 2 reads its analyzer with the
/// output ports exchanged. For the singlet-like sectors this turns the
/// anticorrelation of photon counts into correlation, so the vacuum and
/// non-vacuum parts of every expression carry the same sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettingsQuad {
    pub theta: PolarizationSetting,
    pub theta_prime: PolarizationSetting,
    pub phi: PolarizationSetting,
    pub phi_prime: PolarizationSetting,
    pub complementary_second: bool,
}

impl Default for SettingsQuad {
    fn default() -> Self {
        Self {
            theta: PolarizationSetting::rotation(0.0),
            theta_prime: PolarizationSetting::rotation(FRAC_PI_4),
            phi: PolarizationSetting::rotation(FRAC_PI_8),
            phi_prime: PolarizationSetting::rotation(-FRAC_PI_8),
            complementary_second: true,
        }
    }
}

impl SettingsQuad {
    pub fn from_angles(theta: f64, theta_prime: f64, phi: f64, phi_prime: f64) -> Self {
        Self {
            theta: PolarizationSetting::rotation(theta),
            theta_prime: PolarizationSetting::rotation(theta_prime),
            phi: PolarizationSetting::rotation(phi),
            phi_prime: PolarizationSetting::rotation(phi_prime),
            ..Self::default()
        }
    }

    fn second(&self, s: PolarizationSetting) -> PolarizationSetting {
        if self.complementary_second {
            s.complementary()
        } else {
            s
        }
    }

    /// Physical analyzer settings for `(theta, phi), (theta, phi'), (theta', phi), (theta', phi')`.
    pub fn pairs(&self) -> [[PolarizationSetting; 2]; 4] {
        [
            [self.theta, self.second(self.phi)],
            [self.theta, self.second(self.phi_prime)],
            [self.theta_prime, self.second(self.phi)],
            [self.theta_prime, self.second(self.phi_prime)],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inequality {
    Chsh,
    Ch,
    Mermin,
}

impl Inequality {
    pub fn name(self) -> &'static str {
        match self {
            Inequality::Chsh => "chsh",
            Inequality::Ch => "ch",
            Inequality::Mermin => "mermin",
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chsh" => Ok(Inequality::Chsh),
            "ch" => Ok(Inequality::Ch),
            "mermin" => Ok(Inequality::Mermin),
            other => Err(Error::Config(format!("unknown inequality '{other}'"))),
        }
    }
}

/// One sector's share of an inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorTerm {
    /// Per-beam photon total of the sector.
    pub n: usize,
    pub weight: f64,
    /// Expression evaluated on the normalized sector.
    pub value: f64,
    /// `weight * value`
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub inequality: Inequality,
    /// Value compared against the classical bound (absolute value where the
    /// inequality has one).
    pub lhs: f64,
    /// Expression before any absolute value.
    pub signed: f64,
    /// Contribution of the all-vacuum sector.
    pub vacuum_term: f64,
    pub per_sector: Vec<SectorTerm>,
    pub cutoff: usize,
    pub eta: f64,
    pub q: f64,
    pub gamma: Option<f64>,
    /// Probability mass outside the evaluated sectors.
    pub tail: f64,
}

impl InequalityReport {
    pub fn violated(&self) -> bool {
        match self.inequality {
            Inequality::Chsh => self.lhs > CHSH_BOUND,
            Inequality::Mermin => self.lhs > MERMIN_BOUND,
            Inequality::Ch => self.lhs > CH_WINDOW.1 || self.lhs < CH_WINDOW.0,
        }
    }

    pub fn non_vacuum(&self) -> f64 {
        self.signed - self.vacuum_term
    }
}

fn assemble(
    inequality: Inequality,
    terms: Vec<SectorTerm>,
    vacuum_present: bool,
    cutoff: usize,
    eta: f64,
    tail: f64,
) -> InequalityReport {
    let signed: f64 = terms.iter().map(|t| t.contribution).sum();
    let vacuum_term = if vacuum_present {
        terms.iter().find(|t| t.n == 0).map_or(0.0, |t| t.contribution)
    } else {
        0.0
    };
    let lhs = match inequality {
        Inequality::Ch => signed,
        Inequality::Chsh | Inequality::Mermin => signed.abs(),
    };
    InequalityReport {
        inequality,
        lhs,
        signed,
        vacuum_term,
        per_sector: terms,
        cutoff,
        eta,
        q: 1.0,
        gamma: None,
        tail,
    }
}
