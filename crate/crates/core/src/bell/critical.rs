//! Critical efficiency, critical noise, and threshold gain.
//!
//! Sign and normalized kinds are evaluated in their vacuum-subtracted form
//! throughout this module.

use super::bipartite::BipartiteModel;
use super::mermin::TripartiteModel;
use super::{Inequality, SettingsQuad, CHSH_BOUND, MERMIN_BOUND};
use crate::channels::noise_mixture_lhs;
use crate::error::{contract, Result};
use crate::observables::ObservableKind;
use crate::states::{bghz_coefficients, bsv_weights, BellKind};

pub const DEFAULT_TOLERANCE: f64 = 1e-4;
/// Coarse pre-scan step in gain or efficiency.
pub const SCAN_STEP: f64 = 0.05;
/// Upper end of the gain scan for threshold searches.
pub const GAMMA_SCAN_MAX: f64 = 5.0;

/// Root of `margin` between `violated` (margin > 0) and `held` (margin <= 0).
///
/// Returns the midpoint of the final bracket, which is narrower than `tol`.
pub fn bisect<F>(mut margin: F, violated: f64, held: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return contract(format!("tolerance must be positive, got {tol}"));
    }
    if !(margin(violated)? > 0.0) || margin(held)? > 0.0 {
        return contract("bisection interval does not bracket the bound");
    }
    let (mut good, mut bad) = (violated, held);
    while (good - bad).abs() > tol {
        let mid = 0.5 * (good + bad);
        if margin(mid)? > 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(0.5 * (good + bad))
}

/// A critical parameter, or the marker that the bound is never exceeded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Critical {
    At(f64),
    NotViolated,
}

impl Critical {
    pub fn value(self) -> Option<f64> {
        match self {
            Critical::At(v) => Some(v),
            Critical::NotViolated => None,
        }
    }

    /// Value with the no-violation marker replaced by `worst`.
    pub fn or(self, worst: f64) -> f64 {
        self.value().unwrap_or(worst)
    }
}

fn bound_margin(inequality: Inequality, signed: f64) -> f64 {
    match inequality {
        Inequality::Chsh => signed.abs() - CHSH_BOUND,
        Inequality::Mermin => signed.abs() - MERMIN_BOUND,
        Inequality::Ch => signed - super::CH_WINDOW.1,
    }
}

/// Scans `eta` down from 1 in [`SCAN_STEP`] strides, then bisects.
fn efficiency_root<F>(mut margin: F, tol: f64) -> Result<Critical>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(margin(1.0)? > 0.0) {
        return Ok(Critical::NotViolated);
    }
    let mut upper = 1.0;
    loop {
        let lower = (upper - SCAN_STEP).max(0.0);
        if margin(lower)? <= 0.0 {
            return bisect(&mut margin, upper, lower, tol).map(Critical::At);
        }
        if lower == 0.0 {
            return Ok(Critical::At(0.0));
        }
        upper = lower;
    }
}

/// Critical efficiency of the CHSH expression on a prepared squeezed-vacuum model.
pub fn critical_efficiency_chsh(
    model: &BipartiteModel,
    gamma: f64,
    kind: ObservableKind,
    tol: f64,
) -> Result<Critical> {
    let kind = kind.vacuum_subtracted();
    let weights = bsv_weights(gamma, model.len() - 1)?.weights;
    efficiency_root(
        |eta| {
            let values = model.chsh_values(&model.table(kind, eta)?)?;
            let signed: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
            Ok(bound_margin(Inequality::Chsh, signed))
        },
        tol,
    )
}

/// Critical efficiency of the Mermin expression on a prepared GHZ model.
pub fn critical_efficiency_mermin(model: &TripartiteModel, kind: ObservableKind, tol: f64) -> Result<Critical> {
    let kind = kind.vacuum_subtracted();
    efficiency_root(
        |eta| Ok(bound_margin(Inequality::Mermin, model.report(&model.table(kind, eta)?)?.signed)),
        tol,
    )
}

/// Detector efficiency below which `inequality` is no longer violated at `gamma`.
///
/// `cutoff` is the pair cutoff of the squeezed vacuum (CHSH) or the triple
/// cutoff of the GHZ expansion (Mermin).
pub fn critical_efficiency(
    gamma: f64,
    inequality: Inequality,
    kind: ObservableKind,
    cutoff: usize,
    tol: f64,
) -> Result<Critical> {
    match inequality {
        Inequality::Chsh => {
            let model = BipartiteModel::bsv(cutoff, SettingsQuad::default())?;
            critical_efficiency_chsh(&model, gamma, kind, tol)
        }
        Inequality::Mermin => {
            let model = TripartiteModel::bghz(&bghz_coefficients(gamma, cutoff)?)?;
            critical_efficiency_mermin(&model, kind, tol)
        }
        Inequality::Ch => contract("critical efficiency is defined for CHSH and Mermin"),
    }
}

/// The four Bell-family squeezed states, sharing cutoff and settings.
#[derive(Debug, Clone)]
pub struct NoiseModels {
    models: Vec<(BellKind, BipartiteModel)>,
}

impl NoiseModels {
    pub fn new(cutoff: usize, quad: SettingsQuad) -> Result<Self> {
        let models = BellKind::ALL
            .into_iter()
            .map(|k| Ok((k, BipartiteModel::bell_family(k, cutoff, quad)?)))
            .collect::<Result<_>>()?;
        Ok(Self { models })
    }

    fn signed(model: &BipartiteModel, gamma: f64, kind: ObservableKind) -> Result<f64> {
        let weights = bsv_weights(gamma, model.len() - 1)?.weights;
        let values = model.chsh_values(&model.table(kind.vacuum_subtracted(), 1.0)?)?;
        Ok(values.iter().zip(&weights).map(|(v, w)| v * w).sum())
    }

    /// Signed CHSH expression on one family member.
    pub fn family_lhs(&self, member: BellKind, gamma: f64, kind: ObservableKind) -> Result<f64> {
        let (_, model) = self.models.iter().find(|(k, _)| *k == member).expect("all kinds present");
        Self::signed(model, gamma, kind)
    }

    /// Signed CHSH expression on the squeezed singlet.
    pub fn signal(&self, gamma: f64, kind: ObservableKind) -> Result<f64> {
        self.family_lhs(BellKind::PsiMinus, gamma, kind)
    }

    /// Equal-weight average of the four family members.
    pub fn noise(&self, gamma: f64, kind: ObservableKind) -> Result<f64> {
        let total = self
            .models
            .iter()
            .map(|(_, m)| Self::signed(m, gamma, kind))
            .sum::<Result<f64>>()?;
        Ok(total / self.models.len() as f64)
    }

    /// Critical signal fraction; the noise states may sit at a different gain.
    pub fn threshold(&self, gamma: f64, noise_gamma: f64, kind: ObservableKind) -> Result<NoiseThreshold> {
        noise_threshold(self.signal(gamma, kind)?, self.noise(noise_gamma, kind)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseThreshold {
    /// Violation iff the signal fraction exceeds this.
    pub q_c: Critical,
    pub signal: f64,
    pub noise: f64,
    /// Mixture expression evaluated at `q_c`.
    pub mixture_at_qc: Option<f64>,
}

/// `q_c = (2 - noise) / (signal - noise)` on signed CHSH values, clamped to `[0, 1]`.
pub fn noise_threshold(signal: f64, noise: f64) -> Result<NoiseThreshold> {
    if signal < CHSH_BOUND {
        return Ok(NoiseThreshold { q_c: Critical::NotViolated, signal, noise, mixture_at_qc: None });
    }
    let q = if noise >= CHSH_BOUND {
        0.0
    } else {
        ((CHSH_BOUND - noise) / (signal - noise)).clamp(0.0, 1.0)
    };
    Ok(NoiseThreshold {
        q_c: Critical::At(q),
        signal,
        noise,
        mixture_at_qc: Some(noise_mixture_lhs(signal, noise, q)?),
    })
}

/// Critical signal fraction for the squeezed singlet mixed with the four-state noise at equal gain.
pub fn critical_noise(
    gamma: f64,
    quad: SettingsQuad,
    kind: ObservableKind,
    cutoff: usize,
) -> Result<NoiseThreshold> {
    NoiseModels::new(cutoff, quad)?.threshold(gamma, gamma, kind)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaThreshold {
    /// First gain at which the bound stops being exceeded; `None` if the scan
    /// never leaves the violation region.
    pub gamma: Option<f64>,
    pub cutoff: usize,
    pub scan_max: f64,
}

/// Scans the gain upward from [`SCAN_STEP`] and bisects the first crossing.
pub fn gamma_threshold_on(
    model: &BipartiteModel,
    kind: ObservableKind,
    inequality: Inequality,
    tol: f64,
) -> Result<GammaThreshold> {
    let kind = kind.vacuum_subtracted();
    let table = model.table(kind, 1.0)?;
    let values = match inequality {
        Inequality::Chsh => model.chsh_values(&table)?,
        Inequality::Ch => model.ch_values(&table)?,
        Inequality::Mermin => return contract("gain threshold is defined for CHSH and CH"),
    };
    let cutoff = model.len() - 1;
    let margin = |gamma: f64| -> Result<f64> {
        let w = bsv_weights(gamma, cutoff)?.weights;
        Ok(bound_margin(inequality, values.iter().zip(&w).map(|(v, w)| v * w).sum()))
    };
    if !(margin(SCAN_STEP)? > 0.0) {
        return contract(format!("{inequality} not violated at gain {SCAN_STEP}"));
    }
    let steps = (GAMMA_SCAN_MAX / SCAN_STEP).round() as usize;
    for i in 1..steps {
        let (lo, hi) = (i as f64 * SCAN_STEP, (i + 1) as f64 * SCAN_STEP);
        if margin(hi)? <= 0.0 {
            let gamma = bisect(margin, lo, hi, tol)?;
            return Ok(GammaThreshold { gamma: Some(gamma), cutoff, scan_max: GAMMA_SCAN_MAX });
        }
    }
    Ok(GammaThreshold { gamma: None, cutoff, scan_max: GAMMA_SCAN_MAX })
}

/// Threshold gain of the squeezed vacuum at the default settings.
pub fn gamma_threshold(
    kind: ObservableKind,
    inequality: Inequality,
    cutoff: usize,
    tol: f64,
) -> Result<GammaThreshold> {
    let model = BipartiteModel::bsv(cutoff, SettingsQuad::default())?;
    gamma_threshold_on(&model, kind, inequality, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_linear() {
        let r = bisect(|x| Ok(0.3 - x), 0.0, 1.0, 1e-9).unwrap();
        assert!((r - 0.3).abs() < 1e-9);
        assert!(bisect(Ok, 0.0, 1.0, 1e-9).is_err());
        assert!(bisect(|x| Ok(0.3 - x), 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn noise_threshold_edges() {
        let t = noise_threshold(2.0, 0.5).unwrap();
        assert_eq!(t.q_c, Critical::At(1.0));
        assert_eq!(noise_threshold(1.9, 0.5).unwrap().q_c, Critical::NotViolated);
        let t = noise_threshold(2.4, 0.4).unwrap();
        assert!((t.q_c.or(1.0) - 0.8).abs() < 1e-15);
        assert!((t.mixture_at_qc.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_dominated_efficiency() {
        // small gain: the singlet sector carries the violation
        let c = critical_efficiency(0.2, Inequality::Chsh, ObservableKind::Sign, 20, 1e-5).unwrap();
        let eta = c.value().unwrap();
        assert!(eta > 0.5 && eta < 1.0, "{eta}");
        assert!(critical_efficiency(0.2, Inequality::Ch, ObservableKind::Rate, 20, 1e-5).is_err());
    }

    #[test]
    fn normalized_threshold_is_cutoff_free() {
        let t = gamma_threshold(ObservableKind::Normalized, Inequality::Chsh, 30, 1e-6).unwrap();
        assert!((t.gamma.unwrap() - 0.8866).abs() < 2e-3);
    }
}
