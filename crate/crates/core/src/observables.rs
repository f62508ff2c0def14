//! Stokes-like observables as value maps on photon-number outcomes.
//!
//! All observables here are diagonal in the analyzer's Fock basis, so each is
//! fully described by the value it assigns to an outcome `(j, k)`: `j` photons
//! in the analyzer's first port, `k` in the second.

use std::fmt;
use std::str::FromStr;

use crate::error::{contract, Error, Result};
use crate::fock::{build_transform, ModeSplit, PolarizationSetting};
use crate::states::SectorAmplitudes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableKind {
    /// `j - k`
    Standard,
    /// `(j - k)/(j + k)`, zero on vacuum.
    Normalized,
    /// Normalized, but `-1` on vacuum.
    NormalizedMinus,
    /// `sign(j - k)`
    Sign,
    /// `sign(j - k)`, but `-1` on vacuum.
    SignMinus,
    /// `j/(j + k)`, zero on vacuum.
    Rate,
    /// `1` if `j > k`, else `0`.
    Projector,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 7] = [
        ObservableKind::Standard,
        ObservableKind::Normalized,
        ObservableKind::NormalizedMinus,
        ObservableKind::Sign,
        ObservableKind::SignMinus,
        ObservableKind::Rate,
        ObservableKind::Projector,
    ];

    /// Variant with the vacuum outcome reassigned to `-1`, where one exists.
    pub fn vacuum_subtracted(self) -> Self {
        match self {
            ObservableKind::Sign => ObservableKind::SignMinus,
            ObservableKind::Normalized => ObservableKind::NormalizedMinus,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObservableKind::Standard => "standard",
            ObservableKind::Normalized => "normalized",
            ObservableKind::NormalizedMinus => "normalized-minus",
            ObservableKind::Sign => "sign",
            ObservableKind::SignMinus => "sign-minus",
            ObservableKind::Rate => "rate",
            ObservableKind::Projector => "projector",
        }
    }

    /// Inclusive value range over outcomes with at most `n_max` photons.
    pub fn value_range(self, n_max: usize) -> (f64, f64) {
        match self {
            ObservableKind::Standard => (-(n_max as f64), n_max as f64),
            ObservableKind::Rate | ObservableKind::Projector => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObservableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('_', "-");
        ObservableKind::ALL
            .into_iter()
            .find(|k| k.name() == normalized)
            .ok_or_else(|| Error::Config(format!("unknown observable kind '{s}'")))
    }
}

fn sign_of(j: usize, k: usize) -> f64 {
    match j.cmp(&k) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

/// Value assigned to outcome `split`.
pub fn outcome_value(kind: ObservableKind, split: ModeSplit) -> f64 {
    let ModeSplit { j, k } = split;
    let n = j + k;
    match kind {
        ObservableKind::Standard => j as f64 - k as f64,
        ObservableKind::Normalized if n == 0 => 0.0,
        ObservableKind::NormalizedMinus if n == 0 => -1.0,
        ObservableKind::Normalized | ObservableKind::NormalizedMinus => {
            (j as f64 - k as f64) / n as f64
        }
        ObservableKind::Sign => sign_of(j, k),
        ObservableKind::SignMinus if n == 0 => -1.0,
        ObservableKind::SignMinus => sign_of(j, k),
        ObservableKind::Rate if n == 0 => 0.0,
        ObservableKind::Rate => j as f64 / n as f64,
        ObservableKind::Projector => {
            if j > k {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// `<O>` on one beam of a sector, measured in basis `setting`.
pub fn expectation(
    sector: &SectorAmplitudes,
    beam: usize,
    setting: PolarizationSetting,
    kind: ObservableKind,
) -> Result<f64> {
    if beam >= sector.beams() {
        return contract(format!("beam {beam} out of range for {} beams", sector.beams()));
    }
    let n = sector.totals()[beam];
    let rotated = sector.rotate_beam(beam, &build_transform(n, setting))?;
    let dims = rotated.dims();
    let inner: usize = dims[beam + 1..].iter().product();
    let dim = dims[beam];
    let mut value = 0.0;
    for (idx, amp) in rotated.amplitudes().iter().enumerate() {
        let j = (idx / inner) % dim;
        value += amp.norm_sqr() * outcome_value(kind, ModeSplit::new(j, n - j));
    }
    Ok(value)
}

/// `(<O_1>, <O_2>, <O_3>)` over the D/A, R/L and H/V bases of a single beam.
pub fn stokes_vector(sector: &SectorAmplitudes, kind: ObservableKind) -> Result<[f64; 3]> {
    if sector.beams() != 1 {
        return contract(format!("Stokes vector needs one beam, got {}", sector.beams()));
    }
    let mut out = [0.0; 3];
    for (slot, basis) in out.iter_mut().zip(1..=3) {
        let setting = PolarizationSetting::canonical(basis).expect("bases 1..=3 exist");
        *slot = expectation(sector, 0, setting, kind)?;
    }
    Ok(out)
}

pub fn stokes_vector_norm(sector: &SectorAmplitudes, kind: ObservableKind) -> Result<f64> {
    let v = stokes_vector(sector, kind)?;
    Ok(v.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// A single-beam state physically rotated by `angle` in the polarization plane.
pub fn rotate_state(sector: &SectorAmplitudes, angle: f64) -> Result<SectorAmplitudes> {
    if sector.beams() != 1 {
        return contract("state rotation is defined for single-beam sectors");
    }
    let n = sector.totals()[0];
    // rotating the state by +angle is re-expressing it in the basis rotated by -angle
    sector.rotate_beam(0, &build_transform(n, PolarizationSetting::rotation(-angle)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bsv_sector, fock_product_state};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_8;

    #[test]
    fn named_values() {
        use ObservableKind::*;
        assert_eq!(outcome_value(Sign, ModeSplit::new(3, 0)), 1.0);
        assert_eq!(outcome_value(SignMinus, ModeSplit::new(0, 0)), -1.0);
        assert_eq!(outcome_value(Sign, ModeSplit::new(0, 0)), 0.0);
        assert_eq!(outcome_value(Sign, ModeSplit::new(2, 2)), 0.0);
        assert!((outcome_value(Normalized, ModeSplit::new(2, 1)) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(outcome_value(Projector, ModeSplit::new(1, 1)), 0.0);
        assert_eq!(outcome_value(Rate, ModeSplit::new(0, 0)), 0.0);
        assert_eq!(outcome_value(NormalizedMinus, ModeSplit::new(0, 0)), -1.0);
        assert_eq!(outcome_value(Standard, ModeSplit::new(1, 4)), -3.0);
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("sign".parse::<ObservableKind>().unwrap(), ObservableKind::Sign);
        assert_eq!("sign_minus".parse::<ObservableKind>().unwrap(), ObservableKind::SignMinus);
        assert!("bogus".parse::<ObservableKind>().is_err());
    }

    #[test]
    fn sign_on_horizontal_fock_state() {
        let s = fock_product_state(3, 0);
        let hv = expectation(&s, 0, PolarizationSetting::RECTILINEAR, ObservableKind::Sign).unwrap();
        assert!((hv - 1.0).abs() < 1e-14);
        let da = expectation(&s, 0, PolarizationSetting::DIAGONAL, ObservableKind::Sign).unwrap();
        assert!(da.abs() < 1e-14);
    }

    #[test]
    fn vacuum_normalized_is_zero() {
        let v = SectorAmplitudes::vacuum(1);
        for b in 1..=3 {
            let s = PolarizationSetting::canonical(b).unwrap();
            assert_eq!(expectation(&v, 0, s, ObservableKind::Normalized).unwrap(), 0.0);
        }
    }

    #[test]
    fn norm_counterexample() {
        let s = fock_product_state(3, 0);
        let n0 = stokes_vector_norm(&s, ObservableKind::Sign).unwrap();
        assert!((n0 - 1.0).abs() < 1e-13);
        let rotated = rotate_state(&s, FRAC_PI_8).unwrap();
        assert!(stokes_vector_norm(&rotated, ObservableKind::Sign).unwrap() > 1.0 + 1e-3);
    }

    #[test]
    fn stokes_vector_rejects_two_beams() {
        assert!(stokes_vector(&bsv_sector(1), ObservableKind::Sign).is_err());
    }

    #[test]
    fn single_photon_kinds_coincide() {
        let s = fock_product_state(1, 0);
        for theta in [0.0, 0.2, 0.9, -1.3] {
            for phi in [0.0, 0.4, 2.0] {
                let setting = PolarizationSetting::new(theta, phi).unwrap();
                let a = expectation(&s, 0, setting, ObservableKind::Sign).unwrap();
                let b = expectation(&s, 0, setting, ObservableKind::Normalized).unwrap();
                let c = expectation(&s, 0, setting, ObservableKind::Standard).unwrap();
                assert!((a - b).abs() < 1e-14 && (a - c).abs() < 1e-14);
                assert!((a - (2.0 * theta).cos()).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn value_ranges(j in 0usize..=150, k in 0usize..=150) {
            let split = ModeSplit::new(j, k);
            for kind in ObservableKind::ALL {
                let (lo, hi) = kind.value_range(300);
                let v = outcome_value(kind, split);
                prop_assert!(v >= lo && v <= hi, "{kind} at ({j},{k}) = {v}");
            }
            let sign = outcome_value(ObservableKind::Sign, split);
            prop_assert!(sign == -1.0 || sign == 0.0 || sign == 1.0);
            let proj = outcome_value(ObservableKind::Projector, split);
            prop_assert!(proj == 0.0 || proj == 1.0);
        }

        #[test]
        fn antisymmetry(j in 0usize..=150, k in 0usize..=150) {
            let a = ModeSplit::new(j, k);
            let b = ModeSplit::new(k, j);
            prop_assert_eq!(outcome_value(ObservableKind::Sign, a), -outcome_value(ObservableKind::Sign, b));
            prop_assert_eq!(
                outcome_value(ObservableKind::Normalized, a),
                -outcome_value(ObservableKind::Normalized, b)
            );
        }
    }
}
