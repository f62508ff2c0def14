//! Photon-number sectors and their weights for the states under study.
//!
//! Every state used here is block diagonal in the per-beam photon totals, so
//! it is stored as a list of sectors, each carrying a complex amplitude tensor
//! over the per-beam splits `(j_1, ..., j_B)`, where `j_b` counts photons in the
//! first (`H`) mode of beam `b`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{contract, Error, Result};
use crate::fock::{PolarizationSetting, TransformMatrix};
use crate::ode;

/// Amplitude tensor of one sector with fixed per-beam photon totals.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorAmplitudes {
    totals: Vec<usize>,
    amps: Vec<Complex64>,
}

impl SectorAmplitudes {
    pub fn new(totals: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        if totals.is_empty() {
            return contract("a sector needs at least one beam");
        }
        let len: usize = totals.iter().map(|n| n + 1).product();
        if amps.len() != len {
            return contract(format!(
                "amplitude tensor has {} entries, totals {:?} need {len}",
                amps.len(),
                totals
            ));
        }
        Ok(Self { totals, amps })
    }

    pub fn zeros(totals: Vec<usize>) -> Self {
        let len = totals.iter().map(|n| n + 1).product();
        Self { totals, amps: vec![Complex64::new(0.0, 0.0); len] }
    }

    /// All beams empty.
    pub fn vacuum(beams: usize) -> Self {
        Self { totals: vec![0; beams], amps: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn beams(&self) -> usize {
        self.totals.len()
    }

    pub fn totals(&self) -> &[usize] {
        &self.totals
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dims(&self) -> Vec<usize> {
        self.totals.iter().map(|n| n + 1).collect()
    }

    pub fn is_vacuum(&self) -> bool {
        self.totals.iter().all(|&n| n == 0)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.totals.len()];
        for b in (0..self.totals.len().saturating_sub(1)).rev() {
            strides[b] = strides[b + 1] * (self.totals[b + 1] + 1);
        }
        strides
    }

    fn offset(&self, splits: &[usize]) -> usize {
        assert_eq!(splits.len(), self.totals.len(), "split arity does not match beams");
        splits
            .iter()
            .zip(self.strides())
            .zip(&self.totals)
            .map(|((&j, s), &n)| {
                assert!(j <= n, "split {j} exceeds beam total {n}");
                j * s
            })
            .sum()
    }

    pub fn get(&self, splits: &[usize]) -> Complex64 {
        self.amps[self.offset(splits)]
    }

    pub fn set(&mut self, splits: &[usize], value: Complex64) {
        let at = self.offset(splits);
        self.amps[at] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// Scales to unit norm and returns the previous squared norm.
    pub fn normalize(&mut self) -> f64 {
        let w = self.norm_sqr();
        if w > 0.0 {
            let scale = w.sqrt().recip();
            self.amps.iter_mut().for_each(|a| *a *= scale);
        }
        w
    }

    /// `<self|other>`; zero when the totals differ.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        if self.totals != other.totals {
            return Complex64::new(0.0, 0.0);
        }
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Non-zero entries as `(splits, amplitude)`.
    pub fn support(&self) -> Vec<(Vec<usize>, Complex64)> {
        let dims = self.dims();
        let mut out = Vec::new();
        let mut idx = vec![0usize; dims.len()];
        for &a in &self.amps {
            if a != Complex64::new(0.0, 0.0) {
                out.push((idx.clone(), a));
            }
            for b in (0..dims.len()).rev() {
                idx[b] += 1;
                if idx[b] < dims[b] {
                    break;
                }
                idx[b] = 0;
            }
        }
        out
    }

    /// Re-expresses one beam in another analyzer basis.
    pub fn rotate_beam(&self, beam: usize, transform: &TransformMatrix) -> Result<Self> {
        if beam >= self.beams() {
            return contract(format!("beam {beam} out of range for {} beams", self.beams()));
        }
        if transform.n() != self.totals[beam] {
            return contract(format!(
                "transform for {} photons applied to beam with {}",
                transform.n(),
                self.totals[beam]
            ));
        }
        let dim = self.totals[beam] + 1;
        let inner: usize = self.totals[beam + 1..].iter().map(|n| n + 1).product();
        let outer: usize = self.totals[..beam].iter().map(|n| n + 1).product();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for o in 0..outer {
            let base = o * dim * inner;
            for j_in in 0..dim {
                let src = &self.amps[base + j_in * inner..base + (j_in + 1) * inner];
                if src.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                    continue;
                }
                for j_out in 0..dim {
                    let m = transform.get(j_out, j_in);
                    let dst = &mut out[base + j_out * inner..base + (j_out + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += m * s;
                    }
                }
            }
        }
        Ok(Self { totals: self.totals.clone(), amps: out })
    }

    /// Rotates every beam to its own setting and returns outcome probabilities.
    ///
    /// The input is consumed entry by entry, so the cost scales with the number
    /// of non-zero amplitudes times the output size.
    pub fn joint_probabilities(&self, settings: &[PolarizationSetting]) -> Result<Vec<f64>> {
        if settings.len() != self.beams() {
            return contract(format!(
                "{} settings given for {} beams",
                settings.len(),
                self.beams()
            ));
        }
        let transforms: Vec<_> = settings
            .iter()
            .zip(&self.totals)
            .map(|(&s, &n)| crate::fock::build_transform(n, s))
            .collect();
        let dims = self.dims();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut partial: Vec<Vec<Complex64>> =
            dims.iter().scan(1usize, |acc, d| {
                *acc *= d;
                Some(vec![Complex64::new(0.0, 0.0); *acc])
            }).collect();
        for (splits, amp) in self.support() {
            // outer product of the image columns, built beam by beam
            partial[0]
                .iter_mut()
                .enumerate()
                .for_each(|(r, p)| *p = amp * transforms[0].get(r, splits[0]));
            for b in 1..dims.len() {
                let (prev, cur) = partial.split_at_mut(b);
                let prev = &prev[b - 1];
                let cur = &mut cur[0];
                let t = &transforms[b];
                for (pi, pv) in prev.iter().enumerate() {
                    for r in 0..dims[b] {
                        cur[pi * dims[b] + r] = pv * t.get(r, splits[b]);
                    }
                }
            }
            for (o, p) in out.iter_mut().zip(partial.last().expect("at least one beam")) {
                *o += p;
            }
        }
        Ok(out.iter().map(Complex64::norm_sqr).collect())
    }
}

/// Weighted list of sectors with distinct per-beam totals.
#[derive(Debug, Clone)]
pub struct SectorEnsemble {
    pub entries: Vec<(f64, SectorAmplitudes)>,
    /// Largest per-beam total included.
    pub cutoff: usize,
    /// Probability mass not represented (truncated tail or leakage).
    pub tail: f64,
}

impl SectorEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(w, _)| w).sum()
    }
}

/// `|psi^n>`: the `n`-pair singlet-like sector of the four-mode squeezed vacuum.
///
/// Support is `|n-m>_{H1}|m>_{V1}|m>_{H2}|n-m>_{V2}` with amplitude
/// `(-1)^m / sqrt(n+1)`.
pub fn bsv_sector(n: usize) -> SectorAmplitudes {
    bell_family_sector(BellKind::PsiMinus, n)
}

/// Sector weights `(n+1) tanh^{2n}(gain) / cosh^4(gain)` for `n = 0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct BsvWeights {
    pub weights: Vec<f64>,
    pub tail: f64,
}

pub fn bsv_weights(gamma: f64, cutoff: usize) -> Result<BsvWeights> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return contract(format!("gain must be finite and non-negative, got {gamma}"));
    }
    let t2 = gamma.tanh().powi(2);
    let c4 = gamma.cosh().powi(4);
    let mut weights = Vec::with_capacity(cutoff + 1);
    let mut power = 1.0;
    for n in 0..=cutoff {
        weights.push((n + 1) as f64 * power / c4);
        power *= t2;
    }
    let tail = 1.0 - weights.iter().sum::<f64>();
    Ok(BsvWeights { weights, tail })
}

/// The four pair-creation analogues of the two-photon Bell basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] =
        [BellKind::PsiMinus, BellKind::PsiPlus, BellKind::PhiMinus, BellKind::PhiPlus];
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellKind::PsiMinus => "psi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PhiPlus => "phi+",
        })
    }
}

/// `n`-pair sector generated by `(a_{H1} a_{V2} -+ a_{V1} a_{H2})^n` (psi)
/// or `(a_{H1} a_{H2} -+ a_{V1} a_{V2})^n` (phi).
pub fn bell_family_sector(kind: BellKind, n: usize) -> SectorAmplitudes {
    let mut sector = SectorAmplitudes::zeros(vec![n, n]);
    let scale = ((n + 1) as f64).sqrt().recip();
    for m in 0..=n {
        let negative = m % 2 == 1 && matches!(kind, BellKind::PsiMinus | BellKind::PhiMinus);
        let amp = Complex64::new(if negative { -scale } else { scale }, 0.0);
        let second = match kind {
            BellKind::PsiMinus | BellKind::PsiPlus => m,
            BellKind::PhiMinus | BellKind::PhiPlus => n - m,
        };
        sector.set(&[n - m, second], amp);
    }
    sector
}

/// Squeezed ensemble of a Bell-family state at the given gain.
pub fn bell_family_ensemble(kind: BellKind, gamma: f64, cutoff: usize) -> Result<SectorEnsemble> {
    let BsvWeights { weights, tail } = bsv_weights(gamma, cutoff)?;
    let entries = weights
        .into_iter()
        .enumerate()
        .map(|(n, w)| (w, bell_family_sector(kind, n)))
        .collect();
    Ok(SectorEnsemble { entries, cutoff, tail })
}

/// Four-mode bright squeezed vacuum truncated at `cutoff` pairs.
pub fn bsv_ensemble(gamma: f64, cutoff: usize) -> Result<SectorEnsemble> {
    bell_family_ensemble(BellKind::PsiMinus, gamma, cutoff)
}

/// Largest tolerated norm leakage of the triple-photon expansion.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

/// Amplitudes `c_Q` of `exp[gain (a1 a2 a3 - h.c.)]|0>` on normalized triple kets.
#[derive(Debug, Clone, PartialEq)]
pub struct BghzCoefficients {
    pub gamma: f64,
    pub c: Vec<f64>,
    /// `1 - sum c_Q^2` over the retained `Q <= cutoff`.
    pub leakage: f64,
}

impl BghzCoefficients {
    pub fn cutoff(&self) -> usize {
        self.c.len() - 1
    }
}

/// Integrates `dc_Q/dgain = Q^{3/2} c_{Q-1} - (Q+1)^{3/2} c_{Q+1}` from `c = e_0`.
///
/// The system is carried on a padded basis of `2 * cutoff + 16` levels; the
/// population that ends above `cutoff` is the reported leakage, and more than
/// [`LEAKAGE_LIMIT`] is an error.
pub fn bghz_coefficients(gamma: f64, cutoff: usize) -> Result<BghzCoefficients> {
    bghz_coefficients_with_limit(gamma, cutoff, LEAKAGE_LIMIT)
}

pub fn bghz_coefficients_with_limit(
    gamma: f64,
    cutoff: usize,
    limit: f64,
) -> Result<BghzCoefficients> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return contract(format!("gain must be finite and non-negative, got {gamma}"));
    }
    let levels = 2 * cutoff + 16;
    let coupling: Vec<f64> = (0..=levels).map(|q| (q as f64).powf(1.5)).collect();
    let mut c = vec![0.0; levels + 1];
    c[0] = 1.0;
    ode::integrate(&mut c, gamma, ode::Tolerance::default(), |y, dy| {
        let last = y.len() - 1;
        for q in 0..=last {
            let up = if q > 0 { coupling[q] * y[q - 1] } else { 0.0 };
            let down = if q < last { coupling[q + 1] * y[q + 1] } else { 0.0 };
            dy[q] = up - down;
        }
    })?;
    c.truncate(cutoff + 1);
    let leakage = (1.0 - c.iter().map(|x| x * x).sum::<f64>()).max(0.0);
    if leakage > limit {
        return Err(Error::Leakage { gamma, cutoff, leakage, limit });
    }
    Ok(BghzCoefficients { gamma, c, leakage })
}

/// Sector with `k` triple-photons per beam: `sum_m c_{k-m} c_m |k-m, m>^{x3}`.
///
/// Returns `(weight, sector)` with the sector normalized. A zero-weight sector
/// comes back with equal amplitudes on its support.
pub fn bghz_sector(k: usize, coeffs: &BghzCoefficients) -> Result<(f64, SectorAmplitudes)> {
    if k > coeffs.cutoff() {
        return contract(format!("sector {k} beyond coefficient cutoff {}", coeffs.cutoff()));
    }
    let mut sector = SectorAmplitudes::zeros(vec![k, k, k]);
    for m in 0..=k {
        let a = coeffs.c[k - m] * coeffs.c[m];
        sector.set(&[k - m, k - m, k - m], Complex64::new(a, 0.0));
    }
    let weight = sector.normalize();
    if weight == 0.0 {
        let flat = ((k + 1) as f64).sqrt().recip();
        for m in 0..=k {
            sector.set(&[k - m, k - m, k - m], Complex64::new(flat, 0.0));
        }
    }
    Ok((weight, sector))
}

/// Bright GHZ state as a sector ensemble up to the coefficient cutoff.
pub fn bghz_ensemble(coeffs: &BghzCoefficients) -> Result<SectorEnsemble> {
    let entries = (0..=coeffs.cutoff())
        .map(|k| bghz_sector(k, coeffs))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = entries.iter().map(|(w, _)| w).sum();
    Ok(SectorEnsemble { entries, cutoff: coeffs.cutoff(), tail: (1.0 - total).max(0.0) })
}

/// Single-beam Fock state `|j>_H |k>_V`.
pub fn fock_product_state(j: usize, k: usize) -> SectorAmplitudes {
    let mut sector = SectorAmplitudes::zeros(vec![j + k]);
    sector.set(&[j], Complex64::new(1.0, 0.0));
    sector
}
