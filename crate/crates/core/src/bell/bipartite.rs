//! CHSH and CH expressions for two-beam states.

use rayon::prelude::*;

use super::correlation::JointDistribution;
use super::{assemble, Inequality, InequalityReport, SectorTerm, SettingsQuad};
use crate::channels::{exact_value_table, lossy_value_table, LossySplitValueTable};
use crate::error::{contract, Result};
use crate::fock::{transform_ladder, PolarizationSetting};
use crate::observables::ObservableKind;
use crate::states::{bell_family_sector, bsv_sector, BellKind, SectorAmplitudes, SectorEnsemble};

fn value_table(kind: ObservableKind, eta: f64, n_max: usize) -> Result<LossySplitValueTable> {
    if eta == 1.0 {
        Ok(exact_value_table(kind, n_max))
    } else {
        lossy_value_table(kind, eta, n_max)
    }
}

/// `<O_A O_B>` on a two-beam sector, each beam rotated to its own setting.
pub fn pair_correlation(
    sector: &SectorAmplitudes,
    setting_a: PolarizationSetting,
    setting_b: PolarizationSetting,
    kind: ObservableKind,
    eta: f64,
) -> Result<f64> {
    if sector.beams() != 2 {
        return contract(format!("pair correlation needs two beams, got {}", sector.beams()));
    }
    let n_max = *sector.totals().iter().max().expect("two beams");
    let table = value_table(kind, eta, n_max)?;
    JointDistribution::measure(sector, &[setting_a, setting_b])?.correlation(&table)
}

/// Measured statistics of a list of two-beam sectors under the four setting pairs.
///
/// Statistics do not depend on gain, loss, or observable, so one model serves
/// whole sweeps.
#[derive(Debug, Clone)]
pub struct BipartiteModel {
    quad: SettingsQuad,
    sectors: Vec<[JointDistribution; 4]>,
    n_max: usize,
}

impl BipartiteModel {
    pub fn from_sectors(quad: SettingsQuad, sectors: &[SectorAmplitudes]) -> Result<Self> {
        if let Some(bad) = sectors.iter().find(|s| s.beams() != 2) {
            return contract(format!("expected two-beam sectors, got {} beams", bad.beams()));
        }
        let n_max = sectors.iter().flat_map(|s| s.totals().iter().copied()).max().unwrap_or(0);
        // warm the transform cache before fanning out
        for pair in quad.pairs() {
            for s in pair {
                transform_ladder(n_max, s);
            }
        }
        let pairs = quad.pairs();
        let sectors = sectors
            .par_iter()
            .map(|sector| -> Result<[JointDistribution; 4]> {
                Ok([
                    JointDistribution::measure(sector, &pairs[0])?,
                    JointDistribution::measure(sector, &pairs[1])?,
                    JointDistribution::measure(sector, &pairs[2])?,
                    JointDistribution::measure(sector, &pairs[3])?,
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { quad, sectors, n_max })
    }

    /// Sectors `n = 0..=cutoff` of a Bell-family state.
    pub fn bell_family(kind: BellKind, cutoff: usize, quad: SettingsQuad) -> Result<Self> {
        let sectors: Vec<_> = (0..=cutoff).map(|n| bell_family_sector(kind, n)).collect();
        Self::from_sectors(quad, &sectors)
    }

    pub fn bsv(cutoff: usize, quad: SettingsQuad) -> Result<Self> {
        Self::bell_family(BellKind::PsiMinus, cutoff, quad)
    }

    pub fn quad(&self) -> &SettingsQuad {
        &self.quad
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn table(&self, kind: ObservableKind, eta: f64) -> Result<LossySplitValueTable> {
        value_table(kind, eta, self.n_max)
    }

    /// Per-beam total of sector `index` (first beam).
    pub fn sector_total(&self, index: usize) -> usize {
        self.sectors[index][0].totals()[0]
    }

    fn correlations(&self, index: usize, table: &LossySplitValueTable) -> Result<[f64; 4]> {
        let s = &self.sectors[index];
        Ok([
            s[0].correlation(table)?,
            s[1].correlation(table)?,
            s[2].correlation(table)?,
            s[3].correlation(table)?,
        ])
    }

    /// `E(theta, phi) + E(theta, phi') + E(theta', phi) - E(theta', phi')` per sector.
    pub fn chsh_values(&self, table: &LossySplitValueTable) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                let e = self.correlations(i, table)?;
                Ok(e[0] + e[1] + e[2] - e[3])
            })
            .collect()
    }

    /// CHSH combination minus `<P^1(theta)> + <P^2(phi)>`, per sector.
    pub fn ch_values(&self, table: &LossySplitValueTable) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                let e = self.correlations(i, table)?;
                let first = &self.sectors[i][0];
                Ok(e[0] + e[1] + e[2] - e[3] - first.marginal(0, table)? - first.marginal(1, table)?)
            })
            .collect()
    }

    /// Weighted report from per-sector values.
    pub fn report(
        &self,
        inequality: Inequality,
        values: &[f64],
        weights: &[f64],
        eta: f64,
        tail: f64,
    ) -> Result<InequalityReport> {
        if values.len() != self.len() || weights.len() != self.len() {
            return contract("one value and one weight per sector required");
        }
        let terms: Vec<SectorTerm> = values
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(i, (&value, &weight))| SectorTerm {
                n: self.sector_total(i),
                weight,
                value,
                contribution: weight * value,
            })
            .collect();
        let vacuum = self.sectors.iter().any(|s| s[0].totals().iter().all(|&n| n == 0));
        Ok(assemble(inequality, terms, vacuum, self.n_max, eta, tail))
    }
}

fn ensemble_report(
    inequality: Inequality,
    ensemble: &SectorEnsemble,
    quad: SettingsQuad,
    kind: ObservableKind,
    eta: f64,
) -> Result<InequalityReport> {
    let sectors: Vec<_> = ensemble.entries.iter().map(|(_, s)| s.clone()).collect();
    let weights: Vec<_> = ensemble.entries.iter().map(|(w, _)| *w).collect();
    let model = BipartiteModel::from_sectors(quad, &sectors)?;
    let table = model.table(kind, eta)?;
    let values = match inequality {
        Inequality::Ch => model.ch_values(&table)?,
        _ => model.chsh_values(&table)?,
    };
    let mut report = model.report(inequality, &values, &weights, eta, ensemble.tail)?;
    report.cutoff = ensemble.cutoff;
    Ok(report)
}

/// `|E(theta,phi) + E(theta,phi') + E(theta',phi) - E(theta',phi')|` on an ensemble.
pub fn chsh_lhs(
    ensemble: &SectorEnsemble,
    quad: SettingsQuad,
    kind: ObservableKind,
    eta: f64,
) -> Result<InequalityReport> {
    ensemble_report(Inequality::Chsh, ensemble, quad, kind, eta)
}

/// CH expression on an ensemble; classical values lie in `[-1, 0]`.
pub fn ch_lhs(
    ensemble: &SectorEnsemble,
    quad: SettingsQuad,
    kind: ObservableKind,
    eta: f64,
) -> Result<InequalityReport> {
    if !matches!(kind, ObservableKind::Projector | ObservableKind::Rate) {
        return contract(format!("CH expression needs projector or rate observables, got {kind}"));
    }
    ensemble_report(Inequality::Ch, ensemble, quad, kind, eta)
}

fn single_sector(n: usize, quad: SettingsQuad) -> Result<BipartiteModel> {
    if n == 0 {
        return contract("per-sector analysis starts at n = 1");
    }
    BipartiteModel::from_sectors(quad, &[bsv_sector(n)])
}

/// CHSH expression on the normalized `n`-pair sector, lossless.
pub fn per_sector_chsh(n: usize, quad: SettingsQuad, kind: ObservableKind) -> Result<f64> {
    let model = single_sector(n, quad)?;
    Ok(model.chsh_values(&model.table(kind, 1.0)?)?[0])
}

/// CH expression on the normalized `n`-pair sector, lossless.
pub fn per_sector_ch(n: usize, quad: SettingsQuad, kind: ObservableKind) -> Result<f64> {
    let model = single_sector(n, quad)?;
    Ok(model.ch_values(&model.table(kind, 1.0)?)?[0])
}

/// Vacuum share of the CHSH expression on the squeezed vacuum.
pub fn vacuum_term_chsh(gamma: f64) -> f64 {
    2.0 / gamma.cosh().powi(4)
}

/// Non-vacuum share if every sector sat exactly at the bound.
pub fn asymptotic_bound(gamma: f64) -> f64 {
    let t2 = gamma.tanh().powi(2);
    let sech2 = gamma.cosh().powi(2).recip();
    2.0 * (t2 + sech2 * t2)
}

/// Gain for block averages; the infinite limit flattens the weights to `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockGain {
    Finite(f64),
    Infinite,
}

impl BlockGain {
    /// Relative sector weight; the common `cosh^-4` factor is dropped.
    fn relative_weight(self, n: usize) -> f64 {
        let base = match self {
            BlockGain::Finite(g) => g.tanh().powi(2).powi(n as i32),
            BlockGain::Infinite => 1.0,
        };
        (n + 1) as f64 * base
    }
}

impl From<f64> for BlockGain {
    fn from(g: f64) -> Self {
        if g.is_infinite() {
            BlockGain::Infinite
        } else {
            BlockGain::Finite(g)
        }
    }
}

/// Weighted mean of per-sector values over `n = 8(block-1)+1 ..= 8 block`.
///
/// `values[n]` is the expression on sector `n`; index 0 is ignored.
pub fn block_average_from(values: &[f64], block: usize, gain: BlockGain) -> Result<f64> {
    let period = super::patterns::PATTERN_PERIOD;
    if block == 0 {
        return contract("blocks are numbered from 1");
    }
    let last = period * block;
    if values.len() <= last {
        return contract(format!("block {block} needs sectors up to {last}"));
    }
    let (num, den) = (period * (block - 1) + 1..=last).fold((0.0, 0.0), |(num, den), n| {
        let w = gain.relative_weight(n);
        (num + w * values[n], den + w)
    });
    Ok(num / den)
}

/// Block average of the sign-binned CHSH expression on the squeezed vacuum.
pub fn block_average(block: usize, gain: impl Into<BlockGain>, quad: SettingsQuad) -> Result<f64> {
    let last = super::patterns::PATTERN_PERIOD * block;
    let model = BipartiteModel::bsv(last, quad)?;
    let values = model.chsh_values(&model.table(ObservableKind::SignMinus, 1.0)?)?;
    block_average_from(&values, block, gain.into())
}
