use rayon::prelude::*;

use super::correlation::JointDistribution;
use super::{assemble, Inequality, InequalityReport, SectorTerm};
use crate::channels::{exact_value_table, lossy_value_table, LossySplitValueTable};
use crate::error::{contract, Result};
use crate::fock::{transform_ladder, PolarizationSetting};
use crate::observables::ObservableKind;
use crate::states::{bghz_sector, BghzCoefficients, SectorAmplitudes};

/// Canonical basis per beam and sign of each triple correlator.
pub const MERMIN_TERMS: [([usize; 3], f64); 4] =
    [([1, 1, 1], 1.0), ([1, 2, 2], -1.0), ([2, 1, 2], -1.0), ([2, 2, 1], -1.0)];

fn term_settings(bases: [usize; 3]) -> [PolarizationSetting; 3] {
    bases.map(|b| PolarizationSetting::canonical(b).expect("mermin bases are canonical"))
}

/// Three-beam sectors measured in every Mermin setting combination.
#[derive(Debug, Clone)]
pub struct TripartiteModel {
    weights: Vec<f64>,
    totals: Vec<usize>,
    sectors: Vec<[JointDistribution; 4]>,
    n_max: usize,
    tail: f64,
}

impl TripartiteModel {
    pub fn from_sectors(entries: &[(f64, SectorAmplitudes)], tail: f64) -> Result<Self> {
        if let Some((_, bad)) = entries.iter().find(|(_, s)| s.beams() != 3) {
            return contract(format!("expected three-beam sectors, got {} beams", bad.beams()));
        }
        let n_max = entries
            .iter()
            .flat_map(|(_, s)| s.totals().iter().copied())
            .max()
            .unwrap_or(0);
        for b in 1..=2 {
            transform_ladder(n_max, PolarizationSetting::canonical(b).expect("canonical"));
        }
        let sectors = entries
            .par_iter()
            .map(|(_, sector)| -> Result<[JointDistribution; 4]> {
                let m = |i: usize| JointDistribution::measure(sector, &term_settings(MERMIN_TERMS[i].0));
                Ok([m(0)?, m(1)?, m(2)?, m(3)?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights: entries.iter().map(|(w, _)| *w).collect(),
            totals: entries.iter().map(|(_, s)| s.totals()[0]).collect(),
            sectors,
            n_max,
            tail,
        })
    }

    /// Bright GHZ sectors `k = 0..=cutoff`.
    pub fn bghz(coeffs: &BghzCoefficients) -> Result<Self> {
        let entries = (0..=coeffs.cutoff())
            .map(|k| bghz_sector(k, coeffs))
            .collect::<Result<Vec<_>>>()?;
        Self::from_sectors(&entries, coeffs.leakage)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn table(&self, kind: ObservableKind, eta: f64) -> Result<LossySplitValueTable> {
        if eta == 1.0 {
            Ok(exact_value_table(kind, self.n_max))
        } else {
            lossy_value_table(kind, eta, self.n_max)
        }
    }

    /// Signed Mermin combination on each normalized sector.
    pub fn values(&self, table: &LossySplitValueTable) -> Result<Vec<f64>> {
        self.sectors
            .iter()
            .map(|s| {
                s.iter()
                    .zip(MERMIN_TERMS)
                    .map(|(d, (_, sign))| Ok(sign * d.correlation(table)?))
                    .sum()
            })
            .collect()
    }

    pub fn report(&self, table: &LossySplitValueTable) -> Result<InequalityReport> {
        let terms = self
            .values(table)?
            .into_iter()
            .zip(self.weights.iter().zip(&self.totals))
            .map(|(value, (&weight, &n))| SectorTerm { n, weight, value, contribution: weight * value })
            .collect();
        let vacuum = self.totals.contains(&0);
        Ok(assemble(Inequality::Mermin, terms, vacuum, self.n_max, table.eta(), self.tail))
    }
}

/// Mermin-like expression on the bright GHZ state.
pub fn mermin_lhs(coeffs: &BghzCoefficients, kind: ObservableKind, eta: f64) -> Result<InequalityReport> {
    let model = TripartiteModel::bghz(coeffs)?;
    let mut report = model.report(&model.table(kind, eta)?)?;
    report.gamma = Some(coeffs.gamma);
    Ok(report)
}
