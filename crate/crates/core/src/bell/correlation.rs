use crate::channels::LossySplitValueTable;
use crate::error::{contract, Result};
use crate::fock::PolarizationSetting;
use crate::states::SectorAmplitudes;

/// Outcome probabilities of one sector measured with fixed per-beam settings.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    totals: Vec<usize>,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn measure(sector: &SectorAmplitudes, settings: &[PolarizationSetting]) -> Result<Self> {
        let probs = sector.joint_probabilities(settings)?;
        Ok(Self { totals: sector.totals().to_vec(), probs })
    }

    pub fn totals(&self) -> &[usize] {
        &self.totals
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    fn check(&self, table: &LossySplitValueTable) -> Result<()> {
        let n_max = *self.totals.iter().max().expect("at least one beam");
        if n_max > table.n_max() {
            return contract(format!(
                "value table covers {} photons, sector needs {n_max}",
                table.n_max()
            ));
        }
        Ok(())
    }

    /// Contracts the probability tensor with one value row per beam, last beam first.
    fn contract_rows(&self, rows: &[Option<Vec<f64>>]) -> f64 {
        let mut current = self.probs.clone();
        for (b, row) in rows.iter().enumerate().rev() {
            let dim = self.totals[b] + 1;
            current = current
                .chunks_exact(dim)
                .map(|chunk| match row {
                    Some(r) => chunk.iter().zip(r).map(|(p, f)| p * f).sum(),
                    None => chunk.iter().sum(),
                })
                .collect();
        }
        debug_assert_eq!(current.len(), 1);
        current[0]
    }

    /// `<O_1 O_2 ...>` with every beam using `table`.
    pub fn correlation(&self, table: &LossySplitValueTable) -> Result<f64> {
        self.check(table)?;
        let rows: Vec<_> = self.totals.iter().map(|&n| Some(table.sector_row(n))).collect();
        Ok(self.contract_rows(&rows))
    }

    /// `<O_beam>` alone.
    pub fn marginal(&self, beam: usize, table: &LossySplitValueTable) -> Result<f64> {
        self.check(table)?;
        if beam >= self.totals.len() {
            return contract(format!("beam {beam} out of range"));
        }
        let rows: Vec<_> = self
            .totals
            .iter()
            .enumerate()
            .map(|(b, &n)| (b == beam).then(|| table.sector_row(n)))
            .collect();
        Ok(self.contract_rows(&rows))
    }
}
