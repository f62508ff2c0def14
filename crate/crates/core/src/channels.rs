//! Detector loss and white-noise admixture.
//!
//! Loss is modelled as an ideal detector behind a beamsplitter of
//! transmission `eta`, independently for every detector. Because every
//! observable is photon-number diagonal, loss only reshuffles outcome
//! statistics, and its effect folds into a table of expected outcome values
//! per ideal split.

use crate::error::{contract, Result};
use crate::fock::{ln_binomial, ModeSplit};
use crate::observables::{outcome_value, ObservableKind};

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return contract(format!("detection efficiency must lie in [0, 1], got {eta}"));
    }
    Ok(())
}

/// `p(kappa | k) = C(k, kappa) eta^kappa (1 - eta)^(k - kappa)` for `kappa = 0..=k`.
pub fn thinning_pmf(k: usize, eta: f64) -> Result<Vec<f64>> {
    check_eta(eta)?;
    let mut pmf = vec![0.0; k + 1];
    if eta == 1.0 {
        pmf[k] = 1.0;
        return Ok(pmf);
    }
    if eta == 0.0 {
        pmf[0] = 1.0;
        return Ok(pmf);
    }
    let (ln_keep, ln_lose) = (eta.ln(), (-eta).ln_1p());
    for (kappa, p) in pmf.iter_mut().enumerate() {
        *p = (ln_binomial(k, kappa) + kappa as f64 * ln_keep + (k - kappa) as f64 * ln_lose).exp();
    }
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    Ok(pmf)
}

/// Expected outcome value after binomial thinning of both ports.
#[derive(Debug, Clone, PartialEq)]
pub struct LossySplitValueTable {
    eta: f64,
    kind: ObservableKind,
    n_max: usize,
    values: Vec<f64>,
}

impl LossySplitValueTable {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kind(&self) -> ObservableKind {
        self.kind
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `f[j][k]` for `j, k <= n_max`.
    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * (self.n_max + 1) + k]
    }

    /// Values for the outcomes of an `n`-photon sector, indexed by `j` (k = n - j).
    pub fn sector_row(&self, n: usize) -> Vec<f64> {
        assert!(n <= self.n_max, "sector {n} beyond table size {}", self.n_max);
        (0..=n).map(|j| self.get(j, n - j)).collect()
    }
}

/// Lossless table: the outcome values themselves.
pub fn exact_value_table(kind: ObservableKind, n_max: usize) -> LossySplitValueTable {
    let dim = n_max + 1;
    let mut values = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        for k in 0..dim {
            values.push(outcome_value(kind, ModeSplit::new(j, k)));
        }
    }
    LossySplitValueTable { eta: 1.0, kind, n_max, values }
}

/// `f[j][k] = sum_{a<=j, b<=k} p(a|j) p(b|k) value(a, b)`.
pub fn lossy_value_table(
    kind: ObservableKind,
    eta: f64,
    n_max: usize,
) -> Result<LossySplitValueTable> {
    check_eta(eta)?;
    let dim = n_max + 1;
    let pmfs: Vec<Vec<f64>> = (0..dim).map(|k| thinning_pmf(k, eta)).collect::<Result<_>>()?;
    let exact = exact_value_table(kind, n_max);

    // thin the first port, then the second
    let mut partial = vec![0.0; dim * dim];
    for j in 0..dim {
        for b in 0..dim {
            partial[j * dim + b] = pmfs[j].iter().enumerate().map(|(a, p)| p * exact.get(a, b)).sum();
        }
    }
    let mut values = vec![0.0; dim * dim];
    for j in 0..dim {
        for k in 0..dim {
            values[j * dim + k] =
                pmfs[k].iter().enumerate().map(|(b, p)| p * partial[j * dim + b]).sum();
        }
    }
    Ok(LossySplitValueTable { eta, kind, n_max, values })
}

/// Inequality value on `q rho_signal + (1 - q) rho_noise`.
///
/// Both inputs must be the signed expressions inside any absolute value; the
/// mixture is linear only there.
pub fn noise_mixture_lhs(lhs_signal: f64, lhs_noise: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return contract(format!("signal fraction must lie in [0, 1], got {q}"));
    }
    Ok(q * lhs_signal + (1.0 - q) * lhs_noise)
}
