//! Period-8 structure of per-sector values.
//!
//! Every function takes `values` indexed by sector total `n`; index 0 (the
//! vacuum) is ignored.

pub const PATTERN_PERIOD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Sectors `n >= 1` with a value strictly above `bound`.
pub fn violating_sectors(values: &[f64], bound: f64) -> Vec<usize> {
    (1..values.len()).filter(|&n| values[n] > bound).collect()
}

fn odd_extrema(values: &[f64], better: impl Fn(f64, f64) -> bool) -> Vec<usize> {
    let odd: Vec<usize> = (1..values.len()).step_by(2).collect();
    odd.iter()
        .enumerate()
        .filter(|&(i, &n)| {
            let prev = i.checked_sub(1).map(|p| values[odd[p]]);
            let next = odd.get(i + 1).map(|&m| values[m]);
            next.is_some()
                && prev.is_none_or(|p| better(values[n], p))
                && next.is_none_or(|q| better(values[n], q))
        })
        .map(|(_, &n)| n)
        .collect()
}

/// Odd `n` whose value exceeds both odd neighbours (`n = 1` needs only the right one).
pub fn odd_local_maxima(values: &[f64]) -> Vec<usize> {
    odd_extrema(values, |a, b| a > b)
}

pub fn odd_local_minima(values: &[f64]) -> Vec<usize> {
    odd_extrema(values, |a, b| a < b)
}

/// Sectors of the given parity in period `p` (`n = 8p+1 ..= 8p+8`).
pub fn period_members(period: usize, parity: Parity) -> Vec<usize> {
    let start = PATTERN_PERIOD * period + 1;
    (start..start + PATTERN_PERIOD).filter(|&n| Parity::of(n) == parity).collect()
}

fn complete_periods(values: &[f64]) -> usize {
    values.len().saturating_sub(1) / PATTERN_PERIOD
}

/// Number of odd sectors above `bound` in each complete period.
pub fn violations_per_period(values: &[f64], bound: f64) -> Vec<usize> {
    (0..complete_periods(values))
        .map(|p| {
            period_members(p, Parity::Odd)
                .into_iter()
                .filter(|&n| values[n] > bound)
                .count()
        })
        .collect()
}

/// Plain mean over each complete period of the sectors with the given parity.
pub fn period_means(values: &[f64], parity: Parity) -> Vec<f64> {
    (0..complete_periods(values))
        .map(|p| {
            let members = period_members(p, parity);
            members.iter().map(|&n| values[n]).sum::<f64>() / members.len() as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_pattern() {
        // odd values peak at n = 1, 9, 17 and dip below the bound at 5, 13
        let values: Vec<f64> = (0..=24)
            .map(|n| {
                if n % 2 == 0 {
                    1.9
                } else {
                    2.0 + (std::f64::consts::FRAC_PI_4 * (n as f64 - 1.0)).cos() * 0.1 + 0.01
                }
            })
            .collect();
        assert_eq!(odd_local_maxima(&values), vec![1, 9, 17]);
        assert_eq!(odd_local_minima(&values), vec![5, 13, 21]);
        assert_eq!(violations_per_period(&values, 2.0), vec![3, 3, 3]);
        assert_eq!(violating_sectors(&values, 2.0).len(), 9);
        assert_eq!(period_means(&values, Parity::Even), vec![1.9; 3]);
        assert_eq!(period_members(1, Parity::Even), vec![10, 12, 14, 16]);
    }
}
