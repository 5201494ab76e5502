use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Breakdown time of one size: the last sampled `n` before the collapse of
/// the sizes `>= n_sites` first exceeds the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownTime<T> {
    pub n_sites: usize,
    pub tau: u64,
    /// The threshold was never exceeded; `tau` is only a lower bound.
    pub lower_bound: bool,
    /// Exceeded already at the first sampled `n > 0`.
    pub immediate: bool,
    pub baseline: T,
    pub threshold: T,
    pub qualities: Vec<(u64, T)>,
}

/// How a size set is scored at each `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BreakdownCriterion {
    /// Collapse quality of the sizes `>= N`.
    Spread,
    /// Collapse quality of the sizes `>= N` divided by that of the sizes
    /// `> N`: how far the smallest curve sits from the master curve of the
    /// larger ones. Needs two larger sizes.
    Departure,
}

impl BreakdownCriterion {
    fn min_subset(self) -> usize {
        match self {
            BreakdownCriterion::Spread => 2,
            BreakdownCriterion::Departure => 3,
        }
    }
}

/// Runs the breakdown scan. `quality(sizes, n)` returns the collapse quality
/// of the given sizes at stroboscopic time `n` (non-finite when no collapse
/// can be formed); the threshold is `factor` times the score at `n = 0`.
/// Every size with enough larger partners gets a breakdown time from the
/// subset it is the smallest of.
pub fn breakdown_times<T: Real>(
    sizes: &[usize],
    ns: &[u64],
    factor: T,
    criterion: BreakdownCriterion,
    mut quality: impl FnMut(&[usize], u64) -> Result<T>,
) -> Result<Vec<BreakdownTime<T>>> {
    let min = criterion.min_subset();
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < min {
        return Err(Error::InsufficientData(format!(
            "{criterion:?} breakdown scan needs at least {min} sizes, got {}",
            sorted.len()
        )));
    }
    if !(factor > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "threshold factor must be positive, got {factor}"
        )));
    }
    let mut score = |subset: &[usize], n: u64| -> Result<T> {
        match criterion {
            BreakdownCriterion::Spread => quality(subset, n),
            BreakdownCriterion::Departure => Ok(quality(subset, n)? / quality(&subset[1..], n)?),
        }
    };
    let mut times: Vec<u64> = ns.iter().copied().filter(|&n| n > 0).collect();
    times.sort_unstable();
    times.dedup();
    let mut out = Vec::new();
    for i in 0..=sorted.len() - min {
        let subset = &sorted[i..];
        let baseline = score(subset, 0)?;
        if !(baseline.is_finite() && baseline > T::zero()) {
            return Err(Error::Unphysical {
                what: "equilibrium collapse baseline",
                value: baseline.as_f64(),
            });
        }
        let threshold = factor * baseline;
        let mut qualities = vec![(0, baseline)];
        let mut tau = None;
        let mut prev = 0;
        for &n in &times {
            let q = score(subset, n)?;
            qualities.push((n, q));
            if !(q <= threshold) {
                tau = Some(prev);
                break;
            }
            prev = n;
        }
        out.push(BreakdownTime {
            n_sites: sorted[i],
            tau: tau.unwrap_or(prev),
            lower_bound: tau.is_none(),
            immediate: tau == Some(0),
            baseline,
            threshold,
            qualities,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_size_breaks_first() {
        // quality jumps once n exceeds the size / 10 of the smallest member
        let q = |s: &[usize], n: u64| Ok(if n as usize > s[0] / 10 { 1.0 } else { 0.01 });
        let ns: Vec<u64> = (0..=40).collect();
        let res =
            breakdown_times(&[100, 200, 300], &ns, 5.0, BreakdownCriterion::Spread, q).unwrap();
        assert_eq!(res.len(), 2);
        assert_eq!(res[0].tau, 10);
        assert_eq!(res[1].tau, 20);
        assert!(!res[0].lower_bound);
        let never =
            breakdown_times(&[100, 200], &[0, 5, 9], 5.0, BreakdownCriterion::Spread, q).unwrap();
        assert!(never[0].lower_bound);
        assert_eq!(never[0].tau, 9);
    }

    #[test]
    fn immediate_failure() {
        let q = |_: &[usize], n: u64| Ok(if n == 0 { 0.01 } else { 1.0 });
        let res =
            breakdown_times(&[128, 256], &[0, 1, 2], 5.0, BreakdownCriterion::Spread, q).unwrap();
        assert!(res[0].immediate);
        assert_eq!(res[0].tau, 0);
    }

    #[test]
    fn departure_ignores_common_drift() {
        // every subset degrades smoothly; only the smallest member breaks at n > N/10
        let q = |s: &[usize], n: u64| {
            let drift = 1.0 + n as f64;
            Ok(drift * if n as usize > s[0] / 10 { 50.0 } else { 1.0 })
        };
        let ns: Vec<u64> = (0..=40).collect();
        let spread = breakdown_times(
            &[100, 200, 300, 400],
            &ns,
            5.0,
            BreakdownCriterion::Spread,
            q,
        )
        .unwrap();
        assert_eq!(spread[0].tau, 4);
        let dep = breakdown_times(
            &[100, 200, 300, 400],
            &ns,
            5.0,
            BreakdownCriterion::Departure,
            q,
        )
        .unwrap();
        assert_eq!(dep.len(), 2);
        assert_eq!(dep[0].tau, 10);
        assert_eq!(dep[1].tau, 20);
        assert!(breakdown_times(&[100, 200], &ns, 5.0, BreakdownCriterion::Departure, q).is_err());
    }
}
