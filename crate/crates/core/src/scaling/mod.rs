//! Finite-size-scaling analysis: peak location, divergence fits, data
//! collapse and breakdown detection.

mod breakdown;
mod collapse;
mod fit;
mod optimize;
mod peak;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{ObservableKind, ObservableRecord};
use crate::scalar::Real;

pub use breakdown::{breakdown_times, BreakdownCriterion, BreakdownTime};
pub use collapse::{
    collapse_quality, collapse_score, optimize_exponents, pseudocritical_points, rescale, spread,
    Ansatz, CollapseResult, Exponent,
};
pub use fit::{
    fit_fs_peak, fit_log_divergence, fit_shift_exponent, linear_fit, linear_fs_scaling, r_squared,
    xi_scaling_fit, FsPeakFit, LinearFit, ShiftFit, XiFit,
};
pub use optimize::{golden_section, minimize_scalar};
pub use peak::{extremum, pseudocritical_point, Orientation, Peak};

pub const MIN_SAMPLES_PER_CURVE: usize = 15;

/// Curves `h -> value` of one observable at one stroboscopic time, keyed by
/// chain length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingDataset<T> {
    pub kind: ObservableKind,
    pub n: u64,
    pub gamma: T,
    pub dh: T,
    pub omega: T,
    pub curves: BTreeMap<usize, Vec<(T, T)>>,
}

impl<T: Real> ScalingDataset<T> {
    /// Sorts every curve by field and checks sample counts.
    pub fn new(
        kind: ObservableKind,
        n: u64,
        gamma: T,
        dh: T,
        omega: T,
        mut curves: BTreeMap<usize, Vec<(T, T)>>,
    ) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InsufficientData("dataset has no curves".into()));
        }
        for (n_sites, c) in curves.iter_mut() {
            if c.len() < MIN_SAMPLES_PER_CURVE {
                return Err(Error::InsufficientData(format!(
                    "curve N = {n_sites} has {} samples, need {MIN_SAMPLES_PER_CURVE}",
                    c.len()
                )));
            }
            if c.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "curve N = {n_sites} contains non-finite samples"
                )));
            }
            c.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite fields"));
        }
        Ok(Self {
            kind,
            n,
            gamma,
            dh,
            omega,
            curves,
        })
    }

    /// Collects the records of `kind` at time `n`; drive parameters are taken
    /// from the first match and must agree across all of them.
    pub fn from_records(
        records: &[ObservableRecord<T>],
        kind: ObservableKind,
        n: u64,
    ) -> Result<Self> {
        let sel: Vec<&ObservableRecord<T>> = records
            .iter()
            .filter(|r| r.kind == kind && r.n == n)
            .collect();
        let first = sel
            .first()
            .ok_or_else(|| Error::InsufficientData(format!("no {kind} records at n = {n}")))?;
        let mut curves: BTreeMap<usize, Vec<(T, T)>> = BTreeMap::new();
        for r in &sel {
            if r.gamma != first.gamma || r.dh != first.dh || r.omega != first.omega {
                return Err(Error::InvalidParams("records mix different drives".into()));
            }
            curves.entry(r.n_sites).or_default().push((r.h, r.value));
        }
        Self::new(kind, n, first.gamma, first.dh, first.omega, curves)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.curves.keys().copied().collect()
    }

    /// Dataset restricted to the given sizes.
    pub fn subset(&self, sizes: &[usize]) -> Result<Self> {
        let curves: BTreeMap<usize, Vec<(T, T)>> = self
            .curves
            .iter()
            .filter(|(n, _)| sizes.contains(n))
            .map(|(&n, c)| (n, c.clone()))
            .collect();
        Self::new(self.kind, self.n, self.gamma, self.dh, self.omega, curves)
    }
}
