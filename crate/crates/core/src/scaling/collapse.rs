//! Data collapse: per-curve rescaling and a master-curve spread functional.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::optimize::{minimize_scalar, scan};
use super::peak::{extremum, Orientation, Peak};
use super::ScalingDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ansatz {
    /// `1 - exp(s (y - y_peak))` against `N^{1/nu} (h - h_c^N)`.
    ConcurrenceLog,
    /// Same form as `ConcurrenceLog`, for the transverse susceptibility.
    ChiZLog,
    /// `S(h) - S(h_c^N)` against `N^{1/nu} (h - h_c^N)`.
    EntropyShift,
    /// `(chi_peak - chi) / chi` against `N^{1/nu} sgn(d) |d|^r`, `d = h - h_c^N`.
    FidelitySusceptibility,
}

impl Ansatz {
    pub fn as_str(self) -> &'static str {
        match self {
            Ansatz::ConcurrenceLog => "concurrence-log",
            Ansatz::ChiZLog => "chi_z-log",
            Ansatz::EntropyShift => "entropy-shift",
            Ansatz::FidelitySusceptibility => "fidelity-susceptibility",
        }
    }
}

/// Rescaled `(x, y)` points of every curve, keyed by size.
pub fn rescale<T: Real>(
    dataset: &ScalingDataset<T>,
    peaks: &BTreeMap<usize, Peak<T>>,
    ansatz: Ansatz,
    nu: T,
    r: T,
) -> BTreeMap<usize, Vec<(T, T)>> {
    dataset
        .curves
        .iter()
        .map(|(&n_sites, curve)| {
            let peak = peaks[&n_sites];
            let scale = T::from_usize_lossy(n_sites).powf(T::one() / nu);
            let pts = curve
                .iter()
                .map(|&(h, v)| {
                    let d = h - peak.h;
                    match ansatz {
                        Ansatz::ConcurrenceLog | Ansatz::ChiZLog => {
                            let s: T = peak.orientation.sign();
                            (scale * d, T::one() - (s * (v - peak.value)).exp())
                        }
                        Ansatz::EntropyShift => (scale * d, v - peak.value),
                        Ansatz::FidelitySusceptibility => {
                            let x = scale * d.signum() * d.abs().powf(r);
                            (x, (peak.value - v) / v)
                        }
                    }
                })
                .collect();
            (n_sites, pts)
        })
        .collect()
}

fn interpolate<T: Real>(curve: &[(T, T)], x: T) -> Option<T> {
    let (first, last) = (curve.first()?, curve.last()?);
    if x < first.0 || x > last.0 {
        return None;
    }
    let i = curve.partition_point(|p| p.0 < x);
    if i < curve.len() && curve[i].0 == x {
        return Some(curve[i].1);
    }
    let (x0, y0) = curve[i - 1];
    let (x1, y1) = curve[i.min(curve.len() - 1)];
    if x1 == x0 {
        return Some(y0);
    }
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Mean squared distance of every point from the linear interpolants of the
/// other curves at the same abscissa, divided by the variance of all
/// ordinates. Zero when the rescaled curves coincide.
pub fn spread<T: Real>(curves: &BTreeMap<usize, Vec<(T, T)>>) -> Result<T> {
    let sorted: Vec<Vec<(T, T)>> = curves
        .values()
        .map(|c| {
            let mut c = c.clone();
            c.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            c
        })
        .collect();
    let (mut sum, mut count) = (T::zero(), 0usize);
    for (i, ci) in sorted.iter().enumerate() {
        for (j, cj) in sorted.iter().enumerate() {
            if i == j {
                continue;
            }
            for &(x, y) in ci {
                if let Some(yj) = interpolate(cj, x) {
                    sum += (y - yj) * (y - yj);
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::NoOverlap);
    }
    let all: Vec<T> = sorted.iter().flatten().map(|p| p.1).collect();
    let nf = T::from_usize_lossy(all.len());
    let mean = all.iter().copied().sum::<T>() / nf;
    let var = all.iter().map(|&y| (y - mean) * (y - mean)).sum::<T>() / nf;
    let mse = sum / T::from_usize_lossy(count);
    if var > T::zero() {
        Ok(mse / var)
    } else {
        Ok(mse)
    }
}

/// Orientation used to locate `h_c^N` for an ansatz.
fn orientation_for<T: Real>(ansatz: Ansatz, curve: &[(T, T)]) -> Orientation {
    match ansatz {
        Ansatz::FidelitySusceptibility => Orientation::Maximum,
        _ => Orientation::detect(curve),
    }
}

pub fn pseudocritical_points<T: Real>(
    dataset: &ScalingDataset<T>,
    ansatz: Ansatz,
) -> Result<BTreeMap<usize, Peak<T>>> {
    dataset
        .curves
        .iter()
        .map(|(&n, c)| Ok((n, extremum(c, orientation_for(ansatz, c))?)))
        .collect()
}

pub fn collapse_quality<T: Real>(
    dataset: &ScalingDataset<T>,
    ansatz: Ansatz,
    nu: T,
    r: T,
) -> Result<T> {
    let peaks = pseudocritical_points(dataset, ansatz)?;
    spread(&rescale(dataset, &peaks, ansatz, nu, r))
}

/// Like [`collapse_quality`], but a curve whose extremum left the sampled
/// window, or curves that no longer overlap, score `+inf` instead of failing.
pub fn collapse_score<T: Real>(
    dataset: &ScalingDataset<T>,
    ansatz: Ansatz,
    nu: T,
    r: T,
) -> Result<T> {
    match collapse_quality(dataset, ansatz, nu, r) {
        Err(Error::PeakOnBoundary { .. } | Error::NoOverlap) => Ok(T::infinity()),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exponent {
    /// Vary `nu` with `r = 1`.
    Nu,
    /// Vary `r` with `nu = 1`.
    R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult<T> {
    pub ansatz: Ansatz,
    pub nu: T,
    pub r: T,
    pub quality: T,
    pub pseudocritical: BTreeMap<usize, T>,
    /// False when the quality varies by less than `1e-3` (relative) over the
    /// bounds, so the optimum carries no information.
    pub identifiable: bool,
}

/// Minimises the collapse quality along one exponent axis.
pub fn optimize_exponents<T: Real>(
    dataset: &ScalingDataset<T>,
    ansatz: Ansatz,
    axis: Exponent,
    bounds: (T, T),
) -> Result<CollapseResult<T>> {
    let (lo, hi) = bounds;
    if !(lo > T::zero() && hi > lo) {
        return Err(Error::InvalidParams(format!(
            "exponent bounds must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let peaks = pseudocritical_points(dataset, ansatz)?;
    let exps = |e: T| match axis {
        Exponent::Nu => (e, T::one()),
        Exponent::R => (T::one(), e),
    };
    let quality = |e: T| {
        let (nu, r) = exps(e);
        spread(&rescale(dataset, &peaks, ansatz, nu, r)).unwrap_or(T::infinity())
    };
    let coarse = scan(&quality, lo, hi, 41);
    let finite: Vec<T> = coarse
        .iter()
        .map(|p| p.1)
        .filter(|q| q.is_finite())
        .collect();
    if finite.is_empty() {
        return Err(Error::NoOverlap);
    }
    let qmax = finite.iter().copied().fold(T::neg_infinity(), T::max);
    let qmin = finite.iter().copied().fold(T::infinity(), T::min);
    let identifiable = qmax > T::zero() && (qmax - qmin) / qmax >= T::lit(1e-3);
    let best = minimize_scalar(quality, lo, hi, 41, T::lit(1e-5));
    let (nu, r) = exps(best);
    Ok(CollapseResult {
        ansatz,
        nu,
        r,
        quality: spread(&rescale(dataset, &peaks, ansatz, nu, r))?,
        pseudocritical: peaks.iter().map(|(&n, p)| (n, p.h)).collect(),
        identifiable,
    })
}
