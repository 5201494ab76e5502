use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Maximum,
    Minimum,
}

impl Orientation {
    /// Compares the rise above both end points with the fall below them.
    pub fn detect<T: Real>(curve: &[(T, T)]) -> Self {
        let (Some(&(_, first)), Some(&(_, last))) = (curve.first(), curve.last()) else {
            return Orientation::Maximum;
        };
        let hi = curve.iter().map(|p| p.1).fold(T::neg_infinity(), T::max);
        let lo = curve.iter().map(|p| p.1).fold(T::infinity(), T::min);
        let up = hi - first.max(last);
        let down = first.min(last) - lo;
        if down > up {
            Orientation::Minimum
        } else {
            Orientation::Maximum
        }
    }

    pub fn sign<T: Real>(self) -> T {
        match self {
            Orientation::Maximum => T::one(),
            Orientation::Minimum => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak<T> {
    pub h: T,
    pub value: T,
    pub orientation: Orientation,
}

/// Interior maximum refined by the parabola through the best sample and its
/// two neighbours. Samples must be sorted by `h`.
pub fn pseudocritical_point<T: Real>(curve: &[(T, T)]) -> Result<Peak<T>> {
    extremum(curve, Orientation::Maximum)
}

pub fn extremum<T: Real>(curve: &[(T, T)], orientation: Orientation) -> Result<Peak<T>> {
    if curve.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "peak search needs three samples, got {}",
            curve.len()
        )));
    }
    let s: T = orientation.sign();
    let best = curve
        .iter()
        .enumerate()
        .max_by(|a, b| {
            (s * a.1 .1)
                .partial_cmp(&(s * b.1 .1))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .expect("non-empty curve");
    if best == 0 || best == curve.len() - 1 {
        return Err(Error::PeakOnBoundary {
            h: curve[best].0.as_f64(),
        });
    }
    let (x0, y0) = curve[best - 1];
    let (x1, y1) = curve[best];
    let (x2, y2) = curve[best + 1];
    let (d0, d2) = (x0 - x1, x2 - x1);
    let (e0, e2) = (y0 - y1, y2 - y1);
    // y - y1 = b t + a t^2 through both neighbours
    let det = d0 * d2 * (d2 - d0);
    let a = (e2 * d0 - e0 * d2) / det;
    let b = (e0 * d2 * d2 - e2 * d0 * d0) / det;
    if a == T::zero() {
        return Ok(Peak {
            h: x1,
            value: y1,
            orientation,
        });
    }
    let t = -b / (T::lit(2.0) * a);
    Ok(Peak {
        h: x1 + t,
        value: y1 + b * t + a * t * t,
        orientation,
    })
}
