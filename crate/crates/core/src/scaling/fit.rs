//! Least-squares fits of peak heights, peak positions and off-critical
//! susceptibilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::optimize::minimize_scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

/// Coefficient of determination of `pred` against `obs`.
pub fn r_squared<T: Real>(obs: &[T], pred: &[T]) -> T {
    let n = T::from_usize_lossy(obs.len());
    let mean = obs.iter().copied().sum::<T>() / n;
    let ss_tot: T = obs.iter().map(|&y| (y - mean) * (y - mean)).sum();
    let ss_res: T = obs.iter().zip(pred).map(|(&y, &p)| (y - p) * (y - p)).sum();
    if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else if ss_res == T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "linear fit needs two points, got {}",
            x.len()
        )));
    }
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxx: T = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    let sxy: T = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    if !(sxx > T::zero()) {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let pred: Vec<T> = x.iter().map(|&a| intercept + slope * a).collect();
    Ok(LinearFit {
        slope,
        intercept,
        r_squared: r_squared(y, &pred),
    })
}

fn need<T>(points: &[T], min: usize, what: &str) -> Result<()> {
    if points.len() < min {
        return Err(Error::InsufficientData(format!(
            "{what} needs at least {min} sizes, got {}",
            points.len()
        )));
    }
    Ok(())
}

/// `peak = slope ln N + intercept`.
pub fn fit_log_divergence<T: Real>(points: &[(usize, T)]) -> Result<LinearFit<T>> {
    need(points, 3, "logarithmic fit")?;
    let x: Vec<T> = points
        .iter()
        .map(|&(n, _)| T::from_usize_lossy(n).ln())
        .collect();
    let y: Vec<T> = points.iter().map(|&(_, v)| v).collect();
    linear_fit(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftFit<T> {
    pub lambda: T,
    pub amplitude: T,
    pub constant: T,
    pub r_squared: T,
}

/// `h_c - h_c^N = a N^{-lambda} (ln N + c)`, with `lambda` profiled over
/// `[0.5, 4]`. Residuals are taken relative to each shift, so every size
/// counts equally although the shifts span orders of magnitude.
pub fn fit_shift_exponent<T: Real>(points: &[(usize, T)], h_c: T) -> Result<ShiftFit<T>> {
    need(points, 4, "shift-exponent fit")?;
    let y: Vec<T> = points.iter().map(|&(_, h)| h_c - h).collect();
    if y.iter().any(|&v| !(v.abs() > T::zero())) {
        return Err(Error::InvalidParams(
            "shift-exponent fit needs h_c^N != h_c for every size".into(),
        ));
    }
    let model = |n: usize, lambda: T, a: T, ac: T| {
        let nf = T::from_usize_lossy(n);
        nf.powf(-lambda) * (a * nf.ln() + ac)
    };
    let solve = |lambda: T| -> (T, T, T) {
        // weighted linear least squares on {N^-l ln N, N^-l}, weights 1 / y^2
        let (mut s11, mut s12, mut s22, mut b1, mut b2) =
            (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for (&(n, _), &yy) in points.iter().zip(&y) {
            let nf = T::from_usize_lossy(n);
            let f2 = nf.powf(-lambda) / yy;
            let f1 = f2 * nf.ln();
            s11 += f1 * f1;
            s12 += f1 * f2;
            s22 += f2 * f2;
            b1 += f1;
            b2 += f2;
        }
        let det = s11 * s22 - s12 * s12;
        let a = (b1 * s22 - b2 * s12) / det;
        let ac = (s11 * b2 - s12 * b1) / det;
        let ssr = points
            .iter()
            .zip(&y)
            .map(|(&(n, _), &yy)| {
                let r = T::one() - model(n, lambda, a, ac) / yy;
                r * r
            })
            .sum();
        (ssr, a, ac)
    };
    let lambda = minimize_scalar(|l| solve(l).0, T::lit(0.5), T::lit(4.0), 64, T::lit(1e-8));
    let (_, a, ac) = solve(lambda);
    let pred: Vec<T> = points
        .iter()
        .map(|&(n, _)| model(n, lambda, a, ac))
        .collect();
    Ok(ShiftFit {
        lambda,
        amplitude: a,
        constant: ac / a,
        r_squared: r_squared(&y, &pred),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsPeakFit<T> {
    pub b: T,
    pub r_squared: T,
}

/// `chi_F(h_c^N) = N^2 / 32 - b N` with the quadratic coefficient fixed.
pub fn fit_fs_peak<T: Real>(points: &[(usize, T)]) -> Result<FsPeakFit<T>> {
    need(points, 3, "fidelity peak fit")?;
    let c = T::lit(1.0 / 32.0);
    let (mut num, mut den) = (T::zero(), T::zero());
    for &(n, y) in points {
        let nf = T::from_usize_lossy(n);
        num += (c * nf * nf - y) * nf;
        den += nf * nf;
    }
    let b = num / den;
    let obs: Vec<T> = points.iter().map(|&(_, y)| y).collect();
    let pred: Vec<T> = points
        .iter()
        .map(|&(n, _)| {
            let nf = T::from_usize_lossy(n);
            c * nf * nf - b * nf
        })
        .collect();
    Ok(FsPeakFit {
        b,
        r_squared: r_squared(&obs, &pred),
    })
}

/// `chi_F = slope N + intercept` at a fixed off-critical field.
pub fn linear_fs_scaling<T: Real>(points: &[(usize, T)]) -> Result<LinearFit<T>> {
    need(points, 3, "linear size scaling")?;
    let x: Vec<T> = points
        .iter()
        .map(|&(n, _)| T::from_usize_lossy(n))
        .collect();
    let y: Vec<T> = points.iter().map(|&(_, v)| v).collect();
    linear_fit(&x, &y)
}

/// Fit of `a + b / |ln h|` on the side of `h = 1` selected by the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiFit<T> {
    pub a: T,
    pub b: T,
    pub r_squared: T,
    /// Field interval `[lo, hi]` where relative residuals stay below the bound.
    pub window: Option<(T, T)>,
    pub max_rel_residual: T,
}

impl<T: Real> XiFit<T> {
    pub fn window_width(&self) -> T {
        self.window.map_or(T::zero(), |(lo, hi)| hi - lo)
    }
}

/// Fits `chi = a + b xi` with `xi = 1 / |ln h|` on the samples of one side of
/// the critical field. The window grows from the sample farthest from
/// `h = 1` towards criticality while every relative residual of the refit
/// stays below `rel_tol`.
pub fn xi_scaling_fit<T: Real>(points: &[(T, T)], rel_tol: T) -> Result<XiFit<T>> {
    let mut pts: Vec<(T, T)> = points
        .iter()
        .copied()
        .filter(|&(h, _)| h > T::zero() && h != T::one())
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(
            "xi fit needs three samples away from h = 1".into(),
        ));
    }
    let below = pts.iter().filter(|&&(h, _)| h < T::one()).count();
    if below != 0 && below != pts.len() {
        return Err(Error::InvalidParams(
            "xi fit samples must lie on one side of h = 1".into(),
        ));
    }
    // farthest from criticality first
    pts.sort_by(|a, b| {
        let da = a.0.ln().abs();
        let db = b.0.ln().abs();
        db.partial_cmp(&da).expect("finite fields")
    });
    let fit_on = |sub: &[(T, T)]| -> Result<(LinearFit<T>, T)> {
        let x: Vec<T> = sub.iter().map(|&(h, _)| T::one() / h.ln().abs()).collect();
        let y: Vec<T> = sub.iter().map(|&(_, v)| v).collect();
        let f = linear_fit(&x, &y)?;
        let worst = x
            .iter()
            .zip(&y)
            .map(|(&xx, &yy)| ((f.intercept + f.slope * xx - yy) / yy).abs())
            .fold(T::zero(), T::max);
        Ok((f, worst))
    };
    let mut best: Option<(usize, LinearFit<T>, T)> = None;
    for len in 3..=pts.len() {
        let (f, worst) = fit_on(&pts[..len])?;
        if worst <= rel_tol {
            best = Some((len, f, worst));
        } else if best.is_some() {
            break;
        }
    }
    match best {
        Some((len, f, worst)) => {
            let hs = pts[..len].iter().map(|&(h, _)| h);
            let lo = hs.clone().fold(T::infinity(), T::min);
            let hi = hs.fold(T::neg_infinity(), T::max);
            Ok(XiFit {
                a: f.intercept,
                b: f.slope,
                r_squared: f.r_squared,
                window: Some((lo, hi)),
                max_rel_residual: worst,
            })
        }
        None => {
            let (f, worst) = fit_on(&pts)?;
            Ok(XiFit {
                a: f.intercept,
                b: f.slope,
                r_squared: f.r_squared,
                window: None,
                max_rel_residual: worst,
            })
        }
    }
}
