use crate::scalar::Real;

/// Values of `f` on `count` equally spaced points of `[lo, hi]`.
pub fn scan<T: Real>(f: &impl Fn(T) -> T, lo: T, hi: T, count: usize) -> Vec<(T, T)> {
    let count = count.max(2);
    (0..count)
        .map(|i| {
            let x = lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(count - 1);
            (x, f(x))
        })
        .collect()
}

/// Deterministic 1-D minimiser: a coarse scan locates the best bracket, then
/// golden-section search refines it to `tol`.
pub fn minimize_scalar<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, scan_points: usize, tol: T) -> T {
    let grid = scan(&f, lo, hi, scan_points);
    let best = grid
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1 .1
                .partial_cmp(&b.1 .1)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let a0 = grid[best.saturating_sub(1)].0;
    let b0 = grid[(best + 1).min(grid.len() - 1)].0;
    golden_section(&f, a0, b0, tol)
}

pub fn golden_section<T: Real>(f: &impl Fn(T) -> T, lo: T, hi: T, tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / T::lit(2.0);
    // the endpoints of the original bracket may beat the interior
    [(lo, f(lo)), (mid, f(mid)), (hi, f(hi))]
        .into_iter()
        .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|p| p.0)
        .unwrap_or(mid)
}
