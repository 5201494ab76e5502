//! Parallel evaluation of observables over `(N, h, n)` grids.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{resolve_steps, DEFAULT_TOL};
use crate::lattice::{ModeState, ModelParams};
use crate::observables::{
    half_chain_entropy, loschmidt_echo, nearest_neighbour_concurrence, state_overlap,
    transverse_magnetization, work, ObservableKind, ObservableRecord, Pipeline,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings<T> {
    /// Half-width of the central differences for `chi_z` and `dC/dh`.
    pub fd_step: T,
    /// Field offset of the fidelity.
    pub fidelity_dh: T,
    /// Integrator tolerance used to pick the step count per chain length.
    pub tol: T,
}

impl<T: Real> Default for SweepSettings<T> {
    fn default() -> Self {
        Self {
            fd_step: T::lit(1e-4),
            fidelity_dh: T::lit(1e-5),
            tol: T::lit(DEFAULT_TOL),
        }
    }
}

/// Drive shared by every cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive<T> {
    pub gamma: T,
    pub dh: T,
    pub omega: T,
}

impl<T: Real> Drive<T> {
    pub fn params(&self, n_sites: usize, h: T) -> Result<ModelParams<T>> {
        ModelParams::new(n_sites, self.gamma, h, self.dh, self.omega)
    }
}

/// Step count per period for chains of `n_sites` driven around any of `fields`.
pub fn steps_for<T: Real>(drive: &Drive<T>, n_sites: usize, fields: &[T], tol: T) -> Result<usize> {
    let mut steps = 1;
    let lo = fields.iter().copied().fold(T::infinity(), T::min);
    let hi = fields.iter().copied().fold(T::neg_infinity(), T::max);
    for h in [lo, hi] {
        if h.is_finite() {
            steps = steps.max(resolve_steps(&drive.params(n_sites, h)?, tol)?);
        }
    }
    Ok(steps)
}

fn record<T: Real>(
    drive: &Drive<T>,
    n_sites: usize,
    h: T,
    n: u64,
    kind: ObservableKind,
    value: T,
) -> ObservableRecord<T> {
    ObservableRecord {
        kind,
        n_sites,
        gamma: drive.gamma,
        h,
        dh: drive.dh,
        omega: drive.omega,
        n,
        value,
        per_k: None,
    }
}

/// All requested observables at one `(N, h)` for every `n`, integrated on
/// `steps` steps per period.
pub fn evaluate_cell<T: Real>(
    drive: &Drive<T>,
    n_sites: usize,
    h: T,
    ns: &[u64],
    kinds: &[ObservableKind],
    settings: &SweepSettings<T>,
    steps: usize,
) -> Result<Vec<ObservableRecord<T>>> {
    let has = |k: ObservableKind| kinds.contains(&k);
    let base = Pipeline::new(&drive.params(n_sites, h)?, steps)?;
    let needs_fd = has(ObservableKind::ChiZ) || has(ObservableKind::DcDh);
    let shifted = if needs_fd {
        Some((
            Pipeline::new(&drive.params(n_sites, h + settings.fd_step)?, steps)?,
            Pipeline::new(&drive.params(n_sites, h - settings.fd_step)?, steps)?,
        ))
    } else {
        None
    };
    let needs_fid = has(ObservableKind::Fidelity) || has(ObservableKind::ChiF);
    let offset = if needs_fid {
        Some(Pipeline::new(
            &drive.params(n_sites, h + settings.fidelity_dh)?,
            steps,
        )?)
    } else {
        None
    };
    let two_d = T::lit(2.0) * settings.fd_step;
    let mut out = Vec::new();
    for &n in ns {
        let s = base.state(n)?;
        let mut push = |kind: ObservableKind, value: T, per_k: Option<Vec<T>>| -> Result<()> {
            let mut r = record(drive, n_sites, h, n, kind, value);
            r.per_k = per_k;
            r.check_range()?;
            out.push(r);
            Ok(())
        };
        let fd_states: Option<(ModeState<T>, ModeState<T>)> = match &shifted {
            Some((p, m)) => Some((p.state(n)?, m.state(n)?)),
            None => None,
        };
        for &kind in kinds {
            match kind {
                ObservableKind::SigmaZ => push(kind, transverse_magnetization(&s), None)?,
                ObservableKind::Concurrence => {
                    push(kind, nearest_neighbour_concurrence(&s)?, None)?
                }
                ObservableKind::EntropyHalf => push(kind, half_chain_entropy(&s)?, None)?,
                ObservableKind::Loschmidt => {
                    let l = loschmidt_echo(base.initial(), &s)?;
                    push(kind, l.echo, Some(l.per_k))?
                }
                ObservableKind::Work => {
                    let w = work(&s, &drive.params(n_sites, h)?, h)?;
                    push(kind, w.total, Some(w.per_k))?
                }
                ObservableKind::ChiZ => {
                    let (p, m) = fd_states.as_ref().expect("shifted pipelines built");
                    let v = (transverse_magnetization(p) - transverse_magnetization(m)) / two_d;
                    push(kind, v, None)?
                }
                ObservableKind::DcDh => {
                    let (p, m) = fd_states.as_ref().expect("shifted pipelines built");
                    let v = (nearest_neighbour_concurrence(p)? - nearest_neighbour_concurrence(m)?)
                        / two_d;
                    push(kind, v, None)?
                }
                ObservableKind::Fidelity | ObservableKind::ChiF => {
                    let b = offset.as_ref().expect("offset pipeline built").state(n)?;
                    let o = state_overlap(&s, &b)?;
                    let v = if kind == ObservableKind::Fidelity {
                        o.fidelity
                    } else {
                        T::lit(2.0) * o.one_minus / (settings.fidelity_dh * settings.fidelity_dh)
                    };
                    push(kind, v, None)?
                }
            }
        }
    }
    Ok(out)
}

/// A rectangular sweep: every size on its own field grid, every `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec<T> {
    pub drive: Drive<T>,
    pub grids: Vec<(usize, Vec<T>)>,
    pub ns: Vec<u64>,
    pub kinds: Vec<ObservableKind>,
    pub settings: SweepSettings<T>,
}

/// Failure of one cell, with its coordinates.
#[derive(Debug, Clone)]
pub struct CellError {
    pub n_sites: usize,
    pub h: f64,
    pub error: Error,
}

impl std::fmt::Display for CellError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "cell N = {}, h = {}: {}",
            self.n_sites, self.h, self.error
        )
    }
}

impl std::error::Error for CellError {}

/// Canonical record order: kind, size, field, time.
pub fn sort_records<T: Real>(records: &mut [ObservableRecord<T>]) {
    records.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.n_sites.cmp(&b.n_sites))
            .then(a.h.partial_cmp(&b.h).unwrap_or(Ordering::Equal))
            .then(a.n.cmp(&b.n))
    });
}

/// Evaluates every cell on the current rayon pool, largest chains first, and
/// returns the records in canonical order.
pub fn run_sweep<T: Real>(
    spec: &SweepSpec<T>,
) -> std::result::Result<Vec<ObservableRecord<T>>, CellError> {
    let steps: Vec<(usize, usize)> = spec
        .grids
        .par_iter()
        .map(|(n_sites, fields)| {
            steps_for(&spec.drive, *n_sites, fields, spec.settings.tol)
                .map(|s| (*n_sites, s))
                .map_err(|error| CellError {
                    n_sites: *n_sites,
                    h: f64::NAN,
                    error,
                })
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut cells: Vec<(usize, T, usize)> = spec
        .grids
        .iter()
        .zip(&steps)
        .flat_map(|((n_sites, fields), &(_, s))| fields.iter().map(move |&h| (*n_sites, h, s)))
        .collect();
    cells.sort_by_key(|c| std::cmp::Reverse(c.0));
    let chunks: Vec<Vec<ObservableRecord<T>>> = cells
        .par_iter()
        .map(|&(n_sites, h, steps)| {
            evaluate_cell(
                &spec.drive,
                n_sites,
                h,
                &spec.ns,
                &spec.kinds,
                &spec.settings,
                steps,
            )
            .map_err(|error| CellError {
                n_sites,
                h: h.as_f64(),
                error,
            })
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut out: Vec<ObservableRecord<T>> = chunks.into_iter().flatten().collect();
    sort_records(&mut out);
    Ok(out)
}

/// `count` equally spaced fields on `[lo, hi]`.
pub fn linspace<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(count - 1))
            .collect(),
    }
}

/// Fields `center + x / N` for `x` equally spaced on `[x_lo, x_hi]`.
pub fn scaled_grid<T: Real>(n_sites: usize, center: T, x_lo: T, x_hi: T, count: usize) -> Vec<T> {
    let nf = T::from_usize_lossy(n_sites);
    linspace(x_lo, x_hi, count)
        .into_iter()
        .map(|x| center + x / nf)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_cell_is_frozen() {
        let drive = Drive {
            gamma: 1.0,
            dh: 0.0,
            omega: 2.0,
        };
        let kinds = ObservableKind::ALL.to_vec();
        let recs = evaluate_cell(
            &drive,
            32,
            1.05,
            &[0, 3, 7],
            &kinds,
            &SweepSettings::default(),
            16,
        )
        .unwrap();
        for kind in kinds {
            let vals: Vec<f64> = recs
                .iter()
                .filter(|r| r.kind == kind)
                .map(|r| r.value)
                .collect();
            assert_eq!(vals.len(), 3);
            for v in &vals {
                assert!((v - vals[0]).abs() < 1e-9, "{kind}: {vals:?}");
            }
        }
    }

    #[test]
    fn sweep_order_is_canonical() {
        let spec = SweepSpec {
            drive: Drive {
                gamma: 1.0,
                dh: 0.1,
                omega: 6.0,
            },
            grids: vec![(16, linspace(0.9, 1.1, 3)), (8, linspace(0.9, 1.1, 3))],
            ns: vec![2, 0],
            kinds: vec![ObservableKind::Work, ObservableKind::SigmaZ],
            settings: SweepSettings::default(),
        };
        let recs = run_sweep(&spec).unwrap();
        assert_eq!(recs.len(), 24);
        assert_eq!(recs[0].kind, ObservableKind::SigmaZ);
        assert_eq!(recs[0].n_sites, 8);
        assert_eq!(recs[0].n, 0);
        assert!(recs
            .iter()
            .filter(|r| r.kind == ObservableKind::Work)
            .all(|r| r.per_k.is_some()));
    }
}
