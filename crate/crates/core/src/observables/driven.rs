//! Quantities that need whole pipelines (ground state plus drive) at shifted
//! base fields: susceptibilities and the driven fidelity.

use crate::error::{Error, Result};
use crate::floquet::{monodromy_with_steps, stroboscopic_state, Monodromy};
use crate::lattice::{ground_state, ModeState, ModelParams};
use crate::scalar::Real;

use super::entanglement::nearest_neighbour_concurrence;
use super::{state_overlap, transverse_magnetization};

/// Ground state at the base field `params.h0` driven by
/// `h0 + dh sin(omega t)`, integrated on a fixed step count.
#[derive(Debug, Clone)]
pub struct Pipeline<T> {
    initial: ModeState<T>,
    mono: Monodromy<T>,
}

impl<T: Real> Pipeline<T> {
    pub fn new(params: &ModelParams<T>, steps_per_period: usize) -> Result<Self> {
        let mono = monodromy_with_steps(params, steps_per_period)?;
        Ok(Self {
            initial: ground_state(params, params.h0),
            mono,
        })
    }

    pub fn initial(&self) -> &ModeState<T> {
        &self.initial
    }

    pub fn monodromy(&self) -> &Monodromy<T> {
        &self.mono
    }

    pub fn state(&self, n: u64) -> Result<ModeState<T>> {
        stroboscopic_state(&self.initial, &self.mono, n)
    }
}

/// Finite-difference estimate with a crude round-off bound.
#[derive(Debug, Clone, Copy)]
pub struct Derivative<T> {
    pub value: T,
    pub noise_estimate: T,
}

impl<T: Real> Derivative<T> {
    /// True when round-off may dominate the difference quotient.
    pub fn below_noise_floor(&self) -> bool {
        self.noise_estimate > T::lit(1e-3) * self.value.abs()
    }
}

fn roundoff<T: Real>(steps: usize, n: u64) -> T {
    T::epsilon()
        * (T::from_usize_lossy(steps) * T::from_usize_lossy(n as usize + 1)).sqrt()
        * T::lit(16.0)
}

fn central_difference<T: Real>(
    params: &ModelParams<T>,
    h: T,
    n: u64,
    fd_step: T,
    steps: usize,
    f: impl Fn(&ModeState<T>) -> Result<T>,
) -> Result<Derivative<T>> {
    if !(fd_step > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "finite-difference step must be positive, got {fd_step}"
        )));
    }
    let plus = Pipeline::new(&params.with_field(h + fd_step), steps)?.state(n)?;
    let minus = Pipeline::new(&params.with_field(h - fd_step), steps)?.state(n)?;
    let two_d = T::lit(2.0) * fd_step;
    Ok(Derivative {
        value: (f(&plus)? - f(&minus)?) / two_d,
        noise_estimate: roundoff::<T>(steps, n) / two_d,
    })
}

/// `d<sigma^z>/dh` at stroboscopic time `n`, moving both the initial ground
/// state and the base field of the drive.
pub fn chi_z<T: Real>(
    params: &ModelParams<T>,
    h: T,
    n: u64,
    fd_step: T,
    steps: usize,
) -> Result<Derivative<T>> {
    central_difference(params, h, n, fd_step, steps, |s| {
        Ok(transverse_magnetization(s))
    })
}

/// `dC_{i,i+1}/dh` with the same protocol as [`chi_z`].
pub fn d_concurrence_dh<T: Real>(
    params: &ModelParams<T>,
    h: T,
    n: u64,
    fd_step: T,
    steps: usize,
) -> Result<Derivative<T>> {
    central_difference(params, h, n, fd_step, steps, nearest_neighbour_concurrence)
}

#[derive(Debug, Clone, Copy)]
pub struct DrivenFidelity<T> {
    pub fidelity: T,
    pub one_minus: T,
    pub chi_f: T,
    pub noise_estimate: T,
}

impl<T: Real> DrivenFidelity<T> {
    pub fn below_noise_floor(&self) -> bool {
        self.one_minus < T::lit(100.0) * self.noise_estimate
    }
}

/// Overlap of the pipelines based at `h` and `h + delta_h` after `n` periods,
/// with `chi_F = 2 (1 - F) / delta_h^2`.
pub fn driven_fidelity<T: Real>(
    params: &ModelParams<T>,
    h: T,
    delta_h: T,
    n: u64,
    steps: usize,
) -> Result<DrivenFidelity<T>> {
    if !(delta_h > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "fidelity offset must be positive, got {delta_h}"
        )));
    }
    let a = Pipeline::new(&params.with_field(h), steps)?.state(n)?;
    let b = Pipeline::new(&params.with_field(h + delta_h), steps)?.state(n)?;
    let o = state_overlap(&a, &b)?;
    Ok(DrivenFidelity {
        fidelity: o.fidelity,
        one_minus: o.one_minus,
        chi_f: T::lit(2.0) * o.one_minus / (delta_h * delta_h),
        noise_estimate: roundoff::<T>(steps, n) * T::from_usize_lossy(a.n_modes()).sqrt(),
    })
}
