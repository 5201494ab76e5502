//! Driven XY chain: parameters, momentum grid, quasiparticle dispersion and
//! the BCS ground state.
//!
//! Each pair `(k, -k)` of Jordan-Wigner fermions is described by two
//! amplitudes: `u` on the empty pair and `v` on the doubly occupied pair.
//! The Bogoliubov angle `theta = atan2(gamma sin k, h - cos k)` fixes the
//! ground state as `(cos theta/2, sin theta/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, Cplx, Real};

/// Static chain and drive parameters. Time is measured in units where the
/// exchange coupling and `hbar` are one; the field is `h0 + dh sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub n_sites: usize,
    pub gamma: T,
    pub h0: T,
    pub dh: T,
    pub omega: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(n_sites: usize, gamma: T, h0: T, dh: T, omega: T) -> Result<Self> {
        let p = Self {
            n_sites,
            gamma,
            h0,
            dh,
            omega,
        };
        p.validate()?;
        Ok(p)
    }

    /// Undriven chain; `omega` only sets the stroboscopic period.
    pub fn undriven(n_sites: usize, gamma: T, h0: T, omega: T) -> Result<Self> {
        Self::new(n_sites, gamma, h0, T::zero(), omega)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 4 || !self.n_sites.is_multiple_of(2) {
            return Err(Error::OddOrSmallChain(self.n_sites));
        }
        if !(self.gamma > T::zero() && self.gamma <= T::one()) {
            return Err(Error::InvalidParams(format!(
                "anisotropy must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.omega > T::zero()) || !self.omega.is_finite() {
            return Err(Error::InvalidParams(format!(
                "drive frequency must be positive, got {}",
                self.omega
            )));
        }
        if !(self.dh >= T::zero()) || !self.dh.is_finite() {
            return Err(Error::InvalidParams(format!(
                "drive amplitude must be non-negative, got {}",
                self.dh
            )));
        }
        if !self.h0.is_finite() {
            return Err(Error::InvalidParams("static field must be finite".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> T {
        T::TAU() / self.omega
    }

    pub fn field(&self, t: T) -> T {
        self.h0 + self.dh * (self.omega * t).sin()
    }

    /// Same chain and drive, re-based around a different static field.
    pub fn with_field(&self, h0: T) -> Self {
        Self { h0, ..*self }
    }

    pub fn with_sites(&self, n_sites: usize) -> Self {
        Self { n_sites, ..*self }
    }
}

/// Momenta `k_m = pi (2m - 1) / N`, `m = 1..N/2`, of the even-parity sector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid<T> {
    momenta: Vec<T>,
    n_sites: usize,
}

impl<T: Real> ModeGrid<T> {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites == 0 || !n_sites.is_multiple_of(2) {
            return Err(Error::OddOrSmallChain(n_sites));
        }
        let nf = T::from_usize_lossy(n_sites);
        let momenta = (1..=n_sites / 2)
            .map(|m| T::PI() * T::from_usize_lossy(2 * m - 1) / nf)
            .collect();
        Ok(Self { momenta, n_sites })
    }

    pub fn momenta(&self) -> &[T] {
        &self.momenta
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn spacing(&self) -> T {
        T::TAU() / T::from_usize_lossy(self.n_sites)
    }
}

pub fn mode_grid<T: Real>(params: &ModelParams<T>) -> Result<ModeGrid<T>> {
    ModeGrid::new(params.n_sites)
}

/// Quasiparticle energy `sqrt((h - cos k)^2 + (gamma sin k)^2)`.
pub fn dispersion<T: Real>(gamma: T, k: T, h: T) -> T {
    (h - k.cos()).hypot(gamma * k.sin())
}

/// Bogoliubov angle in `[0, pi)` for momenta in `(0, pi)`.
pub fn bogoliubov_angle<T: Real>(gamma: T, k: T, h: T) -> T {
    (gamma * k.sin()).atan2(h - k.cos())
}

/// Pair amplitudes `(u_k, v_k)` for every momentum of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState<T> {
    pub(crate) n_sites: usize,
    pub(crate) amps: Vec<[Cplx<T>; 2]>,
}

impl<T: Real> ModeState<T> {
    pub fn from_amplitudes(n_sites: usize, amps: Vec<[Cplx<T>; 2]>) -> Result<Self> {
        if !n_sites.is_multiple_of(2) || amps.len() != n_sites / 2 {
            return Err(Error::GridMismatch {
                expected: n_sites / 2,
                found: amps.len(),
            });
        }
        Ok(Self { n_sites, amps })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[[Cplx<T>; 2]] {
        &self.amps
    }

    pub fn u(&self, m: usize) -> Cplx<T> {
        self.amps[m][0]
    }

    pub fn v(&self, m: usize) -> Cplx<T> {
        self.amps[m][1]
    }

    pub fn grid(&self) -> ModeGrid<T> {
        ModeGrid::new(self.n_sites).expect("state built on a valid grid")
    }

    /// Largest `| |u|^2 + |v|^2 - 1 |` over modes.
    pub fn normalization_defect(&self) -> T {
        self.amps
            .iter()
            .map(|[u, v]| (u.norm_sqr() + v.norm_sqr() - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::GridMismatch {
                expected: self.amps.len(),
                found: other.amps.len(),
            });
        }
        Ok(())
    }
}

/// Ground state of the static chain at field `h`: every mode in its
/// Bogoliubov vacuum.
pub fn ground_state<T: Real>(params: &ModelParams<T>, h: T) -> ModeState<T> {
    let half = T::lit(0.5);
    let amps = ModeGrid::new(params.n_sites)
        .expect("validated params")
        .momenta()
        .iter()
        .map(|&k| {
            let (s, c) = (half * bogoliubov_angle(params.gamma, k, h)).sin_cos();
            [cplx(c, T::zero()), cplx(s, T::zero())]
        })
        .collect();
    ModeState {
        n_sites: params.n_sites,
        amps,
    }
}

/// Excited partner `(-sin theta/2, cos theta/2)` of the ground pair state.
pub(crate) fn excited_pair<T: Real>(gamma: T, k: T, h: T) -> [Cplx<T>; 2] {
    let (s, c) = (T::lit(0.5) * bogoliubov_angle(gamma, k, h)).sin_cos();
    [cplx(-s, T::zero()), cplx(c, T::zero())]
}

/// Free-fermion ground-state energy `-sum_k eps_k` over all momenta.
pub fn ground_energy<T: Real>(params: &ModelParams<T>, h: T) -> T {
    let grid = ModeGrid::new(params.n_sites).expect("validated params");
    -T::lit(2.0)
        * grid
            .momenta()
            .iter()
            .map(|&k| dispersion(params.gamma, k, h))
            .sum::<T>()
}
