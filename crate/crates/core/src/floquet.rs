//! One-period propagators of the driven Bogoliubov-de Gennes problem and the
//! resulting Floquet quasienergy spectrum.
//!
//! Each mode obeys `i d/dt (u, v) = H_k(t) (u, v)` with
//! `H_k(t) = (cos k - h(t)) sigma_z - gamma sin k sigma_x`. The generator is
//! traceless and Hermitian, so every step of the integrator is an exact SU(2)
//! rotation: a sixth-order Magnus step on three Gauss-Legendre nodes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{ModeGrid, ModeState, ModelParams};
use crate::linalg::{cross, Su2};
use crate::scalar::{cplx, Cplx, Real};

/// Upper bound on steps per period before giving up.
pub const MAX_STEPS_PER_PERIOD: usize = 1 << 22;

/// Default target for the per-period propagator error.
pub const DEFAULT_TOL: f64 = 1e-10;

#[inline]
fn generator<T: Real>(params: &ModelParams<T>, sin_k: T, cos_k: T, t: T) -> [T; 3] {
    [-params.gamma * sin_k, T::zero(), cos_k - params.field(t)]
}

fn magnus6_step<T: Real>(params: &ModelParams<T>, sin_k: T, cos_k: T, t: T, dt: T) -> Su2<T> {
    let half = T::lit(0.5);
    let off = T::lit(15.0).sqrt() / T::lit(10.0);
    let h1 = generator(params, sin_k, cos_k, t + (half - off) * dt);
    let h2 = generator(params, sin_k, cos_k, t + half * dt);
    let h3 = generator(params, sin_k, cos_k, t + (half + off) * dt);

    let two = T::lit(2.0);
    let c2 = T::lit(15.0).sqrt() * dt / T::lit(3.0);
    let c3 = T::lit(10.0) * dt / T::lit(3.0);
    let mut a1 = [T::zero(); 3];
    let mut a2 = [T::zero(); 3];
    let mut a3 = [T::zero(); 3];
    for i in 0..3 {
        a1[i] = dt * h2[i];
        a2[i] = c2 * (h3[i] - h1[i]);
        a3[i] = c3 * (h3[i] - two * h2[i] + h1[i]);
    }
    // In the su(2) vector picture [A, B] maps to 2 a x b.
    let bracket = |x: [T; 3], y: [T; 3]| {
        let z = cross(x, y);
        [two * z[0], two * z[1], two * z[2]]
    };
    let comm1 = bracket(a1, a2);
    let inner = [
        two * a3[0] + comm1[0],
        two * a3[1] + comm1[1],
        two * a3[2] + comm1[2],
    ];
    let b = bracket(a1, inner);
    let sixtieth = T::lit(1.0 / 60.0);
    let comm2 = [-sixtieth * b[0], -sixtieth * b[1], -sixtieth * b[2]];
    let left = [
        -T::lit(20.0) * a1[0] - a3[0] + comm1[0],
        -T::lit(20.0) * a1[1] - a3[1] + comm1[1],
        -T::lit(20.0) * a1[2] - a3[2] + comm1[2],
    ];
    let right = [a2[0] + comm2[0], a2[1] + comm2[1], a2[2] + comm2[2]];
    let last = bracket(left, right);
    let twelfth = T::lit(1.0 / 12.0);
    let w240 = T::lit(1.0 / 240.0);
    let omega = [
        a1[0] + twelfth * a3[0] + w240 * last[0],
        a1[1] + twelfth * a3[1] + w240 * last[1],
        a1[2] + twelfth * a3[2] + w240 * last[2],
    ];
    Su2::exp_rotation(omega)
}

/// Time-ordered propagator of mode `k` from `t0` to `t1` using `steps`
/// uniform Magnus steps.
pub fn mode_propagator<T: Real>(
    params: &ModelParams<T>,
    k: T,
    t0: T,
    t1: T,
    steps: usize,
) -> Su2<T> {
    let steps = steps.max(1);
    let dt = (t1 - t0) / T::from_usize_lossy(steps);
    let (sin_k, cos_k) = k.sin_cos();
    let mut u = Su2::identity();
    for s in 0..steps {
        let t = t0 + dt * T::from_usize_lossy(s);
        u = magnus6_step(params, sin_k, cos_k, t, dt) * u;
    }
    u
}

/// One-period propagators `U_k(T)` for every momentum of the grid.
#[derive(Debug, Clone)]
pub struct Monodromy<T> {
    params: ModelParams<T>,
    grid: ModeGrid<T>,
    propagators: Vec<Su2<T>>,
    steps_per_period: usize,
    error_estimate: T,
}

impl<T: Real> Monodromy<T> {
    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn grid(&self) -> &ModeGrid<T> {
        &self.grid
    }

    pub fn propagators(&self) -> &[Su2<T>] {
        &self.propagators
    }

    pub fn steps_per_period(&self) -> usize {
        self.steps_per_period
    }

    /// Max-norm difference to the propagators on half as many steps, or zero
    /// when the step count was imposed.
    pub fn error_estimate(&self) -> T {
        self.error_estimate
    }

    pub fn unitarity_defect(&self) -> T {
        self.propagators
            .iter()
            .map(Su2::unitarity_defect)
            .fold(T::zero(), T::max)
    }
}

fn propagators_for<T: Real>(
    params: &ModelParams<T>,
    grid: &ModeGrid<T>,
    steps: usize,
    periods: usize,
) -> Vec<Su2<T>> {
    let t1 = params.period() * T::from_usize_lossy(periods);
    let total = steps * periods;
    grid.momenta()
        .par_iter()
        .map(|&k| mode_propagator(params, k, T::zero(), t1, total))
        .collect()
}

fn initial_steps<T: Real>(params: &ModelParams<T>) -> usize {
    let hmax = (T::one() + params.h0.abs() + params.dh).hypot(params.gamma);
    let scale = (params.period() * (hmax + params.omega)).as_f64();
    (scale.ceil() as usize).clamp(8, 1 << 16)
}

/// Smallest power-of-two refinement of the initial step count whose
/// propagators agree with the half-as-fine ones to `tol`.
pub fn resolve_steps<T: Real>(params: &ModelParams<T>, tol: T) -> Result<usize> {
    Ok(monodromy(params, tol)?.steps_per_period)
}

/// Builds all one-period propagators, refining the step count until two
/// successive refinements agree to `tol`.
pub fn monodromy<T: Real>(params: &ModelParams<T>, tol: T) -> Result<Monodromy<T>> {
    params.validate()?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let grid = ModeGrid::new(params.n_sites)?;
    let mut steps = initial_steps(params);
    let mut coarse = propagators_for(params, &grid, steps, 1);
    loop {
        let fine_steps = steps * 2;
        if fine_steps > MAX_STEPS_PER_PERIOD {
            return Err(Error::StepUnderflow {
                tol: tol.as_f64(),
                steps: fine_steps,
            });
        }
        let fine = propagators_for(params, &grid, fine_steps, 1);
        let err = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| c.max_abs_diff(f))
            .fold(T::zero(), T::max);
        if err < tol {
            return Ok(Monodromy {
                params: *params,
                grid,
                propagators: fine,
                steps_per_period: fine_steps,
                error_estimate: err,
            });
        }
        steps = fine_steps;
        coarse = fine;
    }
}

/// Propagators on an imposed step count. Used when several pipelines must
/// share one integration grid (finite differences in `h`).
pub fn monodromy_with_steps<T: Real>(
    params: &ModelParams<T>,
    steps: usize,
) -> Result<Monodromy<T>> {
    params.validate()?;
    let grid = ModeGrid::new(params.n_sites)?;
    let propagators = propagators_for(params, &grid, steps.max(1), 1);
    Ok(Monodromy {
        params: *params,
        grid,
        propagators,
        steps_per_period: steps.max(1),
        error_estimate: T::zero(),
    })
}

/// Propagators over `periods` consecutive periods integrated in one sweep.
pub fn multi_period_propagators<T: Real>(
    params: &ModelParams<T>,
    periods: usize,
    steps_per_period: usize,
) -> Result<Vec<Su2<T>>> {
    params.validate()?;
    let grid = ModeGrid::new(params.n_sites)?;
    Ok(propagators_for(params, &grid, steps_per_period, periods))
}

/// State after `n` drive periods: `U_k(T)^n` applied mode by mode.
pub fn stroboscopic_state<T: Real>(
    initial: &ModeState<T>,
    mono: &Monodromy<T>,
    n: u64,
) -> Result<ModeState<T>> {
    if initial.n_modes() != mono.propagators.len() {
        return Err(Error::GridMismatch {
            expected: mono.propagators.len(),
            found: initial.n_modes(),
        });
    }
    if n == 0 {
        return Ok(initial.clone());
    }
    let amps = initial
        .amplitudes()
        .iter()
        .zip(&mono.propagators)
        .map(|(x, u)| u.pow(n).apply(*x))
        .collect();
    ModeState::from_amplitudes(initial.n_sites(), amps)
}

/// Quasienergies and Floquet modes of one momentum.
#[derive(Debug, Clone, Copy)]
pub struct FloquetMode<T> {
    pub k: T,
    /// `mu_plus in [0, omega/2]`; `mu_minus = -mu_plus`.
    pub mu_plus: T,
    pub mu_minus: T,
    pub vec_plus: [Cplx<T>; 2],
    pub vec_minus: [Cplx<T>; 2],
    /// `U_k(T)` proportional to the identity to machine precision.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct FloquetSpectrum<T> {
    pub omega: T,
    pub period: T,
    pub n_sites: usize,
    pub modes: Vec<FloquetMode<T>>,
}

/// Folds a quasienergy into the first zone `[-omega/2, omega/2)`.
pub fn fold_quasienergy<T: Real>(mu: T, omega: T) -> T {
    let half = omega / T::lit(2.0);
    let mut x = mu - omega * ((mu + half) / omega).floor();
    if x >= half {
        x -= omega;
    }
    x
}

pub fn floquet_spectrum<T: Real>(mono: &Monodromy<T>) -> FloquetSpectrum<T> {
    let params = mono.params;
    let period = params.period();
    let modes = mono
        .grid
        .momenta()
        .iter()
        .zip(&mono.propagators)
        .map(|(&k, u)| {
            let (phi, axis) = u.axis_angle();
            let mut mu = phi / period;
            if mu >= params.omega / T::lit(2.0) {
                mu = -params.omega / T::lit(2.0);
            }
            let zero = cplx(T::zero(), T::zero());
            let one = cplx(T::one(), T::zero());
            let (vec_plus, vec_minus, degenerate) = match axis {
                Some([nx, ny, nz]) => {
                    let theta = nz.max(-T::one()).min(T::one()).acos();
                    let azim = ny.atan2(nx);
                    let (s, c) = (theta / T::lit(2.0)).sin_cos();
                    let phase = Cplx::from_polar(T::one(), azim);
                    let plus = [cplx(c, T::zero()), phase * s];
                    let minus = [-(phase.conj()) * s, cplx(c, T::zero())];
                    (plus, minus, false)
                }
                None => ([one, zero], [zero, one], true),
            };
            FloquetMode {
                k,
                mu_plus: mu,
                mu_minus: -mu,
                vec_plus,
                vec_minus,
                degenerate,
            }
        })
        .collect();
    FloquetSpectrum {
        omega: params.omega,
        period,
        n_sites: params.n_sites,
        modes,
    }
}

impl<T: Real> FloquetSpectrum<T> {
    /// `min over integer l of |mu+ - mu- - l omega|`.
    pub fn quasi_degeneracy_gap(&self, m: usize) -> T {
        let d = self.modes[m].mu_plus - self.modes[m].mu_minus;
        let l = (d / self.omega).round();
        (d - l * self.omega).abs()
    }

    /// Same as [`quasi_degeneracy_gap`](Self::quasi_degeneracy_gap) restricted
    /// to `l != 0`, i.e. crossings between different Brillouin-zone copies.
    pub fn interband_gap(&self, m: usize) -> T {
        let d = self.modes[m].mu_plus - self.modes[m].mu_minus;
        let mut l = (d / self.omega).round();
        if l == T::zero() {
            l = if d >= T::zero() { T::one() } else { -T::one() };
        }
        (d - l * self.omega).abs()
    }

    /// Momentum index of the smallest inter-band gap.
    pub fn quasi_degeneracy_index(&self) -> usize {
        (0..self.modes.len())
            .min_by(|&a, &b| {
                self.interband_gap(a)
                    .partial_cmp(&self.interband_gap(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0)
    }

    /// The positive quasienergy branch continued across zone boundaries.
    /// Returns the unfolded values and whether any continuation step was
    /// ambiguous (two candidate branches almost equally close).
    pub fn unfolded_branch(&self) -> (Vec<T>, bool) {
        let mut out: Vec<T> = Vec::with_capacity(self.modes.len());
        let mut ambiguous = false;
        let omega = self.omega;
        for (j, mode) in self.modes.iter().enumerate() {
            if j == 0 {
                out.push(mode.mu_plus);
                continue;
            }
            let target = if j >= 2 {
                T::lit(2.0) * out[j - 1] - out[j - 2]
            } else {
                out[j - 1]
            };
            let mut best = (T::infinity(), T::zero());
            let mut second = T::infinity();
            for mu in [mode.mu_plus, mode.mu_minus] {
                let l = ((target - mu) / omega).round();
                for dl in [-T::one(), T::zero(), T::one()] {
                    let cand = mu + (l + dl) * omega;
                    let dist = (cand - target).abs();
                    if dist < best.0 {
                        second = best.0;
                        best = (dist, cand);
                    } else if dist < second && (cand - best.1).abs() > T::epsilon() {
                        second = dist;
                    }
                }
            }
            if second < T::lit(2.0) * best.0 {
                ambiguous = true;
            }
            out.push(best.1);
        }
        (out, ambiguous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupVelocity<T> {
    pub v_max: T,
    /// Momentum at which the maximum occurs.
    pub k_at_max: T,
    /// Set when the branch could not be unfolded unambiguously.
    pub quality_warning: bool,
}

/// Maximum of `|d mu / dk|` on the unfolded positive branch, by central
/// differences.
pub fn max_group_velocity<T: Real>(spec: &FloquetSpectrum<T>) -> GroupVelocity<T> {
    let (branch, ambiguous) = spec.unfolded_branch();
    let dk = T::TAU() / T::from_usize_lossy(spec.n_sites);
    let mut best = GroupVelocity {
        v_max: T::zero(),
        k_at_max: T::zero(),
        quality_warning: ambiguous || branch.len() < 3,
    };
    for j in 1..branch.len().saturating_sub(1) {
        let v = ((branch[j + 1] - branch[j - 1]) / (T::lit(2.0) * dk)).abs();
        if v > best.v_max {
            best.v_max = v;
            best.k_at_max = spec.modes[j].k;
        }
    }
    best
}

/// `t_rec = N / (2 v_max)`.
pub fn recurrence_time<T: Real>(n_sites: usize, v_max: T) -> T {
    T::from_usize_lossy(n_sites) / (T::lit(2.0) * v_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dispersion, ground_state};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn params(n: usize, h: f64, dh: f64, omega: f64) -> ModelParams<f64> {
        ModelParams::new(n, 1.0, h, dh, omega).unwrap()
    }

    #[test]
    fn static_limit_matches_exponential() {
        let p = params(16, 1.0, 0.0, 2.7);
        let mono = monodromy(&p, 1e-12).unwrap();
        let t = p.period();
        for (&k, u) in mono.grid().momenta().iter().zip(mono.propagators()) {
            let eps = dispersion(1.0, k, 1.0);
            let (phi, _) = u.axis_angle();
            // eigenphases are -+ T eps modulo 2 pi
            let want = (t * eps).rem_euclid(2.0 * PI);
            let want = if want > PI { 2.0 * PI - want } else { want };
            assert_abs_diff_eq!(phi, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn doubling_property() {
        let p = ModelParams::new(12, 0.7, 0.9, 0.4, 3.1).unwrap();
        let mono = monodromy(&p, 1e-11).unwrap();
        let two = multi_period_propagators(&p, 2, mono.steps_per_period()).unwrap();
        for (u, u2) in mono.propagators().iter().zip(&two) {
            assert!((*u * *u).max_abs_diff(u2) < 1e-9);
        }
    }

    #[test]
    fn unitarity_and_determinant() {
        let p = ModelParams::new(20, 0.4, 1.2, 0.75, 0.9).unwrap();
        let mono = monodromy(&p, 1e-10).unwrap();
        assert!(mono.unitarity_defect() < 1e-10);
        for u in mono.propagators() {
            assert_abs_diff_eq!(u.determinant().norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sixth_order_convergence() {
        let p = params(8, 1.0, 0.5, 1.3);
        let k = 0.9;
        let exact = mode_propagator(&p, k, 0.0, p.period(), 4096);
        let e1 = mode_propagator(&p, k, 0.0, p.period(), 16).max_abs_diff(&exact);
        let e2 = mode_propagator(&p, k, 0.0, p.period(), 32).max_abs_diff(&exact);
        let rate = (e1 / e2).log2();
        assert!(rate > 5.5, "observed order {rate}");
    }

    #[test]
    fn stroboscopic_identity_and_static_occupation() {
        let p = params(16, 1.0, 0.0, 2.0 * PI);
        let mono = monodromy(&p, 1e-12).unwrap();
        let gs = ground_state(&p, 1.0);
        assert_eq!(stroboscopic_state(&gs, &mono, 0).unwrap(), gs);
        for n in [1u64, 7, 50] {
            let s = stroboscopic_state(&gs, &mono, n).unwrap();
            for m in 0..s.n_modes() {
                // overlap with the excited pair state stays zero
                let occ = (-gs.v(m).conj() * s.u(m) + gs.u(m).conj() * s.v(m)).norm_sqr();
                assert!(occ < 1e-20);
            }
            assert!(s.normalization_defect() < 1e-10 * n as f64);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let p = params(16, 1.0, 0.1, 2.0 * PI);
        let mono = monodromy(&p, 1e-10).unwrap();
        let other = ground_state(&params(8, 1.0, 0.1, 2.0 * PI), 1.0);
        assert!(matches!(
            stroboscopic_state(&other, &mono, 3),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn spectrum_static_no_folding() {
        let p = params(32, 1.0, 0.0, 10.0);
        let spec = floquet_spectrum(&monodromy(&p, 1e-12).unwrap());
        for m in &spec.modes {
            assert_abs_diff_eq!(m.mu_plus, dispersion(1.0, m.k, 1.0), epsilon = 1e-9);
            assert_abs_diff_eq!(m.mu_plus + m.mu_minus, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectrum_static_folding() {
        let omega = 2.0;
        let p = params(32, 1.0, 0.0, omega);
        let spec = floquet_spectrum(&monodromy(&p, 1e-12).unwrap());
        for m in &spec.modes {
            let eps = dispersion(1.0, m.k, 1.0);
            let folded = eps - omega * (eps / omega).round();
            assert_abs_diff_eq!(m.mu_plus.abs(), folded.abs(), epsilon = 1e-9);
        }
    }

    #[test]
    fn floquet_vectors_orthonormal_and_eigen() {
        let p = ModelParams::new(16, 0.8, 1.0, 0.3, 4.0).unwrap();
        let mono = monodromy(&p, 1e-11).unwrap();
        let spec = floquet_spectrum(&mono);
        for (m, u) in spec.modes.iter().zip(mono.propagators()) {
            let [a, b] = m.vec_plus;
            let [c, d] = m.vec_minus;
            assert_abs_diff_eq!(a.norm_sqr() + b.norm_sqr(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!((a.conj() * c + b.conj() * d).norm(), 0.0, epsilon = 1e-10);
            let img = u.apply(m.vec_plus);
            let lam = Cplx::from_polar(1.0, -m.mu_plus * spec.period);
            assert_abs_diff_eq!((img[0] - lam * a).norm(), 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!((img[1] - lam * b).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn fold_arithmetic() {
        assert_abs_diff_eq!(fold_quasienergy(1.5, 2.0), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fold_quasienergy(-1.0, 2.0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fold_quasienergy(1.0, 2.0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fold_quasienergy(0.3, 2.0), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn static_group_velocity_at_criticality() {
        let p = params(256, 1.0, 0.0, 20.0);
        let spec = floquet_spectrum(&monodromy(&p, 1e-12).unwrap());
        let gv = max_group_velocity(&spec);
        assert_abs_diff_eq!(gv.v_max, 1.0, epsilon = 1e-3);
        assert!(!gv.quality_warning);
        assert_abs_diff_eq!(recurrence_time(128, 1.0), 64.0, epsilon = 1e-15);
    }

    #[test]
    fn unfolding_crosses_zone_boundary() {
        // eps_k spans [0, 2] while the zone is [-0.75, 0.75)
        let p = params(256, 1.0, 0.0, 1.5);
        let spec = floquet_spectrum(&monodromy(&p, 1e-12).unwrap());
        let (branch, _) = spec.unfolded_branch();
        for (m, mu) in spec.modes.iter().zip(&branch) {
            assert_abs_diff_eq!(*mu, dispersion(1.0, m.k, 1.0), epsilon = 1e-8);
        }
        assert_abs_diff_eq!(max_group_velocity(&spec).v_max, 1.0, epsilon = 1e-3);
    }
}
