//! Brute-force reference on the full `2^N` Hilbert space, for `N <= 12`.
//!
//! Basis index bit `j` is spin `j + 1`; a set bit means `sigma^z = +1`.
//! The Hamiltonian is the spin chain with periodic bonds,
//! `H = -sum [(1+g)/2 XX + (1-g)/2 YY] + h sum Z`. Time evolution uses
//! `H(t) / 2`, the generator whose single-mode sector is the pair equation
//! of [`crate::floquet`].

use crate::error::{Error, Result};
use crate::lattice::ModelParams;
use crate::linalg::{symmetric_eigen, Matrix};
use crate::scalar::{cplx, Cplx, Real};

pub const MAX_SITES: usize = 12;

fn check_size(n_sites: usize) -> Result<()> {
    if n_sites > MAX_SITES {
        return Err(Error::ChainTooLarge(n_sites));
    }
    if n_sites < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least two sites, got {n_sites}"
        )));
    }
    Ok(())
}

/// Real symmetric Hamiltonian as a matrix-free operator.
#[derive(Debug, Clone, Copy)]
pub struct SpinHamiltonian<T> {
    pub n_sites: usize,
    pub gamma: T,
    pub h: T,
}

impl<T: Real> SpinHamiltonian<T> {
    pub fn new(n_sites: usize, gamma: T, h: T) -> Result<Self> {
        check_size(n_sites)?;
        Ok(Self { n_sites, gamma, h })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    fn bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_sites).map(move |j| (j, (j + 1) % self.n_sites))
    }

    fn diagonal(&self, x: usize) -> T {
        self.h * T::from_usize_lossy(2 * x.count_ones() as usize)
            - self.h * T::from_usize_lossy(self.n_sites)
    }

    fn flip_amplitude(&self, x: usize, i: usize, j: usize) -> T {
        if (x >> i) & 1 == (x >> j) & 1 {
            -self.gamma
        } else {
            -T::one()
        }
    }

    /// `out = scale * H psi`.
    pub fn apply(&self, psi: &[Cplx<T>], scale: T, out: &mut [Cplx<T>]) {
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = psi[x] * self.diagonal(x);
            for (i, j) in self.bonds() {
                let y = x ^ (1 << i) ^ (1 << j);
                acc += psi[y] * self.flip_amplitude(y, i, j);
            }
            *o = acc * scale;
        }
    }

    pub fn dense(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.dim());
        for x in 0..self.dim() {
            m[(x, x)] += self.diagonal(x);
            for (i, j) in self.bonds() {
                let y = x ^ (1 << i) ^ (1 << j);
                m[(y, x)] += self.flip_amplitude(x, i, j);
            }
        }
        m
    }

    pub fn expectation(&self, psi: &DenseState<T>) -> T {
        let mut hpsi = vec![cplx(T::zero(), T::zero()); self.dim()];
        self.apply(&psi.amps, T::one(), &mut hpsi);
        psi.amps
            .iter()
            .zip(&hpsi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

pub fn build_hamiltonian<T: Real>(n_sites: usize, gamma: T, h: T) -> Result<Matrix<T>> {
    Ok(SpinHamiltonian::new(n_sites, gamma, h)?.dense())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState<T> {
    pub n_sites: usize,
    pub amps: Vec<Cplx<T>>,
}

impl<T: Real> DenseState<T> {
    pub fn norm(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Cplx<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(cplx(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    /// Largest amplitude difference after removing the relative global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> T {
        let ov = self.inner(other);
        let phase = if ov.norm() > T::zero() {
            ov / ov.norm()
        } else {
            cplx(T::one(), T::zero())
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (*a * phase - b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Exact ground state and energy, restricted to the even-parity sector.
pub fn ground_state<T: Real>(n_sites: usize, gamma: T, h: T) -> Result<(T, DenseState<T>)> {
    let ham = SpinHamiltonian::new(n_sites, gamma, h)?;
    let even: Vec<usize> = (0..ham.dim()).filter(|x| x.count_ones() % 2 == 0).collect();
    let full = ham.dense();
    let sub = full.submatrix(&even);
    let eig = symmetric_eigen(&sub, true)?;
    let vecs = eig.vectors.expect("requested vectors");
    let mut amps = vec![cplx(T::zero(), T::zero()); ham.dim()];
    for (r, &x) in even.iter().enumerate() {
        amps[x] = cplx(vecs[(r, 0)], T::zero());
    }
    Ok((eig.values[0], DenseState { n_sites, amps }))
}

/// `psi <- exp(-i dt H / 2) psi` by Taylor series.
fn exp_step<T: Real>(
    ham: &SpinHamiltonian<T>,
    psi: &mut [Cplx<T>],
    dt: T,
    work: &mut [Vec<Cplx<T>>; 2],
) {
    let [term, next] = work;
    term.copy_from_slice(psi);
    let scale = -dt / T::lit(2.0);
    for order in 1..64 {
        ham.apply(term, scale / T::from_usize_lossy(order), next);
        // multiply by i: (-i dt/2 H)/order
        let mut size = T::zero();
        for (t, n) in term.iter_mut().zip(next.iter()) {
            *t = cplx(-n.im, n.re);
            size = size.max(t.norm());
        }
        for (p, t) in psi.iter_mut().zip(term.iter()) {
            *p += *t;
        }
        if size < T::epsilon() * T::lit(1e-2) {
            break;
        }
    }
}

/// One drive period `[t0, t0 + T]` on `steps` midpoint steps.
fn midpoint_period<T: Real>(
    params: &ModelParams<T>,
    psi: &[Cplx<T>],
    t0: T,
    steps: usize,
) -> Vec<Cplx<T>> {
    let dt = params.period() / T::from_usize_lossy(steps);
    let mut ham = SpinHamiltonian {
        n_sites: params.n_sites,
        gamma: params.gamma,
        h: params.h0,
    };
    let mut out = psi.to_vec();
    let mut work = [out.clone(), out.clone()];
    for s in 0..steps {
        ham.h = params.field(t0 + dt * (T::from_usize_lossy(s) + T::lit(0.5)));
        exp_step(&ham, &mut out, dt, &mut work);
    }
    out
}

/// Midpoint propagation over one period, extrapolated from `m`, `2m`, `4m`
/// steps to sixth order.
fn richardson_period<T: Real>(
    params: &ModelParams<T>,
    psi: &[Cplx<T>],
    t0: T,
    m: usize,
) -> Vec<Cplx<T>> {
    let a1 = midpoint_period(params, psi, t0, m);
    let a2 = midpoint_period(params, psi, t0, 2 * m);
    let a4 = midpoint_period(params, psi, t0, 4 * m);
    let (three, fifteen) = (T::lit(3.0), T::lit(15.0));
    a1.iter()
        .zip(&a2)
        .zip(&a4)
        .map(|((x1, x2), x4)| {
            let r1 = (*x2 * T::lit(4.0) - x1) / three;
            let r2 = (*x4 * T::lit(4.0) - x2) / three;
            (r2 * T::lit(16.0) - r1) / fifteen
        })
        .collect()
}

fn max_diff<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - y).norm())
        .fold(T::zero(), T::max)
}

/// Stroboscopic trajectory over `periods` drive cycles. The step count per
/// period doubles until two refinements agree to `tol`.
pub fn evolve_periods<T: Real>(
    state: &DenseState<T>,
    params: &ModelParams<T>,
    periods: usize,
    tol: T,
) -> Result<Vec<DenseState<T>>> {
    check_size(params.n_sites)?;
    let mut out = vec![state.clone()];
    let mut m = 8usize;
    let mut psi = state.amps.clone();
    for p in 0..periods {
        let t0 = params.period() * T::from_usize_lossy(p);
        let mut coarse = richardson_period(params, &psi, t0, m);
        loop {
            let fine = richardson_period(params, &psi, t0, 2 * m);
            let err = max_diff(&coarse, &fine);
            m *= 2;
            coarse = fine;
            if err < tol {
                break;
            }
            if m > 1 << 16 {
                return Err(Error::StepUnderflow {
                    tol: tol.as_f64(),
                    steps: m,
                });
            }
        }
        // the coarser count sufficed; start the next period from there
        m = (m / 2).max(8);
        psi = coarse;
        let next = DenseState {
            n_sites: state.n_sites,
            amps: psi.clone(),
        };
        let drift = (next.norm() - T::one()).abs();
        if drift > T::lit(1e-8) {
            return Err(Error::Unphysical {
                what: "norm drift in dense evolution",
                value: drift.as_f64(),
            });
        }
        out.push(next);
    }
    Ok(out)
}

/// Evolution from `t = 0` to `t_final` on `steps` midpoint steps.
pub fn evolve<T: Real>(
    state: &DenseState<T>,
    params: &ModelParams<T>,
    t_final: T,
    steps: usize,
) -> Result<DenseState<T>> {
    check_size(params.n_sites)?;
    let steps = steps.max(1);
    let dt = t_final / T::from_usize_lossy(steps);
    let mut ham = SpinHamiltonian::new(params.n_sites, params.gamma, params.h0)?;
    let mut psi = state.amps.clone();
    let mut work = [psi.clone(), psi.clone()];
    for s in 0..steps {
        ham.h = params.field(dt * (T::from_usize_lossy(s) + T::lit(0.5)));
        exp_step(&ham, &mut psi, dt, &mut work);
    }
    let out = DenseState {
        n_sites: state.n_sites,
        amps: psi,
    };
    let drift = (out.norm() - T::one()).abs();
    if drift > T::lit(1e-8) {
        return Err(Error::Unphysical {
            what: "norm drift in dense evolution",
            value: drift.as_f64(),
        });
    }
    Ok(out)
}

fn bit(x: usize, site: usize) -> bool {
    (x >> (site - 1)) & 1 == 1
}

/// Site-averaged `<sigma^z>`.
pub fn magnetization<T: Real>(psi: &DenseState<T>) -> T {
    let n = psi.n_sites;
    psi.amps
        .iter()
        .enumerate()
        .map(|(x, a)| {
            a.norm_sqr()
                * (T::from_usize_lossy(2 * x.count_ones() as usize) - T::from_usize_lossy(n))
        })
        .sum::<T>()
        / T::from_usize_lossy(n)
}

/// `<Z_1 Z_2 ... Z_N>`.
pub fn parity<T: Real>(psi: &DenseState<T>) -> T {
    psi.amps
        .iter()
        .enumerate()
        .map(|(x, a)| {
            if (psi.n_sites - x.count_ones() as usize).is_multiple_of(2) {
                a.norm_sqr()
            } else {
                -a.norm_sqr()
            }
        })
        .sum()
}

/// Reduced density matrix of sites `(i, i+1)` (periodic), index
/// `2 s_i + s_{i+1}` with `s = 0` for spin up.
pub fn two_site_rdm<T: Real>(psi: &DenseState<T>, i: usize) -> Matrix<Cplx<T>> {
    let n = psi.n_sites;
    let j = i % n + 1;
    let mask = (1 << (i - 1)) | (1 << (j - 1));
    let local = |x: usize| 2 * usize::from(!bit(x, i)) + usize::from(!bit(x, j));
    let mut rho = Matrix::zeros(4);
    for x in 0..psi.amps.len() {
        if x & mask != 0 {
            continue;
        }
        let configs = [mask, 1 << (i - 1), 1 << (j - 1), 0].map(|m| x | m);
        for &a in &configs {
            for &b in &configs {
                rho[(local(a), local(b))] += psi.amps[a] * psi.amps[b].conj();
            }
        }
    }
    rho
}

/// Entropy in bits of sites `1..=N/2`, from the Schmidt spectrum.
pub fn half_chain_entropy<T: Real>(psi: &DenseState<T>) -> Result<T> {
    let half = psi.n_sites / 2;
    let da = 1usize << half;
    let db = psi.amps.len() / da;
    // rho_A[a, a'] = sum_b psi[a + da b] psi*[a' + da b]
    let rho = Matrix::from_fn(da, |a, a2| {
        let mut acc = cplx(T::zero(), T::zero());
        for b in 0..db {
            acc += psi.amps[a + da * b] * psi.amps[a2 + da * b].conj();
        }
        acc
    });
    let p = crate::linalg::hermitian_eigenvalues(&rho)?;
    Ok(p.into_iter()
        .filter(|&x| x > T::zero())
        .map(|x| -x * x.log2())
        .sum())
}

/// Applies Majorana operator `a_m` (1-based) to `psi`.
fn apply_majorana<T: Real>(psi: &DenseState<T>, m: usize) -> Vec<Cplx<T>> {
    let site = m.div_ceil(2);
    let odd = m % 2 == 1;
    let mut out = vec![cplx(T::zero(), T::zero()); psi.amps.len()];
    for (x, a) in psi.amps.iter().enumerate() {
        // string prod_{j<site} (-Z_j)
        let ups = (1..site).filter(|&s| bit(x, s)).count();
        let string_sign = if ups % 2 == 0 { T::one() } else { -T::one() };
        let up = bit(x, site);
        let y = x ^ (1 << (site - 1));
        let amp = if odd {
            // X
            *a
        } else {
            // -Y: Y|up> = i|down>, Y|down> = -i|up>
            let i = cplx(T::zero(), T::one());
            if up {
                -(i * a)
            } else {
                i * a
            }
        };
        out[y] += amp * string_sign;
    }
    out
}

/// `Gamma_mn` over the sites `[start, end]`, from explicit Jordan-Wigner
/// strings.
pub fn majorana_correlations<T: Real>(psi: &DenseState<T>, start: usize, end: usize) -> Matrix<T> {
    let applied: Vec<Vec<Cplx<T>>> = (2 * start - 1..=2 * end)
        .map(|m| apply_majorana(psi, m))
        .collect();
    let dim = applied.len();
    Matrix::from_fn(dim, |p, q| {
        if p == q {
            return T::zero();
        }
        // <a_p a_q> = <a_p psi | a_q psi> = i Gamma_pq
        let ov = applied[p]
            .iter()
            .zip(&applied[q])
            .fold(cplx(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
        ov.im
    })
}

/// Every quantity of the free-fermion pipeline, evaluated directly.
#[derive(Debug, Clone)]
pub struct OracleRecord<T> {
    pub magnetization: T,
    pub concurrence: T,
    pub entropy_half: T,
    pub loschmidt: T,
    pub work: T,
    pub rdm: Matrix<Cplx<T>>,
    pub majorana: Matrix<T>,
}

pub fn oracle_observables<T: Real>(
    psi: &DenseState<T>,
    initial: &DenseState<T>,
    gamma: T,
    h: T,
    ground_energy: T,
) -> Result<OracleRecord<T>> {
    let rdm = two_site_rdm(psi, 1);
    let concurrence =
        crate::observables::concurrence(&crate::observables::TwoSiteRdm::new(rdm.clone())?)?;
    let ham = SpinHamiltonian::new(psi.n_sites, gamma, h)?;
    Ok(OracleRecord {
        magnetization: magnetization(psi),
        concurrence,
        entropy_half: half_chain_entropy(psi)?,
        loschmidt: initial.inner(psi).norm(),
        work: ham.expectation(psi) - ground_energy,
        rdm,
        majorana: majorana_correlations(psi, 1, psi.n_sites),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_site_closure_spectrum() {
        // N = 2, gamma = 1, h = 0: H = -2 XX, eigenvalues -2, -2, 2, 2
        let h = build_hamiltonian(2, 1.0, 0.0).unwrap();
        let e = symmetric_eigen(&h, false).unwrap().values;
        for (got, want) in e.iter().zip([-2.0, -2.0, 2.0, 2.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn hermitian_and_capped() {
        let h = build_hamiltonian(6, 0.37f64, 0.81).unwrap();
        assert!(h.max_abs() > 0.0);
        let defect = (0..64)
            .flat_map(|i| (0..64).map(move |j| (i, j)))
            .map(|(i, j)| (h[(i, j)] - h[(j, i)]).abs())
            .fold(0.0f64, f64::max);
        assert!(defect < 1e-14);
        assert!(matches!(
            build_hamiltonian(13, 1.0, 1.0),
            Err(Error::ChainTooLarge(13))
        ));
    }

    #[test]
    fn product_state_limit() {
        let (_, gs) = ground_state(6, 1.0, 1e6).unwrap();
        assert_abs_diff_eq!(magnetization(&gs), -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(half_chain_entropy(&gs).unwrap(), 0.0, epsilon = 1e-8);
        let rho = two_site_rdm(&gs, 2);
        assert_abs_diff_eq!(rho[(3, 3)].re, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn static_evolution_is_stationary() {
        let p = ModelParams::undriven(6, 0.8, 0.9, 3.0).unwrap();
        let (e0, gs) = ground_state(6, 0.8, 0.9).unwrap();
        let traj = evolve_periods(&gs, &p, 2, 1e-10).unwrap();
        let ham = SpinHamiltonian::new(6, 0.8, 0.9).unwrap();
        for s in &traj {
            assert_abs_diff_eq!(gs.inner(s).norm(), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(ham.expectation(s), e0, epsilon = 1e-9);
        }
    }

    #[test]
    fn driven_evolution_conserves_parity() {
        let p = ModelParams::new(6, 0.6, 1.1, 0.5, 2.0).unwrap();
        let (_, gs) = ground_state(6, 0.6, 1.1).unwrap();
        let traj = evolve_periods(&gs, &p, 3, 1e-10).unwrap();
        for s in &traj {
            assert_abs_diff_eq!(parity(s), parity(&gs), epsilon = 1e-9);
        }
        let direct = evolve(&gs, &p, 3.0 * p.period(), 4000).unwrap();
        assert!(direct.distance_up_to_phase(&traj[3]) < 1e-5);
    }
}
