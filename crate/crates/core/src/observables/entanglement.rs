use crate::error::{Error, Result};
use crate::lattice::ModeState;
use crate::linalg::{cmatmul, hermitian_eigenvalues, hermitian_function, Matrix};
use crate::scalar::{cplx, Real};

use super::majorana::{majorana_correlations, two_site_rdm, TwoSiteRdm};

/// Binary entropy in bits.
pub fn binary_entropy<T: Real>(p: T) -> T {
    let term = |x: T| {
        if x > T::zero() {
            -x * x.log2()
        } else {
            T::zero()
        }
    };
    term(p) + term(T::one() - p)
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence<T: Real>(rdm: &TwoSiteRdm<T>) -> Result<T> {
    let rho = &rdm.rho;
    let z = cplx(T::zero(), T::zero());
    let yy = Matrix::from_fn(4, |i, j| match (i, j) {
        (0, 3) | (3, 0) => -cplx(T::one(), T::zero()),
        (1, 2) | (2, 1) => cplx(T::one(), T::zero()),
        _ => z,
    });
    let conj = Matrix::from_fn(4, |i, j| rho[(i, j)].conj());
    let tilde = cmatmul(&cmatmul(&yy, &conj), &yy);
    let sqrt_rho = hermitian_function(rho, |x| x.max(T::zero()).sqrt())?;
    let r = cmatmul(&cmatmul(&sqrt_rho, &tilde), &sqrt_rho);
    let r = Matrix::from_fn(4, |i, j| (r[(i, j)] + r[(j, i)].conj()) * T::lit(0.5));
    let mut lambdas = hermitian_eigenvalues(&r)?;
    for l in lambdas.iter_mut() {
        if *l < T::zero() {
            if *l < -T::slack(1e-12) {
                return Err(Error::Unphysical {
                    what: "negative eigenvalue of rho rho-tilde",
                    value: l.as_f64(),
                });
            }
            *l = T::zero();
        }
    }
    // eigenvalues of sqrt(rho) rho~ sqrt(rho) equal those of rho rho~
    lambdas.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let s: Vec<T> = lambdas.iter().map(|l| l.sqrt()).collect();
    Ok((s[0] - s[1] - s[2] - s[3]).max(T::zero()))
}

pub fn nearest_neighbour_concurrence<T: Real>(state: &ModeState<T>) -> Result<T> {
    concurrence(&two_site_rdm(state, 1)?)
}

/// Von Neumann entropy (bits) of the first half of the chain.
pub fn half_chain_entropy<T: Real>(state: &ModeState<T>) -> Result<T> {
    let corr = majorana_correlations(state, 1, state.n_sites() / 2)?;
    let mut s = T::zero();
    for nu in corr.nu_spectrum()? {
        if nu > T::one() + T::slack(1e-8) {
            return Err(Error::Unphysical {
                what: "correlation-matrix eigenvalue above one",
                value: nu.as_f64(),
            });
        }
        s += binary_entropy((T::one() + nu.min(T::one())) / T::lit(2.0));
    }
    Ok(s)
}
