//! Majorana correlation matrix of a BCS-form state and spin correlators of
//! neighbouring sites obtained from it with Wick's theorem.
//!
//! Conventions: `sigma^z_l = 2 c+_l c_l - 1`, `a_{2l-1} = c_l + c+_l`,
//! `a_{2l} = -i (c_l - c+_l)`, `<a_m a_n> = delta_mn + i Gamma_mn`. A pair
//! state `(u, v)` has Fock amplitude `i v` on `c+_k c+_{-k} |0>`.

use crate::error::{Error, Result};
use crate::lattice::ModeState;
use crate::linalg::{hermitian_eigenvalues, symmetric_eigen, Matrix};
use crate::scalar::{cplx, Cplx, Real};

/// Translation-invariant two-point functions `G(d) = <c+_l c_{l+d}>` and
/// `F(d) = <c_l c_{l+d}>` for `|d| < n_sites`.
struct TwoPoint<T> {
    normal: Vec<T>,
    anomalous: Vec<Cplx<T>>,
}

impl<T: Real> TwoPoint<T> {
    fn new(state: &ModeState<T>, max_dist: usize) -> Self {
        let grid = state.grid();
        let nf = T::from_usize_lossy(state.n_sites());
        let two_over_n = T::lit(2.0) / nf;
        let mut normal = vec![T::zero(); max_dist + 1];
        let mut anomalous = vec![cplx(T::zero(), T::zero()); max_dist + 1];
        for (m, &k) in grid.momenta().iter().enumerate() {
            let occ = state.v(m).norm_sqr();
            let pair = state.u(m).conj() * state.v(m);
            for d in 0..=max_dist {
                let (s, c) = (k * T::from_usize_lossy(d)).sin_cos();
                normal[d] += two_over_n * c * occ;
                anomalous[d] -= pair * (two_over_n * s);
            }
        }
        Self { normal, anomalous }
    }

    fn g(&self, d: isize) -> T {
        self.normal[d.unsigned_abs()]
    }

    fn f(&self, d: isize) -> Cplx<T> {
        let x = self.anomalous[d.unsigned_abs()];
        if d < 0 {
            -x
        } else {
            x
        }
    }
}

/// `Gamma` restricted to the contiguous window of sites `[start, end]`
/// (1-based, inclusive). Row `2(l - start)` is `a_{2l-1}`, the next row `a_{2l}`.
#[derive(Debug, Clone)]
pub struct MajoranaCorr<T> {
    pub start: usize,
    pub end: usize,
    pub gamma: Matrix<T>,
}

pub fn majorana_correlations<T: Real>(
    state: &ModeState<T>,
    start: usize,
    end: usize,
) -> Result<MajoranaCorr<T>> {
    let n = state.n_sites();
    if start < 1 || end < start || end > n {
        return Err(Error::InvalidWindow {
            start,
            end,
            n_sites: n,
        });
    }
    let len = end - start + 1;
    let tp = TwoPoint::new(state, len - 1);
    let two = T::lit(2.0);
    let gamma = Matrix::from_fn(2 * len, |i, j| {
        let (l, m) = (i / 2, j / 2);
        let d = m as isize - l as isize;
        let delta = if l == m { T::one() } else { T::zero() };
        let f = tp.f(d);
        match (i % 2, j % 2) {
            (0, 0) => two * f.im,
            (1, 1) => -two * f.im,
            (0, 1) => delta - two * tp.g(d) - two * f.re,
            _ => -delta + two * tp.g(d) - two * f.re,
        }
    });
    Ok(MajoranaCorr { start, end, gamma })
}

impl<T: Real> MajoranaCorr<T> {
    pub fn antisymmetry_defect(&self) -> T {
        let n = self.gamma.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.gamma[(i, j)] + self.gamma[(j, i)]).abs());
            }
        }
        worst
    }

    /// Max-norm of `Gamma^2 + 1`; zero for a pure state on the full chain.
    pub fn purity_defect(&self) -> T {
        let sq = self.gamma.matmul(&self.gamma);
        let n = sq.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { -T::one() } else { T::zero() };
                worst = worst.max((sq[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Eigenvalues of `-Gamma^2`, ascending; each `nu_j^2` appears twice.
    pub fn squared_spectrum(&self) -> Result<Vec<T>> {
        let sq = self.gamma.matmul(&self.gamma);
        let neg = Matrix::from_fn(sq.dim(), |i, j| -(sq[(i, j)] + sq[(j, i)]) / T::lit(2.0));
        Ok(symmetric_eigen(&neg, false)?.values)
    }

    /// The `nu_j` of the eigenvalue pairs `+- i nu_j`, ascending.
    pub fn nu_spectrum(&self) -> Result<Vec<T>> {
        let sq = self.squared_spectrum()?;
        Ok(sq
            .chunks(2)
            .map(|p| ((p[0] + p[1]) / T::lit(2.0)).max(T::zero()).sqrt())
            .collect())
    }
}

/// Product of Majorana operators with a complex prefactor; `idx` is kept
/// strictly increasing.
#[derive(Debug, Clone)]
struct Monomial<T> {
    coeff: Cplx<T>,
    idx: Vec<usize>,
}

impl<T: Real> Monomial<T> {
    fn scalar(c: Cplx<T>) -> Self {
        Self {
            coeff: c,
            idx: vec![],
        }
    }

    fn new(c: Cplx<T>, idx: &[usize]) -> Self {
        Self::scalar(c).times(&Self {
            coeff: cplx(T::one(), T::zero()),
            idx: idx.to_vec(),
        })
    }

    fn times(&self, rhs: &Self) -> Self {
        let mut seq: Vec<usize> = self.idx.iter().chain(&rhs.idx).copied().collect();
        let mut sign = T::one();
        // bubble sort: each transposition of distinct Majoranas flips the sign
        for i in 0..seq.len() {
            for j in 0..seq.len().saturating_sub(1 + i) {
                if seq[j] > seq[j + 1] {
                    seq.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        let mut idx = Vec::with_capacity(seq.len());
        for x in seq {
            if idx.last() == Some(&x) {
                idx.pop();
            } else {
                idx.push(x);
            }
        }
        Self {
            coeff: self.coeff * rhs.coeff * sign,
            idx,
        }
    }

    /// Wick expectation: Pfaffian of `<a_p a_q> = i Gamma_pq` on the index set.
    fn expectation(&self, gamma: &Matrix<T>) -> Cplx<T> {
        let i = cplx(T::zero(), T::one());
        let m = |p: usize, q: usize| i * gamma[(self.idx[p], self.idx[q])];
        let pf = match self.idx.len() {
            0 => cplx(T::one(), T::zero()),
            2 => m(0, 1),
            4 => m(0, 1) * m(2, 3) - m(0, 2) * m(1, 3) + m(0, 3) * m(1, 2),
            _ => cplx(T::zero(), T::zero()),
        };
        self.coeff * pf
    }
}

/// Pauli label: identity, x, y, z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

impl Pauli {
    pub fn matrix<T: Real>(self) -> [[Cplx<T>; 2]; 2] {
        let o = cplx(T::zero(), T::zero());
        let one = cplx(T::one(), T::zero());
        let i = cplx(T::zero(), T::one());
        match self {
            Pauli::I => [[one, o], [o, one]],
            Pauli::X => [[o, one], [one, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[one, o], [o, -one]],
        }
    }
}

/// Pauli operator on one of the two sites of the window as a Majorana
/// monomial, together with whether it carries the Jordan-Wigner string of
/// the sites to the left of the window.
fn local_operator<T: Real>(p: Pauli, second: bool) -> (Monomial<T>, bool) {
    let one = cplx(T::one(), T::zero());
    let i = cplx(T::zero(), T::one());
    let (a, b) = if second { (2, 3) } else { (0, 1) };
    // string across the first site: 1 - 2 n = -i a0 a1
    let string = Monomial::new(-i, &[0, 1]);
    match p {
        Pauli::I => (Monomial::scalar(one), false),
        Pauli::Z => (Monomial::new(i, &[a, b]), false),
        Pauli::X => {
            let m = Monomial::new(one, &[a]);
            (if second { string.times(&m) } else { m }, true)
        }
        Pauli::Y => {
            let m = Monomial::new(-one, &[b]);
            (if second { string.times(&m) } else { m }, true)
        }
    }
}

/// `<sigma^alpha_i sigma^beta_{i+1}>` for all 16 Pauli pairs, indexed
/// `[alpha][beta]` in the order I, X, Y, Z.
pub fn nearest_neighbour_correlators<T: Real>(
    state: &ModeState<T>,
    site: usize,
) -> Result<[[Cplx<T>; 4]; 4]> {
    let n = state.n_sites();
    if site < 1 || site > n {
        return Err(Error::InvalidWindow {
            start: site,
            end: site + 1,
            n_sites: n,
        });
    }
    // translation invariance: the window [site, site + 1] is equivalent to [1, 2]
    let corr = majorana_correlations(state, 1, 2)?;
    let zero = cplx(T::zero(), T::zero());
    let mut out = [[zero; 4]; 4];
    for (ia, &pa) in PAULIS.iter().enumerate() {
        for (ib, &pb) in PAULIS.iter().enumerate() {
            let (ma, sa) = local_operator::<T>(pa, false);
            let (mb, sb) = local_operator::<T>(pb, true);
            // an odd number of strings leaves a parity-odd operator
            out[ia][ib] = if sa != sb {
                zero
            } else {
                ma.times(&mb).expectation(&corr.gamma)
            };
        }
    }
    Ok(out)
}

/// Reduced density matrix of sites `(i, i+1)` in the `sigma^z` product basis
/// `|up up>, |up down>, |down up>, |down down>`.
#[derive(Debug, Clone)]
pub struct TwoSiteRdm<T> {
    pub rho: Matrix<Cplx<T>>,
}

impl<T: Real> TwoSiteRdm<T> {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix<Cplx<T>>) -> Result<Self> {
        let mut herm = T::zero();
        let mut trace = cplx(T::zero(), T::zero());
        for i in 0..4 {
            trace += rho[(i, i)];
            for j in 0..4 {
                herm = herm.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        if herm > T::slack(1e-8) {
            return Err(Error::Unphysical {
                what: "non-Hermitian two-site density matrix",
                value: herm.as_f64(),
            });
        }
        if (trace - cplx(T::one(), T::zero())).norm() > T::slack(1e-8) {
            return Err(Error::Unphysical {
                what: "two-site density matrix trace",
                value: trace.re.as_f64(),
            });
        }
        let min = hermitian_eigenvalues(&rho)?[0];
        if min < -T::slack(1e-8) {
            return Err(Error::Unphysical {
                what: "negative two-site density-matrix eigenvalue",
                value: min.as_f64(),
            });
        }
        Ok(Self { rho })
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(hermitian_eigenvalues(&self.rho)?[0])
    }
}

/// Builds `rho = 1/4 sum <s^a s^b> s^a (x) s^b` from Pauli expectation values.
pub fn rdm_from_correlators<T: Real>(corr: &[[Cplx<T>; 4]; 4]) -> Matrix<Cplx<T>> {
    let quarter = T::lit(0.25);
    let mut rho = Matrix::zeros(4);
    for (ia, &pa) in PAULIS.iter().enumerate() {
        for (ib, &pb) in PAULIS.iter().enumerate() {
            let c = corr[ia][ib];
            if c == cplx(T::zero(), T::zero()) {
                continue;
            }
            let (ma, mb) = (pa.matrix::<T>(), pb.matrix::<T>());
            for r in 0..4 {
                for s in 0..4 {
                    rho[(r, s)] += c * ma[r / 2][s / 2] * mb[r % 2][s % 2] * quarter;
                }
            }
        }
    }
    rho
}

pub fn two_site_rdm<T: Real>(state: &ModeState<T>, site: usize) -> Result<TwoSiteRdm<T>> {
    let corr = nearest_neighbour_correlators(state, site)?;
    TwoSiteRdm::new(rdm_from_correlators(&corr))
}
