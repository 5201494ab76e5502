//! Physical quantities evaluated on pair states.

mod driven;
mod entanglement;
mod majorana;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dispersion, excited_pair, ModeState, ModelParams};
use crate::scalar::Real;

pub use driven::{chi_z, d_concurrence_dh, driven_fidelity, Derivative, DrivenFidelity, Pipeline};
pub use entanglement::{
    binary_entropy, concurrence, half_chain_entropy, nearest_neighbour_concurrence,
};
pub use majorana::{
    majorana_correlations, nearest_neighbour_correlators, rdm_from_correlators, two_site_rdm,
    MajoranaCorr, Pauli, TwoSiteRdm, PAULIS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObservableKind {
    #[serde(rename = "sigma_z")]
    SigmaZ,
    #[serde(rename = "chi_z")]
    ChiZ,
    #[serde(rename = "concurrence")]
    Concurrence,
    #[serde(rename = "dC_dh")]
    DcDh,
    #[serde(rename = "entropy_half")]
    EntropyHalf,
    #[serde(rename = "loschmidt")]
    Loschmidt,
    #[serde(rename = "work")]
    Work,
    #[serde(rename = "fidelity")]
    Fidelity,
    #[serde(rename = "chi_F")]
    ChiF,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 9] = [
        ObservableKind::SigmaZ,
        ObservableKind::ChiZ,
        ObservableKind::Concurrence,
        ObservableKind::DcDh,
        ObservableKind::EntropyHalf,
        ObservableKind::Loschmidt,
        ObservableKind::Work,
        ObservableKind::Fidelity,
        ObservableKind::ChiF,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObservableKind::SigmaZ => "sigma_z",
            ObservableKind::ChiZ => "chi_z",
            ObservableKind::Concurrence => "concurrence",
            ObservableKind::DcDh => "dC_dh",
            ObservableKind::EntropyHalf => "entropy_half",
            ObservableKind::Loschmidt => "loschmidt",
            ObservableKind::Work => "work",
            ObservableKind::Fidelity => "fidelity",
            ObservableKind::ChiF => "chi_F",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn is_k_resolved(self) -> bool {
        matches!(self, ObservableKind::Loschmidt | ObservableKind::Work)
    }
}

impl std::fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated quantity at a point `(N, h, n)` of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord<T> {
    pub kind: ObservableKind,
    pub n_sites: usize,
    pub gamma: T,
    pub h: T,
    pub dh: T,
    pub omega: T,
    pub n: u64,
    pub value: T,
    pub per_k: Option<Vec<T>>,
}

impl<T: Real> ObservableRecord<T> {
    /// Checks the kind-specific range of `value`.
    pub fn check_range(&self) -> Result<()> {
        let v = self.value;
        let eps = T::slack(1e-9);
        let ok = match self.kind {
            ObservableKind::Concurrence | ObservableKind::Loschmidt | ObservableKind::Fidelity => {
                v >= -eps && v <= T::one() + eps
            }
            ObservableKind::EntropyHalf => {
                v >= -eps && v <= T::from_usize_lossy(self.n_sites / 2) + eps
            }
            ObservableKind::Work | ObservableKind::ChiF => v >= -T::slack(1e-10),
            ObservableKind::SigmaZ => v.abs() <= T::one() + eps,
            ObservableKind::ChiZ | ObservableKind::DcDh => v.is_finite(),
        };
        if ok && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Unphysical {
                what: "observable outside its range",
                value: v.as_f64(),
            })
        }
    }
}

/// Site-averaged `<sigma^z>` with `sigma^z = +1` on an occupied site.
pub fn transverse_magnetization<T: Real>(state: &ModeState<T>) -> T {
    let sum: T = state
        .amplitudes()
        .iter()
        .map(|[u, v]| v.norm_sqr() - u.norm_sqr())
        .sum();
    T::lit(2.0) * sum / T::from_usize_lossy(state.n_sites())
}

/// Echo `L = prod_k L_k` with `L_k = |<initial_k|evolved_k>|`.
#[derive(Debug, Clone)]
pub struct Loschmidt<T> {
    pub echo: T,
    pub log_echo: T,
    pub per_k: Vec<T>,
}

pub fn loschmidt_echo<T: Real>(
    initial: &ModeState<T>,
    evolved: &ModeState<T>,
) -> Result<Loschmidt<T>> {
    initial.check_same_grid(evolved)?;
    let per_k: Vec<T> = initial
        .amplitudes()
        .iter()
        .zip(evolved.amplitudes())
        .map(|([u0, v0], [u, v])| (u0.conj() * u + v0.conj() * v).norm())
        .collect();
    let log_echo: T = per_k.iter().map(|l| l.ln()).sum();
    Ok(Loschmidt {
        echo: log_echo.exp(),
        log_echo,
        per_k,
    })
}

/// Energy absorbed relative to the ground state of the static chain at `h`.
/// `per_k[m] = 2 eps_k n_k` for one member of the pair; the total counts both.
#[derive(Debug, Clone)]
pub struct Work<T> {
    pub total: T,
    pub per_k: Vec<T>,
    pub occupations: Vec<T>,
}

pub fn work<T: Real>(evolved: &ModeState<T>, params: &ModelParams<T>, h: T) -> Result<Work<T>> {
    if evolved.n_sites() != params.n_sites {
        return Err(Error::GridMismatch {
            expected: params.n_sites / 2,
            found: evolved.n_modes(),
        });
    }
    let two = T::lit(2.0);
    let grid = evolved.grid();
    let mut occupations = Vec::with_capacity(grid.len());
    let mut per_k = Vec::with_capacity(grid.len());
    for (m, &k) in grid.momenta().iter().enumerate() {
        let [eu, ev] = excited_pair(params.gamma, k, h);
        let occ = (eu.conj() * evolved.u(m) + ev.conj() * evolved.v(m)).norm_sqr();
        if !(occ >= T::zero() && occ <= T::one() + T::slack(1e-10)) {
            return Err(Error::Unphysical {
                what: "quasiparticle occupation",
                value: occ.as_f64(),
            });
        }
        occupations.push(occ);
        per_k.push(two * dispersion(params.gamma, k, h) * occ);
    }
    let total = two * per_k.iter().copied().sum::<T>();
    Ok(Work {
        total,
        per_k,
        occupations,
    })
}

/// Overlap of two pair states, `F = prod_k |<a_k|b_k>|`, kept in a form
/// that stays accurate when `1 - F` is tiny.
#[derive(Debug, Clone, Copy)]
pub struct Overlap<T> {
    pub fidelity: T,
    pub one_minus: T,
    pub log_fidelity: T,
}

pub fn state_overlap<T: Real>(a: &ModeState<T>, b: &ModeState<T>) -> Result<Overlap<T>> {
    a.check_same_grid(b)?;
    let half = T::lit(0.5);
    let log_fidelity: T = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|([a1, a2], [b1, b2])| {
            let norm = (a1.norm_sqr() + a2.norm_sqr()) * (b1.norm_sqr() + b2.norm_sqr());
            let defect = (*a1 * b2 - *a2 * b1).norm_sqr() / norm;
            half * (-defect).ln_1p()
        })
        .sum();
    Ok(Overlap {
        fidelity: log_fidelity.exp(),
        one_minus: -log_fidelity.exp_m1(),
        log_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{monodromy, stroboscopic_state};
    use crate::lattice::ground_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn paramagnet_limit() {
        let p = ModelParams::new(16, 0.7f64, 1e8, 0.0, 1.0).unwrap();
        let gs = ground_state(&p, 1e8);
        assert_abs_diff_eq!(transverse_magnetization(&gs), -1.0, epsilon = 1e-12);
        let l = loschmidt_echo(&gs, &gs).unwrap();
        assert_abs_diff_eq!(l.echo, 1.0, epsilon = 1e-14);
        assert!(l.per_k.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert_abs_diff_eq!(work(&gs, &p, 1e8).unwrap().total, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn driven_ranges() {
        let p = ModelParams::new(32, 1.0, 1.0, 0.3, 2.0).unwrap();
        let gs = ground_state(&p, 1.0);
        let mono = monodromy(&p, 1e-11).unwrap();
        for n in [1, 5, 40] {
            let s = stroboscopic_state(&gs, &mono, n).unwrap();
            let l = loschmidt_echo(&gs, &s).unwrap();
            assert!(l.echo > 0.0 && l.echo <= 1.0);
            assert_abs_diff_eq!(l.echo, l.per_k.iter().product::<f64>(), epsilon = 1e-12);
            let w = work(&s, &p, 1.0).unwrap();
            assert!(w.total > 0.0);
            assert!(w
                .occupations
                .iter()
                .all(|&o| (0.0..=1.0 + 1e-12).contains(&o)));
        }
    }

    #[test]
    fn overlap_of_identical_states() {
        let p = ModelParams::new(64, 1.0, 1.0, 0.0, 1.0).unwrap();
        let gs = ground_state(&p, 1.0);
        let o = state_overlap(&gs, &gs).unwrap();
        assert_eq!(o.one_minus, 0.0);
        assert_eq!(o.fidelity, 1.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ObservableKind::ALL {
            assert_eq!(ObservableKind::parse(k.as_str()), Some(k));
        }
        assert_eq!(ObservableKind::parse("magnetisation"), None);
    }
}
