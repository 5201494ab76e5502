#![allow(dead_code)]

use std::collections::BTreeMap;

use fss_core::ed;
use fss_core::observables::{self, ObservableKind, ObservableRecord};
use fss_core::scaling::ScalingDataset;
use fss_core::*;

/// Largest deviation of each pipeline observable from the dense oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleGap {
    pub magnetization: f64,
    pub concurrence: f64,
    pub rdm: f64,
    pub entropy: f64,
    pub loschmidt: f64,
    pub loschmidt_product: f64,
    pub work: f64,
    pub majorana: f64,
}

impl OracleGap {
    pub fn max(&self) -> f64 {
        [
            self.magnetization,
            self.concurrence,
            self.rdm,
            self.entropy,
            self.loschmidt,
            self.loschmidt_product,
            self.work,
            self.majorana,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn absorb(&mut self, o: &OracleGap) {
        self.magnetization = self.magnetization.max(o.magnetization);
        self.concurrence = self.concurrence.max(o.concurrence);
        self.rdm = self.rdm.max(o.rdm);
        self.entropy = self.entropy.max(o.entropy);
        self.loschmidt = self.loschmidt.max(o.loschmidt);
        self.loschmidt_product = self.loschmidt_product.max(o.loschmidt_product);
        self.work = self.work.max(o.work);
        self.majorana = self.majorana.max(o.majorana);
    }
}

/// Runs both pipelines for `periods` cycles and compares every stroboscopic
/// state along the way.
pub fn oracle_gap(
    n_sites: usize,
    gamma: f64,
    h: f64,
    dh: f64,
    omega: f64,
    periods: usize,
) -> OracleGap {
    let p = ModelParams::new(n_sites, gamma, h, dh, omega).unwrap();
    let mono = monodromy(&p, 1e-12).unwrap();
    let init = ground_state(&p, h);
    let (e0, gs) = ed::ground_state(n_sites, gamma, h).unwrap();
    let traj = ed::evolve_periods(&gs, &p, periods, 1e-11).unwrap();
    let mut gap = OracleGap::default();
    for (n, psi) in traj.iter().enumerate() {
        let s = stroboscopic_state(&init, &mono, n as u64).unwrap();
        let o = ed::oracle_observables(psi, &gs, gamma, h, e0).unwrap();
        let rdm = observables::two_site_rdm(&s, 1).unwrap();
        let rdm_gap = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| (rdm.rho[(i, j)] - o.rdm[(i, j)]).norm())
            .fold(0.0, f64::max);
        let gm = observables::majorana_correlations(&s, 1, n_sites).unwrap();
        let maj_gap = (0..2 * n_sites)
            .flat_map(|i| (0..2 * n_sites).map(move |j| (i, j)))
            .map(|(i, j)| (gm.gamma[(i, j)] - o.majorana[(i, j)]).abs())
            .fold(0.0, f64::max);
        let l = observables::loschmidt_echo(&init, &s).unwrap();
        let product: f64 = l.per_k.iter().product();
        let w = observables::work(&s, &p, h).unwrap();
        gap.absorb(&OracleGap {
            magnetization: (observables::transverse_magnetization(&s) - o.magnetization).abs(),
            concurrence: (observables::nearest_neighbour_concurrence(&s).unwrap() - o.concurrence)
                .abs(),
            rdm: rdm_gap,
            entropy: (observables::half_chain_entropy(&s).unwrap() - o.entropy_half).abs(),
            loschmidt: (l.echo - o.loschmidt).abs(),
            loschmidt_product: (product - o.loschmidt).abs(),
            work: (w.total - o.work).abs(),
            majorana: maj_gap,
        });
    }
    gap
}

/// Curves of one kind at one time, keyed by size.
pub fn dataset(
    records: &[ObservableRecord<f64>],
    kind: ObservableKind,
    n: u64,
) -> ScalingDataset<f64> {
    ScalingDataset::from_records(records, kind, n).unwrap()
}

/// `(h, value)` samples of one size.
pub fn curve(
    records: &[ObservableRecord<f64>],
    kind: ObservableKind,
    n_sites: usize,
    n: u64,
) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter(|r| r.kind == kind && r.n_sites == n_sites && r.n == n)
        .map(|r| (r.h, r.value))
        .collect()
}

/// Value at exactly `h`.
pub fn value_at(
    records: &[ObservableRecord<f64>],
    kind: ObservableKind,
    n_sites: usize,
    n: u64,
    h: f64,
) -> f64 {
    records
        .iter()
        .find(|r| r.kind == kind && r.n_sites == n_sites && r.n == n && (r.h - h).abs() < 1e-12)
        .map(|r| r.value)
        .unwrap()
}

/// Sweep over scaled grids `h = 1 + x / N`, `x` in `[-xw, xw]`.
pub fn scaled_sweep(
    drive: Drive<f64>,
    sizes: &[usize],
    xw: f64,
    count: usize,
    ns: &[u64],
    kinds: &[ObservableKind],
) -> Vec<ObservableRecord<f64>> {
    let spec = SweepSpec {
        drive,
        grids: sizes
            .iter()
            .map(|&n| (n, sweep::scaled_grid(n, 1.0, -xw, xw, count)))
            .collect(),
        ns: ns.to_vec(),
        kinds: kinds.to_vec(),
        settings: SweepSettings::default(),
    };
    sweep::run_sweep(&spec).unwrap()
}

/// Maximum Floquet group velocity at `h = 1`.
pub fn v_max(n_sites: usize, drive: &Drive<f64>) -> f64 {
    let p = drive.params(n_sites, 1.0).unwrap();
    max_group_velocity(&floquet_spectrum(&monodromy(&p, DEFAULT_TOL).unwrap())).v_max
}

pub fn subset(ds: &ScalingDataset<f64>, sizes: &[usize]) -> ScalingDataset<f64> {
    let curves: BTreeMap<usize, Vec<(f64, f64)>> =
        sizes.iter().map(|s| (*s, ds.curves[s].clone())).collect();
    ScalingDataset::new(ds.kind, ds.n, ds.gamma, ds.dh, ds.omega, curves).unwrap()
}
