mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use fss_core::observables::ObservableKind as K;
use fss_core::scaling::*;
use fss_core::*;

use common::{dataset, scaled_sweep};

const PI: f64 = std::f64::consts::PI;
const NOISE: f64 = 1e-3;

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn noisy(v: f64, e: f64) -> f64 {
    v * (1.0 + NOISE * e)
}

fn sizes() -> Vec<usize> {
    vec![64, 128, 256, 512, 1024, 2048, 4096]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_fit_recovers_planted(slope in 0.2f64..1.0, icpt in -1.0f64..1.0, e in prop::collection::vec(-1.0f64..1.0, 7)) {
        let pts: Vec<(usize, f64)> = sizes()
            .into_iter()
            .zip(&e)
            .map(|(n, &e)| (n, noisy(slope * (n as f64).ln() + icpt + 8.0, e)))
            .collect();
        let f = fit_log_divergence(&pts).unwrap();
        prop_assert!(rel_err(f.slope, slope) < 0.02, "{f:?}");
        prop_assert!(rel_err(f.intercept, icpt + 8.0) < 0.02);
    }

    #[test]
    fn shift_fit_recovers_planted(a in 0.5f64..4.0, c in 0.0f64..2.0, e in prop::collection::vec(-1.0f64..1.0, 7)) {
        let pts: Vec<(usize, f64)> = sizes()
            .into_iter()
            .zip(&e)
            .map(|(n, &e)| {
                let nf = n as f64;
                (n, 1.0 - noisy(a * nf.powi(-2) * (nf.ln() + c), e))
            })
            .collect();
        let f = fit_shift_exponent(&pts, 1.0).unwrap();
        prop_assert!((f.lambda - 2.0).abs() < 0.02, "{f:?}");
        prop_assert!(f.r_squared > 0.99);
    }

    #[test]
    fn fs_peak_fit_recovers_planted(b in 0.02f64..0.5, e in prop::collection::vec(-1.0f64..1.0, 7)) {
        // noise on the fitted part only; the N^2/32 term is fixed by the fit
        let pts: Vec<(usize, f64)> = sizes()
            .into_iter()
            .zip(&e)
            .map(|(n, &e)| {
                let nf = n as f64;
                (n, nf * nf / 32.0 - noisy(b * nf, e))
            })
            .collect();
        let f = fit_fs_peak(&pts).unwrap();
        prop_assert!(rel_err(f.b, b) < 0.02, "{f:?}");
    }

    #[test]
    fn linear_fit_recovers_planted(slope in 0.01f64..1.0, icpt in 0.0f64..5.0, e in prop::collection::vec(-1.0f64..1.0, 7)) {
        let pts: Vec<(usize, f64)> = sizes()
            .into_iter()
            .zip(&e)
            .map(|(n, &e)| (n, noisy(slope * n as f64 + icpt, e)))
            .collect();
        let f = linear_fs_scaling(&pts).unwrap();
        prop_assert!(rel_err(f.slope, slope) < 0.02, "{f:?}");
        prop_assert!(f.r_squared > 0.99);
    }

    #[test]
    fn xi_fit_recovers_planted(a in 0.5f64..5.0, b in 0.2f64..2.0, e in prop::collection::vec(-1.0f64..1.0, 30)) {
        let pts: Vec<(f64, f64)> = e
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let h = 0.5 + 0.45 * i as f64 / 29.0;
                (h, noisy(a + b / h.ln().abs(), e))
            })
            .collect();
        let f = xi_scaling_fit(&pts, 0.05).unwrap();
        prop_assert!(rel_err(f.a, a) < 0.02, "{f:?}");
        prop_assert!(rel_err(f.b, b) < 0.02);
        prop_assert_eq!(f.window, Some((0.5, 0.95)));
    }

    #[test]
    fn collapse_recovers_planted_nu(nu in 0.7f64..1.4, e in prop::collection::vec(-1.0f64..1.0, 3 * 31)) {
        let ds = synthetic(&[64, 128, 256], nu, &e);
        let res = optimize_exponents(&ds, Ansatz::FidelitySusceptibility, Exponent::Nu, (0.5, 2.0)).unwrap();
        prop_assert!(rel_err(res.nu, nu) < 0.02, "{res:?}");
    }

    #[test]
    fn quality_ignores_curve_labels(perm in Just(vec![0usize, 1, 2]).prop_shuffle(), nu in 0.8f64..1.2) {
        let ds = synthetic(&[64, 128, 256], 1.0, &[0.5; 93]);
        let peaks = pseudocritical_points(&ds, Ansatz::FidelitySusceptibility).unwrap();
        let curves = rescale(&ds, &peaks, Ansatz::FidelitySusceptibility, nu, 1.0);
        let keys: Vec<usize> = curves.keys().copied().collect();
        let relabelled: BTreeMap<usize, Vec<(f64, f64)>> =
            curves.values().zip(&perm).map(|(c, &p)| (keys[p], c.clone())).collect();
        let (q, qr) = (spread(&curves).unwrap(), spread(&relabelled).unwrap());
        prop_assert!(q >= 0.0);
        prop_assert!((q - qr).abs() <= 1e-12 * q.max(1e-300), "{q} vs {qr}");
    }

    #[test]
    fn quality_invariant_under_affine_field_maps(scale in 0.1f64..10.0, shift in -1.0f64..1.0) {
        let ds = synthetic(&[64, 128, 256], 1.0, &[0.3; 93]);
        let mapped: BTreeMap<usize, Vec<(f64, f64)>> = ds
            .curves
            .iter()
            .map(|(&n, c)| (n, c.iter().map(|&(h, v)| (scale * h + shift, v)).collect()))
            .collect();
        let mds = ScalingDataset::new(ds.kind, ds.n, ds.gamma, ds.dh, ds.omega, mapped).unwrap();
        let q = collapse_quality(&ds, Ansatz::FidelitySusceptibility, 0.9, 1.0).unwrap();
        let qm = collapse_quality(&mds, Ansatz::FidelitySusceptibility, 0.9, 1.0).unwrap();
        prop_assert!(rel_err(qm, q) < 1e-6, "{q} vs {qm}");
    }
}

/// Peaked curves `v = N^2 / 32 / (1 + x^2 / 2)` with `x = N^{1/nu} (h - h_c^N)`,
/// each sample carrying relative noise `NOISE * e`.
fn synthetic(sizes: &[usize], nu: f64, e: &[f64]) -> ScalingDataset<f64> {
    let mut curves = BTreeMap::new();
    for (j, &n) in sizes.iter().enumerate() {
        let nf = n as f64;
        let hc = 1.0 - 0.3 / (nf * nf);
        let pts = (0..31)
            .map(|i| {
                let x = -6.0 + 0.4 * i as f64;
                let h = hc + x / nf.powf(1.0 / nu);
                (
                    h,
                    noisy(nf * nf / 32.0 / (1.0 + 0.5 * x * x), e[31 * j + i]),
                )
            })
            .collect();
        curves.insert(n, pts);
    }
    ScalingDataset::new(K::ChiF, 0, 1.0, 0.0, 1.0, curves).unwrap()
}

#[test]
fn quality_zero_only_for_coincident_curves() {
    let ds = synthetic(&[64, 128, 256], 1.0, &[0.0; 93]);
    assert!(collapse_quality(&ds, Ansatz::FidelitySusceptibility, 1.0, 1.0).unwrap() < 1e-20);
    assert!(collapse_quality(&ds, Ansatz::FidelitySusceptibility, 1.1, 1.0).unwrap() > 1e-4);
}

#[test]
fn exponent_optimization_is_deterministic() {
    let e: Vec<f64> = (0..93)
        .map(|i| ((i * 37 % 19) as f64 / 9.0) - 1.0)
        .collect();
    let ds = synthetic(&[64, 128, 256], 1.1, &e);
    let a = optimize_exponents(
        &ds,
        Ansatz::FidelitySusceptibility,
        Exponent::Nu,
        (0.5, 2.0),
    )
    .unwrap();
    let b = optimize_exponents(
        &ds,
        Ansatz::FidelitySusceptibility,
        Exponent::Nu,
        (0.5, 2.0),
    )
    .unwrap();
    assert_eq!(a, b);
}

/// Extremum positions of `kind` at time `n` on grids `h = 1 + x / N^2`.
fn shift_points(
    drive: Drive<f64>,
    sizes: &[usize],
    x: (f64, f64),
    count: usize,
    n: u64,
    kind: K,
) -> Vec<(usize, f64)> {
    let spec = SweepSpec {
        drive,
        grids: sizes
            .iter()
            .map(|&s| {
                let n2 = (s * s) as f64;
                (
                    s,
                    sweep::linspace(x.0, x.1, count)
                        .into_iter()
                        .map(|x| 1.0 + x / n2)
                        .collect(),
                )
            })
            .collect(),
        ns: vec![n],
        kinds: vec![kind],
        settings: SweepSettings::default(),
    };
    let recs = sweep::run_sweep(&spec).unwrap();
    let ds = dataset(&recs, kind, n);
    ds.curves
        .iter()
        .map(|(&s, c)| (s, extremum(c, Orientation::detect(c)).unwrap().h))
        .collect()
}

#[test]
fn equilibrium_shift_exponent_is_two() {
    let drive = Drive {
        gamma: 1.0,
        dh: 0.0,
        omega: 2.0 * PI,
    };
    const TOL: f64 = 0.05;
    let sizes = [128usize, 256, 384, 512, 768, 1024];
    for kind in [K::DcDh, K::ChiZ] {
        let pts = shift_points(drive, &sizes, (-30.0, 15.0), 46, 0, kind);
        assert!(pts.iter().all(|&(_, h)| h < 1.0));
        let f = fit_shift_exponent(&pts, 1.0).unwrap();
        assert!((f.lambda - 2.0).abs() < TOL, "{kind}: {f:?}");
        assert!(f.r_squared >= 0.99);
    }
}

#[test]
fn driven_shift_exponent_is_two() {
    let drive = Drive {
        gamma: 1.0,
        dh: 0.1,
        omega: 2.0 * PI,
    };
    const TOL: f64 = 0.1;
    let sizes = [256usize, 512, 1024, 2048, 4096];
    for kind in [K::DcDh, K::ChiZ] {
        let pts = shift_points(drive, &sizes, (-70.0, -10.0), 31, 30, kind);
        let f = fit_shift_exponent(&pts, 1.0).unwrap();
        assert!((f.lambda - 2.0).abs() < TOL, "{kind}: {f:?}");
        assert!(f.r_squared >= 0.99);
    }
}

#[test]
fn equilibrium_collapses_select_nu_one() {
    let drive = Drive {
        gamma: 1.0,
        dh: 0.0,
        omega: 2.0 * PI,
    };
    let sizes = [64usize, 128, 256];
    let recs = scaled_sweep(
        drive,
        &sizes,
        4.0,
        33,
        &[0],
        &[K::DcDh, K::ChiZ, K::EntropyHalf],
    );
    for (kind, ansatz) in [
        (K::DcDh, Ansatz::ConcurrenceLog),
        (K::ChiZ, Ansatz::ChiZLog),
        (K::EntropyHalf, Ansatz::EntropyShift),
    ] {
        let res =
            optimize_exponents(&dataset(&recs, kind, 0), ansatz, Exponent::Nu, (0.5, 2.0)).unwrap();
        assert!((res.nu - 1.0).abs() < 0.05, "{kind}: {res:?}");
        assert!(res.identifiable);
    }
}

#[test]
fn driven_concurrence_collapse_selects_nu_one() {
    let drive = Drive {
        gamma: 1.0,
        dh: 0.1,
        omega: 2.0 * PI,
    };
    let sizes = [128usize, 256, 512];
    let recs = scaled_sweep(drive, &sizes, 4.0, 33, &[30], &[K::DcDh]);
    let res = optimize_exponents(
        &dataset(&recs, K::DcDh, 30),
        Ansatz::ConcurrenceLog,
        Exponent::Nu,
        (0.5, 2.0),
    )
    .unwrap();
    assert!((res.nu - 1.0).abs() < 0.05, "{res:?}");
}
