//! Fits and collapses run on the sweep records of one experiment.

use std::collections::BTreeMap;

use serde::Serialize;

use fss_core::observables::{ObservableKind, ObservableRecord};
use fss_core::scaling::{
    breakdown_times, collapse_score, fit_fs_peak, fit_log_divergence, fit_shift_exponent,
    linear_fs_scaling, optimize_exponents, pseudocritical_points, xi_scaling_fit, Ansatz,
    BreakdownCriterion, BreakdownTime, CollapseResult, Exponent, FsPeakFit, LinearFit,
    ScalingDataset, ShiftFit, XiFit,
};
use fss_core::{floquet_spectrum, max_group_velocity, monodromy, recurrence_time};

use crate::config::{ExperimentConfig, ExperimentKind};

type Records = [ObservableRecord<f64>];

#[derive(Debug, Clone, Serialize)]
pub struct PeakEntry {
    pub h: f64,
    pub value: f64,
}

/// Collapse analysis at one stroboscopic time.
#[derive(Debug, Clone, Default, Serialize)]
pub struct FssAtTime {
    pub n: u64,
    pub peaks: BTreeMap<usize, PeakEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_divergence: Option<LinearFit<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftFit<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fs_peak: Option<FsPeakFit<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<CollapseResult<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<CollapseResult<f64>>,
    /// Collapse quality at `nu = r = 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quality_at_one: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Breakdown {
    pub criterion: BreakdownCriterion,
    pub factor: f64,
    pub times: Vec<BreakdownEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BreakdownEntry {
    #[serde(flatten)]
    pub time: BreakdownTime<f64>,
    pub v_max: f64,
    pub t_rec: f64,
    /// `tau T / t_rec`.
    pub tau_over_t_rec: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumAtCell {
    pub n_sites: usize,
    pub h: f64,
    pub v_max: f64,
    pub t_rec: f64,
    pub quasi_degeneracy_index: usize,
    pub quasi_degeneracy_k: f64,
    pub times: Vec<ResolvedAtTime>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedAtTime {
    pub n: u64,
    pub loschmidt: f64,
    pub work: f64,
    pub argmax_work_k: usize,
    pub argmin_loschmidt_k: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OffCritical {
    pub h_fixed: f64,
    pub size_scaling: BTreeMap<u64, LinearFit<f64>>,
    /// `xi` fits per size and time.
    pub xi: BTreeMap<usize, BTreeMap<u64, XiFit<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Fss {
        ansatz: Ansatz,
        times: Vec<FssAtTime>,
    },
    Breakdown(Breakdown),
    Spectrum {
        cells: Vec<SpectrumAtCell>,
    },
    OffCritical(OffCritical),
}

fn dataset(records: &Records, kind: ObservableKind, n: u64) -> anyhow::Result<ScalingDataset<f64>> {
    Ok(ScalingDataset::from_records(records, kind, n)?)
}

fn fss(
    cfg: &ExperimentConfig,
    records: &Records,
    kind: ObservableKind,
    ansatz: Ansatz,
) -> anyhow::Result<Vec<FssAtTime>> {
    let mut ns = cfg.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut out = Vec::new();
    for n in ns {
        let ds = dataset(records, kind, n)?;
        let mut entry = FssAtTime {
            n,
            ..Default::default()
        };
        match pseudocritical_points(&ds, ansatz) {
            Ok(peaks) => {
                entry.peaks = peaks
                    .iter()
                    .map(|(&s, p)| {
                        (
                            s,
                            PeakEntry {
                                h: p.h,
                                value: p.value,
                            },
                        )
                    })
                    .collect();
                let heights: Vec<(usize, f64)> = peaks.iter().map(|(&s, p)| (s, p.value)).collect();
                let places: Vec<(usize, f64)> = peaks.iter().map(|(&s, p)| (s, p.h)).collect();
                if ansatz == Ansatz::FidelitySusceptibility {
                    if heights.len() >= 3 {
                        entry.fs_peak = fit_fs_peak(&heights).ok();
                    }
                } else if ansatz != Ansatz::EntropyShift && heights.len() >= 3 {
                    entry.log_divergence = fit_log_divergence(&heights).ok();
                }
                if places.len() >= 4 {
                    entry.shift = fit_shift_exponent(&places, 1.0).ok();
                }
            }
            Err(e) => entry.errors.push(format!("peaks: {e}")),
        }
        if ds.curves.len() >= 2 {
            match collapse_score(&ds, ansatz, 1.0, 1.0) {
                Ok(q) => entry.quality_at_one = Some(q),
                Err(e) => entry.errors.push(format!("quality: {e}")),
            }
            match optimize_exponents(&ds, ansatz, Exponent::Nu, cfg.analysis.nu_bounds) {
                Ok(r) => entry.nu = Some(r),
                Err(e) => entry.errors.push(format!("nu: {e}")),
            }
            if ansatz == Ansatz::FidelitySusceptibility {
                match optimize_exponents(&ds, ansatz, Exponent::R, cfg.analysis.r_bounds) {
                    Ok(r) => entry.r = Some(r),
                    Err(e) => entry.errors.push(format!("r: {e}")),
                }
            }
        }
        out.push(entry);
    }
    Ok(out)
}

fn breakdown(cfg: &ExperimentConfig, records: &Records) -> anyhow::Result<Breakdown> {
    let kind = ObservableKind::ChiZ;
    let mut data = BTreeMap::new();
    for &n in &cfg.ns {
        data.insert(n, dataset(records, kind, n)?);
    }
    let quality = |sizes: &[usize], n: u64| {
        collapse_score(&data[&n].subset(sizes)?, Ansatz::ChiZLog, 1.0, 1.0)
    };
    let sizes = cfg.sorted_sizes();
    let times = breakdown_times(
        &sizes,
        &cfg.ns,
        cfg.analysis.breakdown_factor,
        cfg.criterion(),
        quality,
    )?;
    let drive = cfg.drive();
    let period = 2.0 * std::f64::consts::PI / drive.omega;
    let times = times
        .into_iter()
        .map(|time| {
            let p = drive.params(time.n_sites, 1.0)?;
            let v_max =
                max_group_velocity(&floquet_spectrum(&monodromy(&p, cfg.numerics.tol)?)).v_max;
            let t_rec = recurrence_time(time.n_sites, v_max);
            Ok(BreakdownEntry {
                tau_over_t_rec: time.tau as f64 * period / t_rec,
                time,
                v_max,
                t_rec,
            })
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(Breakdown {
        criterion: cfg.criterion(),
        factor: cfg.analysis.breakdown_factor,
        times,
    })
}

fn arg_extreme(v: &[f64], sign: f64) -> usize {
    (0..v.len())
        .max_by(|&a, &b| (sign * v[a]).total_cmp(&(sign * v[b])))
        .unwrap_or(0)
}

fn spectrum(cfg: &ExperimentConfig, records: &Records) -> anyhow::Result<Vec<SpectrumAtCell>> {
    let drive = cfg.drive();
    let mut cells = Vec::new();
    for n_sites in cfg.sorted_sizes() {
        for h in cfg.grid.fields(n_sites) {
            let p = drive.params(n_sites, h)?;
            let spec = floquet_spectrum(&monodromy(&p, cfg.numerics.tol)?);
            let v_max = max_group_velocity(&spec).v_max;
            let q = spec.quasi_degeneracy_index();
            let find = |kind: ObservableKind, n: u64| {
                records
                    .iter()
                    .find(|r| r.kind == kind && r.n_sites == n_sites && r.h == h && r.n == n)
                    .ok_or_else(|| {
                        anyhow::anyhow!("missing {kind} record at N = {n_sites}, h = {h}, n = {n}")
                    })
            };
            let mut times = Vec::new();
            for &n in &cfg.ns {
                let (l, w) = (
                    find(ObservableKind::Loschmidt, n)?,
                    find(ObservableKind::Work, n)?,
                );
                let (lk, wk) = (
                    l.per_k.as_deref().unwrap_or(&[]),
                    w.per_k.as_deref().unwrap_or(&[]),
                );
                times.push(ResolvedAtTime {
                    n,
                    loschmidt: l.value,
                    work: w.value,
                    argmax_work_k: arg_extreme(wk, 1.0),
                    argmin_loschmidt_k: arg_extreme(lk, -1.0),
                });
            }
            cells.push(SpectrumAtCell {
                n_sites,
                h,
                v_max,
                t_rec: recurrence_time(n_sites, v_max),
                quasi_degeneracy_index: q,
                quasi_degeneracy_k: spec.modes[q].k,
                times,
            });
        }
    }
    Ok(cells)
}

fn off_critical(cfg: &ExperimentConfig, records: &Records) -> anyhow::Result<OffCritical> {
    let kind = ObservableKind::ChiF;
    let h_fixed = cfg.analysis.h_fixed;
    let mut size_scaling = BTreeMap::new();
    let mut xi: BTreeMap<usize, BTreeMap<u64, XiFit<f64>>> = BTreeMap::new();
    for &n in &cfg.ns {
        let sel: Vec<&ObservableRecord<f64>> = records
            .iter()
            .filter(|r| r.kind == kind && r.n == n)
            .collect();
        let pts: Vec<(usize, f64)> = cfg
            .sorted_sizes()
            .into_iter()
            .filter_map(|s| {
                sel.iter()
                    .find(|r| r.n_sites == s && (r.h - h_fixed).abs() < 1e-12)
                    .map(|r| (s, r.value))
            })
            .collect();
        if pts.len() >= 3 {
            size_scaling.insert(n, linear_fs_scaling(&pts)?);
        }
        for s in cfg.sorted_sizes() {
            let below: Vec<(f64, f64)> = sel
                .iter()
                .filter(|r| r.n_sites == s && r.h < 1.0)
                .map(|r| (r.h, r.value))
                .collect();
            let above: Vec<(f64, f64)> = sel
                .iter()
                .filter(|r| r.n_sites == s && r.h > 1.0)
                .map(|r| (r.h, r.value))
                .collect();
            // the side holding more samples
            let side = if below.len() >= above.len() {
                below
            } else {
                above
            };
            if let Ok(fit) = xi_scaling_fit(&side, cfg.analysis.xi_rel_tol) {
                xi.entry(s).or_default().insert(n, fit);
            }
        }
    }
    Ok(OffCritical {
        h_fixed,
        size_scaling,
        xi,
    })
}

pub fn analyze(cfg: &ExperimentConfig, records: &Records) -> anyhow::Result<Analysis> {
    use ObservableKind as K;
    Ok(match cfg.kind {
        ExperimentKind::ConcurrenceFss => Analysis::Fss {
            ansatz: Ansatz::ConcurrenceLog,
            times: fss(cfg, records, K::DcDh, Ansatz::ConcurrenceLog)?,
        },
        ExperimentKind::ChiZFss => Analysis::Fss {
            ansatz: Ansatz::ChiZLog,
            times: fss(cfg, records, K::ChiZ, Ansatz::ChiZLog)?,
        },
        ExperimentKind::EntropyFss => Analysis::Fss {
            ansatz: Ansatz::EntropyShift,
            times: fss(cfg, records, K::EntropyHalf, Ansatz::EntropyShift)?,
        },
        ExperimentKind::FidelityFss => Analysis::Fss {
            ansatz: Ansatz::FidelitySusceptibility,
            times: fss(cfg, records, K::ChiF, Ansatz::FidelitySusceptibility)?,
        },
        ExperimentKind::BreakdownScan | ExperimentKind::LowOmega => {
            Analysis::Breakdown(breakdown(cfg, records)?)
        }
        ExperimentKind::LoschmidtWork => Analysis::Spectrum {
            cells: spectrum(cfg, records)?,
        },
        ExperimentKind::FsOffcritical => Analysis::OffCritical(off_critical(cfg, records)?),
    })
}
