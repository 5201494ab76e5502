//! Experiment configuration, presets and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use fss_core::observables::ObservableKind;
use fss_core::scaling::{BreakdownCriterion, MIN_SAMPLES_PER_CURVE};
use fss_core::sweep::{linspace, SweepSettings};
use fss_core::{Drive, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ConcurrenceFss,
    ChiZFss,
    EntropyFss,
    FidelityFss,
    BreakdownScan,
    LoschmidtWork,
    FsOffcritical,
    LowOmega,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::ConcurrenceFss,
        ExperimentKind::ChiZFss,
        ExperimentKind::EntropyFss,
        ExperimentKind::FidelityFss,
        ExperimentKind::BreakdownScan,
        ExperimentKind::LoschmidtWork,
        ExperimentKind::FsOffcritical,
        ExperimentKind::LowOmega,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::ConcurrenceFss => "concurrence-fss",
            ExperimentKind::ChiZFss => "chi-z-fss",
            ExperimentKind::EntropyFss => "entropy-fss",
            ExperimentKind::FidelityFss => "fidelity-fss",
            ExperimentKind::BreakdownScan => "breakdown-scan",
            ExperimentKind::LoschmidtWork => "loschmidt-work",
            ExperimentKind::FsOffcritical => "fs-offcritical",
            ExperimentKind::LowOmega => "low-omega",
        }
    }

    /// Observables recorded by the sweep.
    pub fn observables(self) -> Vec<ObservableKind> {
        use ObservableKind as K;
        match self {
            ExperimentKind::ConcurrenceFss => vec![K::Concurrence, K::DcDh],
            ExperimentKind::ChiZFss => vec![K::SigmaZ, K::ChiZ],
            ExperimentKind::EntropyFss => vec![K::EntropyHalf],
            ExperimentKind::FidelityFss | ExperimentKind::FsOffcritical => vec![K::ChiF],
            ExperimentKind::BreakdownScan | ExperimentKind::LowOmega => vec![K::ChiZ],
            ExperimentKind::LoschmidtWork => vec![K::Loschmidt, K::Work],
        }
    }

    fn needs_collapse(self) -> bool {
        !matches!(
            self,
            ExperimentKind::LoschmidtWork | ExperimentKind::FsOffcritical
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = Self::ALL.iter().map(|k| k.as_str()).collect();
                format!(
                    "unknown experiment kind `{s}`; valid kinds: {}",
                    valid.join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub dh: f64,
    pub omega: f64,
}

/// Field grid of every size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridConfig {
    /// `count` fields on `[min, max]`, shared by all sizes.
    Fixed { min: f64, max: f64, count: usize },
    /// `h = 1 + x / N^exponent`, `x` on `[x_min, x_max]`: centred on the
    /// critical field and narrowing with `N`.
    Scaled {
        x_min: f64,
        x_max: f64,
        count: usize,
        #[serde(default = "one_u32")]
        exponent: u32,
    },
}

fn one_u32() -> u32 {
    1
}

impl GridConfig {
    pub fn count(&self) -> usize {
        match *self {
            GridConfig::Fixed { count, .. } | GridConfig::Scaled { count, .. } => count,
        }
    }

    pub fn fields(&self, n_sites: usize) -> Vec<f64> {
        match *self {
            GridConfig::Fixed { min, max, count } => linspace(min, max, count),
            GridConfig::Scaled {
                x_min,
                x_max,
                count,
                exponent,
            } => {
                let scale = (n_sites as f64).powi(exponent as i32);
                linspace(x_min, x_max, count)
                    .into_iter()
                    .map(|x| 1.0 + x / scale)
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub fd_step: f64,
    pub fidelity_dh: f64,
    pub tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let s = SweepSettings::<f64>::default();
        Self {
            fd_step: s.fd_step,
            fidelity_dh: s.fidelity_dh,
            tol: s.tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub nu_bounds: (f64, f64),
    pub r_bounds: (f64, f64),
    /// Breakdown threshold as a multiple of the `n = 0` collapse score.
    pub breakdown_factor: f64,
    pub criterion: Option<BreakdownCriterion>,
    /// Field of the size-scaling fit of `fs-offcritical`.
    pub h_fixed: f64,
    /// Relative residual bound of the `xi` fit window.
    pub xi_rel_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            nu_bounds: (0.5, 2.0),
            r_bounds: (0.3, 1.7),
            breakdown_factor: 5.0,
            criterion: None,
            h_fixed: 0.95,
            xi_rel_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub max_memory_mb: f64,
    pub max_wall_hours: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_memory_mb: 16_384.0,
            max_wall_hours: 24.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(with = "kind_str")]
    pub kind: ExperimentKind,
    pub sizes: Vec<usize>,
    #[serde(default = "one_f64")]
    pub gamma: f64,
    pub drive: DriveConfig,
    pub grid: GridConfig,
    pub ns: Vec<u64>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn one_f64() -> f64 {
    1.0
}

mod kind_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::ExperimentKind;

    pub fn serialize<S: Serializer>(k: &ExperimentKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(k.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExperimentKind, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn drive(&self) -> Drive<f64> {
        Drive {
            gamma: self.gamma,
            dh: self.drive.dh,
            omega: self.drive.omega,
        }
    }

    pub fn settings(&self) -> SweepSettings<f64> {
        SweepSettings {
            fd_step: self.numerics.fd_step,
            fidelity_dh: self.numerics.fidelity_dh,
            tol: self.numerics.tol,
        }
    }

    pub fn criterion(&self) -> BreakdownCriterion {
        self.analysis.criterion.unwrap_or(match self.kind {
            ExperimentKind::LowOmega => BreakdownCriterion::Spread,
            _ => BreakdownCriterion::Departure,
        })
    }

    pub fn sorted_sizes(&self) -> Vec<usize> {
        let mut s = self.sizes.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn cells(&self) -> usize {
        self.sorted_sizes().len() * self.grid.count()
    }

    /// Checks the configuration and estimates its cost for `workers`
    /// concurrent cells.
    pub fn validate(&self, workers: usize) -> Diagnostics {
        let mut d = Diagnostics::default();
        let mut err = |m: String| d.errors.push(m);
        if self.sizes.is_empty() {
            err("sizes: empty size list".into());
        }
        for &n in &self.sizes {
            if let Err(e) = ModelParams::new(n, 1.0, 1.0, 0.0, 1.0) {
                err(format!("sizes: {e}"));
            }
        }
        if let Err(e) = ModelParams::new(4, self.gamma, 1.0, self.drive.dh, self.drive.omega) {
            err(format!("drive: {e}"));
        }
        if self.grid.count() == 0 {
            err("grid: count must be positive".into());
        }
        match self.grid {
            GridConfig::Fixed { min, max, .. } => {
                if !(min.is_finite() && max.is_finite() && min <= max) {
                    err(format!("grid: need finite min <= max, got [{min}, {max}]"));
                }
            }
            GridConfig::Scaled { x_min, x_max, .. } => {
                if !(x_min.is_finite() && x_max.is_finite() && x_min <= x_max) {
                    err(format!(
                        "grid: need finite x_min <= x_max, got [{x_min}, {x_max}]"
                    ));
                }
            }
        }
        if self.ns.is_empty() {
            err("ns: empty list of stroboscopic times".into());
        }
        let n = &self.numerics;
        if !(n.tol > 0.0 && n.tol.is_finite()) {
            err(format!(
                "numerics: tolerance must be positive, got {}",
                n.tol
            ));
        }
        if !(n.fd_step > 0.0) {
            err(format!(
                "numerics: fd_step must be positive, got {}",
                n.fd_step
            ));
        }
        if !(n.fidelity_dh > 0.0) {
            err(format!(
                "numerics: fidelity_dh must be positive, got {}",
                n.fidelity_dh
            ));
        }
        let a = &self.analysis;
        for (name, (lo, hi)) in [("nu_bounds", a.nu_bounds), ("r_bounds", a.r_bounds)] {
            if !(lo > 0.0 && hi > lo) {
                err(format!(
                    "analysis: {name} must satisfy 0 < lo < hi, got ({lo}, {hi})"
                ));
            }
        }
        if self.kind.needs_collapse() && self.grid.count() < MIN_SAMPLES_PER_CURVE {
            err(format!(
                "grid: {} needs at least {MIN_SAMPLES_PER_CURVE} fields per size, got {}",
                self.kind,
                self.grid.count()
            ));
        }
        let sizes = self.sorted_sizes().len();
        match self.kind {
            ExperimentKind::BreakdownScan | ExperimentKind::LowOmega => {
                if !self.ns.contains(&0) {
                    err("ns: breakdown scans need n = 0 for the baseline".into());
                }
                if !(a.breakdown_factor > 0.0) {
                    err(format!(
                        "analysis: breakdown_factor must be positive, got {}",
                        a.breakdown_factor
                    ));
                }
                let min = match self.criterion() {
                    BreakdownCriterion::Spread => 2,
                    BreakdownCriterion::Departure => 3,
                };
                if sizes < min {
                    err(format!(
                        "sizes: {:?} criterion needs at least {min} sizes, got {sizes}",
                        self.criterion()
                    ));
                }
            }
            ExperimentKind::FsOffcritical => {
                if !self.sizes.iter().all(|&s| {
                    self.grid
                        .fields(s)
                        .iter()
                        .any(|&h| (h - a.h_fixed).abs() < 1e-12)
                }) {
                    err(format!(
                        "analysis: h_fixed = {} is not a grid field",
                        a.h_fixed
                    ));
                }
                if !(a.xi_rel_tol > 0.0) {
                    err(format!(
                        "analysis: xi_rel_tol must be positive, got {}",
                        a.xi_rel_tol
                    ));
                }
            }
            _ => {}
        }
        if let Some(0) = self.workers {
            err("workers: must be positive".into());
        }
        if !d.errors.is_empty() {
            return d;
        }
        self.estimate(workers, &mut d);
        d
    }

    fn estimate(&self, workers: usize, d: &mut Diagnostics) {
        let entropy = self
            .kind
            .observables()
            .contains(&ObservableKind::EntropyHalf);
        let n_max = self.sorted_sizes().last().copied().unwrap_or(0) as f64;
        let pipelines = match self.kind {
            ExperimentKind::ConcurrenceFss
            | ExperimentKind::ChiZFss
            | ExperimentKind::BreakdownScan
            | ExperimentKind::LowOmega => 3.0,
            ExperimentKind::FidelityFss | ExperimentKind::FsOffcritical => 2.0,
            _ => 1.0,
        };
        // per-mode SU(2) propagators and states, plus the N x N correlation
        // matrix and eigensolver workspace of the half-chain entropy
        let per_cell = pipelines * n_max * 96.0
            + if entropy {
                4.0 * 8.0 * n_max * n_max
            } else {
                0.0
            };
        let concurrent = workers.min(self.cells()).max(1) as f64;
        d.memory_bytes = 64.0 * 1024.0 * 1024.0 + concurrent * per_cell;
        let drive = self.drive();
        let times = self.ns.len() as f64;
        let n_last = self.ns.iter().copied().max().unwrap_or(0) as f64;
        let mut flops = 0.0;
        for s in self.sorted_sizes() {
            let nf = s as f64;
            let steps = ModelParams::new(s, drive.gamma, 1.0, drive.dh, drive.omega)
                .ok()
                .and_then(|p| fss_core::resolve_steps(&p, self.numerics.tol).ok())
                .unwrap_or(1) as f64;
            let per_cell = pipelines * nf / 2.0
                * (steps * 400.0 + (n_last + 1.0).log2().max(1.0) * 60.0 * times)
                + if entropy {
                    times * 12.0 * nf * nf * nf
                } else {
                    times * nf * 40.0
                };
            flops += per_cell * self.grid.count() as f64;
        }
        d.cells = self.cells();
        d.wall_seconds = flops / 2e9 / concurrent;
        if d.memory_bytes > self.budget.max_memory_mb * 1024.0 * 1024.0 {
            d.errors.push(format!(
                "budget: estimated memory {:.0} MiB exceeds max_memory_mb = {}",
                d.memory_bytes / 1048576.0,
                self.budget.max_memory_mb
            ));
        }
        if d.wall_seconds > self.budget.max_wall_hours * 3600.0 {
            d.errors.push(format!(
                "budget: estimated wall time {:.1} h exceeds max_wall_hours = {}",
                d.wall_seconds / 3600.0,
                self.budget.max_wall_hours
            ));
        }
        if self.kind == ExperimentKind::LowOmega && self.drive.omega > 1.0 {
            d.warnings
                .push(format!("low-omega run with omega = {}", self.drive.omega));
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    pub cells: usize,
    pub memory_bytes: f64,
    pub wall_seconds: f64,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        if self.errors.is_empty() {
            writeln!(f, "cells: {}", self.cells)?;
            writeln!(
                f,
                "estimated memory: {:.1} MiB",
                self.memory_bytes / 1048576.0
            )?;
            writeln!(f, "estimated wall time: {:.1} s", self.wall_seconds)?;
        }
        Ok(())
    }
}

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: fn() -> ExperimentConfig,
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn base(
    kind: ExperimentKind,
    sizes: &[usize],
    dh: f64,
    omega: f64,
    grid: GridConfig,
    ns: Vec<u64>,
) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        sizes: sizes.to_vec(),
        gamma: 1.0,
        drive: DriveConfig { dh, omega },
        grid,
        ns,
        numerics: Numerics::default(),
        analysis: AnalysisConfig::default(),
        budget: Budget::default(),
        out: None,
        workers: None,
        seed: 0,
    }
}

fn scaled(half_width: f64, count: usize) -> GridConfig {
    GridConfig::Scaled {
        x_min: -half_width,
        x_max: half_width,
        count,
        exponent: 1,
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1",
        description: "dC/dh under h(t) = 1 + 0.1 sin 2 pi t, N = 128..1024, n = 0 and 30",
        config: || {
            base(
                ExperimentKind::ConcurrenceFss,
                &[128, 256, 512, 1024],
                0.1,
                TWO_PI,
                scaled(4.0, 33),
                vec![0, 30],
            )
        },
    },
    Preset {
        name: "fig2",
        description: "fidelity susceptibility collapse and r(nT) for n = 0..15",
        config: || {
            base(
                ExperimentKind::FidelityFss,
                &[64, 128, 256, 512],
                0.1,
                TWO_PI,
                scaled(3.0, 41),
                vec![0, 5, 10, 15],
            )
        },
    },
    Preset {
        name: "fig3",
        description: "breakdown times at omega = 4, dh = 0.75",
        config: || {
            base(
                ExperimentKind::BreakdownScan,
                &[128, 160, 192, 224, 256],
                0.75,
                4.0,
                scaled(4.0, 33),
                (0..=40).collect(),
            )
        },
    },
    Preset {
        name: "fig4",
        description: "k-resolved work and Loschmidt echo at omega = 2, dh = 0.1, N = 512",
        config: || {
            base(
                ExperimentKind::LoschmidtWork,
                &[512],
                0.1,
                2.0,
                GridConfig::Fixed {
                    min: 1.0,
                    max: 1.0,
                    count: 1,
                },
                (0..=10).collect(),
            )
        },
    },
    Preset {
        name: "methods",
        description:
            "off-critical fidelity susceptibility: linear N scaling at h = 0.95 and xi fits",
        config: || {
            base(
                ExperimentKind::FsOffcritical,
                &[256, 512, 768, 1024, 1536, 2048],
                0.1,
                TWO_PI,
                GridConfig::Fixed {
                    min: 0.5,
                    max: 0.99,
                    count: 50,
                },
                vec![0, 25],
            )
        },
    },
    Preset {
        name: "low-omega",
        description: "chi_z collapse after one cycle at omega = 0.5",
        config: || {
            base(
                ExperimentKind::LowOmega,
                &[128, 256],
                0.1,
                0.5,
                scaled(4.0, 33),
                vec![0, 1],
            )
        },
    },
];

pub fn preset(name: &str) -> anyhow::Result<ExperimentConfig> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(|p| (p.config)())
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            anyhow::anyhow!("unknown preset `{name}`; available: {}", names.join(", "))
        })
}
