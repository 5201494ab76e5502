//! Sweep orchestration and output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use fss_core::observables::ObservableRecord;
use fss_core::sweep::{run_sweep, sort_records, steps_for, SweepSpec};
use fss_core::{monodromy_with_steps, ModelParams};

use crate::analysis::{analyze, Analysis};
use crate::config::{Diagnostics, ExperimentConfig};

pub const OBSERVABLES_CSV: &str = "observables.csv";
pub const ANALYSIS_JSON: &str = "analysis.json";
pub const MANIFEST_JSON: &str = "manifest.json";

pub const CSV_HEADER: [&str; 10] = [
    "kind",
    "N",
    "gamma",
    "h",
    "dh",
    "omega",
    "n",
    "value",
    "value_k_index",
    "value_k",
];

#[derive(Debug, Clone, Serialize)]
pub struct TaskTiming {
    pub task: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegratorDiagnostics {
    pub n_sites: usize,
    pub steps_per_period: usize,
    /// Largest `|U^dagger U - 1|` over the modes, at the grid ends.
    pub unitarity_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub workers: usize,
    /// False when the run aborted; files listed next to it are incomplete.
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub estimate: Diagnostics,
    pub timings: Vec<TaskTiming>,
    pub integrator: Vec<IntegratorDiagnostics>,
    pub outputs: Vec<OutputFile>,
}

/// CSV rows: one per record, or one per mode for records with a
/// `k`-resolved breakdown. Floats use the shortest round-trip form.
pub fn write_csv(path: &Path, records: &[ObservableRecord<f64>]) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        let head = [
            r.kind.to_string(),
            r.n_sites.to_string(),
            r.gamma.to_string(),
            r.h.to_string(),
            r.dh.to_string(),
            r.omega.to_string(),
            r.n.to_string(),
            r.value.to_string(),
        ];
        match &r.per_k {
            Some(per_k) => {
                for (m, v) in per_k.iter().enumerate() {
                    let mut row = head.to_vec();
                    row.push(m.to_string());
                    row.push(v.to_string());
                    w.write_record(&row)?;
                }
            }
            None => {
                let mut row = head.to_vec();
                row.extend([String::new(), String::new()]);
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn checksum(path: &Path) -> anyhow::Result<OutputFile> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(OutputFile {
        file: path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn timed<R>(timings: &mut Vec<TaskTiming>, task: String, f: impl FnOnce() -> R) -> R {
    let t = Instant::now();
    let r = f();
    timings.push(TaskTiming {
        task,
        seconds: t.elapsed().as_secs_f64(),
    });
    r
}

pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    pub analysis: Option<Analysis>,
}

/// Simulates every cell, analyses the records and writes the three output
/// files. A failing cell or analysis still leaves a manifest marked invalid.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> anyhow::Result<RunOutcome> {
    let estimate = cfg.validate(workers);
    if !estimate.is_ok() {
        anyhow::bail!("invalid configuration:\n{estimate}");
    }
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for f in [OBSERVABLES_CSV, ANALYSIS_JSON, MANIFEST_JSON] {
        let p = out_dir.join(f);
        if p.exists() {
            fs::remove_file(&p).with_context(|| format!("removing stale {}", p.display()))?;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        workers,
        valid: false,
        error: None,
        estimate,
        timings: Vec::new(),
        integrator: Vec::new(),
        outputs: Vec::new(),
    };
    let result = pool.install(|| execute(cfg, out_dir, &mut manifest));
    let analysis = match result {
        Ok(a) => {
            manifest.valid = true;
            Some(a)
        }
        Err(e) => {
            manifest.error = Some(format!("{e:#}"));
            None
        }
    };
    write_json(&out_dir.join(MANIFEST_JSON), &manifest)?;
    if let Some(e) = &manifest.error {
        anyhow::bail!(
            "run aborted, outputs in {} are marked invalid: {e}",
            out_dir.display()
        );
    }
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        manifest,
        analysis,
    })
}

fn execute(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
) -> anyhow::Result<Analysis> {
    let drive = cfg.drive();
    let settings = cfg.settings();
    let mut records = Vec::new();
    // largest chains first
    for n_sites in cfg.sorted_sizes().into_iter().rev() {
        let fields = cfg.grid.fields(n_sites);
        let steps = steps_for(&drive, n_sites, &fields, settings.tol)?;
        let mut defect = 0.0f64;
        for h in [fields[0], fields[fields.len() - 1]] {
            let p = ModelParams::new(n_sites, drive.gamma, h, drive.dh, drive.omega)?;
            defect = defect.max(monodromy_with_steps(&p, steps)?.unitarity_defect());
        }
        manifest.integrator.push(IntegratorDiagnostics {
            n_sites,
            steps_per_period: steps,
            unitarity_defect: defect,
        });
        let spec = SweepSpec {
            drive,
            grids: vec![(n_sites, fields)],
            ns: cfg.ns.clone(),
            kinds: cfg.kind.observables(),
            settings,
        };
        let recs = timed(
            &mut manifest.timings,
            format!("simulate N={n_sites}"),
            || run_sweep(&spec),
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;
        records.extend(recs);
    }
    manifest.integrator.sort_by_key(|d| d.n_sites);
    sort_records(&mut records);
    let csv_path = out_dir.join(OBSERVABLES_CSV);
    timed(&mut manifest.timings, "write observables".into(), || {
        write_csv(&csv_path, &records)
    })?;
    manifest.outputs.push(checksum(&csv_path)?);
    let analysis = timed(&mut manifest.timings, "analysis".into(), || {
        analyze(cfg, &records)
    })?;
    let json_path = out_dir.join(ANALYSIS_JSON);
    write_json(&json_path, &analysis)?;
    manifest.outputs.push(checksum(&json_path)?);
    Ok(analysis)
}
