use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use fss_cli::{preset, run, ExperimentConfig, PRESETS};

#[derive(Parser)]
#[command(
    name = "fss",
    version,
    about = "Finite-size-scaling experiments on the periodically driven XY chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, analyse and write observables.csv, analysis.json and manifest.json.
    Run(Source),
    /// Check a configuration and print its memory and wall-time estimate.
    Validate(Source),
    /// List the built-in presets.
    ListPresets,
}

#[derive(Args)]
struct Source {
    /// TOML experiment configuration.
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "preset",
        required_unless_present = "preset"
    )]
    config: Option<PathBuf>,
    /// Built-in parameter set (see `list-presets`).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Worker threads; defaults to the config value, then to the CPU count.
    #[arg(long, value_name = "K")]
    workers: Option<usize>,
    /// Output directory; overrides the config value.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed recorded with the run; overrides the config value.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
}

impl Source {
    fn load(&self) -> anyhow::Result<(ExperimentConfig, usize)> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_toml(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(name)) => preset(name)?,
            (None, None) => unreachable!("clap requires --config or --preset"),
        };
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let workers = cfg
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        Ok((cfg, workers))
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::ListPresets => {
            for p in PRESETS {
                let cfg = (p.config)();
                println!("{:<10} {:<15} {}", p.name, cfg.kind, p.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate(src) => {
            let (cfg, workers) = src.load()?;
            let d = cfg.validate(workers);
            print!("{d}");
            Ok(if d.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Run(src) => {
            let (cfg, workers) = src.load()?;
            let out = cfg
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("fss-output"));
            let outcome = run(&cfg, &out, workers)?;
            for f in &outcome.manifest.outputs {
                println!("{}  {}", f.sha256, outcome.out_dir.join(&f.file).display());
            }
            println!(
                "manifest: {}",
                outcome.out_dir.join(fss_cli::run::MANIFEST_JSON).display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
