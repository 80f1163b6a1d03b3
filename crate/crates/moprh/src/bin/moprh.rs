use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use moprh::config::{preset, preset_descriptions, ExperimentConfig, Precision};
use moprh::suites::run_config;

#[derive(Parser)]
#[command(name = "moprh", version, about = "Verification runner for matrix biorthogonal polynomial identities and discrete Painlevé lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites from a config file or a builtin preset.
    Run {
        /// Path to an experiment config (JSON).
        config: Option<PathBuf>,
        /// Builtin preset name (see `moprh list-presets`).
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Output directory for report.json and the CSV tables.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured working precision.
        #[arg(long)]
        precision: Option<PrecisionArg>,
        /// Worker threads for independent suites (1 = sequential).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List builtin presets.
    ListPresets,
}

fn load_config(
    config: Option<PathBuf>,
    preset_name: Option<String>,
) -> Result<ExperimentConfig, String> {
    match (config, preset_name) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| e.to_string())
        }
        (None, Some(name)) => {
            preset(&name).ok_or_else(|| format!("unknown preset '{name}'"))
        }
        (None, None) => Err("pass a config file or --preset <name>".into()),
        (Some(_), Some(_)) => unreachable!("clap rejects this combination"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListPresets => {
            for (name, desc) in preset_descriptions() {
                println!("{name:24} {desc}");
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            preset: preset_name,
            out,
            precision,
            jobs,
        } => {
            let mut cfg = match load_config(config, preset_name) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            };
            if let Some(p) = precision {
                cfg.precision = match p {
                    PrecisionArg::Double => Precision::Double,
                    PrecisionArg::Extended => Precision::Extended,
                };
            }
            if let Err(e) = cfg.validate() {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            let out_dir = out
                .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("moprh-out"));
            let report = match run_config(&cfg, jobs.max(1)) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("computation failed: {e}");
                    return ExitCode::from(3);
                }
            };
            if let Err(e) = report.write_files(&out_dir, &cfg.to_json()) {
                eprintln!("cannot write report files: {e}");
                return ExitCode::from(3);
            }

            let mut per_suite: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
            for r in &report.records {
                let slot = per_suite.entry(r.suite).or_insert((0, 0));
                slot.1 += 1;
                if r.pass || !r.gating {
                    slot.0 += 1;
                }
            }
            println!("{} ({} precision)", report.name, report.precision);
            for (suite, (ok, total)) in &per_suite {
                println!("  {suite:20} {ok}/{total} ok");
            }
            for w in &report.warnings {
                println!("  warning: {w}");
            }
            for f in &report.findings {
                println!("  finding: {f}");
            }
            let pass = report.all_pass();
            println!(
                "{}: report written to {}",
                if pass { "PASS" } else { "FAIL" },
                out_dir.display()
            );
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
