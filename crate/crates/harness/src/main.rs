use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use csf_harness::{
    run_datalength_sweep, run_fig2, run_invariance_demo, run_snr_sweep, write_outputs,
    ExperimentConfig, Report,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "csf-harness",
    about = "CSF blind channel identification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Received ACF of the three-path channel; fails if the secondary peaks are off.
    Fig2(Common),
    /// Blind MSE against data length.
    SweepLength(Common),
    /// Blind and least-squares MSE against SNR.
    SweepSnr(Common),
    /// Symbol invariance of the transmitted ACF.
    Invariance(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    /// Override any config key, e.g. `--set fig2.gamma=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> csf_harness::Result<ExperimentConfig> {
        let mut overrides = Vec::new();
        if let Some(s) = self.seed {
            overrides.push(format!("seed={s}"));
        }
        if let Some(t) = self.trials {
            overrides.push(format!("trials={t}"));
        }
        if let Some(t) = self.threads {
            overrides.push(format!("threads={t}"));
        }
        if let Some(o) = &self.out {
            overrides.push(format!(
                "out={}",
                toml::Value::String(o.display().to_string())
            ));
        }
        overrides.extend(self.overrides.iter().cloned());
        ExperimentConfig::load(self.config.as_deref(), &overrides)
    }
}

fn emit<S: Serialize>(cfg: &ExperimentConfig, report: &Report<S>) -> csf_harness::Result<()> {
    let paths = write_outputs(
        &cfg.out,
        report.experiment,
        cfg,
        &report.table,
        &report.summary,
    )?;
    println!("wrote {} and {}", paths.csv.display(), paths.json.display());
    Ok(())
}

fn run(cli: Cli) -> csf_harness::Result<ExitCode> {
    match cli.command {
        Command::Fig2(c) => {
            let cfg = c.load()?;
            let report = run_fig2(&cfg)?;
            emit(&cfg, &report)?;
            let s = &report.summary;
            if !s.peaks_ok {
                eprintln!(
                    "peak check failed: predicted secondary peaks {:?}, expected {:?}",
                    s.predicted_peaks, s.expected_peaks
                );
                return Ok(ExitCode::from(2));
            }
            println!("secondary peaks at {:?}", s.predicted_peaks);
        }
        Command::SweepLength(c) => {
            let cfg = c.load()?;
            emit(&cfg, &run_datalength_sweep(&cfg)?)?;
        }
        Command::SweepSnr(c) => {
            let cfg = c.load()?;
            emit(&cfg, &run_snr_sweep(&cfg)?)?;
        }
        Command::Invariance(c) => {
            let cfg = c.load()?;
            let report = run_invariance_demo(&cfg)?;
            emit(&cfg, &report)?;
            let s = &report.summary;
            println!(
                "max pairwise deviation {:.3e}, max deviation from closed form {:.3e}",
                s.max_pairwise_deviation, s.max_closed_form_deviation
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
