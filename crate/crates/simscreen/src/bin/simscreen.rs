//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use simscreen::error::Error;
use simscreen::harness::{
    emit_report_files, materialize_unit, plan_units, property_suite, run_experiment, Cache,
    ExperimentConfig, Report,
};

#[derive(Parser)]
#[command(name = "simscreen", about = "Screen explanation methods with simulated agent evaluations", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize the experiment's agent datasets into the cache.
    Gen(CommonArgs),
    /// Run the full experiment grid and emit a report.
    Run(CommonArgs),
    /// Re-emit a previously computed report from the cache.
    Report(CommonArgs),
    /// Run the fast property suite.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (JSON document).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the config's seed list, e.g. `--seed-override 7,8`.
    #[arg(long, value_delimiter = ',')]
    seed_override: Option<Vec<u64>>,
    /// Scale the experiment down to a smoke-test profile.
    #[arg(long)]
    fast: bool,
    /// Worker threads for the grid (defaults to the core count).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for report files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache root; falls back to the config, then to $SIMSCREEN_CACHE_DIR.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Which report rendering to print to stdout.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, needs_config) = match &cli.command {
        Command::Gen(a) | Command::Run(a) | Command::Report(a) => (a, true),
        Command::Verify(a) => (a, false),
    };

    if let Some(workers) = args.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    let config = if needs_config {
        match load_config(args) {
            Ok(cfg) => Some(cfg),
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(1);
            }
        }
    } else {
        None
    };

    let outcome = match &cli.command {
        Command::Gen(_) => cmd_gen(config.as_ref().unwrap()),
        Command::Run(_) => cmd_run(config.as_ref().unwrap(), args),
        Command::Report(_) => cmd_report(config.as_ref().unwrap(), args),
        Command::Verify(_) => cmd_verify(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::ConfigInvalid { .. }) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let path = args.config.as_ref().ok_or_else(|| Error::ConfigInvalid {
        path: "--config".into(),
        message: "a config file is required".into(),
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigInvalid {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seeds) = &args.seed_override {
        cfg.seeds = seeds.clone();
    }
    if args.fast {
        cfg.apply_fast_profile();
    }
    if let Some(dir) = &args.cache_dir {
        cfg.cache_dir = Some(dir.clone());
    } else if cfg.cache_dir.is_none() {
        if let Ok(dir) = std::env::var("SIMSCREEN_CACHE_DIR") {
            cfg.cache_dir = Some(PathBuf::from(dir));
        }
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_gen(cfg: &ExperimentConfig) -> Result<(), Error> {
    let cache_dir = cfg.cache_dir.as_ref().ok_or_else(|| Error::ConfigInvalid {
        path: "cache_dir".into(),
        message: "gen needs a cache directory (flag, config field or SIMSCREEN_CACHE_DIR)".into(),
    })?;
    let cache = Cache::new(cache_dir)?;
    let base = simscreen::harness::runner::load_base_data(cfg)?;
    let digest = simscreen::harness::runner::base_data_digest(cfg);
    for unit in plan_units(cfg) {
        let (ds, _) = materialize_unit(cfg, &unit, base.as_ref(), &digest, Some(&cache))?;
        println!(
            "setting={} seed={} examples={}+{} width={} -> {}",
            unit.setting.name(),
            unit.seed,
            ds.train.len(),
            ds.test.len(),
            ds.observation_width(),
            cache.dataset_path(&ds.provenance.generator_digest).display(),
        );
    }
    Ok(())
}

fn cmd_run(cfg: &ExperimentConfig, args: &CommonArgs) -> Result<(), Error> {
    let report = run_experiment(cfg)?;
    let out = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    emit_report_files(&report, &out)?;
    if let Some(dir) = &cfg.cache_dir {
        let cache = Cache::new(dir)?;
        std::fs::write(
            cache.report_path(&report.fingerprint),
            serde_json::to_string_pretty(&report)?,
        )?;
    }
    print_report(&report, args.format);
    eprintln!(
        "wall clock: {:.1}s | wrote {}",
        report.wall_clock_secs,
        out.display()
    );
    if !report.errors.is_empty() {
        return Err(Error::CorruptEntry(format!(
            "{} grid cells failed; see report",
            report.errors.len()
        )));
    }
    Ok(())
}

fn cmd_report(cfg: &ExperimentConfig, args: &CommonArgs) -> Result<(), Error> {
    let dir = cfg.cache_dir.as_ref().ok_or_else(|| Error::ConfigInvalid {
        path: "cache_dir".into(),
        message: "report re-emission reads the cache".into(),
    })?;
    let cache = Cache::new(dir)?;
    let path = cache.report_path(&cfg.fingerprint());
    let text = std::fs::read_to_string(&path).map_err(|_| Error::ConfigInvalid {
        path: path.display().to_string(),
        message: "no cached report for this config; run the experiment first".into(),
    })?;
    let report: Report = serde_json::from_str(&text)?;
    if let Some(out) = &cfg.output_dir {
        emit_report_files(&report, out)?;
    }
    print_report(&report, args.format);
    Ok(())
}

fn cmd_verify() -> Result<(), Error> {
    let results = property_suite();
    let mut all_ok = true;
    for r in &results {
        println!(
            "[{}] {} — {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_ok &= r.passed;
    }
    if all_ok {
        Ok(())
    } else {
        Err(Error::CorruptEntry("property suite failed".into()))
    }
}

fn print_report(report: &Report, format: Format) {
    match format {
        Format::Csv => print!("{}", report.to_csv()),
        Format::Table => print!("{}", report.to_table_text()),
    }
}
