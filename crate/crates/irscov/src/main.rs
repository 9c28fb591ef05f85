use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use irscov::config::{self, Loaded};
use irscov::crossover::{report_crossovers, DEFAULT_BENEFIT_TOL};
use irscov::output::{self, Format, Provenance};
use irscov::sweep::{hardening_table, range_table, run_sweep, SweepOptions, SweepSpec};
use irscov::{CliError, CliResult};
use irscov_core::montecarlo::SimConfig;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "irscov",
    version,
    about = "Coverage of IRS-aided links under Nakagami-m fading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coverage sweep as configured (Monte-Carlo only if `sweep.validate`).
    Sweep(Common),
    /// Coverage sweep with the Monte-Carlo oracle alongside.
    Validate(Common),
    /// IRS coverage range at every sweep point.
    Range(Common),
    /// Channel-hardening factor against the number of elements.
    Hardening(Common),
    /// Mode-switching distances of a distance sweep.
    Crossover {
        #[command(flatten)]
        common: Common,
        /// Coverage gain below which combining stops paying off.
        #[arg(long, default_value_t = DEFAULT_BENEFIT_TOL)]
        benefit_tol: f64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Add per-row analytic runtimes (makes output nondeterministic).
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn load(&self) -> CliResult<(Loaded, SweepSpec)> {
        let mut loaded = config::load(&self.config)?;
        if let Some(seed) = self.seed {
            loaded.sim.seed = seed;
        }
        if let Some(samples) = self.samples {
            loaded.sim.samples = samples;
        }
        loaded
            .sim
            .validate()
            .map_err(|e| CliError::config(format!("simulation: {e}")))?;
        let spec = loaded
            .sweep
            .clone()
            .ok_or_else(|| CliError::config("config has no [sweep] section"))?;
        Ok((loaded, spec))
    }

    fn emit<T: Serialize>(&self, rows: &[T], prov: &Provenance) -> CliResult<()> {
        let mut buf = Vec::new();
        output::write(rows, self.format, prov, &mut buf)?;
        match &self.out {
            Some(path) => std::fs::write(path, buf)?,
            None => std::io::stdout().lock().write_all(&buf)?,
        }
        Ok(())
    }
}

fn sim_settings(sim: &SimConfig) -> Vec<(String, String)> {
    vec![
        ("seed".into(), sim.seed.to_string()),
        ("samples".into(), sim.samples.to_string()),
        ("streams".into(), sim.streams.to_string()),
        ("antithetic".into(), sim.antithetic.to_string()),
    ]
}

fn run(cli: Cli) -> CliResult<()> {
    let jobs = match &cli.command {
        Command::Sweep(c) | Command::Validate(c) | Command::Range(c) | Command::Hardening(c) => {
            c.jobs
        }
        Command::Crossover { common, .. } => common.jobs,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::config(format!("jobs: {e}")))?;
    pool.install(|| match cli.command {
        Command::Sweep(c) => sweep(&c, false),
        Command::Validate(c) => sweep(&c, true),
        Command::Range(c) => {
            let (loaded, spec) = c.load()?;
            let rows = range_table(&loaded.base, &spec)?;
            c.emit(&rows, &provenance(&loaded, Vec::new()))
        }
        Command::Hardening(c) => {
            let (loaded, spec) = c.load()?;
            let sim = spec.validate.then_some(loaded.sim);
            let rows = hardening_table(&loaded.base, &spec, sim.as_ref())?;
            let settings = sim.as_ref().map(sim_settings).unwrap_or_default();
            c.emit(&rows, &provenance(&loaded, settings))
        }
        Command::Crossover {
            common,
            benefit_tol,
        } => {
            let (loaded, spec) = common.load()?;
            let rows = run_sweep(&loaded.base, &spec, &SweepOptions::default())?;
            let table = report_crossovers(&rows, benefit_tol);
            let settings = vec![("benefit_tol".into(), benefit_tol.to_string())];
            common.emit(&table, &provenance(&loaded, settings))
        }
    })
}

fn provenance(loaded: &Loaded, settings: Vec<(String, String)>) -> Provenance {
    Provenance {
        config_hash: loaded.hash.clone(),
        settings,
    }
}

fn sweep(c: &Common, force_validate: bool) -> CliResult<()> {
    let (loaded, spec) = c.load()?;
    let sim = (spec.validate || force_validate).then_some(loaded.sim);
    let opts = SweepOptions {
        sim,
        timings: c.timings,
    };
    let rows = run_sweep(&loaded.base, &spec, &opts)?;
    let settings = sim.as_ref().map(sim_settings).unwrap_or_default();
    c.emit(&rows, &provenance(&loaded, settings))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::to_string(&e.record())
                .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", e.kind()));
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
