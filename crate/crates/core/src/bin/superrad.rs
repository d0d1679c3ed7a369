use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use superrad::config::{RunConfig, SolverKind};
use superrad::run::{self, RunError};

#[derive(Parser)]
#[command(name = "superrad", version, about = "Coherent emission of impurity atoms in a polariton band-gap medium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polariton dispersion table and gap edges.
    Spectrum(Common),
    /// Collective coupling and Lamb shift of the configured ensemble.
    Couplings(Common),
    /// Integrate one trajectory and analyse it.
    Simulate(Common),
    /// Run the [sweep] grid, one directory per point plus aggregate.csv.
    Sweep(Common),
    /// Burst and stationary analysis of an existing time series.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Time-series CSV; defaults to <out>/timeseries.csv.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    /// Worker threads for sweeps.
    #[arg(long, env = "APP_JOBS")]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, PathBuf), RunError> {
        let mut cfg = run::load_config(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(kind) = self.solver {
            cfg.solver.kind = kind;
        }
        let out = self.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
        Ok((cfg, out))
    }
}

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Spectrum(c) => {
            let (cfg, out) = c.load()?;
            let (report, csv) = run::spectrum(&cfg)?;
            let json = run::to_json(&report);
            run::write_text(&out.join("spectrum.csv"), &csv)?;
            run::write_text(&out.join("spectrum.json"), &json)?;
            print!("{json}");
        }
        Command::Couplings(c) => {
            let (cfg, out) = c.load()?;
            let json = run::to_json(&run::couplings(&cfg)?);
            run::write_text(&out.join("couplings.json"), &json)?;
            print!("{json}");
        }
        Command::Simulate(c) => {
            let (cfg, out) = c.load()?;
            let sim = run::simulate(&cfg)?;
            run::write_simulation(&out, &sim)?;
            print!("{}", sim.summary_json());
        }
        Command::Sweep(c) => {
            let (cfg, out) = c.load()?;
            let sweep = run::sweep(&cfg, c.jobs)?;
            run::write_sweep(&out, &sweep)?;
            print!("{}", sweep.aggregate_csv);
        }
        Command::Analyze { common, input } => {
            let (cfg, out) = common.load()?;
            let input = input.unwrap_or_else(|| out.join("timeseries.csv"));
            let report = run::analyze(&cfg, &run::read_text(&input)?)?;
            let json = run::to_json(&report);
            if common.out.is_some() {
                run::write_text(&out.join("analysis.json"), &json)?;
            }
            print!("{json}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
