use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use krecycle_harness::chain::build_step;
use krecycle_harness::geometry::background_grid;
use krecycle_harness::output::{iteration_table, write_angles_csv, write_outputs};
use krecycle_harness::{generate_geometry_sequence, run_chain, ExperimentConfig, Problem};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "krecycle", about = "Recycled MINRES on evolving meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solve chain and write CSVs plus a summary table.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a chain with the eigenspace oracle enabled and write angle tables.
    Angles {
        #[arg(long)]
        config: PathBuf,
        /// Reference eigenspace dimension (default 20).
        #[arg(long, default_value_t = 20)]
        dim: usize,
    },
    /// Print the default configuration of a problem as JSON.
    Preset {
        problem: Problem,
    },
    /// Write the matrix and right-hand side of one step in Matrix Market
    /// format.
    ExportMatrix {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        step: usize,
        /// Output directory (default: the configured output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = run_chain(&cfg)?;
            write_outputs(&summary, &cfg.output_dir)?;
            print!("{}", iteration_table(&summary));
            Ok(summary.all_converged())
        }
        Command::Angles { config, dim } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.oracle_dim = Some(dim);
            let summary = run_chain(&cfg)?;
            write_outputs(&summary, &cfg.output_dir)?;
            for t in &summary.angles {
                println!("step {}", t.step);
                write_angles_csv(t, std::io::stdout().lock())?;
            }
            Ok(summary.all_converged())
        }
        Command::Preset { problem } => {
            println!("{}", serde_json::to_string_pretty(&ExperimentConfig::preset(problem))?);
            Ok(true)
        }
        Command::ExportMatrix { config, step, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let geoms = generate_geometry_sequence(&cfg)?;
            let Some(geom) = geoms.get(step) else {
                bail!("step {step} out of range (sequence has {} steps)", geoms.len());
            };
            let s = build_step(&cfg, &background_grid(&cfg)?, geom)?;
            let dir = out.unwrap_or(cfg.output_dir);
            std::fs::create_dir_all(&dir)?;
            let k = dir.join(format!("matrix_step{step}.mtx"));
            let f = dir.join(format!("rhs_step{step}.mtx"));
            s.system.write_matrix_market(BufWriter::new(File::create(&k)?))?;
            s.system.write_rhs(BufWriter::new(File::create(&f)?))?;
            println!("{} ({} unknowns)\n{}", k.display(), s.system.n(), f.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("at least one solve did not converge");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
