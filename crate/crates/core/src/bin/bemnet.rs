//! Command-line front end; see `bemnet --help`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bemnet::config::ExperimentConfig;
use bemnet::experiments::{
    cmd_fit_bound, cmd_generate, cmd_nyquist, cmd_reconstruct, cmd_sweep, cmd_train, monotonic_in_k,
    resolve_selected, NyquistOverrides, SweepStatus,
};
use bemnet::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bemnet", version, about = "BEM-structured field reconstruction")]
struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory for all artifacts.
    #[arg(long, global = true, default_value = "run")]
    out: PathBuf,
    /// Comma-separated training seeds, overriding the configuration.
    #[arg(long, global = true, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Worker threads for seeds and sweep cells.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write a dataset.
    Generate,
    /// Train one model per seed and select the best.
    Train {
        /// Dataset directory (defaults to --out).
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Reuse seeds that already have a record and checkpoint.
        #[arg(long)]
        resume: bool,
    },
    /// Predict the reference grid and write error reports.
    Reconstruct {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Checkpoint file (defaults to the one named by <out>/selected.json).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Sensitivity sweep over wavenumbers, sensor layouts and widths.
    Sweep,
    /// Sampling check of mesh and grid spacing against the largest k.
    Nyquist {
        #[arg(long)]
        delta_r: Option<f64>,
        #[arg(long)]
        k_max: Option<f64>,
    },
    /// Fit the two-term error bound to a sweep table.
    FitBound {
        /// Sweep table (defaults to <out>/sweep.csv).
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        sensors: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seeds) = &cli.seed_list {
        cfg.training.seeds = seeds.clone();
    }
    if let Some(w) = cli.workers {
        cfg.sweep.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out: &Path = &cli.out;
    let workers = cfg.sweep.workers;
    match &cli.command {
        Command::Generate => {
            let m = cmd_generate(&cfg, out)?;
            println!(
                "wrote {}: {} elements, {} sensors, {} grid points, condition {:.3e}",
                out.display(),
                m.elements,
                m.sensor_counts.iter().product::<usize>(),
                m.grid_counts.iter().product::<usize>(),
                m.condition_estimate
            );
        }
        Command::Train { dataset, resume } => {
            let s = cmd_train(&cfg, dataset.as_deref().unwrap_or(out), out, *resume, workers)?;
            for r in &s.records {
                println!(
                    "seed {}: {} epochs, best epoch {}, best val loss {:.6e}",
                    r.seed,
                    r.epochs(),
                    r.best_epoch,
                    r.best_val_loss
                );
            }
            for (seed, e) in &s.failures {
                eprintln!("seed {seed} failed: {e}");
            }
            println!("selected seed {} ({})", s.selected.seed, s.selected.checkpoint);
        }
        Command::Reconstruct { dataset, checkpoint } => {
            let ckpt = match checkpoint {
                Some(p) => p.clone(),
                None => resolve_selected(out)?,
            };
            let report_dir = out.join("reconstruction");
            let r = cmd_reconstruct(&cfg, dataset.as_deref().unwrap_or(out), &ckpt, &report_dir)?;
            let s = &r.summary;
            println!(
                "{} of {} evaluable points within ±{}% ({:.4}); median signed error {:.4e}; {} below floor",
                s.within_tolerance,
                s.evaluable,
                s.tolerance * 100.0,
                s.fraction_within_tolerance,
                s.median,
                s.below_floor
            );
            println!("reports in {}", report_dir.display());
        }
        Command::Sweep => {
            let rows = cmd_sweep(&cfg, out, workers)?;
            for r in &rows {
                match r.status {
                    SweepStatus::Ok => println!(
                        "{}: val {:.4e}, test {:.4e}",
                        r.cell.dir_name(),
                        r.best_val_loss,
                        r.testing_mse
                    ),
                    SweepStatus::Failed => eprintln!("{}: failed: {}", r.cell.dir_name(), r.message),
                }
            }
            for d in monotonic_in_k(&rows, 0.0, 4.0) {
                println!(
                    "{} sensors, width {}: monotonic {} / endpoint increase {}",
                    d.sensors, d.width, d.monotonic, d.endpoint_increase
                );
            }
        }
        Command::Nyquist { delta_r, k_max } => {
            let r = cmd_nyquist(
                &cfg,
                NyquistOverrides {
                    delta_r: *delta_r,
                    k_max: *k_max,
                },
                Some(out),
            )?;
            print!("{}", r.to_csv());
        }
        Command::FitBound { table, sensors, width } => {
            let table = table.clone().unwrap_or_else(|| out.join("sweep.csv"));
            let f = cmd_fit_bound(&table, *sensors, *width, Some(out))?;
            println!(
                "c1 = {:.6e}, c2 = {:.6e}, residual {:.3e} over {} rows",
                f.c1, f.c2, f.residual, f.samples
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
