use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spectral_ncd::cli::{self, config, ScenarioConfig};
use spectral_ncd::toy::ToyCase;
use spectral_ncd::Result;

#[derive(Parser)]
#[command(
    name = "spectral-ncd",
    version,
    about = "Spectral analysis of contrastive novel class discovery"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse one scenario and write report.json.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Record wall-clock time (the report is then no longer reproducible byte for byte).
        #[arg(long)]
        timing: bool,
    },
    /// Re-run a scenario along its sweep grid and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites; all of them when none are named.
    Verify {
        suites: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write verify.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyse a toy-model case directly.
    Toy {
        /// Toy case; omit and pass --t for a free connection strength.
        #[arg(long, value_parser = ["1", "2", "3"], required_unless_present = "t", conflicts_with = "t")]
        case: Option<String>,
        #[arg(long)]
        tau_s: f64,
        #[arg(long)]
        tau_c: f64,
        #[arg(long)]
        t: Option<f64>,
        /// Use the normalized adjacency of T² instead of T.
        #[arg(long)]
        normalized: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<bool> {
    cli::configure_threads()?;
    match command {
        Command::Analyze { config, out, timing } => {
            let cfg = ScenarioConfig::load(&config)?;
            let report = cli::run_analyze(&cfg, &out, timing)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", out.join("report.json").display());
        }
        Command::Sweep { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let table = cli::run_sweep(&cfg, &out)?;
            println!("wrote {} rows to {}", table.rows.len(), out.join("sweep.csv").display());
        }
        Command::Verify { suites, seed, out } => {
            let report = cli::run_verify(&suites, seed)?;
            for s in &report.suites {
                println!("{}", s.line());
                for f in &s.failures {
                    println!("    {f}");
                }
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("verify.json"), report.to_json())?;
            }
            return Ok(report.all_passed);
        }
        Command::Toy {
            case,
            tau_s,
            tau_c,
            t,
            normalized,
            out,
        } => {
            let case = match case.as_deref() {
                Some("1") => ToyCase::Case1,
                Some("2") => ToyCase::Case2,
                Some("3") => ToyCase::Case3,
                _ => ToyCase::General,
            };
            let cfg = ScenarioConfig {
                version: config::CONFIG_VERSION,
                mode: config::Mode::Toy,
                toy: Some(config::ToyParams {
                    case,
                    tau1: 1.0,
                    tau_s,
                    tau_c,
                    tau0: 0.0,
                    t,
                    normalized,
                }),
                population: None,
                blocks: None,
                k: None,
                labels: None,
                sweep: None,
                seed: 0,
                nscl: None,
                cluster_accuracy: false,
                out: None,
            };
            cfg.validate()?;
            let report = cli::run_analyze(&cfg, &out, false)?;
            if let Some(toy) = &report.toy {
                println!("residual {:.6e} ({:?})", toy.residual_numeric, toy.regime);
            }
            println!("wrote {}", out.join("report.json").display());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
