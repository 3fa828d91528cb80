use clap::{Parser, Subcommand};
use pipeline::{emit_report, Pipeline, RunConfig, Stage};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bentwave", about = "Edge states of a perturbed honeycomb medium along straight and bent interfaces")]
struct Cli {
    /// TOML run configuration; defaults apply to absent keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory of cached stage artifacts.
    #[arg(long, global = true)]
    stage_cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unperturbed bulk bands along M-K-Gamma-M.
    Bands,
    /// Dirac point, cone slopes and perturbation identities.
    Dirac,
    /// Common gap of the two perturbed media and band inversion.
    Gap,
    /// Straight-interface band, flux identities and reflection relation.
    Interface,
    /// Out-going Green function checks and point-source field.
    Green,
    /// Layer operators, bent modes and the convergence levels.
    Bend,
    /// Smallest-singular-value scan for corner modes.
    Scan,
    /// Run every stage and evaluate the acceptance criteria.
    Report,
    /// Print the effective configuration as TOML.
    Config,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Box<dyn std::error::Error>> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_toml_str(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(c) = &cli.stage_cache {
        cfg.output.stage_cache = Some(c.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let cfg = load_config(&cli)?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global()?;
    }
    let stage = match cli.command {
        Command::Config => {
            print!("{}", cfg.to_toml_string());
            return Ok(true);
        }
        Command::Bands => Stage::Bands,
        Command::Dirac => Stage::Dirac,
        Command::Gap => Stage::Gap,
        Command::Interface => Stage::Interface,
        Command::Green => Stage::Green,
        Command::Bend => Stage::Bend,
        Command::Scan => Stage::Scan,
        Command::Report => {
            let out = cfg.output.dir.clone();
            let mut p = Pipeline::new(cfg)?;
            for s in Stage::ALL {
                let a = p.run_stage(s)?;
                eprintln!("{:<10} {}{}", s.name(), &a.input_hash[..12], if a.cached { " (cached)" } else { "" });
            }
            let report = emit_report(p.config(), &p.artifacts())?;
            std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            let text = report.text();
            std::fs::write(out.join("report.txt"), &text)?;
            print!("{text}");
            return Ok(report.all_passed);
        }
    };
    let mut p = Pipeline::new(cfg)?;
    let a = p.run_stage(stage)?;
    for f in &a.payload {
        println!("{}", f.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
