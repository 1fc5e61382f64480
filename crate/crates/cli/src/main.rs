use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use lorhol::config::{Config, Suite};
use lorhol::report::{write_atomic, Report};
use lorhol::{plot, suites};

#[derive(Parser, Debug)]
#[command(name = "lorhol", version, about = "Build pp-wave style Lorentzian metrics and verify their holonomy and causality")]
struct Cli {
    /// Scenario configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scale every sample count by this factor.
    #[arg(long, global = true)]
    samples: Option<f64>,
    /// Residual tolerance for the structure-equation and Calabi checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory (default: `output.dir` of the config, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct the scenario and write its summary to `scenario.json`.
    Build,
    /// Run the holonomy suite.
    Holonomy,
    /// Run one verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Run the suites selected in the config and write `report.json`.
    Report {
        /// Also write plots of the curves in the report.
        #[arg(long)]
        plots: bool,
    },
    /// Render `report.json` from the output directory (or `--report`) to SVG and CSV.
    Plot {
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<Config> {
    let Some(path) = &cli.config else {
        bail!("--config is required for this command");
    };
    let mut cfg = Config::load(path)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(f) = cli.samples {
        if !(f > 0.0) {
            bail!("--samples must be positive");
        }
        cfg.samples = cfg.samples.scaled(f);
    }
    if let Some(t) = cli.tol {
        cfg.tolerances = cfg.tolerances.with_residual(t);
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&Config>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_report(report: &Report, dir: &std::path::Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("report.json");
    write_atomic(&path, report.to_json().as_bytes())?;
    Ok(path)
}

fn summary(report: &Report) {
    for v in &report.suites {
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("{status} {}", v.suite);
        for c in v.checks.iter().filter(|c| !c.pass) {
            println!("    {} = {:e} ({:?}, tol {:e})", c.name, c.value, c.compare, c.tolerance);
        }
        if let Some(e) = &v.error {
            println!("    error: {e}");
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Build => {
            let cfg = load_config(cli)?;
            let space = lorentz_holonomy::lorentz::build_scenario(&cfg.scenario)?;
            let s = suites::summarize(&space);
            let dir = out_dir(cli, Some(&cfg));
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("scenario.json");
            write_atomic(&path, serde_json::to_string_pretty(&s)?.as_bytes())?;
            println!("Type {} scenario, dim N = {}, written to {}", s.type_tag, s.dim, path.display());
            Ok(true)
        }
        Command::Holonomy | Command::Verify { .. } | Command::Report { .. } => {
            let cfg = load_config(cli)?;
            let report = match &cli.command {
                Command::Holonomy => suites::run_suites(&cfg, &[Suite::Holonomy]),
                Command::Verify { suite } => suites::run_suites(&cfg, &[*suite]),
                _ => suites::run(&cfg),
            };
            let dir = out_dir(cli, Some(&cfg));
            let path = write_report(&report, &dir)?;
            summary(&report);
            if let Some(h) = &report.holonomy {
                println!("holonomy dimension {} (type {:?})", h.hol_dim, h.type_tag);
            }
            if matches!(cli.command, Command::Report { plots: true }) {
                plot::write_plots(&report, &dir)?;
            }
            println!("report written to {}", path.display());
            Ok(report.pass)
        }
        Command::Plot { report } => {
            let cfg = cli.config.as_ref().map(|_| load_config(cli)).transpose()?;
            let dir = out_dir(cli, cfg.as_ref());
            let path = report.clone().unwrap_or_else(|| dir.join("report.json"));
            let r = Report::load(&path)?;
            for p in plot::write_plots(&r, &dir)? {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
