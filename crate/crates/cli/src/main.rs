use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use tess_core::scenario::{
    load_config_file, run_comparison, run_scenario, sweep, validate_budget, ScenarioConfig,
};
use tess_core::thermal_network::{compare_geometries, ProbeGeometry};
use tess_core::thermo_props::{builtin_sorbents, capacity_table, capacity_table_csv};
use tess_core::{ConfigError, Error};

#[derive(Parser)]
#[command(name = "tess-sim", version, about = "Thermal simulator for small probes heated by salt hydration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write series.csv and summary.txt.
    Run {
        config: PathBuf,
        /// Output directory (defaults to the current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run several scenarios and tabulate them per sensor.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// One label per scenario; defaults to the file stems.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        labels: Vec<String>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Repeat a scenario over values of one numeric key.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, required = true, value_delimiter = ',')]
        values: Vec<f64>,
        /// Run the points one after another.
        #[arg(long)]
        serial: bool,
    },
    /// Storage-capacity table of the built-in sorbents.
    Sorbents {
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Compare the configured sphere against an equal-volume cube.
    Geometry { config: PathBuf },
    /// Mass and power budget check.
    Budget { config: PathBuf },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Config(_) | Error::InvalidInput(_) | Error::InvalidGeometry(_) | Error::InvalidNetwork(_) => {
                    EXIT_CONFIG
                }
                _ => EXIT_SOLVER,
            };
        }
    }
    EXIT_CONFIG
}

fn load(path: &Path) -> anyhow::Result<ScenarioConfig> {
    load_config_file(path).with_context(|| format!("loading {}", path.display()))
}

fn run(config: &Path, out: &Path) -> anyhow::Result<()> {
    let cfg = load(config)?;
    let outcome = run_scenario(&cfg)?;
    outcome
        .write(out)
        .with_context(|| format!("writing results to {}", out.display()))?;
    print!("{}", outcome.report());
    Ok(())
}

fn compare(configs: &[PathBuf], labels: &[String], csv: Option<&Path>) -> anyhow::Result<bool> {
    if !labels.is_empty() && labels.len() != configs.len() {
        bail!(ConfigError::Invalid {
            key: "--labels".into(),
            message: format!("{} labels for {} scenarios", labels.len(), configs.len()),
        });
    }
    let cases = configs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let label = labels.get(i).cloned().unwrap_or_else(|| {
                p.file_stem().map_or_else(|| format!("case{i}"), |s| s.to_string_lossy().into_owned())
            });
            load(p).map(|c| (label, c))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let report = run_comparison(&cases)?;
    print!("{}", report.render());
    if let Some(path) = csv {
        std::fs::write(path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.failures.is_empty())
}

fn do_sweep(config: &Path, param: &str, values: &[f64], serial: bool) -> anyhow::Result<bool> {
    let cfg = load(config)?;
    let report = sweep(&cfg, param, values, !serial)?;
    print!("{}", report.to_csv());
    Ok(report.failures() == 0)
}

fn sorbents(export: Option<&Path>) -> anyhow::Result<()> {
    let rows = capacity_table(&builtin_sorbents());
    let csv = capacity_table_csv(&rows);
    match export {
        Some(path) => {
            std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn geometry(config: &Path) -> anyhow::Result<()> {
    let cfg = load(config)?;
    let model = cfg.enclosure();
    let sphere = match model.geometry {
        ProbeGeometry::Sphere { .. } => model,
        ProbeGeometry::Cube { .. } => bail!(ConfigError::Invalid {
            key: "geometry.shape".into(),
            message: "the geometry report starts from a sphere".into(),
        }),
    };
    let cube = tess_core::thermal_network::EnclosureModel {
        geometry: sphere.geometry.equal_volume_cube(),
        ..sphere
    };
    let boundary = cfg.environment.profile.bounds().0;
    let report = compare_geometries(&sphere, &cube, cfg.run.dissipation, boundary)?;
    print!("{}", report.render());
    Ok(())
}

fn budget(config: &Path) -> anyhow::Result<()> {
    let cfg = load(config)?;
    print!("{}", validate_budget(&cfg.budget).render());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => run(config, out).map(|_| true),
        Command::Compare { configs, labels, csv } => compare(configs, labels, csv.as_deref()),
        Command::Sweep {
            config,
            param,
            values,
            serial,
        } => do_sweep(config, param, values, *serial),
        Command::Sorbents { export } => sorbents(export.as_deref()).map(|_| true),
        Command::Geometry { config } => geometry(config).map(|_| true),
        Command::Budget { config } => budget(config).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
