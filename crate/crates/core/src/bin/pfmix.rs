use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pfmix::linsolve::SchurPolicy;
use pfmix::output;
use pfmix::scenario::{run_scenario_with, EpsRule, ScenarioConfig, ScenarioId};
use pfmix::{Error, Result};

#[derive(Parser)]
#[command(name = "pfmix", version, about = "Mixed phase-field fracture benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VtkMode {
    None,
    Final,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark scenario and write stats.csv, cod_profile.csv and VTK output.
    Solve {
        #[arg(long)]
        scenario: Option<ScenarioId>,
        /// JSON file with a full ScenarioConfig; flags given on the command line override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        refines: Option<usize>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        /// fixed:<value> or xh:<factor>
        #[arg(long)]
        eps: Option<EpsRule>,
        #[arg(long)]
        schur: Option<SchurPolicy>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "final")]
        vtk: VtkMode,
        /// Print the resolved configuration as JSON and exit.
        #[arg(long)]
        print_config: bool,
    },
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<bool> {
    let Command::Solve { scenario, config, refines, nu, kappa, eps, schur, steps, out, vtk, print_config } = cli.command;
    let mut cfg = match (&config, scenario) {
        (Some(p), s) => {
            let mut c = load_config(p)?;
            if let Some(s) = s {
                c.scenario = s;
            }
            c
        }
        (None, Some(s)) => ScenarioConfig::new(s),
        (None, None) => return Err(Error::Config("either --scenario or --config is required".into())),
    };
    if let Some(v) = refines {
        cfg.refines = v;
    }
    if let Some(v) = nu {
        cfg.nu = v;
    }
    if let Some(v) = kappa {
        cfg.kappa = v;
    }
    if let Some(v) = eps {
        cfg.eps = v;
    }
    if let Some(v) = schur {
        cfg.schur = v;
    }
    if let Some(v) = steps {
        cfg.steps = v;
    }
    if print_config {
        println!("{}", serde_json::to_string_pretty(&cfg).map_err(|e| Error::Config(e.to_string()))?);
        return Ok(true);
    }
    std::fs::create_dir_all(&out).map_err(|e| Error::Config(format!("{}: {e}", out.display())))?;

    println!("{}", output::STATS_HEADER);
    let run = run_scenario_with(&cfg, |step, disc, x| {
        if vtk == VtkMode::All {
            output::write_vtk(&out.join(format!("fields_{step:04}.vtk")), disc, x)?;
        }
        Ok(())
    })?;
    for r in &run.rows {
        println!("{}", output::stats_line(r));
    }
    output::write_run(&out, &run, vtk != VtkMode::None)?;
    if let Some(f) = &run.failure {
        eprintln!("run stopped early: {f}");
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
