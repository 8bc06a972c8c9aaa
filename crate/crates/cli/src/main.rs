//! `cloakcheck`: run cloak verification scenarios from the command line.
//!
//! Exit status is 0 when every check of the scenario passed, 2 when the run
//! finished but a check failed (tables are still written), and 1 on a
//! configuration or runtime error.

use clap::{Parser, Subcommand};
use cloakcheck::harness::{
    bundled_scenario, bundled_scenarios, convergence_study, export, parse_values, run_scenario, summary, ReportBundle,
    ScenarioConfig, SweepParameter,
};
use cloakcheck::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cloakcheck", version, about = "Numerical verification of singular transformation-optics cloaks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario by name) and export its tables.
    Run {
        config: String,
        /// Output directory; defaults to the scenario's `output.dir`, then to
        /// `$CLOAKCHECK_OUT_DIR/<name>`, then to `cloakcheck-out/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the cell solves.
        #[arg(long)]
        jobs: Option<usize>,
        /// Treat cells that failed to solve as failed checks.
        #[arg(long)]
        strict: bool,
    },
    /// Sweep one solver parameter and report discrepancy curves.
    Converge {
        config: String,
        /// seed_radius, integrator_tol or l_max.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated sweep values, at least three.
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the bundled scenarios, one or more per acceptance criterion.
    ListScenarios {
        /// Also write the scenario files into this directory.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

const OUT_ENV: &str = "CLOAKCHECK_OUT_DIR";

fn load(config: &str) -> Result<ScenarioConfig, Error> {
    let path = Path::new(config);
    if path.exists() {
        return ScenarioConfig::from_path(path);
    }
    match bundled_scenario(config) {
        Some(s) => s.config(),
        None => ScenarioConfig::from_path(path),
    }
}

fn out_dir(explicit: Option<PathBuf>, config: &ScenarioConfig, suffix: &str) -> PathBuf {
    if let Some(dir) = explicit {
        return dir;
    }
    if let Some(dir) = &config.output.dir {
        return dir.clone();
    }
    let base = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("cloakcheck-out"));
    base.join(format!("{}{suffix}", config.name))
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::Config(vec!["--jobs: must be at least 1".into()])),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(vec![format!("--jobs: {e}")]))?;
            Ok(pool.install(f))
        }
    }
}

fn write_bundle(bundle: &ReportBundle, dir: &Path, config: &ScenarioConfig) -> Result<(), Error> {
    let files = export(bundle, dir, &config.output.formats)?;
    print!("{}", summary(bundle));
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(())
}

fn run(config: &str, out: Option<PathBuf>, jobs: Option<usize>, strict: bool) -> Result<ExitCode, Error> {
    let config = load(config)?;
    let bundle = in_pool(jobs, || run_scenario(&config))??;
    write_bundle(&bundle, &out_dir(out, &config, ""), &config)?;
    let failed_cells = strict && bundle.failed_cells() > 0;
    if failed_cells {
        println!("strict: {} cells failed to solve", bundle.failed_cells());
    }
    Ok(if bundle.checks_passed() && !failed_cells { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn converge(
    config: &str,
    param: Option<String>,
    values: Option<String>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
) -> Result<ExitCode, Error> {
    let config = load(config)?;
    let param: SweepParameter = match (param, &config.convergence) {
        (Some(p), _) => p.parse().map_err(|e: String| Error::Config(vec![format!("--param: {e}")]))?,
        (None, Some(c)) => c.param,
        (None, None) => {
            return Err(Error::Config(vec!["--param: required when the scenario has no [convergence]".into()]))
        }
    };
    let values = match (values, &config.convergence) {
        (Some(v), _) => parse_values(&v)?,
        (None, Some(c)) if c.param == param => c.values.clone(),
        _ => return Err(Error::Config(vec!["--values: required for this parameter".into()])),
    };
    let curves = in_pool(jobs, || convergence_study(&config, param, &values))??;
    let mut bundle = ReportBundle::empty(format!("{}-{param}", config.name));
    bundle.equation = Some(config.equation);
    bundle.convergence_curves = curves;
    write_bundle(&bundle, &out_dir(out, &config, &format!("-{param}")), &config)?;
    let converged = bundle.convergence_curves.iter().all(|c| c.converged());
    Ok(if converged { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn list(write: Option<PathBuf>) -> Result<ExitCode, Error> {
    if let Some(dir) = &write {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    }
    for s in bundled_scenarios() {
        let description = s.config().map(|c| c.description).unwrap_or_default();
        println!("{:<30} criterion {}  {}", s.name, s.criterion, description);
        if let Some(dir) = &write {
            let path = dir.join(format!("{}.toml", s.name));
            std::fs::write(&path, s.text).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // Usage errors share exit status 1 with configuration errors; 2 is
    // reserved for failed checks.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run { config, out, jobs, strict } => run(&config, out, jobs, strict),
        Command::Converge { config, param, values, out, jobs } => converge(&config, param, values, out, jobs),
        Command::ListScenarios { write } => list(write),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
