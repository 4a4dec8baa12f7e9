use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skewsim_cli::config::{Command, ExperimentConfig, SystemSpec};
use skewsim_cli::error::CliError;
use skewsim_cli::plot::{plot, PlotKind};
use skewsim_cli::runner::run;
use skewsim_core::measures::DiscreteMeasure;
use skewsim_core::SkewSystem;

#[derive(Parser)]
#[command(name = "skewsim", version, about = "Random interval skew products over the Bernoulli shift")]
struct Cli {
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    sub: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Verify conditions (a)–(f) of a step system.
    CheckConditions(ExpArgs),
    /// Pull back Bernoulli windows and record the invariant graph.
    Graph(ExpArgs),
    /// Point/bone census over Bernoulli and targeted windows.
    Bones(ExpArgs),
    /// Backward-coding coverage of the covering interval.
    Thickness(ExpArgs),
    /// Fiber Lyapunov exponent estimates.
    Lyapunov(ExpArgs),
    /// Stationary measure of the step system by Ulam's method.
    Stationary(ExpArgs),
    /// Hutchinson distance of two measures given with --mu and --nu.
    Hutchinson(ExpArgs),
    /// Sample the graph measure.
    GraphMeasure(ExpArgs),
    /// Bracket the distance between two graph measures.
    GraphDistance(ExpArgs),
    /// Orbit exceedance fractions between two systems.
    Stability(ExpArgs),
    /// Correlation decay along the graph.
    Mixing(ExpArgs),
    /// Perturbation sweep over prescribed C² distances.
    Sweep(ExpArgs),
    /// Run an experiment from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render a CSV table written by a run as SVG.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long, conflicts_with = "system")]
    preset: Option<String>,
    /// System description as JSON.
    #[arg(long)]
    system: Option<PathBuf>,
    #[arg(long, conflicts_with = "compare_system")]
    compare_preset: Option<String>,
    #[arg(long)]
    compare_system: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    epsilon_bone: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    targeted_words: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lags: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    x_grid: Option<usize>,
    #[arg(long)]
    distance_samples: Option<usize>,
    /// First measure for `hutchinson`, as JSON.
    #[arg(long)]
    mu: Option<PathBuf>,
    #[arg(long)]
    nu: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn system_spec(preset: Option<String>, file: Option<&Path>, key: &str) -> Result<Option<SystemSpec>, CliError> {
    match (preset, file) {
        (Some(name), _) => Ok(Some(SystemSpec::Preset(name))),
        (None, Some(path)) => {
            let s: SkewSystem = serde_json::from_str(&read(path)?).map_err(|e| CliError::Config {
                message: format!("{}: {e}", path.display()),
                offending_keys: vec![key.into()],
            })?;
            Ok(Some(SystemSpec::Inline(s)))
        }
        (None, None) => Ok(None),
    }
}

fn measure(path: &Path, key: &str) -> Result<DiscreteMeasure, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Config {
        message: format!("{}: {e}", path.display()),
        offending_keys: vec![key.into()],
    })
}

fn build(command: Command, a: ExpArgs) -> Result<ExperimentConfig, CliError> {
    let system = system_spec(a.preset, a.system.as_deref(), "system")?.unwrap_or(SystemSpec::Preset("default".into()));
    let mut c = ExperimentConfig::new(command, system, a.out);
    c.compare = system_spec(a.compare_preset, a.compare_system.as_deref(), "compare")?;
    if let (Some(mu), Some(nu)) = (&a.mu, &a.nu) {
        c.measures = Some((measure(mu, "mu")?, measure(nu, "nu")?));
    }
    let p = &mut c.params;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { p.$f = v; } )* };
    }
    set!(
        grid,
        depth,
        samples,
        epsilon_bone,
        tol,
        targeted_words,
        bins,
        max_iter,
        epsilon,
        horizon,
        lags,
        deltas,
        grid_step,
        x_grid,
        distance_samples
    );
    if let Some(seed) = a.seed {
        c.seed = seed;
    }
    Ok(c)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("threads: {e}")))?;
    }
    let (command, args) = match cli.sub {
        Sub::Run { config } => {
            let c = ExperimentConfig::from_json(&read(&config)?)?;
            run(&c)?;
            return Ok(());
        }
        Sub::Plot { csv, kind, out } => {
            let svg = plot(&csv, kind)?;
            return skewsim_cli::output::write_file(&out, &svg);
        }
        Sub::CheckConditions(a) => (Command::CheckConditions, a),
        Sub::Graph(a) => (Command::Graph, a),
        Sub::Bones(a) => (Command::Bones, a),
        Sub::Thickness(a) => (Command::Thickness, a),
        Sub::Lyapunov(a) => (Command::Lyapunov, a),
        Sub::Stationary(a) => (Command::Stationary, a),
        Sub::Hutchinson(a) => (Command::Hutchinson, a),
        Sub::GraphMeasure(a) => (Command::GraphMeasure, a),
        Sub::GraphDistance(a) => (Command::GraphDistance, a),
        Sub::Stability(a) => (Command::Stability, a),
        Sub::Mixing(a) => (Command::Mixing, a),
        Sub::Sweep(a) => (Command::Sweep, a),
    };
    let config = build(command, args)?;
    run(&config)?;
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e, "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
