use std::path::PathBuf;
use std::process::ExitCode;

use adaptmpc::commands::{self, ExportSpec, GridSpec};
use adaptmpc::config::{self, parse_assignment, Overrides, Preset};
use adaptmpc::HarnessError;
use adaptmpc_core::hetbo::Method;
use adaptmpc_core::task::TaskKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adaptmpc", version, about = "Tune MPPI controllers and their model distributions with Bayesian optimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a tuning campaign for every configured seed.
    Tune(Common),
    /// Evaluate a reward grid over two search dimensions.
    Grid {
        #[command(flatten)]
        common: Common,
        /// First axis (a search dimension name).
        #[arg(long = "x")]
        x_axis: String,
        /// Second axis.
        #[arg(long = "y")]
        y_axis: String,
        #[arg(long, default_value_t = 10)]
        resolution: usize,
        /// Value of another dimension, e.g. `--fixed lambda=0.5`.
        #[arg(long, value_parser = parse_assignment)]
        fixed: Vec<(String, f64)>,
    },
    /// Run episodes at one point and summarize the cumulative reward.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Coordinate of the point, e.g. `--point sigma_eps=3`; the rest come
        /// from the reference point.
        #[arg(long, value_parser = parse_assignment)]
        point: Vec<(String, f64)>,
    },
    /// Write curve and fitted-noise CSV files for a finished tuning run.
    ExportPlots {
        /// Output directory of a `tune` run.
        #[arg(long)]
        run: PathBuf,
        /// Destination directory (default: `<run>/plots`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dimension varied along the noise slice.
        #[arg(long, default_value = "lambda")]
        slice: String,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
    },
    /// Resolve the configuration and print it.
    ValidateConfig(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<TaskKind>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    preset: Option<Preset>,
    /// Single seed (shorthand for `--seeds <n>`).
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<config::ExperimentConfig, HarnessError> {
        let overrides = Overrides {
            task: self.task,
            method: self.method,
            preset: self.preset,
            seeds: self.seed.map(|s| vec![s]).or_else(|| self.seeds.clone()),
            budget: self.budget,
            batch: self.batch,
            episodes: self.episodes,
            rollouts: self.rollouts,
            steps: self.steps,
            out: self.out.clone(),
        };
        config::resolve(self.config.as_deref(), &overrides)
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Tune(common) => {
            let cfg = common.resolve()?;
            let artifacts = commands::cmd_tune(&cfg)?;
            for a in &artifacts {
                println!("seed {}: best reward {} after {} evaluations", a.seeds.seed, a.best_reward, a.trace.rows.len());
            }
            println!("wrote {}", cfg.out.display());
        }
        Command::Grid { common, x_axis, y_axis, resolution, fixed } => {
            let cfg = common.resolve()?;
            let spec = GridSpec { x_axis, y_axis, resolution, fixed, seed: cfg.seeds[0] };
            let cells = commands::cmd_grid(&cfg, &spec)?;
            let path = cfg.out.join(format!("grid_{}_{}.csv", spec.x_axis, spec.y_axis));
            commands::write_grid_csv(&path, &spec, &cells)?;
            println!("wrote {}", path.display());
        }
        Command::Eval { common, point } => {
            let cfg = common.resolve()?;
            let x = commands::build_point(&cfg, &point)?;
            let report = commands::cmd_eval(&cfg, &x, cfg.seeds[0])?;
            if common.out.is_some() {
                commands::write_eval(&cfg.out, &report)?;
            }
            println!("{}", serde_json::to_string_pretty(&report.summary).expect("summary serializes"));
        }
        Command::ExportPlots { run, out, slice, resolution } => {
            let spec = ExportSpec { run, out, slice_dim: slice, slice_points: resolution };
            for path in commands::cmd_export_plots(&spec)? {
                println!("wrote {}", path.display());
            }
        }
        Command::ValidateConfig(common) => {
            let cfg = common.resolve()?;
            print!("{}", toml::to_string(&cfg).expect("config serializes"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
