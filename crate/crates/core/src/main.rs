use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use navplan::harness::{
    blocked_corridor, generate_map, render_svg, run_episode, EpisodeLog, MapSpec, Outcome,
    RunConfig, Scenario,
};
use navplan::miqp::{self, MIQProblem, SolveOptions};

#[derive(Parser)]
#[command(
    name = "navplan",
    about = "Medial-axis routing with mixed-integer MPC",
    version
)]
struct Cli {
    /// More log output (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Random map from the default generator settings.
    Random,
    /// Two corridors, the preferred one closed by an unmapped wall.
    BlockedCorridor,
}

#[derive(Args)]
struct ScenarioSource {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with_all = ["seed", "preset"])]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    preset: Preset,
}

impl ScenarioSource {
    fn load(&self) -> Result<Scenario> {
        Ok(match &self.scenario {
            Some(path) => Scenario::from_toml(&read(path)?)?,
            None => match self.preset {
                Preset::Random => generate_map(self.seed, &MapSpec::default())?,
                Preset::BlockedCorridor => blocked_corridor(self.seed),
            },
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop episode; exits 0 only when the goal is reached.
    Run {
        #[command(flatten)]
        source: ScenarioSource,
        /// Run configuration file (TOML), applied before `--set`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Configuration override, e.g. `mpc.horizon=10`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory for episode.jsonl, graph.json, scenario.toml and plot.svg.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write a scenario file.
    GenMap {
        #[command(flatten)]
        source: ScenarioSource,
        #[arg(long)]
        mapped: Option<usize>,
        #[arg(long)]
        unmapped: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a scenario and optionally an episode log to SVG.
    Plot {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value = "plot.svg")]
        out: PathBuf,
    },
    /// Solve one MIQP fixture (JSON) and print iterations, j⁻ and j₊.
    Solve {
        fixture: PathBuf,
        #[arg(long)]
        j_max: Option<f64>,
        #[arg(long)]
        iteration_limit: Option<usize>,
        /// Write the per-iteration trace as JSONL.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            source,
            config,
            overrides,
            out,
        } => {
            let scenario = source.load()?;
            let base = match &config {
                Some(p) => toml::from_str::<RunConfig>(&read(p)?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => RunConfig::default(),
            };
            let cfg = base.with_assignments(&overrides)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let log = run_episode(&scenario, &cfg);
            write(&out.join("episode.jsonl"), &log.to_jsonl())?;
            write(&out.join("scenario.toml"), &scenario.to_toml())?;
            write(&out.join("plot.svg"), &render_svg(&scenario, Some(&log)))?;
            if let Some(g) = &log.graph {
                write(&out.join("graph.json"), &serde_json::to_string_pretty(g)?)?;
            }
            let sim_time = log.telemetry().last().map_or(0.0, |t| t.t);
            println!(
                "outcome {:?} sim_time {sim_time:.2} s replans {} min_clearance {:.3} m",
                log.outcome,
                log.replans().count(),
                log.min_clearance
            );
            Ok(log.outcome == Outcome::GoalReached)
        }
        Command::GenMap {
            source,
            mapped,
            unmapped,
            out,
        } => {
            let scenario = if mapped.is_some() || unmapped.is_some() {
                let d = MapSpec::default();
                let spec = MapSpec {
                    mapped_count: mapped.unwrap_or(d.mapped_count),
                    unmapped_count: unmapped.unwrap_or(d.unmapped_count),
                    ..d
                };
                generate_map(source.seed, &spec)?
            } else {
                source.load()?
            };
            let text = scenario.to_toml();
            match out {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Plot { scenario, log, out } => {
            let scenario = Scenario::from_toml(&read(&scenario)?)?;
            let log = log.map(|p| read(&p)).transpose()?;
            let log = log.map(|t| EpisodeLog::from_jsonl(&t)).transpose()?;
            write(&out, &render_svg(&scenario, log.as_ref()))?;
            Ok(true)
        }
        Command::Solve {
            fixture,
            j_max,
            iteration_limit,
            trace,
        } => {
            let problem = MIQProblem::from_json(&read(&fixture)?)?;
            let d = SolveOptions::default();
            let options = SolveOptions {
                j_max: j_max.unwrap_or(d.j_max),
                iteration_limit: iteration_limit.unwrap_or(d.iteration_limit),
                record_trace: trace.is_some(),
                ..d
            };
            let outcome = miqp::solve(&problem, &options)?;
            println!(
                "status {:?} iterations {} j_lower {} j_upper {}",
                outcome.status, outcome.iterations, outcome.lower_bound, outcome.upper_bound
            );
            if let Some(p) = trace {
                write(&p, &outcome.trace_jsonl())?;
            }
            if let Some(z) = &outcome.incumbent {
                log::info!("incumbent {z:?}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
