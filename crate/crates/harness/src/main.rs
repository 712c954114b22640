use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use agrosim_core::Mode;
use agrosim_harness::commands::{self, AgentKind};
use agrosim_harness::settings::parse_assignment;
use agrosim_harness::{serve, Overrides, Settings};
use agrosim_rl::Algo;

#[derive(Parser)]
#[command(name = "agrosim", version, about = "Crop-management simulation, agents and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// stochastic or deterministic weather.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Season length in days.
    #[arg(long)]
    days: Option<usize>,
    /// Base weather from a CSV file instead of the generator.
    #[arg(long)]
    weather_file: Option<PathBuf>,
    /// Extra `key=value` setting; repeatable.
    #[arg(long = "set", value_parser = parse_assignment)]
    set: Vec<(String, String)>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one season and write its log.
    Run {
        #[arg(long)]
        agent: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Actor network file for ddpg and td3.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = "episode.csv")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train a learner over several seeds.
    Train {
        #[arg(long, value_parser = parse_algo)]
        algo: Algo,
        /// First seed; the others follow consecutively.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare agents under the training protocol.
    Bench {
        /// Comma-separated agent list.
        #[arg(long, value_delimiter = ',', default_value = "random,standard,reactive,ddpg,td3")]
        agent: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Serve the environment over JSON lines on stdin/stdout.
    Serve {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    use agrosim_core::config::ConfigValue;
    Mode::parse_value(s).ok_or_else(|| format!("expected stochastic or deterministic, got `{s}`"))
}

fn parse_algo(s: &str) -> Result<Algo, String> {
    s.parse::<Algo>().map_err(|e| e.to_string())
}

fn settings(common: &Common, episodes: Option<usize>, seeds: Option<usize>) -> Result<Settings> {
    let o = Overrides {
        mode: common.mode,
        days: common.days,
        episodes,
        seeds,
        weather_file: common.weather_file.clone(),
        set: common.set.clone(),
    };
    Ok(Settings::load(common.config.as_deref(), &o)?)
}

fn print_result(r: &commands::AgentResult) {
    println!(
        "{:<9} max average return {:>10.1} ± {:>8.1} at step {}",
        r.agent.name(),
        r.best.mean,
        r.best.std,
        r.best.step
    );
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { agent, seed, params, out, common } => {
            let agent: AgentKind = agent.parse().map_err(anyhow::Error::msg)?;
            let mut s = settings(&common, None, None)?;
            s.env.seed = seed;
            let summary = commands::cmd_run(&s, agent, params.as_deref(), &out)?;
            println!("return {}", summary.total_reward);
            println!(
                "yield {:.1} kg/ha, fertilizer {:.1} kg/ha, irrigation {:.1} mm, log {}",
                summary.final_yield,
                summary.total_fert,
                summary.total_irrig,
                out.display()
            );
        }
        Command::Train { algo, seed, seeds, episodes, out, common } => {
            let s = settings(&common, episodes, seeds)?;
            let r = commands::cmd_train(&s, algo, seed, &out)?;
            for (seed, best) in r.seeds.iter().zip(r.per_seed_best()) {
                println!("seed {seed}: best evaluation {best:.1}");
            }
            print_result(&r);
            println!("curves written to {}", out.display());
        }
        Command::Bench { agent, seed, seeds, episodes, out, common } => {
            let agents = agent
                .iter()
                .map(|a| a.parse::<AgentKind>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(anyhow::Error::msg)?;
            let s = settings(&common, episodes, seeds)?;
            let report = commands::cmd_bench(&s, &agents, seed, &out)?;
            for r in &report.results {
                print_result(r);
            }
            println!("summary written to {}", report.summary_path.display());
        }
        Command::Serve { common } => {
            let s = settings(&common, None, None)?;
            serve(&s.env, io::stdin().lock(), io::stdout().lock())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
