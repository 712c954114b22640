//! The `run`, `train` and `bench` sub-commands as library calls.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

use agrosim_core::agents::EpisodeSummary;
use agrosim_core::{run_episode, CropEnv, Policy, RandomPolicy, ReactivePolicy, StandardPolicy, OBS_DIM};
use agrosim_rl::{
    load_mlp, mean_std, run_baseline, save_curve, save_mlp, train, ActorPolicy, Algo, CurvePoint, StateEncoder,
};

use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    Random,
    Standard,
    Reactive,
    Ddpg,
    Td3,
}

pub const AGENT_NAMES: [&str; 5] = ["random", "standard", "reactive", "ddpg", "td3"];

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Random,
        AgentKind::Standard,
        AgentKind::Reactive,
        AgentKind::Ddpg,
        AgentKind::Td3,
    ];
    pub const BASELINES: [AgentKind; 3] = [AgentKind::Random, AgentKind::Standard, AgentKind::Reactive];

    pub fn name(self) -> &'static str {
        AGENT_NAMES[self as usize]
    }

    pub fn algo(self) -> Option<Algo> {
        match self {
            AgentKind::Ddpg => Some(Algo::Ddpg),
            AgentKind::Td3 => Some(Algo::Td3),
            _ => None,
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        AgentKind::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown agent `{s}`; valid agents: {}", AGENT_NAMES.join(", ")))
    }
}

/// Loads an actor written by `train`. Inputs beyond the observation mean the
/// network was trained with history features.
pub fn load_actor_policy(path: &Path, settings: &Settings) -> Result<ActorPolicy<f32, f64>> {
    let actor = load_mlp::<f32>(path).with_context(|| format!("loading actor from {}", path.display()))?;
    let history = match actor.input_dim() {
        OBS_DIM => false,
        d if d == OBS_DIM + 3 => true,
        d => bail!("actor in {} takes {d} inputs; expected {} or {}", path.display(), OBS_DIM, OBS_DIM + 3),
    };
    if actor.output_dim() != 2 {
        bail!("actor in {} has {} outputs; expected 2", path.display(), actor.output_dim());
    }
    let encoder = StateEncoder::new(history, settings.env.duration);
    Ok(ActorPolicy::new(actor, encoder, settings.env.bounds))
}

fn baseline_policy(kind: AgentKind, settings: &Settings, seed: u64) -> Result<Box<dyn Policy<f64>>> {
    let (env, agents) = (&settings.env, &settings.agents);
    match kind {
        AgentKind::Standard => agents.standard.validate(env.duration, &env.bounds)?,
        AgentKind::Reactive => agents.reactive.validate(&env.bounds)?,
        _ => {}
    }
    Ok(match kind {
        AgentKind::Random => Box::new(RandomPolicy::new(seed, settings.env.bounds)),
        AgentKind::Standard => Box::new(StandardPolicy { params: settings.agents.standard.clone() }),
        AgentKind::Reactive => Box::new(ReactivePolicy { params: settings.agents.reactive }),
        AgentKind::Ddpg | AgentKind::Td3 => unreachable!("learned agents are not baselines"),
    })
}

/// Runs one season with `agent` and writes the episode log to `log`.
/// Learned agents need the actor file `params`.
pub fn cmd_run(settings: &Settings, agent: AgentKind, params: Option<&Path>, log: &Path) -> Result<EpisodeSummary<f64>> {
    let mut cfg = settings.env.clone();
    cfg.log_path = Some(log.to_path_buf());
    let seed = cfg.seed;
    let mut env = CropEnv::new(cfg)?;
    let mut policy: Box<dyn Policy<f64>> = match agent.algo() {
        Some(_) => {
            let path = params.with_context(|| format!("agent `{agent}` needs --params <actor file>"))?;
            Box::new(load_actor_policy(path, settings)?)
        }
        None => baseline_policy(agent, settings, seed)?,
    };
    Ok(run_episode(&mut env, policy.as_mut(), seed)?)
}

/// Mean and population std across seeds at every evaluation point. All
/// curves must share the same evaluation steps.
pub fn aggregate(curves: &[Vec<CurvePoint>]) -> Result<Vec<CurvePoint>> {
    let Some(first) = curves.first() else {
        bail!("no curves to aggregate");
    };
    let mut out = Vec::with_capacity(first.len());
    for (i, p) in first.iter().enumerate() {
        let mut values = Vec::with_capacity(curves.len());
        for c in curves {
            match c.get(i) {
                Some(q) if q.step == p.step => values.push(q.mean),
                _ => bail!("curves disagree at evaluation {i}"),
            }
        }
        if curves.iter().any(|c| c.len() != first.len()) {
            bail!("curves have different lengths");
        }
        let r = mean_std(&values);
        out.push(CurvePoint { step: p.step, mean: r.mean, std: r.std });
    }
    Ok(out)
}

/// The point of highest mean; the earliest one on ties.
pub fn max_average(aggregate: &[CurvePoint]) -> Option<CurvePoint> {
    aggregate
        .iter()
        .copied()
        .reduce(|best, p| if p.mean > best.mean { p } else { best })
}

/// One agent's results across seeds.
#[derive(Debug, Clone)]
pub struct AgentResult {
    pub agent: AgentKind,
    pub seeds: Vec<u64>,
    pub curves: Vec<Vec<CurvePoint>>,
    /// Per seed, the return of every training episode.
    pub episode_returns: Vec<Vec<f64>>,
    pub aggregate: Vec<CurvePoint>,
    /// Highest across-seed mean and the std at that point.
    pub best: CurvePoint,
}

impl AgentResult {
    fn new(agent: AgentKind, seeds: Vec<u64>, curves: Vec<Vec<CurvePoint>>, episode_returns: Vec<Vec<f64>>) -> Result<Self> {
        let aggregate = aggregate(&curves)?;
        let best = max_average(&aggregate).context("no evaluation points; is the season shorter than the evaluation period?")?;
        Ok(Self { agent, seeds, curves, episode_returns, aggregate, best })
    }

    /// Highest evaluation mean reached by each seed.
    pub fn per_seed_best(&self) -> Vec<f64> {
        self.curves
            .iter()
            .map(|c| c.iter().map(|p| p.mean).fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    /// Mean training-episode return over all seeds and episodes.
    pub fn mean_episode_return(&self) -> f64 {
        let all: Vec<f64> = self.episode_returns.iter().flatten().copied().collect();
        mean_std(&all).mean
    }

    /// Writes `<agent>_seed<k>.csv`, `<agent>_aggregate.csv` and
    /// `<agent>_episodes.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        for (seed, curve) in self.seeds.iter().zip(&self.curves) {
            save_curve(curve, &dir.join(format!("{}_seed{seed}.csv", self.agent)))?;
        }
        save_curve(&self.aggregate, &dir.join(format!("{}_aggregate.csv", self.agent)))?;
        let mut out = std::io::BufWriter::new(fs::File::create(dir.join(format!("{}_episodes.csv", self.agent)))?);
        writeln!(out, "seed,episode,return")?;
        for (seed, returns) in self.seeds.iter().zip(&self.episode_returns) {
            for (ep, r) in returns.iter().enumerate() {
                writeln!(out, "{seed},{ep},{r}")?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Seeds `base, base + 1, ...` as many as `train.seeds`.
pub fn seed_list(settings: &Settings, base: u64) -> Vec<u64> {
    (0..settings.train.seeds as u64).map(|k| base + k).collect()
}

/// Evaluates a baseline over the training protocol: the same episodes and
/// evaluation schedule a learner gets, with a policy that never changes.
pub fn bench_baseline(settings: &Settings, agent: AgentKind, base_seed: u64) -> Result<AgentResult> {
    let t = &settings.train;
    let seeds = seed_list(settings, base_seed);
    let mut curves = Vec::new();
    let mut returns = Vec::new();
    for &seed in &seeds {
        let mut policy = baseline_policy(agent, settings, seed)?;
        let (curve, r) = run_baseline(&settings.env, policy.as_mut(), t.episodes, t.eval_period, t.eval_runs, seed)?;
        curves.push(curve);
        returns.push(r);
    }
    AgentResult::new(agent, seeds, curves, returns)
}

/// Trains `agent` once per seed. With `dir` set, each final actor is saved
/// as `<agent>_seed<k>_actor.txt`.
pub fn train_agent(settings: &Settings, agent: AgentKind, base_seed: u64, dir: Option<&Path>) -> Result<AgentResult> {
    let algo = agent.algo().with_context(|| format!("`{agent}` is not a learning agent; expected ddpg or td3"))?;
    let seeds = seed_list(settings, base_seed);
    let mut curves = Vec::new();
    let mut returns = Vec::new();
    for &seed in &seeds {
        let out = train(&settings.env, algo, &settings.train, seed)?;
        if let Some(dir) = dir {
            save_mlp(&out.agent.actor, &dir.join(format!("{agent}_seed{seed}_actor.txt")))?;
        }
        curves.push(out.curve);
        returns.push(out.episode_returns);
    }
    AgentResult::new(agent, seeds, curves, returns)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// `train`: curves per seed, the aggregate curve and the actors.
pub fn cmd_train(settings: &Settings, algo: Algo, base_seed: u64, dir: &Path) -> Result<AgentResult> {
    prepare_dir(dir)?;
    let agent = match algo {
        Algo::Ddpg => AgentKind::Ddpg,
        Algo::Td3 => AgentKind::Td3,
    };
    let result = train_agent(settings, agent, base_seed, Some(dir))?;
    result.write(dir)?;
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    /// Ordered by max average return, best first.
    pub results: Vec<AgentResult>,
    pub summary_path: PathBuf,
}

/// Writes `agent,max_avg_return,std` rows in the given order.
pub fn write_summary(results: &[AgentResult], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "agent,max_avg_return,std")?;
    for r in results {
        writeln!(out, "{},{},{}", r.agent, r.best.mean, r.best.std)?;
    }
    out.flush()?;
    Ok(())
}

/// `bench`: every agent over the same seeds, raw curves plus `summary.csv`.
pub fn cmd_bench(settings: &Settings, agents: &[AgentKind], base_seed: u64, dir: &Path) -> Result<BenchReport> {
    if agents.is_empty() {
        bail!("no agents to benchmark");
    }
    prepare_dir(dir)?;
    let mut results = Vec::new();
    for &agent in agents {
        let r = match agent.algo() {
            Some(_) => train_agent(settings, agent, base_seed, Some(dir))?,
            None => bench_baseline(settings, agent, base_seed)?,
        };
        r.write(dir)?;
        results.push(r);
    }
    results.sort_by(|a, b| b.best.mean.total_cmp(&a.best.mean));
    let summary_path = dir.join("summary.csv");
    write_summary(&results, &summary_path)?;
    Ok(BenchReport { results, summary_path })
}
