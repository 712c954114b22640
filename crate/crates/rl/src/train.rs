//! Training and evaluation protocol: warmup, exploration, periodic greedy
//! evaluation on a deterministic copy of the environment.

use std::io::Write;
use std::path::Path;

use agrosim_core::agents::random_policy;
use agrosim_core::rng::{derive_seed, seeded};
use agrosim_core::{run_episode, EnvError, Environment, EpisodeConfig, Mode, Policy, Scalar};

use crate::agent::{explore, from_action, to_action, ActorCritic, ActorPolicy, Algo, History, StateEncoder, TrainConfig};
use crate::replay::ReplayBuffer;
use crate::Real;

/// Mean and population standard deviation of episode returns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> EvalResult {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    EvalResult { mean, std: var.sqrt() }
}

/// Runs `runs` greedy episodes with seeds derived from `seed`. When both the
/// environment and the policy are deterministic every run is identical, so
/// one episode is simulated and repeated.
pub fn evaluate<E: Scalar, P: Policy<E> + ?Sized>(
    env: &mut Environment<E>,
    policy: &mut P,
    runs: usize,
    seed: u64,
) -> Result<EvalResult, EnvError> {
    assert!(runs >= 1, "evaluation needs at least one run");
    if env.config().mode == Mode::Deterministic && policy.is_deterministic() {
        // Every run would replay the same trajectory.
        let s = run_episode(env, &mut *policy, derive_seed(seed, 0))?;
        return Ok(EvalResult { mean: s.total_reward.as_f64(), std: 0.0 });
    }
    let mut returns = Vec::with_capacity(runs);
    for run in 0..runs {
        let s = run_episode(env, &mut *policy, derive_seed(seed, run as u64))?;
        returns.push(s.total_reward.as_f64());
    }
    Ok(mean_std(&returns))
}

/// One evaluation: mean and std of greedy returns after `step` environment
/// steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub step: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub curve: Vec<CurvePoint>,
    /// Undiscounted return of every training episode, exploration included.
    pub episode_returns: Vec<f64>,
    pub total_steps: usize,
    /// Transitions held in the replay buffer at the end.
    pub replay_len: usize,
    pub agent: ActorCritic<T>,
}

impl<T> TrainOutcome<T> {
    /// Best evaluation mean and the std recorded with it.
    pub fn best(&self) -> Option<CurvePoint> {
        best_point(&self.curve)
    }
}

pub(crate) fn best_point(curve: &[CurvePoint]) -> Option<CurvePoint> {
    curve.iter().copied().fold(None, |acc: Option<CurvePoint>, p| match acc {
        Some(a) if a.mean >= p.mean => Some(a),
        _ => Some(p),
    })
}

fn split_envs<E: Scalar>(env_cfg: &EpisodeConfig<E>) -> Result<(Environment<E>, Environment<E>), EnvError> {
    let mut train_cfg = env_cfg.clone();
    train_cfg.log_path = None;
    let mut eval_cfg = train_cfg.clone();
    eval_cfg.mode = Mode::Deterministic;
    Ok((Environment::new(train_cfg)?, Environment::new(eval_cfg)?))
}

fn episode_seed(seed: u64, episode: usize) -> u64 {
    derive_seed(derive_seed(seed, 3), episode as u64)
}

fn eval_seed(seed: u64) -> u64 {
    derive_seed(seed, 2)
}

/// Trains `algo` for `cfg.episodes` seasons. Training seasons follow the
/// mode of `env_cfg`; every `cfg.eval_period` steps the greedy actor is
/// evaluated `cfg.eval_runs` times on a deterministic copy. The first
/// `cfg.warmup_steps` steps take uniform random actions and no updates.
pub fn train<T: Real, E: Scalar>(
    env_cfg: &EpisodeConfig<E>,
    algo: Algo,
    cfg: &TrainConfig<T>,
    seed: u64,
) -> Result<TrainOutcome<T>, EnvError> {
    let (mut env, mut eval_env) = split_envs(env_cfg)?;
    let bounds = env_cfg.bounds;
    let encoder = StateEncoder::<T>::new(cfg.history_features, env_cfg.duration);
    let mut rng = seeded(derive_seed(seed, 4));
    let mut agent = ActorCritic::new(algo, encoder.dim(), cfg, &mut rng);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity, encoder.dim(), 2);
    let sigma = cfg.explore_noise.as_f64();

    let mut curve = Vec::new();
    let mut episode_returns = Vec::with_capacity(cfg.episodes);
    let mut steps = 0usize;
    for episode in 0..cfg.episodes {
        let obs = env.reset_with_seed(episode_seed(seed, episode));
        let mut history = History::default();
        let mut state = encoder.encode(&obs, &history);
        let mut total = 0.0;
        loop {
            let action = if steps < cfg.warmup_steps {
                random_policy(&mut rng, &bounds)
            } else {
                explore(to_action(agent.greedy(&state), &bounds), sigma, &bounds, &mut rng)
            };
            let out = env.step(action)?;
            history.record(&out.info.applied);
            let next = encoder.encode(&out.obs, &history);
            let a: [T; 2] = from_action(&out.info.applied, &bounds);
            buffer.push(&state, &a, T::lit(out.reward.as_f64()), &next, out.done);
            total += out.reward.as_f64();
            steps += 1;

            if steps > cfg.warmup_steps && buffer.len() >= cfg.batch_size {
                let batch = buffer.sample(cfg.batch_size, &mut rng);
                agent.update(&batch, cfg, &mut rng);
            }
            if steps % cfg.eval_period == 0 {
                let mut greedy = ActorPolicy::new(agent.actor.clone(), encoder, bounds);
                let r = evaluate(&mut eval_env, &mut greedy, cfg.eval_runs, eval_seed(seed))?;
                curve.push(CurvePoint {
                    step: steps,
                    mean: r.mean,
                    std: r.std,
                });
            }
            state = next;
            if out.done {
                break;
            }
        }
        episode_returns.push(total);
    }
    Ok(TrainOutcome {
        curve,
        episode_returns,
        total_steps: steps,
        replay_len: buffer.len(),
        agent,
    })
}

/// The training protocol for a fixed policy: the same seasons, the same
/// evaluation schedule and seeds, but nothing is learned. Because the policy never changes and evaluation seeds
/// are fixed, a single evaluation per seed stands for every evaluation point.
pub fn run_baseline<E: Scalar, P: Policy<E>>(
    env_cfg: &EpisodeConfig<E>,
    mut policy: P,
    episodes: usize,
    eval_period: usize,
    eval_runs: usize,
    seed: u64,
) -> Result<(Vec<CurvePoint>, Vec<f64>), EnvError> {
    let (mut env, mut eval_env) = split_envs(env_cfg)?;
    let r = evaluate(&mut eval_env, &mut policy, eval_runs, eval_seed(seed))?;
    let mut curve = Vec::new();
    let mut returns = Vec::with_capacity(episodes);
    let mut steps = 0;
    for episode in 0..episodes {
        let s = run_episode(&mut env, &mut policy, episode_seed(seed, episode))?;
        for _ in 0..s.steps {
            steps += 1;
            if steps % eval_period == 0 {
                curve.push(CurvePoint {
                    step: steps,
                    mean: r.mean,
                    std: r.std,
                });
            }
        }
        returns.push(s.total_reward.as_f64());
    }
    Ok((curve, returns))
}

/// Writes `step,mean_return,std_return` rows.
pub fn save_curve(curve: &[CurvePoint], path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "step,mean_return,std_return")?;
    for p in curve {
        writeln!(out, "{},{},{}", p.step, p.mean, p.std)?;
    }
    out.flush()
}
