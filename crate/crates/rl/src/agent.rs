//! DDPG and TD3 actor-critic learners.

use agrosim_core::config::{ConfigError, ConfigValue};
use agrosim_core::{Action, ActionBounds, Observation, Policy, Scalar, StepInfo, OBS_DIM};
use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::adam::Adam;
use crate::mlp::{Mlp, OutputActivation};
use crate::replay::Batch;
use crate::Real;

pub const ACTION_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Ddpg,
    Td3,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ddpg => "ddpg",
            Algo::Td3 => "td3",
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ddpg" => Ok(Algo::Ddpg),
            "td3" => Ok(Algo::Td3),
            _ => Err(format!("unknown algorithm `{s}` (expected ddpg or td3)")),
        }
    }
}

/// Learner and protocol settings, configurable under `train.*`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T> {
    pub gamma: T,
    pub tau: T,
    pub actor_lr: T,
    pub critic_lr: T,
    pub batch_size: usize,
    pub warmup_steps: usize,
    /// Exploration noise standard deviation as a fraction of each action range.
    pub explore_noise: T,
    /// TD3 target policy smoothing noise, in actor output units.
    pub policy_noise: T,
    pub noise_clip: T,
    pub policy_delay: usize,
    pub episodes: usize,
    /// Simulated days between evaluations.
    pub eval_period: usize,
    pub eval_runs: usize,
    pub seeds: usize,
    pub hidden: usize,
    pub buffer_capacity: usize,
    /// Multiplies rewards before they enter the critic targets.
    pub reward_scale: T,
    /// Append season progress and cumulative inputs to the network state.
    pub history_features: bool,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            gamma: T::lit(0.99),
            tau: T::lit(0.005),
            actor_lr: T::lit(3e-4),
            critic_lr: T::lit(3e-4),
            batch_size: 256,
            warmup_steps: 1000,
            explore_noise: T::lit(0.1),
            policy_noise: T::lit(0.2),
            noise_clip: T::lit(0.5),
            policy_delay: 2,
            episodes: 200,
            eval_period: 7,
            eval_runs: 10,
            seeds: 5,
            hidden: 64,
            buffer_capacity: 100_000,
            reward_scale: T::lit(0.01),
            history_features: true,
        }
    }
}

agrosim_core::config_section!(impl<T: Scalar> for TrainConfig<T>, "train" {
    gamma, tau, actor_lr, critic_lr, batch_size, warmup_steps, explore_noise, policy_noise,
    noise_clip, policy_delay, episodes, eval_period, eval_runs, seeds, hidden, buffer_capacity,
    reward_scale, history_features,
});

impl<T: Scalar> TrainConfig<T> {
    /// Checks ranges; the error names the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: String, expected: &'static str| {
            Err(ConfigError::Value {
                key: key.to_string(),
                value,
                expected,
            })
        };
        let (zero, one) = (T::zero(), T::one());
        if !(self.gamma >= zero && self.gamma < one) {
            return bad("train.gamma", self.gamma.render(), "a value in [0, 1)");
        }
        if !(self.tau > zero && self.tau <= one) {
            return bad("train.tau", self.tau.render(), "a value in (0, 1]");
        }
        for (key, v) in [
            ("train.actor_lr", self.actor_lr),
            ("train.critic_lr", self.critic_lr),
            ("train.reward_scale", self.reward_scale),
        ] {
            if !(v > zero && v.is_finite()) {
                return bad(key, v.render(), "a positive number");
            }
        }
        for (key, v) in [
            ("train.explore_noise", self.explore_noise),
            ("train.policy_noise", self.policy_noise),
            ("train.noise_clip", self.noise_clip),
        ] {
            if !(v >= zero && v.is_finite()) {
                return bad(key, v.render(), "a non-negative number");
            }
        }
        for (key, v) in [
            ("train.batch_size", self.batch_size),
            ("train.policy_delay", self.policy_delay),
            ("train.episodes", self.episodes),
            ("train.eval_period", self.eval_period),
            ("train.eval_runs", self.eval_runs),
            ("train.seeds", self.seeds),
            ("train.hidden", self.hidden),
            ("train.buffer_capacity", self.buffer_capacity),
        ] {
            if v == 0 {
                return bad(key, v.render(), "a count of at least 1");
            }
        }
        Ok(())
    }
}

/// Fixed per-feature divisors applied to observations before they reach a
/// network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsScales<T>(pub [T; OBS_DIM]);

impl<T: Scalar> Default for ObsScales<T> {
    /// t_mean 40, precip 50, ref_et 10, solar 30, vapor 30, e_a 10,
    /// wb_cum 300, rcn 100, lai 3, n_up 10, dn 5, stresses 1.
    fn default() -> Self {
        let v = [40.0, 50.0, 10.0, 30.0, 30.0, 10.0, 300.0, 100.0, 3.0, 10.0, 5.0, 1.0, 1.0, 1.0];
        Self(v.map(T::lit))
    }
}

impl<T: Scalar> ObsScales<T> {
    pub fn normalize<E: Scalar>(&self, obs: &Observation<E>) -> [T; OBS_DIM] {
        std::array::from_fn(|i| T::lit(obs.0[i].as_f64()) / self.0[i])
    }

    pub fn denormalize<E: Scalar>(&self, x: &[T; OBS_DIM]) -> Observation<E> {
        Observation(std::array::from_fn(|i| E::lit((x[i] * self.0[i]).as_f64())))
    }
}

/// Running totals of one episode that the observation vector does not
/// carry: days elapsed and inputs applied so far.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct History {
    pub day: usize,
    pub fert: f64,
    pub irrig: f64,
}

impl History {
    pub fn record<E: Scalar>(&mut self, applied: &Action<E>) {
        self.day += 1;
        self.fert += applied.fert.as_f64();
        self.irrig += applied.irrig.as_f64();
    }
}

/// Builds network inputs: the normalized observation, followed, when
/// `history` is set, by the season fraction elapsed and the fertilizer and
/// irrigation applied so far divided by `fert_scale` and `irrig_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEncoder<T> {
    pub scales: ObsScales<T>,
    pub history: bool,
    pub duration: usize,
    pub fert_scale: T,
    pub irrig_scale: T,
}

impl<T: Real> StateEncoder<T> {
    pub fn new(history: bool, duration: usize) -> Self {
        Self {
            scales: ObsScales::default(),
            history,
            duration,
            fert_scale: T::lit(200.0),
            irrig_scale: T::lit(500.0),
        }
    }

    pub fn dim(&self) -> usize {
        if self.history {
            OBS_DIM + 3
        } else {
            OBS_DIM
        }
    }

    pub fn encode<E: Scalar>(&self, obs: &Observation<E>, h: &History) -> Vec<T> {
        let mut x = self.scales.normalize::<E>(obs).to_vec();
        if self.history {
            x.push(T::lit(h.day as f64 / self.duration.max(1) as f64));
            x.push(T::lit(h.fert) / self.fert_scale);
            x.push(T::lit(h.irrig) / self.irrig_scale);
        }
        x
    }
}

/// Maps actor output in `[-1, 1]` affinely onto `[0, max]` per input.
pub fn to_action<T: Real, E: Scalar>(u: [T; ACTION_DIM], bounds: &ActionBounds<E>) -> Action<E> {
    let map = |u: T, hi: E| {
        let frac = (u.as_f64().clamp(-1.0, 1.0) + 1.0) * 0.5;
        E::lit(frac * hi.as_f64()).clamp_to(E::zero(), hi)
    };
    Action::new(map(u[0], bounds.fert_max), map(u[1], bounds.irrig_max))
}

/// Inverse of [`to_action`]; a zero-width range maps to -1.
pub fn from_action<T: Real, E: Scalar>(a: &Action<E>, bounds: &ActionBounds<E>) -> [T; ACTION_DIM] {
    let inv = |x: E, hi: E| {
        let hi = hi.as_f64();
        if hi > 0.0 {
            T::lit(2.0 * x.as_f64() / hi - 1.0)
        } else {
            -T::one()
        }
    };
    [inv(a.fert, bounds.fert_max), inv(a.irrig, bounds.irrig_max)]
}

/// Adds Gaussian noise with standard deviation `sigma·max` to each input and
/// clips back into bounds.
pub fn explore<E: Scalar, R: Rng + ?Sized>(a: Action<E>, sigma: f64, bounds: &ActionBounds<E>, rng: &mut R) -> Action<E> {
    let jitter = |x: E, hi: E, rng: &mut R| {
        let n: f64 = rng.sample(StandardNormal);
        E::lit(x.as_f64() + n * sigma * hi.as_f64()).clamp_to(E::zero(), hi)
    };
    let f = jitter(a.fert, bounds.fert_max, rng);
    let i = jitter(a.irrig, bounds.irrig_max, rng);
    Action::new(f, i)
}

/// Losses reported by one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats<T> {
    pub critic_loss: T,
    /// Mean critic value of the actor's actions, when the actor was updated.
    pub actor_objective: Option<T>,
}

/// Actor, critics, their targets and optimizers. DDPG uses one critic, TD3
/// two.
#[derive(Debug, Clone)]
pub struct ActorCritic<T> {
    pub algo: Algo,
    pub actor: Mlp<T>,
    pub actor_target: Mlp<T>,
    pub critics: Vec<Mlp<T>>,
    pub critic_targets: Vec<Mlp<T>>,
    actor_opt: Adam<T>,
    critic_opts: Vec<Adam<T>>,
    updates: u64,
}

fn column<T: Real>(x: Array2<T>) -> Array1<T> {
    x.index_axis_move(Axis(1), 0)
}

impl<T: Real> ActorCritic<T> {
    pub fn new<R: Rng + ?Sized>(algo: Algo, state_dim: usize, cfg: &TrainConfig<T>, rng: &mut R) -> Self {
        let h = cfg.hidden;
        let actor = Mlp::new(&[state_dim, h, h, ACTION_DIM], OutputActivation::Tanh, rng);
        let n_critics = match algo {
            Algo::Ddpg => 1,
            Algo::Td3 => 2,
        };
        let critics: Vec<_> = (0..n_critics)
            .map(|_| Mlp::new(&[state_dim + ACTION_DIM, h, h, 1], OutputActivation::Identity, rng))
            .collect();
        Self::from_nets(algo, actor, critics, cfg)
    }

    /// Wraps existing networks; targets start as copies.
    pub fn from_nets(algo: Algo, actor: Mlp<T>, critics: Vec<Mlp<T>>, cfg: &TrainConfig<T>) -> Self {
        Self {
            algo,
            actor_target: actor.clone(),
            critic_targets: critics.clone(),
            actor_opt: Adam::new(&actor, cfg.actor_lr),
            critic_opts: critics.iter().map(|c| Adam::new(c, cfg.critic_lr)).collect(),
            actor,
            critics,
            updates: 0,
        }
    }

    /// Number of completed updates.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Greedy actor output for one normalized state.
    pub fn greedy(&self, state: &[T]) -> [T; ACTION_DIM] {
        let x = ArrayView2::from_shape((1, state.len()), state).expect("state row");
        let y = self.actor.forward(x).expect("actor input width");
        [y[[0, 0]], y[[0, 1]]]
    }

    fn q(net: &Mlp<T>, s: &Array2<T>, a: &Array2<T>) -> Array1<T> {
        let x = concatenate![Axis(1), *s, *a];
        column(net.forward(x.view()).expect("critic input width"))
    }

    /// Target actions for the next states; TD3 adds clipped smoothing noise.
    pub fn target_actions<R: Rng + ?Sized>(&self, next: &Array2<T>, cfg: &TrainConfig<T>, rng: &mut R) -> Array2<T> {
        let mut a = self.actor_target.forward(next.view()).expect("actor input width");
        if self.algo == Algo::Td3 && cfg.policy_noise > T::zero() {
            let clip = cfg.noise_clip;
            a.mapv_inplace(|x| {
                let n: f64 = rng.sample(StandardNormal);
                let eps = (T::lit(n) * cfg.policy_noise).clamp_to(-clip, clip);
                (x + eps).clamp_to(-T::one(), T::one())
            });
        }
        a
    }

    /// Critic regression targets `r·scale + γ(1 − done)·Q′(s′, a′)`; TD3 takes
    /// the smaller of its twin target critics.
    pub fn targets_with(&self, batch: &Batch<T>, next_actions: &Array2<T>, cfg: &TrainConfig<T>) -> Array1<T> {
        let mut q_next = Self::q(&self.critic_targets[0], &batch.next_state, next_actions);
        for c in &self.critic_targets[1..] {
            let other = Self::q(c, &batch.next_state, next_actions);
            q_next.zip_mut_with(&other, |a, &b| *a = a.min(b));
        }
        let mut y = batch.reward.mapv(|r| r * cfg.reward_scale);
        ndarray::Zip::from(&mut y)
            .and(&batch.done)
            .and(&q_next)
            .for_each(|y, &d, &q| *y = *y + cfg.gamma * (T::one() - d) * q);
        y
    }

    pub fn targets<R: Rng + ?Sized>(&self, batch: &Batch<T>, cfg: &TrainConfig<T>, rng: &mut R) -> Array1<T> {
        let a = self.target_actions(&batch.next_state, cfg, rng);
        self.targets_with(batch, &a, cfg)
    }

    /// One learning step on `batch`. DDPG updates the actor and targets every
    /// call; TD3 only when the update index (starting at 1) is a multiple of
    /// the policy delay.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &Batch<T>, cfg: &TrainConfig<T>, rng: &mut R) -> UpdateStats<T> {
        self.updates += 1;
        let y = self.targets(batch, cfg, rng);
        let n = T::lit(batch.len() as f64);
        let two = T::lit(2.0);

        let x = concatenate![Axis(1), batch.state, batch.action];
        let mut critic_loss = T::zero();
        for (critic, opt) in self.critics.iter_mut().zip(&mut self.critic_opts) {
            let cache = critic.forward_cached(x.view()).expect("critic input width");
            let mut upstream = cache.output.clone();
            let mut loss = T::zero();
            for (u, &t) in upstream.column_mut(0).iter_mut().zip(&y) {
                let err = *u - t;
                loss = loss + err * err;
                *u = two * err / n;
            }
            critic_loss = critic_loss + loss / n;
            let (grads, _) = critic.backward(&cache, upstream.view(), true).expect("critic shapes");
            opt.step(critic, &grads.expect("parameter gradients"));
        }

        let delay = match self.algo {
            Algo::Ddpg => 1,
            Algo::Td3 => cfg.policy_delay as u64,
        };
        let mut actor_objective = None;
        if self.updates % delay == 0 {
            let actor_cache = self.actor.forward_cached(batch.state.view()).expect("actor input width");
            let xa = concatenate![Axis(1), batch.state, actor_cache.output];
            let critic = &self.critics[0];
            let cache = critic.forward_cached(xa.view()).expect("critic input width");
            actor_objective = Some(cache.output.sum() / n);
            // Ascend Q: the loss is -mean(Q).
            let upstream = Array2::from_elem((batch.len(), 1), -T::one() / n);
            let (_, dx) = critic.backward(&cache, upstream.view(), false).expect("critic shapes");
            let state_dim = batch.state.ncols();
            let da = dx.slice(s![.., state_dim..]);
            let (grads, _) = self.actor.backward(&actor_cache, da, true).expect("actor shapes");
            self.actor_opt.step(&mut self.actor, &grads.expect("parameter gradients"));

            self.actor_target.soft_update_from(&self.actor, cfg.tau);
            for (t, c) in self.critic_targets.iter_mut().zip(&self.critics) {
                t.soft_update_from(c, cfg.tau);
            }
        }
        UpdateStats {
            critic_loss: critic_loss / T::lit(self.critics.len() as f64),
            actor_objective,
        }
    }
}

/// Greedy policy over a trained actor, usable wherever a baseline is.
#[derive(Debug, Clone)]
pub struct ActorPolicy<T, E> {
    pub actor: Mlp<T>,
    pub encoder: StateEncoder<T>,
    pub bounds: ActionBounds<E>,
    history: History,
}

impl<T: Real, E: Scalar> ActorPolicy<T, E> {
    pub fn new(actor: Mlp<T>, encoder: StateEncoder<T>, bounds: ActionBounds<E>) -> Self {
        Self {
            actor,
            encoder,
            bounds,
            history: History::default(),
        }
    }
}

impl<T: Real, E: Scalar> Policy<E> for ActorPolicy<T, E> {
    fn act(&mut self, obs: &Observation<E>, _info: &StepInfo<E>) -> Action<E> {
        let x = self.encoder.encode(obs, &self.history);
        let y = self
            .actor
            .forward(ArrayView2::from_shape((1, x.len()), &x).expect("state row"))
            .expect("actor input width");
        let a = to_action([y[[0, 0]], y[[0, 1]]], &self.bounds);
        self.history.record(&a);
        a
    }

    fn begin_episode(&mut self, _seed: u64) {
        self.history = History::default();
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use agrosim_core::config::Section;

    #[test]
    fn action_mapping_endpoints() {
        let b = ActionBounds { fert_max: 60.0, irrig_max: 50.0 };
        assert_eq!(to_action([-1.0f64, -1.0], &b), Action::new(0.0, 0.0));
        assert_eq!(to_action([1.0f64, 1.0], &b), Action::new(60.0, 50.0));
        assert_eq!(to_action([0.0f64, 0.0], &b), Action::new(30.0, 25.0));
        assert_eq!(to_action([f64::INFINITY, -7.0], &b), Action::new(60.0, 0.0));
        let u: [f64; 2] = from_action(&Action::new(15.0, 37.5), &b);
        assert_eq!(u, [-0.5, 0.5]);
    }

    #[test]
    fn normalization_round_trip() {
        let sc = ObsScales::<f64>::default();
        assert_eq!(sc.normalize(&Observation([0.0f64; OBS_DIM])), [0.0; OBS_DIM]);
        assert_eq!(sc.normalize(&Observation(sc.0)), [1.0; OBS_DIM]);
        let obs = Observation(std::array::from_fn(|i| i as f64 * 1.7 - 3.0));
        let back: Observation<f64> = sc.denormalize(&sc.normalize(&obs));
        for (a, b) in back.0.iter().zip(obs.0) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn config_keys_and_validation() {
        let mut cfg = TrainConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        assert!(cfg.set("train.hidden", "64").unwrap());
        assert_eq!(cfg.hidden, 64);
        assert!(!cfg.set("episode.seed", "1").unwrap());
        cfg.set("train.gamma", "1").unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::Value { .. })));
        let mut again = TrainConfig::<f64>::default();
        again.apply_all(&TrainConfig::<f64>::default().pairs()).unwrap();
        assert_eq!(again, TrainConfig::default());
    }
}
