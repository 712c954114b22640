//! Baseline management policies and a generic episode runner.

use rand::Rng;

use crate::config::{ConfigError, Section};
use crate::environment::{Action, ActionBounds, EnvError, Environment, Observation, StepInfo};
use crate::num::Scalar;
use crate::rng::{derive_seed, seeded, SimRng};

/// Chooses one action per day. `info` carries soil nitrate and soil water,
/// which are not part of the observation vector.
pub trait Policy<T: Scalar> {
    fn act(&mut self, obs: &Observation<T>, info: &StepInfo<T>) -> Action<T>;

    /// Called at the start of every episode with that episode's seed.
    fn begin_episode(&mut self, _seed: u64) {}

    /// True when actions depend on nothing but the observation and info, so
    /// repeated runs on an identical season give identical results.
    fn is_deterministic(&self) -> bool {
        false
    }
}

impl<T: Scalar, P: Policy<T> + ?Sized> Policy<T> for &mut P {
    fn act(&mut self, obs: &Observation<T>, info: &StepInfo<T>) -> Action<T> {
        (**self).act(obs, info)
    }
    fn begin_episode(&mut self, seed: u64) {
        (**self).begin_episode(seed)
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
}

/// Each component uniform on `[0, max]`.
pub fn random_policy<T: Scalar>(rng: &mut SimRng, bounds: &ActionBounds<T>) -> Action<T> {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    Action::new(
        T::lit(u) * bounds.fert_max,
        T::lit(v) * bounds.irrig_max,
    )
}

#[derive(Debug, Clone)]
pub struct RandomPolicy<T> {
    rng: SimRng,
    bounds: ActionBounds<T>,
}

impl<T: Scalar> RandomPolicy<T> {
    pub fn new(seed: u64, bounds: ActionBounds<T>) -> Self {
        Self {
            rng: seeded(derive_seed(seed, 1)),
            bounds,
        }
    }
}

impl<T: Scalar> Policy<T> for RandomPolicy<T> {
    fn act(&mut self, _obs: &Observation<T>, _info: &StepInfo<T>) -> Action<T> {
        random_policy(&mut self.rng, &self.bounds)
    }

    fn begin_episode(&mut self, seed: u64) {
        self.rng = seeded(derive_seed(seed, 1));
    }
}

/// Fixed calendar of fertilizer applications plus periodic irrigation.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulePolicyParams<T> {
    /// `(day, kg/ha)` fertilizer applications.
    pub applications: Vec<(usize, T)>,
    /// Days between irrigation events; irrigation happens on day 0.
    pub irrigation_period: usize,
    /// Irrigation per event, mm.
    pub irrigation_amount: T,
}

impl<T: Scalar> Default for SchedulePolicyParams<T> {
    fn default() -> Self {
        Self {
            applications: vec![(7, T::lit(60.0)), (45, T::lit(60.0)), (80, T::lit(40.0))],
            irrigation_period: 7,
            irrigation_amount: T::lit(25.0),
        }
    }
}

impl<T: Scalar> SchedulePolicyParams<T> {
    pub fn total_fertilizer(&self) -> T {
        self.applications.iter().map(|&(_, f)| f).sum()
    }
}

/// Scheduled action for `day`; a function of the day alone.
pub fn standard_policy<T: Scalar>(day: usize, p: &SchedulePolicyParams<T>) -> Action<T> {
    let fert = p
        .applications
        .iter()
        .filter(|&&(d, _)| d == day)
        .map(|&(_, f)| f)
        .sum();
    let irrig = if p.irrigation_period > 0 && day % p.irrigation_period == 0 {
        p.irrigation_amount
    } else {
        T::zero()
    };
    Action::new(fert, irrig)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardPolicy<T> {
    pub params: SchedulePolicyParams<T>,
}

impl<T: Scalar> Policy<T> for StandardPolicy<T> {
    fn act(&mut self, _obs: &Observation<T>, info: &StepInfo<T>) -> Action<T> {
        standard_policy(info.day, &self.params)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Threshold rules on soil nitrate and soil water.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactivePolicyParams<T> {
    /// Nitrate level below which fertilizer is applied, kg/ha.
    pub n_threshold: T,
    pub n_dose: T,
    /// Fraction of water capacity below which irrigation is applied.
    pub sw_threshold_fraction: T,
    pub irrig_dose: T,
}

impl<T: Scalar> Default for ReactivePolicyParams<T> {
    fn default() -> Self {
        Self {
            n_threshold: T::lit(20.0),
            n_dose: T::lit(50.0),
            sw_threshold_fraction: T::lit(0.1),
            irrig_dose: T::lit(25.0),
        }
    }
}

/// Fertilizer when nitrate is depleted, irrigation when the soil is dry;
/// each rule is evaluated on its own.
pub fn reactive_policy<T: Scalar>(
    n_pool: T,
    sw: T,
    sw_capacity: T,
    p: &ReactivePolicyParams<T>,
) -> Action<T> {
    let fert = if n_pool < p.n_threshold { p.n_dose } else { T::zero() };
    let irrig = if sw < p.sw_threshold_fraction * sw_capacity {
        p.irrig_dose
    } else {
        T::zero()
    };
    Action::new(fert, irrig)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactivePolicy<T> {
    pub params: ReactivePolicyParams<T>,
}

impl<T: Scalar> Policy<T> for ReactivePolicy<T> {
    fn act(&mut self, _obs: &Observation<T>, info: &StepInfo<T>) -> Action<T> {
        reactive_policy(info.n_pool, info.sw, info.sw_capacity, &self.params)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Baseline policy parameters, configurable as `agent.standard.*` and
/// `agent.reactive.*`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentParams<T> {
    pub standard: SchedulePolicyParams<T>,
    pub reactive: ReactivePolicyParams<T>,
}

impl<T: Scalar> Default for AgentParams<T> {
    fn default() -> Self {
        Self {
            standard: SchedulePolicyParams::default(),
            reactive: ReactivePolicyParams::default(),
        }
    }
}

impl<T: Scalar> Default for StandardPolicy<T> {
    fn default() -> Self {
        Self {
            params: SchedulePolicyParams::default(),
        }
    }
}

impl<T: Scalar> Default for ReactivePolicy<T> {
    fn default() -> Self {
        Self {
            params: ReactivePolicyParams::default(),
        }
    }
}

crate::config_section!(impl<T: Scalar> for SchedulePolicyParams<T>, "agent.standard" {
    applications, irrigation_period, irrigation_amount,
});
crate::config_section!(impl<T: Scalar> for ReactivePolicyParams<T>, "agent.reactive" {
    n_threshold, n_dose, sw_threshold_fraction, irrig_dose,
});

impl<T: Scalar> Section for AgentParams<T> {
    fn set(&mut self, key: &str, value: &str) -> Result<bool, ConfigError> {
        Ok(self.standard.set(key, value)? || self.reactive.set(key, value)?)
    }
    fn pairs(&self) -> Vec<(String, String)> {
        let mut v = self.standard.pairs();
        v.extend(self.reactive.pairs());
        v
    }
}

fn bad_value<T>(key: &str, value: String, expected: &'static str) -> Result<T, ConfigError> {
    Err(ConfigError::Value {
        key: key.to_string(),
        value,
        expected,
    })
}

impl<T: Scalar> SchedulePolicyParams<T> {
    /// Checks that every scheduled day falls in the season and every dose
    /// is inside the action bounds.
    pub fn validate(&self, duration: usize, bounds: &ActionBounds<T>) -> Result<(), ConfigError> {
        for &(day, f) in &self.applications {
            if day >= duration {
                return bad_value("agent.standard.applications", day.to_string(), "days within the season");
            }
            if !(f >= T::zero() && f <= bounds.fert_max) {
                return bad_value("agent.standard.applications", f.to_string(), "amounts within action bounds");
            }
        }
        if !(self.irrigation_amount >= T::zero() && self.irrigation_amount <= bounds.irrig_max) {
            return bad_value(
                "agent.standard.irrigation_amount",
                self.irrigation_amount.render(),
                "an amount within action bounds",
            );
        }
        Ok(())
    }
}

impl<T: Scalar> ReactivePolicyParams<T> {
    /// Checks that both doses are inside the action bounds.
    pub fn validate(&self, bounds: &ActionBounds<T>) -> Result<(), ConfigError> {
        if !(self.n_dose >= T::zero() && self.n_dose <= bounds.fert_max) {
            return bad_value("agent.reactive.n_dose", self.n_dose.render(), "a dose within action bounds");
        }
        if !(self.irrig_dose >= T::zero() && self.irrig_dose <= bounds.irrig_max) {
            return bad_value("agent.reactive.irrig_dose", self.irrig_dose.render(), "a dose within action bounds");
        }
        if !(self.n_threshold >= T::zero()) || !(self.sw_threshold_fraction >= T::zero()) {
            return bad_value("agent.reactive", "negative threshold".into(), "non-negative thresholds");
        }
        Ok(())
    }
}

impl<T: Scalar> AgentParams<T> {
    pub fn validate(&self, duration: usize, bounds: &ActionBounds<T>) -> Result<(), ConfigError> {
        self.standard.validate(duration, bounds)?;
        self.reactive.validate(bounds)
    }
}

/// Totals of one finished episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary<T> {
    /// Undiscounted sum of rewards.
    pub total_reward: T,
    pub final_yield: T,
    pub total_fert: T,
    pub total_irrig: T,
    pub steps: usize,
    /// Whether any action had to be clamped into bounds.
    pub any_clamped: bool,
}

/// Resets `env` with `seed` and runs `policy` until the season ends.
pub fn run_episode<T: Scalar, P: Policy<T> + ?Sized>(
    env: &mut Environment<T>,
    policy: &mut P,
    seed: u64,
) -> Result<EpisodeSummary<T>, EnvError> {
    let mut obs = env.reset_with_seed(seed);
    policy.begin_episode(seed);
    let mut summary = EpisodeSummary {
        total_reward: T::zero(),
        final_yield: T::zero(),
        total_fert: T::zero(),
        total_irrig: T::zero(),
        steps: 0,
        any_clamped: false,
    };
    loop {
        let info = *env.info();
        let action = policy.act(&obs, &info);
        let out = env.step(action)?;
        summary.total_reward = summary.total_reward + out.reward;
        summary.total_fert = summary.total_fert + out.info.applied.fert;
        summary.total_irrig = summary.total_irrig + out.info.applied.irrig;
        summary.any_clamped |= out.info.clamped.fert || out.info.clamped.irrig;
        summary.steps += 1;
        obs = out.obs;
        if out.done {
            summary.final_yield = out.info.yld;
            return Ok(summary);
        }
    }
}
