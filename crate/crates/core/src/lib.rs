//! Daily corn growth under fertilizer and irrigation decisions.
//!
//! The crate is generic over the floating point type through [`Scalar`];
//! [`CropEnv`] and friends fix it to `f64`.

pub mod agents;
pub mod config;
pub mod dynamics;
pub mod environment;
pub mod log;
pub mod num;
pub mod rng;
pub mod weather;

pub use agents::{
    random_policy, reactive_policy, run_episode, standard_policy, EpisodeSummary, Policy, RandomPolicy,
    ReactivePolicy, ReactivePolicyParams, SchedulePolicyParams, StandardPolicy,
};
pub use config::{ConfigError, Section};
pub use dynamics::{CropModel, CropParams, CropState, SoilParams, SoilState};
pub use environment::{
    observe, reward, Action, ActionBounds, EnvError, Environment, EpisodeConfig, Mode, Observation,
    RewardParams, StepInfo, StepOutcome, OBS_DIM, OBS_NAMES,
};
pub use log::{load_log, save_log, EpisodeLog, LogError};
pub use num::Scalar;
pub use weather::{ClimateProfile, WeatherDay, WeatherError};

pub type CropEnv = Environment<f64>;
pub type CropEnvF32 = Environment<f32>;
pub type Config = EpisodeConfig<f64>;
pub type CropStateF64 = CropState<f64>;
pub type SoilStateF64 = SoilState<f64>;
pub type Weather = WeatherDay<f64>;
