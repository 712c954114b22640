//! Episodic decision environment: one episode is one growing season with a
//! daily fertilizer/irrigation decision.

use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::config::{parse_for, ConfigError, ConfigValue, Section};
use crate::config_section;
use crate::dynamics::{step_dynamics, CropModel, CropParams, CropState, ParamError, SoilParams, SoilState};
use crate::log::{EpisodeLog, LogError, LogRecord};
use crate::num::Scalar;
use crate::rng::{derive_seed, seeded};
use crate::weather::{generate_season, load_weather_csv, perturb, ClimateProfile, WeatherDay, WeatherError};

/// Daily management decision.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Action<T> {
    /// Fertilizer, kg/ha.
    pub fert: T,
    /// Irrigation, mm.
    pub irrig: T,
}

impl<T: Scalar> Action<T> {
    pub fn new(fert: T, irrig: T) -> Self {
        Self { fert, irrig }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// Upper bounds on the daily action; the lower bound is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBounds<T> {
    pub fert_max: T,
    pub irrig_max: T,
}

impl<T: Scalar> Default for ActionBounds<T> {
    fn default() -> Self {
        Self {
            fert_max: T::lit(60.0),
            irrig_max: T::lit(50.0),
        }
    }
}

/// Which action components were moved into bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClampFlags {
    pub fert: bool,
    pub irrig: bool,
}

impl<T: Scalar> ActionBounds<T> {
    pub fn contains(&self, a: &Action<T>) -> bool {
        a.fert >= T::zero() && a.fert <= self.fert_max && a.irrig >= T::zero() && a.irrig <= self.irrig_max
    }

    /// Clamps into bounds. NaN components become zero and are flagged.
    pub fn clamp(&self, a: &Action<T>) -> (Action<T>, ClampFlags) {
        let fix = |v: T, max: T| -> (T, bool) {
            if v.is_nan() {
                (T::zero(), true)
            } else {
                let c = v.clamp_to(T::zero(), max);
                (c, c != v)
            }
        };
        let (fert, fc) = fix(a.fert, self.fert_max);
        let (irrig, ic) = fix(a.irrig, self.irrig_max);
        (Action { fert, irrig }, ClampFlags { fert: fc, irrig: ic })
    }
}

/// Input cost coefficients of the reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams<T> {
    /// Cost per kg/ha of fertilizer.
    pub alpha: T,
    /// Cost per mm of irrigation.
    pub beta: T,
}

impl<T: Scalar> Default for RewardParams<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(2.43),
            beta: T::lit(0.16),
        }
    }
}

/// Daily reward: yield gained minus input costs.
pub fn reward<T: Scalar>(yld_delta: T, a: &Action<T>, rp: &RewardParams<T>) -> T {
    yld_delta - rp.alpha * a.fert - rp.beta * a.irrig
}

pub const OBS_DIM: usize = 14;

/// Observation slot names, in order.
pub const OBS_NAMES: [&str; OBS_DIM] = [
    "t_mean", "precip", "ref_et", "solar", "vapor", "e_a", "wb_cum", "rcn", "lai", "n_up", "dn",
    "n_strs", "t_strs", "w_strs",
];

/// Fixed-order observation vector; see [`OBS_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T>(pub [T; OBS_DIM]);

impl<T: Scalar> Observation<T> {
    pub const LAI: usize = 8;

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<T> {
        OBS_NAMES.iter().position(|n| *n == name).map(|i| self.0[i])
    }
}

/// Assembles the observation from the states and the day's weather.
pub fn observe<T: Scalar>(crop: &CropState<T>, soil: &SoilState<T>, w: &WeatherDay<T>) -> Observation<T> {
    Observation([
        w.t_mean,
        w.precip,
        w.ref_et,
        w.solar,
        w.vapor,
        crop.e_a,
        soil.wb_cum,
        soil.rcn,
        crop.lai,
        soil.n_up,
        soil.dn,
        crop.n_strs,
        crop.t_strs,
        crop.w_strs,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Seeded multiplicative noise on every weather day.
    #[default]
    Stochastic,
    /// The base weather sequence as-is; the seed has no effect.
    Deterministic,
}

impl ConfigValue for Mode {
    const EXPECTED: &'static str = "`stochastic` or `deterministic`";
    fn parse_value(s: &str) -> Option<Self> {
        match s.trim() {
            "stochastic" => Some(Mode::Stochastic),
            "deterministic" => Some(Mode::Deterministic),
            _ => None,
        }
    }
    fn render(&self) -> String {
        match self {
            Mode::Stochastic => "stochastic",
            Mode::Deterministic => "deterministic",
        }
        .to_string()
    }
}

/// Episode configuration. The base weather sequence comes from `weather_file`
/// when set, otherwise from the synthetic generator seeded by `weather_seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig<T> {
    /// Season length, days.
    pub duration: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Relative weather noise half-width in stochastic mode.
    pub noise_scale: T,
    pub climate: ClimateProfile<T>,
    pub weather_seed: u64,
    pub weather_file: Option<PathBuf>,
    pub crop: CropParams<T>,
    pub soil: SoilParams<T>,
    pub reward: RewardParams<T>,
    pub bounds: ActionBounds<T>,
    /// Episode log written when the episode ends.
    pub log_path: Option<PathBuf>,
}

impl<T: Scalar> Default for EpisodeConfig<T> {
    fn default() -> Self {
        Self {
            duration: 120,
            mode: Mode::Stochastic,
            seed: 0,
            noise_scale: T::lit(0.1),
            climate: ClimateProfile::default(),
            weather_seed: 2023,
            weather_file: None,
            crop: CropParams::default(),
            soil: SoilParams::default(),
            reward: RewardParams::default(),
            bounds: ActionBounds::default(),
            log_path: None,
        }
    }
}

impl<T: Scalar> EpisodeConfig<T> {
    pub fn deterministic(mut self) -> Self {
        self.mode = Mode::Deterministic;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

config_section!(impl<T: Scalar> for CropParams<T>, "crop" {
    t_base, t_opt, lai_max, fr_phu_sen, phu_total, rue, k_l, hi_opt, lai_curve_pt1, lai_curve_pt2,
});
config_section!(impl<T: Scalar> for SoilParams<T>, "soil" {
    sw_capacity, sw_init, cn2, n_init, denit_rate, denit_sw_threshold, n_uptake_coeff,
});
config_section!(impl<T: Scalar> for ClimateProfile<T>, "climate" {
    mean_temp, temp_amplitude, wet_day_probability, wet_day_precip, peak_solar, base_vapor, start_doy,
});
config_section!(impl<T: Scalar> for RewardParams<T>, "reward" { alpha, beta });
config_section!(impl<T: Scalar> for ActionBounds<T>, "bounds" { fert_max, irrig_max });

impl<T: Scalar> Section for EpisodeConfig<T> {
    fn set(&mut self, key: &str, value: &str) -> Result<bool, ConfigError> {
        match key {
            "episode.duration" => self.duration = parse_for(key, value)?,
            "episode.mode" => self.mode = parse_for(key, value)?,
            "episode.seed" => self.seed = parse_for(key, value)?,
            "episode.noise_scale" => self.noise_scale = parse_for(key, value)?,
            "episode.log_path" => self.log_path = parse_for(key, value)?,
            "weather.seed" => self.weather_seed = parse_for(key, value)?,
            "weather.file" => self.weather_file = parse_for(key, value)?,
            _ => {
                return Ok(self.crop.set(key, value)?
                    || self.soil.set(key, value)?
                    || self.climate.set(key, value)?
                    || self.reward.set(key, value)?
                    || self.bounds.set(key, value)?)
            }
        }
        Ok(true)
    }

    fn pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("episode.duration".to_string(), self.duration.render()),
            ("episode.mode".to_string(), self.mode.render()),
            ("episode.seed".to_string(), self.seed.render()),
            ("episode.noise_scale".to_string(), self.noise_scale.render()),
            ("episode.log_path".to_string(), self.log_path.render()),
            ("weather.seed".to_string(), self.weather_seed.render()),
            ("weather.file".to_string(), self.weather_file.render()),
        ];
        out.extend(self.climate.pairs());
        out.extend(self.crop.pairs());
        out.extend(self.soil.pairs());
        out.extend(self.reward.pairs());
        out.extend(self.bounds.pairs());
        out
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepInfo<T> {
    /// Completed days.
    pub day: usize,
    /// Estimated yield to date, kg/ha.
    pub yld: T,
    pub biomass: T,
    pub fr_phu: T,
    /// Soil nitrate, kg/ha.
    pub n_pool: T,
    /// Soil water, mm.
    pub sw: T,
    pub sw_capacity: T,
    pub runoff: T,
    pub overflow: T,
    pub n_strs: T,
    pub w_strs: T,
    pub t_strs: T,
    /// Action actually applied.
    pub applied: Action<T>,
    pub clamped: ClampFlags,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<T> {
    pub obs: Observation<T>,
    pub reward: T,
    pub done: bool,
    pub info: StepInfo<T>,
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid configuration: `{field}` {message}")]
    Config { field: &'static str, message: String },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Weather(#[from] WeatherError),
    #[error("weather sequence has {have} days but the season needs {need}")]
    WeatherTooShort { have: usize, need: usize },
    #[error("episode has finished; call reset before stepping again")]
    EpisodeFinished,
    #[error("episode has not been reset")]
    NotStarted,
    #[error(transparent)]
    Log(#[from] LogError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    Running,
    Done,
}

/// One crop field simulated season by season.
#[derive(Debug, Clone)]
pub struct Environment<T> {
    cfg: EpisodeConfig<T>,
    model: CropModel<T>,
    base_weather: Vec<WeatherDay<T>>,
    weather: Vec<WeatherDay<T>>,
    crop: CropState<T>,
    soil: SoilState<T>,
    day: usize,
    phase: Phase,
    info: StepInfo<T>,
    log: EpisodeLog<T>,
}

fn validate_config<T: Scalar>(cfg: &EpisodeConfig<T>) -> Result<(), EnvError> {
    let bad = |field, message: &str| {
        Err(EnvError::Config {
            field,
            message: message.to_string(),
        })
    };
    if cfg.duration == 0 {
        return bad("episode.duration", "must be at least 1");
    }
    let s = cfg.noise_scale;
    if !(s >= T::zero() && s <= T::lit(0.5)) {
        return bad("episode.noise_scale", "must lie in [0, 0.5]");
    }
    if !(cfg.reward.alpha >= T::zero()) {
        return bad("reward.alpha", "must be non-negative");
    }
    if !(cfg.reward.beta >= T::zero()) {
        return bad("reward.beta", "must be non-negative");
    }
    if !(cfg.bounds.fert_max >= T::zero() && cfg.bounds.fert_max.is_finite()) {
        return bad("bounds.fert_max", "must be finite and non-negative");
    }
    if !(cfg.bounds.irrig_max >= T::zero() && cfg.bounds.irrig_max.is_finite()) {
        return bad("bounds.irrig_max", "must be finite and non-negative");
    }
    if let Err((field, value)) = cfg.climate.validate() {
        return Err(EnvError::Config {
            field,
            message: format!("= {value} is out of range"),
        });
    }
    cfg.soil.validate()?;
    Ok(())
}

impl<T: Scalar> Environment<T> {
    /// Validates the configuration and prepares the base weather sequence.
    /// Call [`Environment::reset`] before stepping.
    pub fn new(cfg: EpisodeConfig<T>) -> Result<Self, EnvError> {
        validate_config(&cfg)?;
        let model = CropModel::new(cfg.crop)?;
        let base_weather = match &cfg.weather_file {
            Some(path) => load_weather_csv(path)?,
            None => generate_season(cfg.duration, &cfg.climate, cfg.weather_seed),
        };
        if base_weather.len() < cfg.duration {
            return Err(EnvError::WeatherTooShort {
                have: base_weather.len(),
                need: cfg.duration,
            });
        }
        Ok(Self {
            weather: base_weather.clone(),
            base_weather,
            crop: CropState::initial(),
            soil: SoilState::initial(&cfg.soil),
            day: 0,
            phase: Phase::Idle,
            info: StepInfo::default(),
            log: EpisodeLog::default(),
            model,
            cfg,
        })
    }

    pub fn config(&self) -> &EpisodeConfig<T> {
        &self.cfg
    }

    /// Starts a new season with the configured seed.
    pub fn reset(&mut self) -> Observation<T> {
        self.reset_with_seed(self.cfg.seed)
    }

    /// Starts a new season, replacing the configured seed.
    pub fn reset_with_seed(&mut self, seed: u64) -> Observation<T> {
        self.cfg.seed = seed;
        let days = &self.base_weather[..self.cfg.duration];
        self.weather.clear();
        match self.cfg.mode {
            Mode::Deterministic => self.weather.extend_from_slice(days),
            Mode::Stochastic => {
                let mut rng = seeded(derive_seed(seed, 0));
                let scale = self.cfg.noise_scale;
                self.weather
                    .extend(days.iter().map(|w| perturb(w, &mut rng, scale)));
            }
        }
        self.crop = CropState::initial();
        self.soil = SoilState::initial(&self.cfg.soil);
        self.day = 0;
        self.phase = Phase::Running;
        self.info = self.snapshot_info(T::zero(), T::zero(), Action::zero(), ClampFlags::default());
        // The destination is not part of the episode, so copies of a log
        // written to different paths stay byte-identical.
        let header = self.cfg.pairs().into_iter().filter(|(k, _)| k != "episode.log_path").collect();
        self.log = EpisodeLog::new(header, seed);
        self.current_observation()
    }

    fn current_observation(&self) -> Observation<T> {
        let idx = self.day.min(self.cfg.duration - 1);
        observe(&self.crop, &self.soil, &self.weather[idx])
    }

    fn snapshot_info(&self, runoff: T, overflow: T, applied: Action<T>, clamped: ClampFlags) -> StepInfo<T> {
        StepInfo {
            day: self.day,
            yld: self.crop.yld,
            biomass: self.crop.biomass,
            fr_phu: self.crop.fr_phu,
            n_pool: self.soil.n_pool,
            sw: self.soil.sw,
            sw_capacity: self.cfg.soil.sw_capacity,
            runoff,
            overflow,
            n_strs: self.crop.n_strs,
            w_strs: self.crop.w_strs,
            t_strs: self.crop.t_strs,
            applied,
            clamped,
        }
    }

    /// Applies one day's action. Errors once the season is over.
    pub fn step(&mut self, action: Action<T>) -> Result<StepOutcome<T>, EnvError> {
        match self.phase {
            Phase::Idle => return Err(EnvError::NotStarted),
            Phase::Done => return Err(EnvError::EpisodeFinished),
            Phase::Running => {}
        }
        let (applied, clamped) = self.cfg.bounds.clamp(&action);
        let w = self.weather[self.day];
        let out = step_dynamics(&self.crop, &self.soil, &w, &applied, &self.model, &self.cfg.soil);
        let r = reward(out.yld_delta, &applied, &self.cfg.reward);

        self.crop = out.crop;
        self.soil = out.soil;
        self.log.records.push(LogRecord {
            day: self.day,
            weather: w,
            crop: out.crop,
            soil: out.soil,
            action: applied,
            reward: r,
            yld: out.crop.yld,
        });
        self.day += 1;
        let done = self.day >= self.cfg.duration;
        if done {
            self.phase = Phase::Done;
        }
        self.info = self.snapshot_info(out.runoff, out.overflow, applied, clamped);

        if done {
            if let Some(path) = &self.cfg.log_path {
                self.log.save(path)?;
            }
        }
        Ok(StepOutcome {
            obs: self.current_observation(),
            reward: r,
            done,
            info: self.info,
        })
    }

    /// Diagnostics of the latest reset or step.
    pub fn info(&self) -> &StepInfo<T> {
        &self.info
    }

    pub fn day(&self) -> usize {
        self.day
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    pub fn crop_state(&self) -> &CropState<T> {
        &self.crop
    }

    pub fn soil_state(&self) -> &SoilState<T> {
        &self.soil
    }

    /// Weather of the current season after any perturbation.
    pub fn season_weather(&self) -> &[WeatherDay<T>] {
        &self.weather
    }

    pub fn log(&self) -> &EpisodeLog<T> {
        &self.log
    }
}
