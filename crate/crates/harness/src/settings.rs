//! Everything a command can be configured with, loaded from one flat file.

use std::path::{Path, PathBuf};

use agrosim_core::agents::AgentParams;
use agrosim_core::config::{read_flat, ConfigError, Section};
use agrosim_core::{Config, Mode};
use agrosim_rl::TrainConfig;

/// Environment, baseline-agent and learner settings. Keys are routed by
/// prefix: `episode.*`, `weather.*`, `climate.*`, `crop.*`, `soil.*`,
/// `reward.*`, `bounds.*`, `agent.*` and `train.*`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub env: Config,
    pub agents: AgentParams<f64>,
    pub train: TrainConfig<f32>,
}

impl Section for Settings {
    fn set(&mut self, key: &str, value: &str) -> Result<bool, ConfigError> {
        Ok(self.env.set(key, value)? || self.agents.set(key, value)? || self.train.set(key, value)?)
    }

    fn pairs(&self) -> Vec<(String, String)> {
        let mut v = self.env.pairs();
        v.extend(self.agents.pairs());
        v.extend(self.train.pairs());
        v
    }
}

/// Command-line overrides applied after the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub days: Option<usize>,
    pub episodes: Option<usize>,
    pub seeds: Option<usize>,
    pub weather_file: Option<PathBuf>,
    /// Extra `key=value` pairs.
    pub set: Vec<(String, String)>,
}

impl Settings {
    /// Defaults, then the file (if any), then `overrides`. Baseline agent
    /// parameters are checked when a baseline is built, since a short season
    /// only matters to the agents that run in it.
    pub fn load(file: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        if let Some(path) = file {
            s.apply_all(&read_flat(path)?)?;
        }
        if let Some(m) = overrides.mode {
            s.env.mode = m;
        }
        if let Some(d) = overrides.days {
            s.env.duration = d;
        }
        if let Some(e) = overrides.episodes {
            s.train.episodes = e;
        }
        if let Some(n) = overrides.seeds {
            s.train.seeds = n;
        }
        if let Some(w) = &overrides.weather_file {
            s.env.weather_file = Some(w.clone());
        }
        s.apply_all(&overrides.set)?;
        s.train.validate()?;
        Ok(s)
    }
}

/// Splits `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routes_keys_and_rejects_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "episode.mode = deterministic\nagent.reactive.irrig_dose = 30\ntrain.hidden = 8\n").unwrap();
        let o = Overrides { days: Some(60), set: vec![("soil.sw_init".into(), "55".into())], ..Default::default() };
        let s = Settings::load(Some(&path), &o).unwrap();
        assert_eq!(s.env.mode, Mode::Deterministic);
        assert_eq!(s.env.duration, 60);
        assert_eq!(s.env.soil.sw_init, 55.0);
        assert_eq!(s.agents.reactive.irrig_dose, 30.0);
        assert_eq!(s.train.hidden, 8);

        std::fs::write(&path, "nonsense.key = 1\n").unwrap();
        assert_eq!(
            Settings::load(Some(&path), &Overrides::default()),
            Err(ConfigError::UnknownKey("nonsense.key".into()))
        );
        let o = Overrides { set: vec![("train.gamma".into(), "2".into())], ..Default::default() };
        assert!(matches!(Settings::load(None, &o), Err(ConfigError::Value { .. })));
    }

    #[test]
    fn pairs_round_trip() {
        let s = Settings::default();
        let mut t = Settings::default();
        t.env.duration = 3;
        t.apply_all(&s.pairs()).unwrap();
        assert_eq!(t, s);
        assert_eq!(parse_assignment("a.b = 3"), Ok(("a.b".into(), "3".into())));
        assert!(parse_assignment("nope").is_err());
    }
}
