use agrosim_core::weather::{generate_season, save_weather_csv};
use agrosim_core::*;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn det_env() -> CropEnv {
    CropEnv::new(Config::default().deterministic()).unwrap()
}

#[test]
fn horizon_is_exactly_duration() {
    let mut env = det_env();
    env.reset();
    for day in 1..=120 {
        let out = env.step(Action::new(1.0, 1.0)).unwrap();
        assert_eq!(out.done, day == 120, "day {day}");
        assert_eq!(out.info.day, day);
    }
    assert!(env.is_done());
    assert!(matches!(env.step(Action::zero()), Err(EnvError::EpisodeFinished)));
    assert_eq!(env.log().records.len(), 120);
}

#[test]
fn step_before_reset_is_an_error() {
    let mut env = det_env();
    assert!(matches!(env.step(Action::zero()), Err(EnvError::NotStarted)));
}

#[test]
fn reset_starts_from_initial_state() {
    let mut env = det_env();
    let obs = env.reset_with_seed(9);
    assert_eq!(obs.0[Observation::<f64>::LAI], 0.0);
    assert_eq!(obs.get("lai"), Some(0.0));
    for name in ["n_strs", "t_strs", "w_strs"] {
        let v = obs.get(name).unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    let sp = SoilParams::<f64>::default();
    assert_eq!(env.soil_state().sw, sp.sw_init);
    assert_eq!(env.soil_state().n_pool, sp.n_init);
    assert_eq!(env.crop_state().biomass, 0.0);
    assert_eq!(env.day(), 0);
}

fn trajectory(mode: Mode, seed: u64) -> Vec<(Observation<f64>, f64)> {
    let mut cfg = Config::default();
    cfg.mode = mode;
    let mut env = CropEnv::new(cfg).unwrap();
    env.reset_with_seed(seed);
    (0..120)
        .map(|d| {
            let a = Action::new((d % 5) as f64 * 3.0, (d % 7) as f64 * 2.0);
            let out = env.step(a).unwrap();
            (out.obs, out.reward)
        })
        .collect()
}

#[test]
fn trajectories_are_reproducible() {
    let to_bits = |t: Vec<(Observation<f64>, f64)>| -> Vec<u64> {
        t.iter()
            .flat_map(|(o, r)| o.0.iter().chain(std::iter::once(r)).map(|x| x.to_bits()).collect::<Vec<_>>())
            .collect()
    };
    for mode in [Mode::Deterministic, Mode::Stochastic] {
        assert_eq!(to_bits(trajectory(mode, 4)), to_bits(trajectory(mode, 4)));
    }
    // Deterministic mode ignores the seed; stochastic mode does not.
    assert_eq!(to_bits(trajectory(Mode::Deterministic, 1)), to_bits(trajectory(Mode::Deterministic, 2)));
    assert_ne!(to_bits(trajectory(Mode::Stochastic, 1)), to_bits(trajectory(Mode::Stochastic, 2)));
}

#[test]
fn reward_examples() {
    let rp = RewardParams::<f64>::default();
    assert_abs_diff_eq!(reward(0.0, &Action::new(1.0, 1.0), &rp), -2.59, epsilon = 1e-12);
    assert_abs_diff_eq!(reward(100.0, &Action::new(10.0, 5.0), &rp), 74.9, epsilon = 1e-12);
    assert_eq!(reward(42.0, &Action::zero(), &rp), 42.0);
}

#[test]
fn zero_action_on_a_day_without_yield_gain_pays_nothing() {
    let mut env = det_env();
    env.reset();
    let out = env.step(Action::zero()).unwrap();
    assert_eq!(out.info.yld, 0.0);
    assert_eq!(out.reward, 0.0);
}

#[test]
fn actions_are_clamped_and_flagged() {
    let mut env = det_env();
    env.reset();
    let out = env.step(Action::new(500.0, -3.0)).unwrap();
    assert_eq!(out.info.applied, Action::new(60.0, 0.0));
    assert!(out.info.clamped.fert && out.info.clamped.irrig);
    let out = env.step(Action::new(f64::NAN, 10.0)).unwrap();
    assert_eq!(out.info.applied, Action::new(0.0, 10.0));
    assert!(out.info.clamped.fert && !out.info.clamped.irrig);
}

#[test]
fn weather_file_drives_the_season() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("season.csv");
    let days = generate_season(120, &ClimateProfile::default(), 77);
    save_weather_csv(&path, &days).unwrap();
    let mut cfg = Config::default().deterministic();
    cfg.weather_file = Some(path.clone());
    let mut env = CropEnv::new(cfg).unwrap();
    env.reset();
    assert_eq!(env.season_weather().len(), 120);
    for (a, b) in env.season_weather().iter().zip(&days) {
        assert_abs_diff_eq!(a.t_mean, b.t_mean, epsilon = 1e-9);
        assert_abs_diff_eq!(a.precip, b.precip, epsilon = 1e-9);
    }

    save_weather_csv(&path, &days[..90]).unwrap();
    let mut cfg = Config::default();
    cfg.weather_file = Some(path);
    assert!(matches!(CropEnv::new(cfg), Err(EnvError::WeatherTooShort { have: 90, need: 120 })));
}

#[test]
fn invalid_configs_name_the_field() {
    let mut cfg = Config::default();
    cfg.duration = 0;
    match CropEnv::new(cfg) {
        Err(EnvError::Config { field, .. }) => assert_eq!(field, "episode.duration"),
        other => panic!("{other:?}"),
    }
    let mut cfg = Config::default();
    cfg.reward.alpha = -1.0;
    assert!(matches!(CropEnv::new(cfg), Err(EnvError::Config { field: "reward.alpha", .. })));
    let mut cfg = Config::default();
    cfg.soil.sw_init = 500.0;
    assert!(CropEnv::new(cfg).is_err());
}

#[test]
fn observation_schema_traces_state_fields() {
    let mut env = det_env();
    env.reset();
    for _ in 0..60 {
        env.step(Action::new(3.0, 4.0)).unwrap();
    }
    let obs = env.step(Action::new(3.0, 4.0)).unwrap().obs;
    let c = *env.crop_state();
    let s = *env.soil_state();
    let w = env.season_weather()[env.day()];
    let expected = [
        ("t_mean", w.t_mean),
        ("precip", w.precip),
        ("ref_et", w.ref_et),
        ("solar", w.solar),
        ("vapor", w.vapor),
        ("e_a", c.e_a),
        ("wb_cum", s.wb_cum),
        ("rcn", s.rcn),
        ("lai", c.lai),
        ("n_up", s.n_up),
        ("dn", s.dn),
        ("n_strs", c.n_strs),
        ("t_strs", c.t_strs),
        ("w_strs", c.w_strs),
    ];
    assert_eq!(OBS_NAMES.len(), OBS_DIM);
    for (i, (name, value)) in expected.iter().enumerate() {
        assert_eq!(OBS_NAMES[i], *name);
        assert_eq!(obs.0[i], *value, "{name}");
    }
}

fn season_return(seed: u64, policy: &mut dyn Policy<f64>, mode: Mode) -> (EpisodeSummary<f64>, f64) {
    let mut cfg = Config::default();
    cfg.mode = mode;
    let rp = cfg.reward;
    let mut env = CropEnv::new(cfg).unwrap();
    let summary = run_episode(&mut env, policy, seed).unwrap();
    let telescoped = summary.final_yield - rp.alpha * summary.total_fert - rp.beta * summary.total_irrig;
    (summary, telescoped)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn episode_return_telescopes(seed in any::<u64>(), stochastic in any::<bool>()) {
        let mode = if stochastic { Mode::Stochastic } else { Mode::Deterministic };
        let mut policy = RandomPolicy::new(seed, ActionBounds::default());
        let (s, telescoped) = season_return(seed, &mut policy, mode);
        prop_assert!((s.total_reward - telescoped).abs() <= 1e-6);
        prop_assert_eq!(s.steps, 120);
    }

    #[test]
    fn observations_stay_finite(seed in any::<u64>(), fert in 0.0..80.0f64, irrig in 0.0..80.0f64) {
        let mut env = CropEnv::new(Config::default()).unwrap();
        let obs = env.reset_with_seed(seed);
        prop_assert!(obs.0.iter().all(|x| x.is_finite()));
        loop {
            let out = env.step(Action::new(fert, irrig)).unwrap();
            prop_assert!(out.obs.0.iter().all(|x| x.is_finite()));
            prop_assert!(out.reward.is_finite());
            if out.done { break; }
        }
    }
}

#[test]
fn standard_agent_earns_a_positive_return() {
    let (s, telescoped) = season_return(0, &mut StandardPolicy::default(), Mode::Deterministic);
    assert!(s.total_reward > 0.0);
    assert!(!s.any_clamped);
    assert_abs_diff_eq!(s.total_reward, telescoped, epsilon = 1e-6);
    // Regression anchor for the default deterministic season.
    assert_abs_diff_eq!(s.total_reward, 4314.8, epsilon = 0.1);
}

#[test]
fn single_precision_environment_runs() {
    let mut env = CropEnvF32::new(EpisodeConfig::<f32>::default().deterministic()).unwrap();
    let s = run_episode(&mut env, &mut StandardPolicy::<f32>::default(), 0).unwrap();
    let (d, _) = season_return(0, &mut StandardPolicy::default(), Mode::Deterministic);
    assert!((s.total_reward as f64 - d.total_reward).abs() / d.total_reward < 1e-3);
}
