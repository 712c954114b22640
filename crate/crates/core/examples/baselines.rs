//! Prints season totals of the three baseline policies and an idle policy.

use agrosim_core::agents::AgentParams;
use agrosim_core::{
    run_episode, Section, Action, Config, CropEnv, Observation, Policy, RandomPolicy, ReactivePolicy,
    StandardPolicy, StepInfo,
};

struct Constant(Action<f64>);

impl Policy<f64> for Constant {
    fn act(&mut self, _: &Observation<f64>, _: &StepInfo<f64>) -> Action<f64> {
        self.0
    }
}

fn main() {
    let mut cfg = Config::default().deterministic();
    let mut agents = AgentParams::<f64>::default();
    let mut constant = Action::new(2.0, 5.0);
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').expect("key=value");
        if k == "const.fert" {
            constant.fert = v.parse().unwrap();
            continue;
        }
        if k == "const.irrig" {
            constant.irrig = v.parse().unwrap();
            continue;
        }
        if !cfg.set(k, v).unwrap() && !agents.set(k, v).unwrap() {
            panic!("unknown key {k}");
        }
    }
    let mut env = CropEnv::new(cfg.clone()).expect("valid config");
    let mut policies: Vec<(&str, Box<dyn Policy<f64>>)> = vec![
        ("idle", Box::new(Constant(Action::zero()))),
        ("constant", Box::new(Constant(constant))),
        ("random", Box::new(RandomPolicy::new(0, cfg.bounds))),
        ("standard", Box::new(StandardPolicy { params: agents.standard.clone() })),
        ("reactive", Box::new(ReactivePolicy { params: agents.reactive })),
    ];
    println!("{:<10} {:>10} {:>10} {:>8} {:>8} {:>10} {:>6}", "policy", "return", "yield", "fert", "irrig", "biomass", "fr_phu");
    for (name, policy) in policies.iter_mut() {
        let mut rets = Vec::new();
        for seed in 0..5 {
            let s = run_episode(&mut env, policy.as_mut(), seed).unwrap();
            rets.push(s);
        }
        let s = rets[0];
        let info = env.info();
        println!(
            "{:<10} {:>10.1} {:>10.1} {:>8.1} {:>8.1} {:>10.1} {:>6.3}   returns over seeds: {:?}",
            name, s.total_reward, s.final_yield, s.total_fert, s.total_irrig, info.biomass, info.fr_phu,
            rets.iter().map(|r| r.total_reward.round()).collect::<Vec<_>>()
        );
    }
}
