//! Trains one learner and prints a coarse learning curve.
//! Usage: train_one [ddpg|td3] [seed] [key=value ...]

use std::time::Instant;

use agrosim_core::{Config, Section};
use agrosim_rl::{train, Algo, TrainConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let algo: Algo = args.next().unwrap_or_else(|| "ddpg".into()).parse().unwrap();
    let seed: u64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(0);
    let mut cfg = TrainConfig::<f32>::default();
    let mut env = Config::default();
    for kv in args {
        let (k, v) = kv.split_once('=').expect("key=value");
        if !cfg.set(k, v).unwrap() && !env.set(k, v).unwrap() {
            panic!("unknown key {k}");
        }
    }
    let t = Instant::now();
    let out = train(&env, algo, &cfg, seed).unwrap();
    let per = out.curve.len() / 20;
    for p in out.curve.iter().step_by(per.max(1)) {
        println!("{:>6} {:>9.1}", p.step, p.mean);
    }
    let best = out.best().unwrap();
    let mut env_d = agrosim_core::CropEnv::new(env.clone().deterministic()).unwrap();
    let enc = agrosim_rl::StateEncoder::<f32>::new(cfg.history_features, env.duration);
    let mut pol = agrosim_rl::ActorPolicy::new(out.agent.actor.clone(), enc, env.bounds);
    let s = agrosim_core::run_episode(&mut env_d, &mut pol, 0).unwrap();
    println!("final greedy: {s:?}");
    println!("best {:.1} at {} | last {:.1} | {:.1}s", best.mean, best.step, out.curve.last().unwrap().mean, t.elapsed().as_secs_f64());
}
