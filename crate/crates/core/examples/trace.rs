//! Prints a weekly trace of one deterministic season under a baseline policy.

use agrosim_core::agents::AgentParams;
use agrosim_core::{run_episode, Config, CropEnv, Policy, ReactivePolicy, Section, StandardPolicy};

fn main() {
    let mut cfg = Config::default().deterministic();
    let mut agents = AgentParams::<f64>::default();
    let mut which = "standard".to_string();
    for arg in std::env::args().skip(1) {
        if let Some((k, v)) = arg.split_once('=') {
            if !cfg.set(k, v).unwrap() && !agents.set(k, v).unwrap() {
                panic!("unknown key {k}");
            }
        } else {
            which = arg;
        }
    }
    let mut env = CropEnv::new(cfg).unwrap();
    let mut policy: Box<dyn Policy<f64>> = match which.as_str() {
        "reactive" => Box::new(ReactivePolicy { params: agents.reactive }),
        _ => Box::new(StandardPolicy { params: agents.standard }),
    };
    let summary = run_episode(&mut env, policy.as_mut(), 0).unwrap();
    println!("{summary:?}");
    println!("day   t_mean precip  ref_et   e_a    sw     lai   n_pool  n_strs w_strs t_strs  biomass   yld");
    let recs = &env.log().records;
    for r in recs.iter().step_by(7) {
        println!(
            "{:>3} {:>7.1} {:>6.1} {:>7.2} {:>5.2} {:>6.1} {:>6.2} {:>7.1} {:>6.2} {:>6.2} {:>6.2} {:>8.0} {:>6.0}",
            r.day, r.weather.t_mean, r.weather.precip, r.weather.ref_et, r.crop.e_a, r.soil.sw, r.crop.lai,
            r.soil.n_pool, r.crop.n_strs, r.crop.w_strs, r.crop.t_strs, r.crop.biomass, r.yld
        );
    }
    let n = recs.len() as f64;
    let mean = |f: &dyn Fn(&agrosim_core::log::LogRecord<f64>) -> f64| recs.iter().map(f).sum::<f64>() / n;
    println!(
        "sum precip {:.0} sum ref_et {:.0} sum e_a {:.0} mean w_strs {:.2} mean n_strs {:.2} mean t_strs {:.2}",
        mean(&|r| r.weather.precip) * n, mean(&|r| r.weather.ref_et) * n, mean(&|r| r.crop.e_a) * n,
        mean(&|r| r.crop.w_strs), mean(&|r| r.crop.n_strs), mean(&|r| r.crop.t_strs)
    );
}
