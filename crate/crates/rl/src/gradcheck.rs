//! Analytic backpropagation against central finite differences.

use agrosim_core::rng::{seeded, SimRng};
use ndarray::Array2;
use rand::Rng;

use crate::mlp::{Mlp, OutputActivation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Parameter and input components compared.
    pub checked: usize,
    /// Components whose perturbation crossed a rectifier kink.
    pub skipped: usize,
    pub worst: f64,
    /// Components with relative error above the tolerance.
    pub failures: usize,
}

fn loss(net: &Mlp<f64>, x: &Array2<f64>, upstream: &Array2<f64>) -> f64 {
    (net.forward(x.view()).unwrap() * upstream).sum()
}

/// Sign pattern of every hidden pre-activation. Finite differences are only
/// meaningful when a perturbation leaves it unchanged.
fn kinks(net: &Mlp<f64>, x: &Array2<f64>) -> Vec<bool> {
    let cache = net.forward_cached(x.view()).unwrap();
    let hidden = cache.pre.len() - 1;
    cache.pre[..hidden]
        .iter()
        .flat_map(|z| z.iter().map(|v| *v > 0.0).collect::<Vec<_>>())
        .collect()
}

/// `|a - n| / max(|a|, |n|, 1e-7)`.
pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-7)
}

fn random_case(rng: &mut SimRng) -> (Mlp<f64>, Array2<f64>, Array2<f64>) {
    let inputs = rng.random_range(1..7);
    let h1 = rng.random_range(1..9);
    let h2 = rng.random_range(1..9);
    let outputs = rng.random_range(1..4);
    let batch = rng.random_range(1..5);
    let act = if rng.random::<bool>() {
        OutputActivation::Tanh
    } else {
        OutputActivation::Identity
    };
    let net = Mlp::new(&[inputs, h1, h2, outputs], act, rng);
    let x = Array2::from_shape_fn((batch, inputs), |_| rng.random_range(-2.0..2.0));
    let up = Array2::from_shape_fn((batch, outputs), |_| rng.random_range(-1.0..1.0));
    (net, x, up)
}

/// Compares parameter and input gradients of `cases` random two-hidden-layer
/// networks with central differences of step `h`. The scalar loss is
/// `sum(forward(x) * upstream)` for a random upstream matrix.
pub fn gradient_check(cases: usize, seed: u64, h: f64, tol: f64) -> GradCheckReport {
    let mut rng = seeded(seed);
    let mut report = GradCheckReport { checked: 0, skipped: 0, worst: 0.0, failures: 0 };
    let record = |report: &mut GradCheckReport, a: f64, numeric: f64| {
        let e = relative_error(a, numeric);
        report.worst = report.worst.max(e);
        report.checked += 1;
        if !(e <= tol) {
            report.failures += 1;
        }
    };
    for _ in 0..cases {
        let (net, x, up) = random_case(&mut rng);
        let cache = net.forward_cached(x.view()).unwrap();
        let (grads, gx) = net.backward(&cache, up.view(), true).unwrap();
        let analytic = grads.unwrap().flat();
        let base = net.flat_params();
        let pattern = kinks(&net, &x);

        let mut probe = net.clone();
        for (i, &a) in analytic.iter().enumerate() {
            let mut p = base.clone();
            p[i] = base[i] + h;
            probe.set_flat_params(&p);
            let plus = loss(&probe, &x, &up);
            let kp = kinks(&probe, &x);
            p[i] = base[i] - h;
            probe.set_flat_params(&p);
            let minus = loss(&probe, &x, &up);
            let km = kinks(&probe, &x);
            if kp != pattern || km != pattern {
                report.skipped += 1;
                continue;
            }
            record(&mut report, a, (plus - minus) / (2.0 * h));
        }

        for r in 0..x.nrows() {
            for c in 0..x.ncols() {
                let mut xp = x.clone();
                xp[[r, c]] += h;
                let mut xm = x.clone();
                xm[[r, c]] -= h;
                if kinks(&net, &xp) != pattern || kinks(&net, &xm) != pattern {
                    report.skipped += 1;
                    continue;
                }
                let numeric = (loss(&net, &xp, &up) - loss(&net, &xm, &up)) / (2.0 * h);
                record(&mut report, gx[[r, c]], numeric);
            }
        }
    }
    report
}
