//! Adaptive moment estimation.

use ndarray::Zip;

use crate::mlp::{Gradients, Layer, Mlp};
use crate::Real;

#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    t: i32,
    m: Vec<Layer<T>>,
    v: Vec<Layer<T>>,
}

impl<T: Real> Adam<T> {
    /// Coefficients (0.9, 0.999, 1e-8); moments shaped after `net`.
    pub fn new(net: &Mlp<T>, lr: T) -> Self {
        let zeros = || {
            net.layers
                .iter()
                .map(|l| Layer {
                    w: ndarray::Array2::zeros(l.w.dim()),
                    b: ndarray::Array1::zeros(l.b.dim()),
                })
                .collect::<Vec<_>>()
        };
        Self {
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            t: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One descent step on `net` along `grads`.
    pub fn step(&mut self, net: &mut Mlp<T>, grads: &Gradients<T>) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        let step = self.lr * c2.sqrt() / c1;
        // Bias correction folded into the step size; epsilon scaled to match.
        let eps = self.eps * c2.sqrt();
        let update = |p: &mut T, g: &T, m: &mut T, v: &mut T| {
            *m = b1 * *m + (T::one() - b1) * *g;
            *v = b2 * *v + (T::one() - b2) * *g * *g;
            *p = *p - step * *m / (v.sqrt() + eps);
        };
        for (((layer, g), m), v) in net
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            Zip::from(&mut layer.w)
                .and(&g.w)
                .and(&mut m.w)
                .and(&mut v.w)
                .for_each(update);
            Zip::from(&mut layer.b)
                .and(&g.b)
                .and(&mut m.b)
                .and(&mut v.b)
                .for_each(update);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::OutputActivation;
    use ndarray::array;

    #[test]
    fn first_step_moves_each_parameter_by_lr() {
        let mut net = Mlp::<f64>::zeros(&[2, 1], OutputActivation::Identity);
        let mut opt = Adam::new(&net, 0.1);
        let g = Gradients {
            layers: vec![Layer { w: array![[2.0], [-0.5]], b: array![0.0] }],
        };
        opt.step(&mut net, &g);
        // Textbook Adam: lr * m_hat / (sqrt(v_hat) + eps) with m_hat = g, sqrt(v_hat) = |g|.
        let expect = |g: f64| -0.1 * g / (g.abs() + 1e-8);
        assert!((net.layers[0].w[[0, 0]] - expect(2.0)).abs() < 1e-15);
        assert!((net.layers[0].w[[1, 0]] - expect(-0.5)).abs() < 1e-15);
        assert_eq!(net.layers[0].b[0], 0.0);
        assert_eq!(opt.steps(), 1);
    }

    #[test]
    fn minimises_a_quadratic() {
        // f(w) = (w - 3)^2 on a single weight.
        let mut net = Mlp::<f64>::zeros(&[1, 1], OutputActivation::Identity);
        let mut opt = Adam::new(&net, 0.05);
        for _ in 0..2000 {
            let w = net.layers[0].w[[0, 0]];
            let g = Gradients {
                layers: vec![Layer { w: array![[2.0 * (w - 3.0)]], b: array![0.0] }],
            };
            opt.step(&mut net, &g);
        }
        assert!((net.layers[0].w[[0, 0]] - 3.0).abs() < 1e-3);
    }
}
