//! Fully connected networks with rectified hidden layers and hand-written
//! backpropagation.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::Real;

/// Squashing applied to the last layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Identity,
    Tanh,
}

/// One affine layer `y = x·w + b` with `w` of shape `(inputs, outputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub w: Array2<T>,
    pub b: Array1<T>,
}

impl<T: Real> Layer<T> {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            w: Array2::zeros((inputs, outputs)),
            b: Array1::zeros(outputs),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub layers: Vec<Layer<T>>,
    pub output: OutputActivation,
}

/// Activations recorded by [`Mlp::forward_cached`]. `inputs[k]` feeds layer
/// `k`; `pre[k]` is that layer's affine output before its nonlinearity.
#[derive(Debug, Clone)]
pub struct Cache<T> {
    pub inputs: Vec<Array2<T>>,
    pub pre: Vec<Array2<T>>,
    pub output: Array2<T>,
}

/// Parameter gradients, laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<Layer<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShapeError {
    #[error("network expects {expected} input columns, got {got}")]
    Input { expected: usize, got: usize },
    #[error("upstream gradient has shape {got:?}, expected {expected:?}")]
    Upstream { expected: (usize, usize), got: (usize, usize) },
}

fn relu<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

impl<T: Real> Mlp<T> {
    /// Uniform initialisation in `±1/sqrt(fan_in)` for weights and biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output: OutputActivation, rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes, output);
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.w.nrows() as f64).sqrt();
            layer.w.mapv_inplace(|_| T::lit(rng.random_range(-bound..bound)));
            layer.b.mapv_inplace(|_| T::lit(rng.random_range(-bound..bound)));
        }
        net
    }

    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Self {
        assert!(sizes.len() >= 2, "a network needs input and output sizes");
        Self {
            layers: sizes.windows(2).map(|p| Layer::zeros(p[0], p[1])).collect(),
            output,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].w.ncols()
    }

    /// Layer widths, input first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.w.ncols()));
        s
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    fn check_input(&self, x: &ArrayView2<T>) -> Result<(), ShapeError> {
        if x.ncols() != self.input_dim() {
            return Err(ShapeError::Input {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    fn activate(&self, k: usize, z: &Array2<T>) -> Array2<T> {
        if k + 1 < self.layers.len() {
            z.mapv(relu)
        } else {
            match self.output {
                OutputActivation::Identity => z.clone(),
                OutputActivation::Tanh => z.mapv(T::tanh),
            }
        }
    }

    /// Batched forward pass, one row per sample.
    pub fn forward(&self, x: ArrayView2<T>) -> Result<Array2<T>, ShapeError> {
        self.check_input(&x)?;
        let mut h = x.to_owned();
        for (k, layer) in self.layers.iter().enumerate() {
            let z = h.dot(&layer.w) + &layer.b;
            h = self.activate(k, &z);
        }
        Ok(h)
    }

    pub fn forward_cached(&self, x: ArrayView2<T>) -> Result<Cache<T>, ShapeError> {
        self.check_input(&x)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for (k, layer) in self.layers.iter().enumerate() {
            let z = h.dot(&layer.w) + &layer.b;
            let next = self.activate(k, &z);
            inputs.push(h);
            pre.push(z);
            h = next;
        }
        Ok(Cache { inputs, pre, output: h })
    }

    /// Backpropagates `upstream = dL/d(output)` through a cached pass.
    /// Returns parameter gradients when `with_params` is set and always the
    /// gradient with respect to the network input.
    pub fn backward(
        &self,
        cache: &Cache<T>,
        upstream: ArrayView2<T>,
        with_params: bool,
    ) -> Result<(Option<Gradients<T>>, Array2<T>), ShapeError> {
        if upstream.dim() != cache.output.dim() {
            return Err(ShapeError::Upstream {
                expected: cache.output.dim(),
                got: upstream.dim(),
            });
        }
        let last = self.layers.len() - 1;
        let mut delta = match self.output {
            OutputActivation::Identity => upstream.to_owned(),
            OutputActivation::Tanh => {
                let mut d = upstream.to_owned();
                Zip::from(&mut d)
                    .and(&cache.output)
                    .for_each(|d, &y| *d = *d * (T::one() - y * y));
                d
            }
        };
        let mut grads: Vec<Layer<T>> = Vec::new();
        for k in (0..=last).rev() {
            if k < last {
                Zip::from(&mut delta)
                    .and(&cache.pre[k])
                    .for_each(|d, &z| {
                        if z <= T::zero() {
                            *d = T::zero();
                        }
                    });
            }
            if with_params {
                grads.push(Layer {
                    w: cache.inputs[k].t().dot(&delta),
                    b: delta.sum_axis(Axis(0)),
                });
            }
            delta = delta.dot(&self.layers[k].w.t());
        }
        grads.reverse();
        Ok((with_params.then_some(Gradients { layers: grads }), delta))
    }

    /// `self ← tau·src + (1 − tau)·self`, parameter by parameter.
    pub fn soft_update_from(&mut self, src: &Mlp<T>, tau: T) {
        let keep = T::one() - tau;
        for (dst, s) in self.layers.iter_mut().zip(&src.layers) {
            Zip::from(&mut dst.w).and(&s.w).for_each(|d, &x| *d = tau * x + keep * *d);
            Zip::from(&mut dst.b).and(&s.b).for_each(|d, &x| *d = tau * x + keep * *d);
        }
    }

    /// All parameters in layer order, weights (row-major) before biases.
    pub fn flat_params(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend(l.w.iter().copied());
            out.extend(l.b.iter().copied());
        }
        out
    }

    /// Inverse of [`Mlp::flat_params`]. Panics on a length mismatch.
    pub fn set_flat_params(&mut self, values: &[T]) {
        assert_eq!(values.len(), self.num_params(), "parameter count mismatch");
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            l.w.iter_mut().for_each(|p| *p = it.next().unwrap());
            l.b.iter_mut().for_each(|p| *p = it.next().unwrap());
        }
    }
}

impl<T: Real> Gradients<T> {
    pub fn flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.w.iter().copied());
            out.extend(l.b.iter().copied());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use agrosim_core::rng::seeded;
    use ndarray::array;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::<f64>::zeros(&[3, 4, 2], OutputActivation::Tanh);
        let y = net.forward(array![[1.0, -2.0, 3.0]].view()).unwrap();
        assert_eq!(y, array![[0.0, 0.0]]);
    }

    #[test]
    fn identity_units_pass_positive_inputs() {
        let mut net = Mlp::<f64>::zeros(&[1, 1, 1], OutputActivation::Identity);
        net.layers[0].w[[0, 0]] = 1.0;
        net.layers[1].w[[0, 0]] = 2.0;
        net.layers[1].b[0] = 0.5;
        let y = net.forward(array![[0.7], [3.0], [-1.0]].view()).unwrap();
        assert_eq!(y, array![[1.9], [6.5], [0.5]]);
    }

    #[test]
    fn forward_is_repeatable_and_matches_cache() {
        let mut rng = seeded(5);
        let net = Mlp::<f64>::new(&[4, 8, 8, 2], OutputActivation::Tanh, &mut rng);
        let x = array![[0.1, 0.2, -0.3, 0.4], [1.0, 0.0, 0.5, -1.0]];
        let a = net.forward(x.view()).unwrap();
        assert_eq!(a, net.forward(x.view()).unwrap());
        assert_eq!(a, net.forward_cached(x.view()).unwrap().output);
        assert!(a.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn shape_errors() {
        let net = Mlp::<f64>::zeros(&[3, 2], OutputActivation::Identity);
        assert!(matches!(
            net.forward(Array2::zeros((1, 4)).view()),
            Err(ShapeError::Input { expected: 3, got: 4 })
        ));
        let cache = net.forward_cached(Array2::zeros((2, 3)).view()).unwrap();
        assert!(net.backward(&cache, Array2::zeros((1, 2)).view(), true).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients_and_linearity_holds() {
        let mut rng = seeded(8);
        let net = Mlp::<f64>::new(&[3, 6, 2], OutputActivation::Tanh, &mut rng);
        let x = array![[0.3, -0.1, 0.8], [0.5, 0.5, -0.2]];
        let cache = net.forward_cached(x.view()).unwrap();
        let (g, gx) = net.backward(&cache, Array2::zeros((2, 2)).view(), true).unwrap();
        assert!(g.unwrap().flat().iter().all(|v| *v == 0.0));
        assert!(gx.iter().all(|v| *v == 0.0));

        let u1 = array![[1.0, 0.0], [0.5, -1.0]];
        let u2 = array![[-0.3, 2.0], [0.1, 0.4]];
        let (g1, x1) = net.backward(&cache, u1.view(), true).unwrap();
        let (g2, x2) = net.backward(&cache, u2.view(), true).unwrap();
        let (g12, x12) = net.backward(&cache, (&u1 + &u2).view(), true).unwrap();
        let sum: Vec<f64> = g1.unwrap().flat().iter().zip(g2.unwrap().flat()).map(|(a, b)| a + b).collect();
        for (a, b) in sum.iter().zip(g12.unwrap().flat()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((&x1 + &x2 - &x12).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn soft_update_tracks_exactly() {
        let mut rng = seeded(2);
        let online = Mlp::<f64>::new(&[2, 3, 1], OutputActivation::Identity, &mut rng);
        let mut target = Mlp::<f64>::new(&[2, 3, 1], OutputActivation::Identity, &mut rng);
        let before = target.flat_params();
        target.soft_update_from(&online, 0.005);
        for ((t, p), o) in target.flat_params().iter().zip(&before).zip(online.flat_params()) {
            assert_eq!(*t, 0.005 * o + (1.0 - 0.005) * p);
        }
        target.soft_update_from(&online, 1.0);
        assert_eq!(target, online);
    }

    #[test]
    fn flat_params_round_trip() {
        let mut rng = seeded(3);
        let net = Mlp::<f32>::new(&[3, 5, 2], OutputActivation::Tanh, &mut rng);
        let mut other = Mlp::<f32>::zeros(&[3, 5, 2], OutputActivation::Tanh);
        other.set_flat_params(&net.flat_params());
        assert_eq!(other, net);
        assert_eq!(net.num_params(), 3 * 5 + 5 + 5 * 2 + 2);
    }
}
