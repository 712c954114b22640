//! Fixed-capacity ring buffer of transitions with uniform sampling.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::Real;

/// A sampled minibatch, one row per transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub state: Array2<T>,
    pub action: Array2<T>,
    pub reward: Array1<T>,
    pub next_state: Array2<T>,
    /// 1 for terminal transitions, 0 otherwise.
    pub done: Array1<T>,
}

impl<T: Real> Batch<T> {
    pub fn len(&self) -> usize {
        self.reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    state: Vec<T>,
    action: Vec<T>,
    reward: Vec<T>,
    next_state: Vec<T>,
    done: Vec<T>,
    cursor: usize,
    len: usize,
}

impl<T: Real> ReplayBuffer<T> {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            state_dim,
            action_dim,
            state: vec![T::zero(); capacity * state_dim],
            action: vec![T::zero(); capacity * action_dim],
            reward: vec![T::zero(); capacity],
            next_state: vec![T::zero(); capacity * state_dim],
            done: vec![T::zero(); capacity],
            cursor: 0,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stores a transition, overwriting the oldest once full.
    pub fn push(&mut self, state: &[T], action: &[T], reward: T, next_state: &[T], done: bool) {
        assert_eq!(state.len(), self.state_dim);
        assert_eq!(next_state.len(), self.state_dim);
        assert_eq!(action.len(), self.action_dim);
        let i = self.cursor;
        let (s, a) = (self.state_dim, self.action_dim);
        self.state[i * s..(i + 1) * s].copy_from_slice(state);
        self.next_state[i * s..(i + 1) * s].copy_from_slice(next_state);
        self.action[i * a..(i + 1) * a].copy_from_slice(action);
        self.reward[i] = reward;
        self.done[i] = if done { T::one() } else { T::zero() };
        self.cursor = (self.cursor + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Uniform indices into the stored transitions, with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        assert!(self.len > 0, "cannot sample from an empty buffer");
        (0..n).map(|_| rng.random_range(0..self.len)).collect()
    }

    pub fn gather(&self, idx: &[usize]) -> Batch<T> {
        let (s, a) = (self.state_dim, self.action_dim);
        let rows = |src: &[T], width: usize| {
            Array2::from_shape_fn((idx.len(), width), |(r, c)| src[idx[r] * width + c])
        };
        Batch {
            state: rows(&self.state, s),
            action: rows(&self.action, a),
            reward: idx.iter().map(|&i| self.reward[i]).collect(),
            next_state: rows(&self.next_state, s),
            done: idx.iter().map(|&i| self.done[i]).collect(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Batch<T> {
        let idx = self.sample_indices(n, rng);
        self.gather(&idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use agrosim_core::rng::seeded;

    #[test]
    fn ring_overwrites_oldest() {
        let mut buf = ReplayBuffer::<f64>::new(3, 1, 1);
        for k in 0..5 {
            let x = k as f64;
            buf.push(&[x], &[x], x, &[x + 1.0], k == 4);
        }
        assert_eq!(buf.len(), 3);
        let b = buf.gather(&[0, 1, 2]);
        assert_eq!(b.reward.to_vec(), vec![3.0, 4.0, 2.0]);
        assert_eq!(b.done.to_vec(), vec![0.0, 1.0, 0.0]);
        assert_eq!(b.next_state.column(0).to_vec(), vec![4.0, 5.0, 3.0]);
    }

    #[test]
    fn sampling_is_uniform_over_stored_items() {
        let n = 37;
        let mut buf = ReplayBuffer::<f64>::new(1000, 1, 1);
        for k in 0..n {
            buf.push(&[k as f64], &[0.0], k as f64, &[0.0], false);
        }
        let mut rng = seeded(11);
        let draws = 100_000;
        let mut counts = vec![0usize; n];
        for i in buf.sample_indices(draws, &mut rng) {
            counts[i] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0));
        let expected = draws as f64 / n as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 36 degrees of freedom: the 99.9% quantile is about 67.99.
        assert!(chi2 < 67.99, "chi-square {chi2}");
    }
}
