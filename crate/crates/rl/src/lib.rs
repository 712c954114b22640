//! DDPG and TD3 learners for the crop environment, built on small
//! feedforward networks with analytic gradients.

pub mod adam;
pub mod agent;
pub mod gradcheck;
pub mod io;
pub mod mlp;
pub mod replay;
pub mod train;

use agrosim_core::Scalar;

/// Scalar usable inside networks: a simulation scalar that ndarray can
/// multiply.
pub trait Real: Scalar + ndarray::LinalgScalar + ndarray::ScalarOperand {}

impl<T: Scalar + ndarray::LinalgScalar + ndarray::ScalarOperand> Real for T {}

pub use adam::Adam;
pub use agent::{
    ActorCritic, ActorPolicy, Algo, History, ObsScales, StateEncoder, TrainConfig, UpdateStats, ACTION_DIM,
};
pub use io::{load_mlp, read_mlp, save_mlp, write_mlp, NetIoError};
pub use mlp::{Cache, Gradients, Layer, Mlp, OutputActivation, ShapeError};
pub use replay::{Batch, ReplayBuffer};
pub use train::{
    evaluate, mean_std, run_baseline, save_curve, train, CurvePoint, EvalResult, TrainOutcome,
};
