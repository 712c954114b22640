//! Daily crop and soil state transition.

pub mod growth;
pub mod params;
pub mod soil;
mod step;
pub mod stress;

pub use growth::*;
pub use params::{CropModel, CropParams, LaiCurve, ParamError, SoilParams};
pub use soil::*;
pub use step::{step_dynamics, CropState, DayOutcome, SoilState};
pub use stress::*;
