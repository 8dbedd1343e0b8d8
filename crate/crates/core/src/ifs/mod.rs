//! Iterated function systems with state-dependent probabilities.

mod affine;
pub mod coupling;
pub mod probability;
mod system;
mod trajectory;

pub use affine::{spectral_radius, verify_schur, AffineMap, Norm, SchurCheck, State, DEFAULT_SCHUR_MARGIN};
pub use coupling::coupling_distance;
pub use probability::{
    logistic, sample_index, ConstantProbabilities, FnProbabilities, LogisticOnOff, ProbabilityFn, ProbabilityVector,
    TwoStateSwitching, DEFAULT_FLOOR,
};
pub use system::{fixed_point, on_off_maps, SampleGrid, StateDependentIfs};
pub use trajectory::{simulate_trajectory, Trajectory};
