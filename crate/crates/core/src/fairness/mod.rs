//! Predictability, fairness and ε-fairness estimates from recorded runs.

mod estimate;
mod io;

pub use estimate::{
    agrees, block_bootstrap_halfwidth, estimate_vector, fairness_gap, is_epsilon_fair, predictability_report,
    running_average, segment_fairness, trajectory_running_average, FairnessVector, GapNorm, PredictabilityReport,
    PredictabilityVector, SegmentEstimate, DEFAULT_RESAMPLES,
};
pub use io::{
    read_trajectory_csv, write_fairness_csv, write_trajectory_csv, AgentSeries, FairnessSummary, FAIRNESS_SCHEMA,
    TRAJECTORY_SCHEMA,
};
