//! Empirical and finite-support measures, exact W1, and invariant-measure diagnostics.

mod invariant;
pub mod perturbation;
mod stationary;
pub mod transport;
mod types;
mod wasserstein;

pub use invariant::{default_burn_in, empirical_invariant};
pub use perturbation::{
    bootstrap_w1_se, check_perturbation_bound, estimate_contraction_factor, perturbation_bound, probability_perturbation,
    support_diameter, weighted_map_gap, BoundCheck, BoundCheckSettings, ContractionEstimate, PerturbationBoundInputs,
    StateBox,
};
pub use stationary::{closed_classes, stationary_distribution_finite, stationary_weights, STATIONARY_RESIDUAL};
pub use transport::{solve_transport, TransportPlan, DEFAULT_SUPPORT_CAP};
pub use types::{
    read_measure_csv, write_discrete_csv, write_empirical_csv, write_measure_csv, DiscreteMeasure, EmpiricalMeasure,
    SamplingMeta, WeightedPoints, MEASURE_SCHEMA,
};
pub use wasserstein::{cdf_distance, wasserstein1_1d, wasserstein1_discrete, wasserstein1_discrete_capped, wasserstein1_line};
