//! Boolean combinations of convex hulls and balls, their intrinsic volumes,
//! and the associated Boolean-algebra machinery.

pub mod algebra;
pub mod balls;
pub mod epsilon;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod kp;
pub mod sampling;
pub mod volumes;

pub use algebra::{eval_to_atoms, AtomSet, CoeffTable, IndexSet, Transform, MAX_VARS};
pub use balls::{
    asymptotic_fit, hull_union_gap, mc_volume, member, parallel_body_volume, two_disk_oracle,
    AsymptoticReport,
};
pub use epsilon::{epsilon_signs, SignMatrix};
pub use error::{Error, Result};
pub use expr::{parse, BoolExpr, ParseError};
pub use geometry::{kappa, PointConfig};
pub use kp::{
    monotonicity_experiment, random_contraction, ContractionPair, ExperimentOptions,
    MonotonicityReport,
};
pub use sampling::{MCEstimate, Substream};
pub use volumes::{
    n_value, nu_mean, v1_minmax, v1_paired, v_boolean_cones, v_boolean_def, EstimatorOptions,
    IntrinsicVolumeReport, Method,
};
