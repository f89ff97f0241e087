//! Operator-norm brackets, tail profiles, and the separated-sequence
//! falsifier.

mod falsify;
mod norms;
mod operators;
mod profile;

pub use falsify::{
    falsify, FailingCondition, FalsifierReport, FalsifierTerm, FalsifyOperator, PARTNER_FACTOR,
    STALL_FRACTION,
};
pub use norms::{
    boyd_norm, majorant_bound, signed_norm, weighted_norm, DenseOperator, NormBracket,
    PositiveOperator, Spaces, GAIN_TOLERANCE, MAX_ITERATIONS,
};
pub use operators::{
    apply_operator, operator_norm, positive_operator, KernelOperator, MaximalOperator,
    OperatorInputs, OperatorName, SumOperator, SIGNED_STARTS,
};
pub use profile::{
    compactness_profile, default_settings, CompactnessProfile, ProfileOperator, ProfileRow,
    ProfileSetting, DEFAULT_LADDER,
};
