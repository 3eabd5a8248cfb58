//! Exact computational toolkit for one-dimensional star discrepancy lower
//! bounds: point sequence generators, exact discrepancy and per-prefix
//! profiles, piecewise-linear discrepancy envelopes, the (strongly)
//! admissible variational problem with its closed-form minimizers, and the
//! resulting constant `c* ≥ 0.0646363`.

pub mod bounds;
pub mod discrepancy;
pub mod envelope;
pub mod error;
pub mod points;
pub mod variational;

pub use bounds::{
    bound_report, c_of_a, optimize_constant, p_chain_check, range_split_inequality, verify_bound,
    verify_bound_with, BoundReport, BoundVerification, PChainRow, References,
};
pub use discrepancy::{
    count_below, disc_function, max_ratio, profile, star_discrepancy, DiscrepancyProfile,
    ProfileEntry, Schedule,
};
pub use envelope::{
    envelope_difference, envelope_f, envelope_g, jump_census, p_integral, window_envelope,
    EnvelopeFunction, EnvelopeMode, JumpCensus, Segment, WindowScheme,
};
pub use error::{Error, Result};
pub use points::{generate, kronecker_point, radical_inverse, GeneratorSpec, PointSet};
pub use variational::{
    assemble_extremal, build_qprime_admissible, build_qprime_strong, build_qsecond,
    check_admissible, check_condition_a, chi_lower_bound, optimal_delta, optimal_slope_selector,
    oracle_minimize, q1_integral, q2_integral, real_count_total, strong_q_integral,
    AdmissibilityReport, AdmissibleParams, AssembledExtremal, Check, ExtremalMode, OracleFamily,
    OracleOutcome, PLJumpFunction, QKind, SegmentSpec, SlopeSelector,
};
