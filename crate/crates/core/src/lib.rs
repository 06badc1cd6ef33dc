//! Exact exponent bookkeeping for induction-on-scales Fourier restriction
//! estimates on the paraboloid.
//!
//! All exponents are exact rationals. Floating point appears only in the
//! asymptotic remainder checks, and there only through fixed-point
//! evaluations of `ln n` and `sqrt n` with explicit error bounds.

pub mod admissibility;
pub mod asymptotics;
pub mod catalog;
pub mod error;
pub mod optimizer;
pub mod rational;
pub mod scheme;

pub use admissibility::{
    cellular_margin, check, check_scheme, tangential_check, transverse_margin,
    transverse_margin_lower_bound, AdmissibilityReport, StepMargins, TangentialCheck,
};
pub use asymptotics::{
    expansion_remainder, remainder_against, sample_points, sweep_against, sweep_report, DecadeMax,
    Decimal, Expansion, RemainderReport, RemainderSample, Target,
};
pub use catalog::{bilinear_point, p_cmw, p_ness, weighted_point, ExponentPoint, NecessaryExponent};
pub use error::{Error, Result};
pub use optimizer::{
    admissible_alpha_interval, general_scheme, grid_search, perturbed_scheme, AlphaInterval,
    GridSearch, PerturbedScheme,
};
pub use rational::{arith, harmonic_sum, rational, ArithOp, Rational};
pub use scheme::{
    affine_gammas, base_step, build_scheme, closing_step, find_m, interpolation_alpha, next_step,
    scan_stopping_indices, AffineGamma, Closing, Scheme, SchemeStep, Segment, StepSource,
    StoppingScan,
};
