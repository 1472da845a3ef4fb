//! Lifting curves and surfaces through invariant maps of finite group
//! representations.
//!
//! Given the invariants `sigma = (sigma_1, ..., sigma_n)` of a permutation or
//! signed-permutation representation and a parameter map `f` with values in
//! the invariant image, this crate computes chart systems (power
//! substitutions, point blow-ups, recentrings) on which `f` admits exact
//! local lifts `fbar` with `sigma(fbar) = f` pulled back to the chart, and
//! glues the charts into piecewise lifts with numerical diagnostics
//! (boundedness, gradient integrability, jump sets, Lipschitz estimates).
//!
//! All symbolic computation runs over exact Gaussian rationals or certified
//! complex balls; every sign or zero decision is either exact or certified,
//! and ambiguous decisions fail with a precision error instead of guessing.

pub mod error;
pub mod scalar;
pub mod series;
pub mod textio;
pub mod multipoly;
pub mod roots;
pub mod series_poly;
pub mod invariants;
pub mod desing;
pub mod jobs;
pub mod lifter;
pub mod weak;

pub use error::Error;
pub use scalar::Scalar;
pub use series::Series;
pub use invariants::{Family, InvariantSystem, Membership};
pub use desing::{ChartMap, ResolutionTree};
pub use lifter::{
    check_real_orders, lift_curve, lift_multi, verify_chart, LiftChart, LiftOptions, LiftProblem,
};
pub use jobs::{run_corpus, run_job, JobKind, JobSpec};
pub use weak::{
    assemble_weak_lift, glue_blow_down, glue_power_substitution, patch_charts, sample_rows,
    section_map, verify_weak, VerificationReport, VerifyOptions, WeakLift,
};
