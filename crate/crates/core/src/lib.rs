//! Weighted exponential functionals of the bi-Laplacian on the unit ball of R⁴.
//!
//! The crate covers radial profiles and their energies, the logarithmic change
//! of variables, Moser-type extremal sequences with threshold scans, and the
//! radial-versus-translated-bump comparison for the truncated functional.

pub mod error;
pub mod log_transform;
pub mod moser;
pub mod quadrature;
pub mod radial;
pub mod symmetry;

pub use error::{Error, Result};
pub use log_transform::{
    admissible_family, estimates_check, log_energy, marshall_moser_integral,
    sqrt_transform_energy, to_log_profile, weighted_exp_integral_log, Admissible,
    EstimatesReport, LogProfile,
};
pub use moser::{
    blowup_scan, formula_diagnostics, moser_dirichlet, moser_navier, moser_profile,
    navier_norm_sq_exact, BlowupRow, MoserParams, ThresholdExperiment, Verdict,
};
pub use quadrature::{gamma_fn, integrate, integrate_halfline, IntegralResult, QuadratureSpec};
pub use radial::{
    BoundaryKind, FunctionalParams, Jet, RadialProfile, ADAMS_32PI2, BALL_VOLUME, OMEGA3,
};
pub use symmetry::{
    crossover_detect, radial_max_search, translated_bump_paper_bound, translated_bump_value,
    AlphaStar, BumpKind, BumpSpec, SearchOptions, SweepReport, SweepRow,
};
