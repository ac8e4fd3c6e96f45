//! Radial maxima versus translated bumps for the truncated functional at large α.

mod bump;
mod fit;
mod search;
mod sweep;

pub use bump::{
    translated_bump_paper_bound, translated_bump_value, translated_energy, BumpKind, BumpSpec,
};
pub use fit::{loglog_fit, LogLogFit};
pub use search::{radial_max_search, RadialSearchResult, SearchOptions};
pub use sweep::{crossover_detect, AlphaStar, FittedSlopes, SweepReport, SweepRow, FIT_WINDOW, KAPPA};
