//! Radial functions on the unit ball of R⁴ and the functionals evaluated on them.
//!
//! A profile is stored as a closed-form jet `(u, u', u'')` in the radius,
//! never as samples; sampled representations only appear inside
//! [`rearrangement`] where a rearranged function has no closed form.

mod corpus;
mod functional;
pub mod rearrangement;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use corpus::from_q;
pub use corpus::{corpus, corpus_names, profile_by_name, random_smooth_profile, random_smooth_profiles};
pub use functional::{
    embedding_bound, laplacian_l2_sq, pointwise_log_bound_margin, series_upper_bound,
    truncated_exp, weighted_functional, weighted_lp_norm_p, MARGIN_GRID_SIZE,
};
pub use rearrangement::{
    cavalieri_pair, decreasing_rearrangement, talenti_comparison_check, talenti_radial_solve, TalentiReport,
};

/// Area of the unit sphere S³ ⊂ R⁴.
pub const OMEGA3: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Lebesgue measure of the unit ball B ⊂ R⁴ (= ω₃/4).
pub const BALL_VOLUME: f64 = OMEGA3 / 4.0;

/// The Adams constant 32π² for the bi-Laplacian in R⁴.
pub const ADAMS_32PI2: f64 = 16.0 * OMEGA3;

/// Value and first two derivatives of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        value: 0.0,
        d1: 0.0,
        d2: 0.0,
    };

    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            value: c * self.value,
            d1: c * self.d1,
            d2: c * self.d2,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

/// A function of one variable evaluable with two derivatives.
pub trait Shape: Send + Sync {
    fn jet(&self, x: f64) -> Jet;
}

impl<F> Shape for F
where
    F: Fn(f64) -> Jet + Send + Sync,
{
    fn jet(&self, x: f64) -> Jet {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// `u(1) = 0`.
    Navier,
    /// `u(1) = u'(1) = 0`.
    Dirichlet,
}

impl BoundaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryKind::Navier => "navier",
            BoundaryKind::Dirichlet => "dirichlet",
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "navier" | "n" => Ok(BoundaryKind::Navier),
            "dirichlet" | "d" => Ok(BoundaryKind::Dirichlet),
            other => Err(Error::InvalidInput(format!("unknown boundary kind '{other}'"))),
        }
    }
}

/// A radial function `u(|x|)` on the closed unit ball with `u(1) = 0`.
#[derive(Clone)]
pub struct RadialProfile {
    shape: Arc<dyn Shape>,
    scale: f64,
    boundary: BoundaryKind,
    label: String,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("label", &self.label)
            .field("boundary", &self.boundary)
            .field("scale", &self.scale)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl RadialProfile {
    pub fn new(label: impl Into<String>, boundary: BoundaryKind, shape: impl Shape + 'static) -> Self {
        Self {
            shape: Arc::new(shape),
            scale: 1.0,
            boundary,
            label: label.into(),
            breakpoints: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", BoundaryKind::Dirichlet, |_r: f64| Jet::ZERO)
    }

    /// Radii in `(0, 1)` where the second derivative may jump.
    pub fn with_breakpoints(mut self, mut breakpoints: Vec<f64>) -> Self {
        breakpoints.retain(|r| *r > 0.0 && *r < 1.0);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        self.breakpoints = breakpoints;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `c · u`, sharing the underlying shape.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale *= c;
        out
    }

    /// Rescales to unit bi-Laplacian energy `‖Δu‖₂ = 1`.
    pub fn normalized(&self, spec: &crate::QuadratureSpec) -> Result<Self> {
        let e = laplacian_l2_sq(self, spec)?;
        if !(e > 0.0) {
            return Err(Error::Domain(format!(
                "profile '{}' has zero energy and cannot be normalized",
                self.label
            )));
        }
        Ok(self.scaled(1.0 / e.sqrt()))
    }

    #[inline]
    pub fn jet(&self, r: f64) -> Jet {
        self.shape.jet(r).scale(self.scale)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).value
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.jet(r).d1
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.jet(r).d2
    }

    /// Radial Laplacian `u'' + 3u'/r` in R⁴.
    pub fn laplacian(&self, r: f64) -> f64 {
        let j = self.jet(r);
        j.d2 + 3.0 * j.d1 / r
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Boundary conditions and finiteness on `[1e-8, 1]`.
    pub fn check_invariants(&self) -> Result<()> {
        let end = self.jet(1.0);
        if end.value.abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "profile '{}' has u(1) = {:e}",
                self.label, end.value
            )));
        }
        if self.boundary == BoundaryKind::Dirichlet && end.d1.abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "Dirichlet profile '{}' has u'(1) = {:e}",
                self.label, end.d1
            )));
        }
        let n = 400;
        for i in 0..=n {
            let r = 1e-8f64 * (1e8f64).powf(i as f64 / n as f64);
            if !self.jet(r).is_finite() {
                return Err(Error::NonFinite { x: r });
            }
        }
        Ok(())
    }
}

/// The triple `(α, σ, m)` of the weighted exponential functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    pub alpha: f64,
    pub sigma: f64,
    /// `None` for the full functional F; `Some(m)` subtracts Taylor terms `k = 0..=m`.
    pub m: Option<u32>,
}

impl FunctionalParams {
    pub fn new(alpha: f64, sigma: f64, m: Option<u32>) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidInput(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self { alpha, sigma, m })
    }

    /// Sharp radial threshold `32π²(1 + α/4) = 4ω₃(4 + α)`.
    pub fn sigma_alpha(&self) -> f64 {
        sigma_alpha(self.alpha)
    }
}

pub fn sigma_alpha(alpha: f64) -> f64 {
    ADAMS_32PI2 * (1.0 + alpha / 4.0)
}
