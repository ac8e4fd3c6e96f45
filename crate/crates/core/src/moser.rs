//! Moser-type extremal sequences and the threshold-sharpness experiments.
//!
//! Two formulas are used in corrected form:
//!
//! * the Navier inner piece has constant term `√|log ε| / 4`, which makes the
//!   profile continuous at `r = ε^{1/4}` while keeping the derivative table and
//!   the norm `1 + 4/|log ε|`;
//! * the Dirichlet boundary patch uses `2|log(1-η)| s² - s³` with `s = |log r|`,
//!   the unique cubic that is C¹ against the Navier profile at `r = 1 - η`
//!   and vanishes to second order at `r = 1`.
//!
//! [`formula_diagnostics`] evaluates both the printed and the corrected forms
//! at their seams.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::radial::{
    laplacian_l2_sq, sigma_alpha, weighted_functional, BoundaryKind, FunctionalParams, Jet,
    RadialProfile, OMEGA3,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoserParams {
    pub epsilon: f64,
    pub bc: BoundaryKind,
}

impl MoserParams {
    pub fn new(epsilon: f64, bc: BoundaryKind) -> Result<Self> {
        let max = (-2f64).exp();
        if !(epsilon > 0.0 && epsilon < max) {
            return Err(Error::Domain(format!(
                "Moser parameter must lie in (0, e^-2), got {epsilon:e}"
            )));
        }
        let mp = Self { epsilon, bc };
        if bc == BoundaryKind::Dirichlet && mp.eta() >= 0.5 {
            return Err(Error::Domain(format!(
                "Dirichlet Moser profile needs eta = 1/log|log eps| < 1/2; eps = {epsilon:e} gives {:.4}",
                mp.eta()
            )));
        }
        Ok(mp)
    }

    /// `|log ε|`.
    pub fn log_inv(&self) -> f64 {
        -self.epsilon.ln()
    }

    /// Width of the Dirichlet boundary patch, `η = 1 / log|log ε|`.
    pub fn eta(&self) -> f64 {
        1.0 / self.log_inv().ln()
    }

    /// Matching radius `ε^{1/4}` between the polynomial core and the log piece.
    pub fn core_radius(&self) -> f64 {
        self.epsilon.powf(0.25)
    }
}

fn navier_jet(eps: f64, big_l: f64, r: f64) -> Jet {
    let k = 1.0 / (OMEGA3 * big_l).sqrt();
    let se = eps.sqrt();
    if r <= eps.powf(0.25) {
        Jet::new(
            k * (big_l / 4.0 + (se - r * r) / (2.0 * se)),
            -k * r / se,
            -k / se,
        )
    } else {
        Jet::new(-k * r.ln(), -k / r, k / (r * r))
    }
}

/// The Navier member `u_ε` (continuity-corrected core constant).
pub fn moser_navier(mp: &MoserParams) -> Result<RadialProfile> {
    if mp.bc != BoundaryKind::Navier {
        return Err(Error::InvalidInput("moser_navier needs bc = navier".into()));
    }
    let eps = mp.epsilon;
    let big_l = mp.log_inv();
    Ok(RadialProfile::new(
        format!("moser:{eps:e}:navier"),
        BoundaryKind::Navier,
        move |r: f64| navier_jet(eps, big_l, r),
    )
    .with_breakpoints(vec![mp.core_radius()]))
}

/// The Dirichlet member `u_{ε,0}`: equal to `u_ε` on `[0, 1-η]`, cubic in `|log r|` beyond.
pub fn moser_dirichlet(mp: &MoserParams) -> Result<RadialProfile> {
    if mp.bc != BoundaryKind::Dirichlet {
        return Err(Error::InvalidInput("moser_dirichlet needs bc = dirichlet".into()));
    }
    let eps = mp.epsilon;
    let big_l = mp.log_inv();
    let seam = 1.0 - mp.eta();
    let a = -seam.ln();
    let c = 1.0 / (a * a * (OMEGA3 * big_l).sqrt());
    Ok(RadialProfile::new(
        format!("moser:{eps:e}:dirichlet"),
        BoundaryKind::Dirichlet,
        move |r: f64| {
            if r <= seam {
                navier_jet(eps, big_l, r)
            } else {
                let s = -r.ln();
                let p = c * (2.0 * a * s * s - s * s * s);
                let ps = c * (4.0 * a * s - 3.0 * s * s);
                let pss = c * (4.0 * a - 6.0 * s);
                Jet::new(p, -ps / r, (pss + ps) / (r * r))
            }
        },
    )
    .with_breakpoints(vec![mp.core_radius(), seam]))
}

pub fn moser_profile(mp: &MoserParams) -> Result<RadialProfile> {
    match mp.bc {
        BoundaryKind::Navier => moser_navier(mp),
        BoundaryKind::Dirichlet => moser_dirichlet(mp),
    }
}

/// `‖Δu_ε‖₂² = 1 + 4/|log ε|`.
pub fn navier_norm_sq_exact(epsilon: f64) -> Result<f64> {
    let mp = MoserParams::new(epsilon, BoundaryKind::Navier)?;
    Ok(1.0 + 4.0 / mp.log_inv())
}

/// Printed vs corrected seam values of both sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulaDiagnostics {
    pub epsilon: f64,
    /// Outer piece at `r = ε^{1/4}`.
    pub navier_outer_at_core: f64,
    pub navier_inner_printed: f64,
    pub navier_inner_corrected: f64,
    /// Navier profile at `r = 1 - η`.
    pub dirichlet_target_at_seam: f64,
    pub dirichlet_patch_printed: f64,
    pub dirichlet_patch_corrected: f64,
}

pub fn formula_diagnostics(epsilon: f64) -> Result<FormulaDiagnostics> {
    let mp = MoserParams::new(epsilon, BoundaryKind::Dirichlet)?;
    let big_l = mp.log_inv();
    let k = 1.0 / (OMEGA3 * big_l).sqrt();
    let rc = mp.core_radius();
    let printed_core = (big_l / 4.0).sqrt() / OMEGA3.sqrt();
    let a = -(1.0 - mp.eta()).ln();
    let denom = a * a * (OMEGA3 * big_l).sqrt();
    let log_1m_eta = -a;
    Ok(FormulaDiagnostics {
        epsilon,
        navier_outer_at_core: -k * rc.ln(),
        navier_inner_printed: printed_core,
        navier_inner_corrected: k * big_l / 4.0,
        dirichlet_target_at_seam: k * a,
        dirichlet_patch_printed: (2.0 * log_1m_eta * a * a - a * a * a) / denom,
        dirichlet_patch_corrected: (2.0 * a * a * a - a * a * a) / denom,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Diverging,
    Bounded,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Diverging => "diverging",
            Verdict::Bounded => "bounded",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub epsilon: f64,
    /// Quadrature value of `‖Δu‖₂²` before normalization.
    pub norm_sq: f64,
    /// `None` when the functional could not be evaluated (overflow, divergence).
    pub value: Option<f64>,
    pub log_value: Option<f64>,
    /// `(α+4)/4 · [(β-1)|log ε| - 4]`.
    pub lower_bound_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdExperiment {
    pub alpha: f64,
    pub beta: f64,
    pub bc: BoundaryKind,
    pub m: Option<u32>,
    pub rows: Vec<BlowupRow>,
    pub verdict: Verdict,
}

impl ThresholdExperiment {
    pub fn epsilons(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.epsilon).collect()
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

/// Growth required across the trailing three-decade window for `Diverging`.
pub const DIVERGING_FACTOR: f64 = 2.0;
/// Maximal relative spread across the trailing window for `Bounded`.
pub const BOUNDED_SPREAD: f64 = 0.10;
/// Width, in decades of ε, of the trailing window.
pub const WINDOW_DECADES: f64 = 3.0;

/// Classifies a scan from its values along decreasing ε.
///
/// The trailing window starts at the last grid point lying at least three
/// decades above the smallest ε. `Diverging` needs strict growth from the
/// third entry on and at least a factor 2 across the window; `Bounded`
/// needs a relative spread below 10% across the window.
pub fn classify(epsilons: &[f64], values: &[Option<f64>]) -> Verdict {
    let n = epsilons.len();
    if n < 2 || values.len() != n {
        return Verdict::Inconclusive;
    }
    let Some(vals) = values.iter().copied().collect::<Option<Vec<f64>>>() else {
        return Verdict::Inconclusive;
    };
    let last_dec = epsilons[n - 1].log10();
    let Some(start) = (0..n - 1)
        .rev()
        .find(|&j| epsilons[j].log10() - last_dec >= WINDOW_DECADES - 1e-9)
    else {
        return Verdict::Inconclusive;
    };
    let window = &vals[start..];
    let increasing = (2..n).all(|i| vals[i] > vals[i - 1]);
    if increasing && vals[n - 1] >= DIVERGING_FACTOR * vals[start] {
        return Verdict::Diverging;
    }
    let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 && (hi - lo) / lo < BOUNDED_SPREAD {
        return Verdict::Bounded;
    }
    Verdict::Inconclusive
}

/// Evaluates `∫_B |x|^α g(v_ε)` with `σ = β σ_α` along normalized Moser members.
pub fn blowup_scan(
    alpha: f64,
    beta: f64,
    epsilons: &[f64],
    m: Option<u32>,
    bc: BoundaryKind,
    spec: &QuadratureSpec,
) -> Result<ThresholdExperiment> {
    if epsilons.is_empty() {
        return Err(Error::InvalidInput("blowup_scan needs at least one epsilon".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be > 0, got {beta}")));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("epsilons must be strictly decreasing".into()));
    }
    let params = FunctionalParams::new(alpha, beta * sigma_alpha(alpha), m)?;
    let members: Vec<MoserParams> = epsilons
        .iter()
        .map(|&e| MoserParams::new(e, bc))
        .collect::<Result<_>>()?;

    let rows: Vec<BlowupRow> = members
        .par_iter()
        .map(|mp| -> Result<BlowupRow> {
            let u = moser_profile(mp)?;
            let norm_sq = laplacian_l2_sq(&u, spec)?;
            let v = u.scaled(1.0 / norm_sq.sqrt());
            let value = match weighted_functional(&v, &params, spec) {
                Ok(x) => Some(x),
                Err(Error::NonFinite { .. }) | Err(Error::Divergent { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(BlowupRow {
                epsilon: mp.epsilon,
                norm_sq,
                value,
                log_value: value.map(f64::ln),
                lower_bound_exponent: (alpha + 4.0) / 4.0
                    * ((beta - 1.0) * mp.log_inv() - 4.0),
            })
        })
        .collect::<Result<_>>()?;

    let verdict = classify(
        epsilons,
        &rows.iter().map(|r| r.value).collect::<Vec<_>>(),
    );
    Ok(ThresholdExperiment {
        alpha,
        beta,
        bc,
        m,
        rows,
        verdict,
    })
}

/// `10^{-start}, 10^{-start-step}, …` down to `10^{-end}` (exponents as positive decades).
pub fn decade_grid(start_decade: u32, end_decade: u32, step: u32) -> Vec<f64> {
    (start_decade..=end_decade)
        .step_by(step.max(1) as usize)
        .map(|k| 10f64.powi(-(k as i32)))
        .collect()
}
