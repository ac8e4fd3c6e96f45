//! Radial bumps translated towards the boundary: `u_α(x) = u(α(x - x_α))`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_with_breaks, QuadratureSpec};
use crate::radial::{
    laplacian_l2_sq, truncated_exp, weighted_functional, BoundaryKind, FunctionalParams, Jet,
    RadialProfile, ADAMS_32PI2,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpKind {
    /// `(1 - r²)²`
    Poly4,
    /// `cos²(πr/2)`
    Cos2,
    /// `(1 - r²)³`
    Poly6,
    /// `(1 - r²)² A(r²)` with a fixed positive quintic `A`, tuned for a large `∫_B g(u)`.
    Peak,
}

/// Coefficients of `A(q)` for [`BumpKind::Peak`], lowest degree first.
const PEAK_COEFFS: [f64; 6] = [
    0.053_427_93,
    -0.241_230_64,
    0.796_170_26,
    -1.476_271_21,
    1.371_745_15,
    -0.495_824_43,
];

impl BumpKind {
    pub const ALL: [BumpKind; 4] = [BumpKind::Poly4, BumpKind::Cos2, BumpKind::Poly6, BumpKind::Peak];

    pub fn as_str(&self) -> &'static str {
        match self {
            BumpKind::Poly4 => "poly4",
            BumpKind::Cos2 => "cos2",
            BumpKind::Poly6 => "poly6",
            BumpKind::Peak => "peak",
        }
    }

    fn raw_profile(&self) -> RadialProfile {
        let name = self.as_str();
        match self {
            BumpKind::Poly4 => crate::radial::profile_by_name("poly4").expect("corpus"),
            BumpKind::Poly6 => crate::radial::profile_by_name("poly6").expect("corpus"),
            BumpKind::Cos2 => crate::radial::profile_by_name("cos2").expect("corpus"),
            BumpKind::Peak => RadialProfile::new(name, BoundaryKind::Dirichlet, |r: f64| {
                let q = r * r;
                let (mut a, mut da, mut dda) = (0.0, 0.0, 0.0);
                for c in PEAK_COEFFS.iter().rev() {
                    dda = dda * q + 2.0 * da;
                    da = da * q + a;
                    a = a * q + c;
                }
                let b = (1.0 - q) * (1.0 - q);
                let db = -2.0 * (1.0 - q);
                let ddb = 2.0;
                let p = b * a;
                let dp = db * a + b * da;
                let ddp = ddb * a + 2.0 * db * da + b * dda;
                Jet::new(p, 2.0 * r * dp, 2.0 * dp + 4.0 * q * ddp)
            }),
        }
    }
}

impl fmt::Display for BumpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BumpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BumpKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidInput(format!("unknown bump '{s}' (poly4, cos2, poly6, peak)")))
    }
}

type CacheKey = (u64, Option<u32>);

/// A normalized bump with `‖Δu‖₂ = 1` and a cache of `∫_B g(u)`.
#[derive(Clone)]
pub struct BumpSpec {
    pub kind: BumpKind,
    /// `c` in `u = c · raw`.
    pub normalizer: f64,
    profile: RadialProfile,
    cache: Arc<Mutex<HashMap<CacheKey, f64>>>,
}

impl fmt::Debug for BumpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BumpSpec")
            .field("kind", &self.kind)
            .field("normalizer", &self.normalizer)
            .finish()
    }
}

impl BumpSpec {
    pub fn new(kind: BumpKind, spec: &QuadratureSpec) -> Result<Self> {
        let raw = kind.raw_profile();
        let e = laplacian_l2_sq(&raw, spec)?;
        let c = 1.0 / e.sqrt();
        Ok(Self {
            kind,
            normalizer: c,
            profile: raw.scaled(c),
            cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// `∫_B g(u(|y|)) dy`, computed once per `(σ, m)`.
    pub fn ball_integral(&self, sigma: f64, m: Option<u32>, spec: &QuadratureSpec) -> Result<f64> {
        let key = (sigma.to_bits(), m);
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let p = FunctionalParams::new(0.0, sigma, m)?;
        let v = weighted_functional(&self.profile, &p, spec)?;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

fn check_pre(alpha: f64, p: &FunctionalParams) -> Result<()> {
    if !(alpha >= 4.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("translated bump needs alpha >= 4, got {alpha}")));
    }
    if p.m.is_none() {
        return Err(Error::Precondition("translated bump needs a truncation order m".into()));
    }
    if p.sigma > ADAMS_32PI2 * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "translated bump needs sigma <= 32 pi^2, got {}",
            p.sigma
        )));
    }
    Ok(())
}

/// `∫₀^π |x_α + (s/α)e(θ)|^α sin²θ dθ`.
fn angular_weight(alpha: f64, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    let xa = 1.0 - 1.0 / alpha;
    let y = s / alpha;
    let f = |th: f64| {
        let m2 = xa * xa + 2.0 * xa * y * th.cos() + y * y;
        (0.5 * alpha * m2.ln()).exp() * th.sin().powi(2)
    };
    Ok(integrate(f, 0.0, PI, spec)?.value)
}

/// `F_m(u_α) = α^{-4} ∫_B |x_α + y/α|^α g(u(|y|)) dy`.
pub fn translated_bump_value(
    alpha: f64,
    p: &FunctionalParams,
    bump: &BumpSpec,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_pre(alpha, p)?;
    let u = &bump.profile;
    let failure = RefCell::new(None);
    let f = |s: f64| {
        let v = u.value(s);
        let g = truncated_exp(p.sigma * v * v, p.m);
        if g == 0.0 {
            return 0.0;
        }
        match angular_weight(alpha, s, spec) {
            Ok(h) => g * s.powi(3) * h,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let res = integrate_with_breaks(f, 0.0, 1.0, u.breakpoints(), spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(4.0 * PI * res?.value / alpha.powi(4))
}

/// `(1 - 2/α)^α α^{-4} ∫_B g(u)`.
pub fn translated_bump_paper_bound(
    alpha: f64,
    p: &FunctionalParams,
    bump: &BumpSpec,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_pre(alpha, p)?;
    let i0 = bump.ball_integral(p.sigma, p.m, spec)?;
    Ok((1.0 - 2.0 / alpha).powf(alpha) * i0 / alpha.powi(4))
}

/// `‖Δu_α‖₂²` by quadrature in polar coordinates about the origin.
///
/// The support `|x - x_α| ≤ 1/α` is the set `ρ ∈ [1 - 2/α, 1]`,
/// `cos φ ≥ (ρ² + x_α² - α^{-2}) / (2ρ x_α)`.
pub fn translated_energy(alpha: f64, bump: &BumpSpec, spec: &QuadratureSpec) -> Result<f64> {
    if !(alpha >= 4.0) {
        return Err(Error::Precondition(format!("alpha must be >= 4, got {alpha}")));
    }
    let u = &bump.profile;
    let xa = 1.0 - 1.0 / alpha;
    let ia2 = 1.0 / (alpha * alpha);
    let a4 = alpha.powi(4);
    let failure = RefCell::new(None);
    let outer = |rho: f64| {
        let c0 = ((rho * rho + xa * xa - ia2) / (2.0 * rho * xa)).clamp(-1.0, 1.0);
        let phi_max = c0.acos();
        if phi_max <= 0.0 {
            return 0.0;
        }
        let inner = |phi: f64| {
            let d2 = (rho * rho + xa * xa - 2.0 * rho * xa * phi.cos()).max(0.0);
            let s = (alpha * d2.sqrt()).clamp(1e-200, 1.0);
            let lap = u.laplacian(s);
            a4 * lap * lap * phi.sin().powi(2)
        };
        match integrate(inner, 0.0, phi_max, spec) {
            Ok(r) => 4.0 * PI * r.value * rho.powi(3),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let res = integrate_with_breaks(outer, 1.0 - 2.0 / alpha, 1.0, &[xa], spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(res?.value)
}
