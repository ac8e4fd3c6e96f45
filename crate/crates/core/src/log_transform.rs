//! The logarithmic change of variables `w(t) = 2√(ω₃γ) u(e^{-t/γ})` and the
//! quantities computed in the `t` variable.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moser::{moser_navier, MoserParams};
use crate::quadrature::{integrate_halfline_scaled, integrate_with_breaks, QuadratureSpec};
use crate::radial::{BoundaryKind, Jet, RadialProfile, Shape, OMEGA3};

/// A function `w` on `[0, ∞)` with its parameter γ.
#[derive(Clone)]
pub struct LogProfile {
    gamma: f64,
    shape: Arc<dyn Shape>,
    source: Option<String>,
    breakpoints: Vec<f64>,
    tail_scale: f64,
}

impl fmt::Debug for LogProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogProfile")
            .field("gamma", &self.gamma)
            .field("source", &self.source)
            .field("breakpoints", &self.breakpoints)
            .field("tail_scale", &self.tail_scale)
            .finish()
    }
}

impl LogProfile {
    /// A profile given directly in `t`. The energy tail is assumed to decay like `e^{-4t/γ}`.
    pub fn new(gamma: f64, shape: impl Shape + 'static) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be > 0, got {gamma}")));
        }
        Ok(Self {
            gamma,
            shape: Arc::new(shape),
            source: None,
            breakpoints: Vec::new(),
            tail_scale: gamma / 4.0,
        })
    }

    pub fn with_breakpoints(mut self, mut t: Vec<f64>) -> Self {
        t.retain(|x| *x > 0.0 && x.is_finite());
        t.sort_by(f64::total_cmp);
        t.dedup();
        self.breakpoints = t;
        self
    }

    pub fn with_source(mut self, label: impl Into<String>) -> Self {
        self.source = Some(label.into());
        self
    }

    /// Decay length used when mapping the energy tail to a finite interval.
    pub fn with_tail_scale(mut self, scale: f64) -> Self {
        self.tail_scale = scale;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `(w, w', w'')` at `t`.
    pub fn jet(&self, t: f64) -> Jet {
        self.shape.jet(t)
    }

    pub fn w(&self, t: f64) -> f64 {
        self.jet(t).value
    }
}

/// `w(t) = 2√(ω₃γ) u(e^{-t/γ})` with chain-rule derivatives.
pub fn to_log_profile(u: &RadialProfile, gamma: f64) -> Result<LogProfile> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("gamma must be > 0, got {gamma}")));
    }
    let c = 2.0 * (OMEGA3 * gamma).sqrt();
    let src = u.clone();
    let breaks = u.breakpoints().iter().map(|r| -gamma * r.ln()).collect();
    let wp = LogProfile::new(gamma, move |t: f64| {
        let r = (-t / gamma).exp();
        let j = src.jet(r);
        let ru1 = r * j.d1;
        Jet::new(
            c * j.value,
            -c / gamma * ru1,
            c / (gamma * gamma) * (ru1 + r * r * j.d2),
        )
    })?;
    Ok(wp.with_breakpoints(breaks).with_source(u.label()))
}

/// `∫₀^∞ (γ/2·w'' - w')² dt`.
pub fn log_energy(wp: &LogProfile, spec: &QuadratureSpec) -> Result<f64> {
    let g2 = 0.5 * wp.gamma;
    let f = |t: f64| {
        let j = wp.jet(t);
        let v = g2 * j.d2 - j.d1;
        v * v
    };
    Ok(integrate_halfline_scaled(f, 0.0, wp.tail_scale, &wp.breakpoints, spec)?.value)
}

/// `8ω₃ ∫₁^∞ v''(t)² t³ dt` with `v(t) = u(1/√t)`.
///
/// The range is cut at `t = max(10^16, 10^8 / r_b²)` with `r_b` the smallest
/// profile breakpoint, so the neglected part is below `r⁴ ~ 10^-16` relative
/// for every profile in use, and split at every decade.
pub fn sqrt_transform_energy(u: &RadialProfile, spec: &QuadratureSpec) -> Result<f64> {
    let rmin = u.breakpoints().first().copied().unwrap_or(1.0);
    let t_max = 1e16f64.max(1e8 / (rmin * rmin));
    let mut breaks: Vec<f64> = Vec::new();
    let mut d = 10.0;
    while d < t_max {
        breaks.push(d);
        d *= 10.0;
    }
    breaks.extend(u.breakpoints().iter().map(|r| 1.0 / (r * r)));
    let f = |t: f64| {
        let r = 1.0 / t.sqrt();
        let j = u.jet(r);
        // v'' t^{3/2}
        let v = 0.25 * j.d2 / (t * t.sqrt()) + 0.75 * j.d1 / t;
        v * v
    };
    Ok(8.0 * OMEGA3 * integrate_with_breaks(f, 1.0, t_max, &breaks, spec)?.value)
}

/// `(ω₃/γ) ∫₀^∞ exp((α+4)/γ·[σ w²/(8π²(α+4)) - t]) dt`.
pub fn weighted_exp_integral_log(
    wp: &LogProfile,
    alpha: f64,
    sigma: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha must be >= 0, got {alpha}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma must be > 0, got {sigma}")));
    }
    let g = wp.gamma;
    let k = sigma / (4.0 * OMEGA3 * g);
    let rate = (alpha + 4.0) / g;
    let f = |t: f64| {
        let w = wp.w(t);
        (k * w * w - rate * t).exp()
    };
    let v = integrate_halfline_scaled(f, 0.0, 1.0 / rate, &wp.breakpoints, spec)?.value;
    Ok(OMEGA3 / g * v)
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A test function ψ for the Marshall–Moser integral, optionally with `∫₀ᵗ ψ` in closed form.
#[derive(Clone)]
pub struct Admissible {
    pub label: String,
    psi: RealFn,
    primitive: Option<RealFn>,
    breakpoints: Vec<f64>,
    /// Decay length of ψ² used for the norm's tail mapping.
    scale: f64,
}

impl fmt::Debug for Admissible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Admissible")
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints)
            .field("scale", &self.scale)
            .finish()
    }
}

impl Admissible {
    pub fn new(label: impl Into<String>, psi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            psi: Arc::new(psi),
            primitive: None,
            breakpoints: Vec::new(),
            scale: 1.0,
        }
    }

    pub fn with_primitive(mut self, p: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.primitive = Some(Arc::new(p));
        self
    }

    pub fn with_breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub fn with_scale(mut self, s: f64) -> Self {
        self.scale = s;
        self
    }

    pub fn psi(&self, t: f64) -> f64 {
        (self.psi)(t)
    }

    /// `∫₀^∞ ψ²`.
    pub fn norm_sq(&self, spec: &QuadratureSpec) -> Result<f64> {
        let f = |t: f64| self.psi(t).powi(2);
        Ok(integrate_halfline_scaled(f, 0.0, self.scale, &self.breakpoints, spec)?.value)
    }

    /// `∫₀ᵗ ψ`.
    pub fn primitive(&self, t: f64, spec: &QuadratureSpec) -> Result<f64> {
        match &self.primitive {
            Some(p) => Ok(p(t)),
            None => Ok(integrate_with_breaks(|s| self.psi(s), 0.0, t, &self.breakpoints, spec)?.value),
        }
    }
}

/// `∫₀^∞ exp((∫₀ᵗ ψ)² - t) dt` for `‖ψ‖₂ ≤ 1`.
pub fn marshall_moser_integral(psi: &Admissible, spec: &QuadratureSpec) -> Result<f64> {
    let n = psi.norm_sq(spec)?;
    if n > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!(
            "psi '{}' has squared L2 norm {n} > 1",
            psi.label
        )));
    }
    let f = |t: f64| match psi.primitive(t, spec) {
        Ok(w) => (w * w - t).exp(),
        Err(_) => f64::NAN,
    };
    Ok(integrate_halfline_scaled(f, 0.0, 1.0, &psi.breakpoints, spec)?.value)
}

fn indicator_family(t_end: f64, height: f64) -> Admissible {
    Admissible::new(format!("step:T={t_end}:h={height}"), move |t| {
        if t <= t_end {
            height
        } else {
            0.0
        }
    })
    .with_primitive(move |t| height * t.min(t_end))
    .with_breakpoints(vec![t_end])
}

/// The built-in admissible family (21 members).
pub fn admissible_family() -> Vec<Admissible> {
    let mut out = vec![Admissible::new("zero", |_| 0.0).with_primitive(|_| 0.0)];
    out.push(indicator_family(1.0, 1.0));
    for t_end in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
        out.push(indicator_family(t_end, 1.0 / t_end.sqrt()));
    }
    for lambda in [0.1f64, 0.5, 1.0, 2.0, 10.0] {
        let a = (2.0 * lambda).sqrt();
        out.push(
            Admissible::new(format!("exp:lambda={lambda}"), move |t| a * (-lambda * t).exp())
                .with_primitive(move |t| a * (1.0 - (-lambda * t).exp()) / lambda)
                .with_scale(0.5 / lambda),
        );
    }
    for tau in [1.0f64, 5.0, 25.0] {
        let c = 2.0 / tau.powf(1.5);
        out.push(
            Admissible::new(format!("texp:tau={tau}"), move |t| c * t * (-t / tau).exp())
                .with_primitive(move |t| c * (tau * tau - tau * (t + tau) * (-t / tau).exp()))
                .with_scale(0.5 * tau)
                .with_breakpoints(vec![tau, 4.0 * tau]),
        );
    }
    let spec = QuadratureSpec::default();
    for eps in [1e-2, 1e-4, 1e-8, 1e-16] {
        let mp = MoserParams::new(eps, BoundaryKind::Navier).expect("valid epsilon");
        let u = moser_navier(&mp)
            .and_then(|u| u.normalized(&spec))
            .expect("Moser member normalizes");
        let wp = to_log_profile(&u, 4.0).expect("gamma > 0");
        let (w1, w0) = (wp.clone(), wp.clone());
        out.push(
            Admissible::new(format!("moser:{eps:e}"), move |t| w1.jet(t).d1)
                .with_primitive(move |t| w0.w(t))
                .with_breakpoints(wp.breakpoints().to_vec()),
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatesReport {
    pub est1_ok: bool,
    pub est2_ok: bool,
    pub est3_ok: bool,
    pub w0_ok: bool,
    /// Worst `lhs - rhs` for est1, est2, est3 and the `w'(0)` bound.
    pub margins: [f64; 4],
    pub horizon: f64,
    /// `κ = w(T)²/T` and the tail bound `e^{T(κ-1)}`.
    pub kappa: f64,
    pub tail_bound: f64,
}

impl EstimatesReport {
    pub fn all_ok(&self) -> bool {
        self.est1_ok && self.est2_ok && self.est3_ok && self.w0_ok
    }
}

/// Checks on `[0, 50(α+4)]`:
///
/// * est1: `w'(t) - w'(0) ≤ 2/(α+4)·(√t + w(t))`
/// * est2: `w(t) ≤ √t`
/// * est3: `w'(t) ≤ √(2/(α+4)) + 4√t/(α+4)`, est1 closed with est2 and the `w'(0)` bound
/// * `0 ≤ w'(0) ≤ √(2/(α+4))`
pub fn estimates_check(wp: &LogProfile, alpha: f64, spec: &QuadratureSpec) -> Result<EstimatesReport> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be >= 0, got {alpha}")));
    }
    let a4 = alpha + 4.0;
    if (wp.gamma - a4).abs() > 1e-12 * a4 {
        return Err(Error::InvalidInput(format!(
            "estimates need gamma = alpha + 4 = {a4}, got {}",
            wp.gamma
        )));
    }
    let horizon = 50.0 * a4;
    let mut grid: Vec<f64> = (0..=4000).map(|i| horizon * i as f64 / 4000.0).collect();
    grid.extend((0..=200).map(|i| 1e-6 * 1e6f64.powf(i as f64 / 200.0)));
    grid.extend(wp.breakpoints.iter().copied().filter(|t| *t <= horizon));
    grid.sort_by(f64::total_cmp);

    let j0 = wp.jet(0.0);
    if !j0.d1.is_finite() || !j0.value.is_finite() {
        return Err(Error::Precondition("w'(0) is not finite".into()));
    }
    let jets: Vec<(f64, Jet)> = grid.iter().map(|&t| (t, wp.jet(t))).collect();
    if let Some((t, _)) = jets.iter().find(|(_, j)| !(j.d1 >= -1e-9) || !j.is_finite()) {
        return Err(Error::Precondition(format!(
            "w' is negative or non-finite at t = {t}; the source is not radially decreasing"
        )));
    }
    let energy = log_energy(wp, spec)?;
    if energy > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!("log energy {energy} exceeds 1")));
    }

    let w00 = j0.d1;
    let cap = (2.0 / a4).sqrt();
    let mut m = [f64::NEG_INFINITY; 4];
    for (t, j) in &jets {
        let st = t.sqrt();
        m[0] = m[0].max(j.d1 - w00 - 2.0 / a4 * (st + j.value));
        m[1] = m[1].max(j.value - st);
        m[2] = m[2].max(j.d1 - cap - 4.0 * st / a4);
    }
    m[3] = (w00 - cap).max(-w00);
    let w_t = wp.w(horizon);
    let kappa = w_t * w_t / horizon;
    let tol = 1e-9;
    Ok(EstimatesReport {
        est1_ok: m[0] <= tol,
        est2_ok: m[1] <= tol,
        est3_ok: m[2] <= tol,
        w0_ok: m[3] <= tol,
        margins: m,
        horizon,
        kappa,
        tail_bound: (horizon * (kappa - 1.0)).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{laplacian_l2_sq, profile_by_name, weighted_functional, FunctionalParams};
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn substitution_example() {
        let u = profile_by_name("poly2").unwrap();
        let wp = to_log_profile(&u, 4.0).unwrap();
        let c = 2.0 * (4.0 * OMEGA3).sqrt();
        for t in [0.0, 0.5, 3.0, 20.0] {
            assert_relative_eq!(wp.w(t), c * (1.0 - (-t / 2.0).exp()), max_relative = 1e-14);
            assert!(wp.jet(t).d1 >= 0.0);
        }
        assert_eq!(wp.w(0.0), 0.0);
        assert_relative_eq!(wp.w(800.0), 4.0 * OMEGA3.sqrt(), max_relative = 1e-14);
        assert!(to_log_profile(&u, 0.0).is_err());
    }

    #[test]
    fn zero_profile() {
        let wp = to_log_profile(&RadialProfile::zero(), 3.0).unwrap();
        assert_eq!(log_energy(&wp, &spec()).unwrap(), 0.0);
        assert_eq!(sqrt_transform_energy(&RadialProfile::zero(), &spec()).unwrap(), 0.0);
        let v = weighted_exp_integral_log(&to_log_profile(&RadialProfile::zero(), 4.0).unwrap(), 0.0, 1.0, &spec())
            .unwrap();
        assert_relative_eq!(v, OMEGA3 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn energies_agree() {
        let pi2 = std::f64::consts::PI.powi(2);
        for (name, exact) in [("poly2", 32.0 * pi2), ("poly4", 16.0 * pi2)] {
            let u = profile_by_name(name).unwrap();
            assert_relative_eq!(sqrt_transform_energy(&u, &spec()).unwrap(), exact, max_relative = 1e-10);
            for g in [1.0, 4.0, 7.5] {
                let wp = to_log_profile(&u, g).unwrap();
                assert_relative_eq!(log_energy(&wp, &spec()).unwrap(), exact, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn log_energy_closed_form() {
        // w = t e^{-t}, γ = 2: γ/2·w'' - w' = (2t - 3) e^{-t}
        let wp = LogProfile::new(2.0, |t: f64| {
            let e = (-t).exp();
            Jet::new(t * e, (1.0 - t) * e, (t - 2.0) * e)
        })
        .unwrap();
        let g = |x: f64| crate::quadrature::gamma_fn(x).unwrap();
        // ∫ (4t² - 12t + 9) e^{-2t} via Γ(n+1)/2^{n+1}
        let oracle = 4.0 * g(3.0) / 8.0 - 12.0 * g(2.0) / 4.0 + 9.0 * g(1.0) / 2.0;
        assert_relative_eq!(log_energy(&wp, &spec()).unwrap(), oracle, max_relative = 1e-10);
        assert_relative_eq!(oracle, 2.5, max_relative = 1e-14);
    }

    #[test]
    fn functional_identity() {
        let u = profile_by_name("poly2").unwrap();
        let wp = to_log_profile(&u, 4.0).unwrap();
        let a = weighted_exp_integral_log(&wp, 0.0, 1.0, &spec()).unwrap();
        let b = weighted_functional(&u, &FunctionalParams::new(0.0, 1.0, None).unwrap(), &spec()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }

    #[test]
    fn borderline_sqrt_is_divergent() {
        let alpha = 0.0;
        let wp = LogProfile::new(4.0, |t: f64| {
            let s = t.sqrt();
            Jet::new(s, 0.5 / s, -0.25 / (t * s))
        })
        .unwrap();
        let sigma = crate::radial::sigma_alpha(alpha);
        let r = weighted_exp_integral_log(&wp, alpha, sigma, &spec());
        assert!(matches!(r, Err(Error::Divergent { .. })), "{r:?}");
        let r = estimates_check(&wp, alpha, &spec());
        assert!(matches!(r, Err(Error::Precondition(_))), "{r:?}");
    }

    #[test]
    fn marshall_moser_examples() {
        let fam = admissible_family();
        assert!(fam.len() >= 20);
        let zero = marshall_moser_integral(&fam[0], &spec()).unwrap();
        assert!((zero - 1.0).abs() <= 1e-12);
        let two_piece = marshall_moser_integral(&fam[1], &spec()).unwrap();
        assert!((two_piece - two_piece_oracle()).abs() < 1e-10);
        let too_big = indicator_family(1.0, 1.1);
        assert!(matches!(marshall_moser_integral(&too_big, &spec()), Err(Error::Precondition(_))));
    }

    /// `1 + ∫₀¹ e^{t²-t} dt = 1 + e^{-1/4} √π erfi(1/2)`, erfi by its Taylor series.
    fn two_piece_oracle() -> f64 {
        let x: f64 = 0.5;
        let mut erfi = 0.0;
        let mut pow = x;
        let mut fact = 1.0;
        for n in 0..30 {
            if n > 0 {
                fact *= n as f64;
                pow *= x * x;
            }
            erfi += pow / (fact * (2 * n + 1) as f64);
        }
        erfi *= 2.0 / std::f64::consts::PI.sqrt();
        1.0 + (-0.25f64).exp() * std::f64::consts::PI.sqrt() * erfi
    }

    #[test]
    fn step_family_closed_form() {
        // ψ = 1/√T on [0,T]: ∫₀ᵀ e^{t²/T - t} dt + 1, evaluated by a fixed midpoint rule
        for t_end in [1.0f64, 10.0, 100.0] {
            let v = marshall_moser_integral(&indicator_family(t_end, 1.0 / t_end.sqrt()), &spec()).unwrap();
            let n = 200_000;
            let h = t_end / n as f64;
            let mid: f64 = (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    (t * t / t_end - t).exp()
                })
                .sum::<f64>()
                * h;
            assert_relative_eq!(v, mid + 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn estimates_hold_for_moser_and_zero() {
        let z = to_log_profile(&RadialProfile::zero(), 4.0).unwrap();
        let rep = estimates_check(&z, 0.0, &spec()).unwrap();
        assert!(rep.all_ok());
        assert!(rep.margins.iter().all(|m| *m <= 0.0));
        let u = profile_by_name("moser:1e-4:navier").unwrap().normalized(&spec()).unwrap();
        for alpha in [0.0, 4.0] {
            let wp = to_log_profile(&u, alpha + 4.0).unwrap();
            let rep = estimates_check(&wp, alpha, &spec()).unwrap();
            assert!(rep.all_ok(), "{rep:?}");
        }
        let wp = to_log_profile(&u, 4.0).unwrap();
        assert!(estimates_check(&wp, 1.0, &spec()).is_err());
        let lap = laplacian_l2_sq(&u, &spec()).unwrap();
        assert_relative_eq!(lap, 1.0, max_relative = 1e-12);
    }
}
