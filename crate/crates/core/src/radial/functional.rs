use super::{FunctionalParams, RadialProfile, OMEGA3};
use crate::error::{Error, Result};
use crate::quadrature::{gamma_fn, integrate_with_breaks, QuadratureSpec};

/// Nodes used by [`pointwise_log_bound_margin`].
pub const MARGIN_GRID_SIZE: usize = 1024;

/// `∫_B |Δu|² dx = ω₃ ∫₀¹ (u'' + 3u'/r)² r³ dr`.
///
/// The integrand is evaluated as `(r^{3/2} u'' + 3 r^{1/2} u')²`.
pub fn laplacian_l2_sq(u: &RadialProfile, spec: &QuadratureSpec) -> Result<f64> {
    let f = |r: f64| {
        let j = u.jet(r);
        let s = r.sqrt();
        let v = r * s * j.d2 + 3.0 * s * j.d1;
        v * v
    };
    Ok(OMEGA3 * integrate_with_breaks(f, 0.0, 1.0, u.breakpoints(), spec)?.value)
}

/// `e^x - Σ_{k=0}^{m} x^k/k!` (or `e^x` when `m` is `None`), for `x ≥ 0`.
///
/// Below `x = 0.5` the truncated form is summed as the series remainder.
pub fn truncated_exp(x: f64, m: Option<u32>) -> f64 {
    weighted_truncated_exp(x, 0.0, m)
}

/// `w · truncated_exp(x, m)` with `w = e^{log_w}`, without forming `e^x` alone.
pub(crate) fn weighted_truncated_exp(x: f64, log_w: f64, m: Option<u32>) -> f64 {
    let Some(m) = m else {
        return (x + log_w).exp();
    };
    if x < 0.5 {
        // remainder Σ_{k>m} x^k/k!
        let mut term = 1.0;
        for k in 1..=(m + 1) {
            term *= x / k as f64;
        }
        let mut sum = 0.0;
        let mut k = m + 1;
        while term > 1e-18 * sum || sum == 0.0 {
            sum += term;
            k += 1;
            term *= x / k as f64;
            if term == 0.0 {
                break;
            }
        }
        sum * log_w.exp()
    } else {
        let mut poly = 0.0;
        let mut term = 1.0;
        for k in 0..=m {
            poly += term;
            term *= x / (k + 1) as f64;
        }
        (x + log_w).exp() - poly * log_w.exp()
    }
}

fn weight_breaks(alpha: f64, profile_breaks: &[f64]) -> Vec<f64> {
    let mut b = profile_breaks.to_vec();
    if alpha > 8.0 {
        for c in [2.0, 8.0, 32.0] {
            let r = 1.0 - c / (alpha + 4.0);
            if r > 0.0 {
                b.push(r);
            }
        }
    }
    b
}

/// `∫_B |x|^α g(u) dx` with `g(s) = e^{σs²}` (full) or its Taylor remainder after order `m`.
pub fn weighted_functional(
    u: &RadialProfile,
    p: &FunctionalParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let a3 = p.alpha + 3.0;
    let f = |r: f64| {
        let v = u.value(r);
        weighted_truncated_exp(p.sigma * v * v, a3 * r.ln(), p.m)
    };
    let breaks = weight_breaks(p.alpha, u.breakpoints());
    let value = OMEGA3 * integrate_with_breaks(f, 0.0, 1.0, &breaks, spec)?.value;
    Ok(value.max(0.0))
}

/// `∫_B |x|^α |u|^p dx`.
pub fn weighted_lp_norm_p(
    u: &RadialProfile,
    pexp: f64,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(pexp >= 1.0) {
        return Err(Error::InvalidInput(format!("exponent p must be >= 1, got {pexp}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be >= 0, got {alpha}")));
    }
    let a3 = alpha + 3.0;
    let f = |r: f64| {
        let v = u.value(r).abs();
        if v == 0.0 {
            0.0
        } else {
            (a3 * r.ln() + pexp * v.ln()).exp()
        }
    };
    let breaks = weight_breaks(alpha, u.breakpoints());
    Ok(OMEGA3 * integrate_with_breaks(f, 0.0, 1.0, &breaks, spec)?.value)
}

/// Right-hand side of the weighted radial embedding
/// `∫_B |x|^α |u|^p ≤ (ε/4)^{1+p/2} Γ(1+p/2) ω₃^{1-p/2} 2^{-p} ‖Δu‖₂^p`, `ε = 4/(4+α)`.
pub fn embedding_bound(pexp: f64, alpha: f64, lap_norm: f64) -> f64 {
    let eps_emb = 4.0 / (4.0 + alpha);
    let half = pexp / 2.0;
    let gamma = gamma_fn(1.0 + half).expect("1 + p/2 > 0");
    (eps_emb / 4.0).powf(1.0 + half) * gamma * OMEGA3.powf(1.0 - half) / 2f64.powf(pexp)
        * lap_norm.powf(pexp)
}

/// Geometric sum of the termwise Taylor bounds for F (or F_m, from `k = m+1`).
pub fn series_upper_bound(p: &FunctionalParams, lap_norm: f64) -> Result<f64> {
    let sa = p.sigma_alpha();
    if p.sigma >= sa {
        return Err(Error::Threshold {
            sigma: p.sigma,
            sigma_alpha: sa,
        });
    }
    if !(lap_norm >= 0.0) || lap_norm > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "lap_norm must lie in [0, 1], got {lap_norm}"
        )));
    }
    let x = p.sigma * lap_norm * lap_norm / sa;
    let lead = OMEGA3 / (4.0 + p.alpha);
    Ok(match p.m {
        None => lead / (1.0 - x),
        Some(m) => lead * x.powi(m as i32 + 1) / (1.0 - x),
    })
}

fn margin_grid() -> Vec<f64> {
    let half = MARGIN_GRID_SIZE / 2;
    let mut grid = Vec::with_capacity(MARGIN_GRID_SIZE);
    let lo = 1e-6f64.ln();
    let hi = 0.5f64.ln();
    for i in 0..half {
        let s = lo + (hi - lo) * i as f64 / (half - 1) as f64;
        grid.push(s.exp());
    }
    for i in (0..half).rev() {
        let s = lo + (hi - lo) * i as f64 / (half - 1) as f64;
        grid.push(1.0 - s.exp());
    }
    grid
}

/// `sup_r |u(r)| · 2√ω₃ / ((-ln r)^{1/2} ‖Δu‖₂)` over a fixed grid on `[1e-6, 1 - 1e-6]`;
/// the radial pointwise lemma says this never exceeds 1.
pub fn pointwise_log_bound_margin(u: &RadialProfile, spec: &QuadratureSpec) -> Result<f64> {
    let lap = laplacian_l2_sq(u, spec)?.sqrt();
    let mut worst: f64 = 0.0;
    for r in margin_grid() {
        let num = u.value(r).abs() * 2.0 * OMEGA3.sqrt();
        let den = (-r.ln()).sqrt() * lap;
        if num == 0.0 || den == 0.0 {
            continue;
        }
        worst = worst.max(num / den);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{BoundaryKind, Jet, BALL_VOLUME};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn poly2() -> RadialProfile {
        RadialProfile::new("poly2", BoundaryKind::Navier, |r: f64| {
            Jet::new(1.0 - r * r, -2.0 * r, -2.0)
        })
    }

    fn poly4() -> RadialProfile {
        RadialProfile::new("poly4", BoundaryKind::Dirichlet, |r: f64| {
            let q = 1.0 - r * r;
            Jet::new(q * q, -4.0 * r * q, -4.0 + 12.0 * r * r)
        })
    }

    #[test]
    fn energy_examples() {
        assert_eq!(laplacian_l2_sq(&RadialProfile::zero(), &spec()).unwrap(), 0.0);
        assert_relative_eq!(
            laplacian_l2_sq(&poly2(), &spec()).unwrap(),
            32.0 * PI * PI,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            laplacian_l2_sq(&poly4(), &spec()).unwrap(),
            16.0 * PI * PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn energy_homogeneity() {
        let base = laplacian_l2_sq(&poly4(), &spec()).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let e = laplacian_l2_sq(&poly4().scaled(c), &spec()).unwrap();
            assert!(((e - c * c * base) / (c * c * base)).abs() < 1e-10);
        }
    }

    #[test]
    fn truncated_exp_branches() {
        assert_eq!(truncated_exp(0.0, Some(1)), 0.0);
        assert_relative_eq!(truncated_exp(2.0, Some(1)), 2f64.exp() - 3.0, max_relative = 1e-14);
        // both branches agree near the switch
        let x = 0.5;
        let below = truncated_exp(x - 1e-12, Some(2));
        let above = truncated_exp(x, Some(2));
        assert_relative_eq!(below, above, max_relative = 1e-9);
        // small argument keeps full relative precision
        let x = 1e-6;
        assert_relative_eq!(truncated_exp(x, Some(1)), x * x / 2.0 * (1.0 + x / 3.0), max_relative = 1e-12);
        assert_relative_eq!(truncated_exp(3.0, None), 3f64.exp());
    }

    #[test]
    fn functional_examples() {
        let p = FunctionalParams::new(2.0, 10.0, Some(1)).unwrap();
        assert_eq!(weighted_functional(&RadialProfile::zero(), &p, &spec()).unwrap(), 0.0);
        let p = FunctionalParams::new(0.0, 10.0, None).unwrap();
        assert_relative_eq!(
            weighted_functional(&RadialProfile::zero(), &p, &spec()).unwrap(),
            BALL_VOLUME,
            max_relative = 1e-13
        );
    }

    #[test]
    fn functional_matches_composite_oracle() {
        // u = (1-r²)²/(4π), α = 0, σ = 32π², m = 1; center value g = e² - 3
        let u = poly4().scaled(1.0 / (4.0 * PI));
        let p = FunctionalParams::new(0.0, 32.0 * PI * PI, Some(1)).unwrap();
        let g0 = truncated_exp(p.sigma * u.value(0.0).powi(2), p.m);
        assert_relative_eq!(g0, 2f64.exp() - 3.0, max_relative = 1e-13);
        // 10⁶-panel composite midpoint rule, independent of the adaptive path
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * h;
            let x = p.sigma * u.value(r).powi(2);
            acc += r.powi(3) * (x.exp() - 1.0 - x);
        }
        let oracle = OMEGA3 * acc * h;
        let value = weighted_functional(&u, &p, &spec()).unwrap();
        assert_relative_eq!(value, oracle, max_relative = 1e-9);
    }

    #[test]
    fn lp_examples() {
        let pi2 = PI * PI;
        assert_eq!(weighted_lp_norm_p(&RadialProfile::zero(), 2.0, 0.0, &spec()).unwrap(), 0.0);
        assert_relative_eq!(
            weighted_lp_norm_p(&poly2(), 2.0, 0.0, &spec()).unwrap(),
            pi2 / 12.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            weighted_lp_norm_p(&poly2(), 2.0, 4.0, &spec()).unwrap(),
            2.0 * pi2 / 120.0,
            max_relative = 1e-12
        );
        assert!(weighted_lp_norm_p(&poly2(), 0.5, 0.0, &spec()).is_err());
    }

    #[test]
    fn embedding_examples() {
        assert_relative_eq!(embedding_bound(2.0, 0.0, 1.0), 1.0 / 64.0, max_relative = 1e-14);
        // p = 2k form with k = 1
        let eps_emb: f64 = 1.0;
        let k = 1;
        let alt = 1.0 * eps_emb.powi(1 + k) / 4f64.powi(1 + 2 * k) * OMEGA3.powi(1 - k);
        assert_relative_eq!(embedding_bound(2.0, 0.0, 1.0), alt, max_relative = 1e-14);
        for k in 1..5 {
            let alpha = 3.0;
            let e: f64 = 4.0 / (4.0 + alpha);
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            let alt = fact * e.powi(1 + k) / 4f64.powi(1 + 2 * k) * OMEGA3.powi(1 - k);
            assert_relative_eq!(embedding_bound(2.0 * k as f64, alpha, 1.0), alt, max_relative = 1e-12);
        }
        assert_eq!(embedding_bound(3.0, 2.0, 0.0), 0.0);
    }

    #[test]
    fn series_examples() {
        let s0 = crate::radial::sigma_alpha(0.0);
        let p = FunctionalParams::new(0.0, 0.5 * s0, None).unwrap();
        assert_relative_eq!(series_upper_bound(&p, 1.0).unwrap(), PI * PI, max_relative = 1e-14);
        let p = FunctionalParams::new(0.0, 1e-300, None).unwrap();
        assert_relative_eq!(series_upper_bound(&p, 1.0).unwrap(), BALL_VOLUME, max_relative = 1e-14);
        for alpha in [0.0, 1.0, 7.5] {
            let sa = crate::radial::sigma_alpha(alpha);
            let full = series_upper_bound(&FunctionalParams::new(alpha, 0.3 * sa, None).unwrap(), 1.0).unwrap();
            let m0 = series_upper_bound(&FunctionalParams::new(alpha, 0.3 * sa, Some(0)).unwrap(), 1.0).unwrap();
            assert_relative_eq!(m0, full - OMEGA3 / (4.0 + alpha), max_relative = 1e-13);
        }
        let p = FunctionalParams::new(0.0, s0, None).unwrap();
        assert!(matches!(series_upper_bound(&p, 1.0), Err(Error::Threshold { .. })));
    }

    #[test]
    fn margin_examples() {
        assert_eq!(pointwise_log_bound_margin(&RadialProfile::zero(), &spec()).unwrap(), 0.0);
        let u = poly2();
        let m = pointwise_log_bound_margin(&u, &spec()).unwrap();
        assert!(m <= 1.0);
        // at r = 1/e the ratio is (1 - e^{-2})·2√ω₃/√(32π²)
        let r = (-1f64).exp();
        let lap = (32.0 * PI * PI).sqrt();
        let ratio = u.value(r) * 2.0 * OMEGA3.sqrt() / lap;
        assert_relative_eq!(u.value(r), 1.0 - (-2f64).exp(), max_relative = 1e-15);
        assert!((ratio - 0.432).abs() < 1e-3);
    }
}
