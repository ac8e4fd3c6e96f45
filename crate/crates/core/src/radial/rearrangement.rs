//! Decreasing rearrangement under the 4D measure and the radial Talenti solve.
//!
//! Both objects are represented in the volume coordinate `v = ρ⁴`, in which
//! the normalized measure of the ball of radius ρ is exactly `v`.

use serde::{Deserialize, Serialize};

use super::{BoundaryKind, Jet, RadialProfile, OMEGA3};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadratureSpec};

/// Default number of radial cells.
pub const DEFAULT_GRID: usize = 1 << 16;

/// Piecewise linear in `v = ρ⁴`, non-increasing.
#[derive(Debug, Clone)]
pub(crate) struct VolumeLinear {
    nodes: Vec<f64>,
    vals: Vec<f64>,
}

impl VolumeLinear {
    fn segment(&self, v: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x <= v);
        k.clamp(1, self.nodes.len() - 1) - 1
    }

    fn jet(&self, rho: f64) -> Jet {
        let v = rho.powi(4).min(1.0);
        let j = self.segment(v);
        let (v0, v1) = (self.nodes[j], self.nodes[j + 1]);
        let (a, b) = (self.vals[j], self.vals[j + 1]);
        let s = if v1 > v0 { (b - a) / (v1 - v0) } else { 0.0 };
        let value = a + s * (v - v0);
        Jet::new(value, 4.0 * rho.powi(3) * s, 12.0 * rho * rho * s)
    }

}

/// Sorted samples of `|f|` at volume centres of `n` cells uniform in `r`.
pub(crate) struct Rearranged {
    pub(crate) repr: VolumeLinear,
    /// Radii `ρ_i = c_i^{1/4}` at which the sorted samples sit.
    pub(crate) radii: Vec<f64>,
    pub(crate) values: Vec<f64>,
    /// Normalized cell volumes, summing to 1.
    pub(crate) weights: Vec<f64>,
}

impl Rearranged {
    /// `∫_B Φ(f♯)` from the distribution of the samples.
    ///
    /// Linear interpolation between sorted samples mixes cells of very
    /// different volume, so integrals are taken from the step distribution,
    /// which is second-order accurate.
    pub(crate) fn integral(&self, phi: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self.values.iter().zip(&self.weights).map(|(v, w)| w * phi(*v)).sum();
        super::BALL_VOLUME * s
    }
}

pub(crate) fn rearrange_fn(f: impl Fn(f64) -> f64, n: usize) -> Rearranged {
    let n = n.max(2);
    let h = 1.0 / n as f64;
    let mut cells: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let a = i as f64 * h;
            let b = if i + 1 == n { 1.0 } else { (i + 1) as f64 * h };
            let (a4, b4) = (a.powi(4), b.powi(4));
            let rc = (0.5 * (a4 + b4)).powf(0.25);
            (f(rc).abs(), b4 - a4)
        })
        .collect();
    cells.sort_by(|x, y| y.0.total_cmp(&x.0));

    let near_zero = f(1e-12).abs();
    let at_one = f(1.0).abs();
    let top = cells[0].0.max(near_zero).max(at_one);
    let bottom = cells[n - 1].0.min(near_zero).min(at_one);

    let mut nodes = Vec::with_capacity(n + 2);
    let mut vals = Vec::with_capacity(n + 2);
    let mut radii = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    nodes.push(0.0);
    vals.push(top);
    let mut acc = 0.0;
    for &(val, w) in &cells {
        let c = acc + 0.5 * w;
        acc += w;
        nodes.push(c);
        vals.push(val);
        radii.push(c.powf(0.25));
        values.push(val);
        weights.push(w);
    }
    nodes.push(1.0);
    vals.push(bottom);
    Rearranged {
        repr: VolumeLinear { nodes, vals },
        radii,
        values,
        weights,
    }
}

/// `(∫_B Φ(|u|), ∫_B Φ(u♯))`, the second taken from the sampled distribution.
pub fn cavalieri_pair(
    u: &RadialProfile,
    phi: impl Fn(f64) -> f64,
    grid_size: usize,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let direct = OMEGA3
        * integrate_with_breaks(|r| phi(u.value(r).abs()) * r.powi(3), 0.0, 1.0, u.breakpoints(), spec)?
            .value;
    let r = rearrange_fn(|x| u.value(x), grid_size);
    Ok((direct, r.integral(phi)))
}

/// The radially decreasing profile equimeasurable with `|u|`.
pub fn decreasing_rearrangement(u: &RadialProfile, grid_size: usize) -> RadialProfile {
    let r = rearrange_fn(|x| u.value(x), grid_size);
    let repr = r.repr;
    RadialProfile::new(
        format!("rearranged({})", u.label()),
        BoundaryKind::Navier,
        move |rho: f64| repr.jet(rho),
    )
}

/// Solution of `-Δu = f` on the unit ball with `u(1) = 0`, `f` piecewise linear in `v`.
#[derive(Debug, Clone)]
struct TalentiSolution {
    n: usize,
    v: Vec<f64>,
    f: Vec<f64>,
    slope: Vec<f64>,
    mass: Vec<f64>,
    u: Vec<f64>,
}

const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

impl TalentiSolution {
    fn build(fk: Vec<f64>) -> Self {
        let n = fk.len() - 1;
        let v: Vec<f64> = (0..=n).map(|j| (j as f64 / n as f64).powi(4)).collect();
        let slope: Vec<f64> = (0..n).map(|j| (fk[j + 1] - fk[j]) / (v[j + 1] - v[j])).collect();
        let mut mass = vec![0.0; n + 1];
        for j in 0..n {
            mass[j + 1] = mass[j] + 0.125 * (v[j + 1] - v[j]) * (fk[j] + fk[j + 1]);
        }
        let mut sol = Self {
            n,
            v,
            f: fk,
            slope,
            mass,
            u: vec![0.0; n + 1],
        };
        for j in (0..n).rev() {
            let a = j as f64 / n as f64;
            let b = (j + 1) as f64 / n as f64;
            sol.u[j] = sol.u[j + 1] + sol.flux_integral(j, a, b);
        }
        sol
    }

    fn knot(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    fn seg(&self, rho: f64) -> usize {
        ((rho * self.n as f64) as usize).min(self.n - 1)
    }

    /// `(M/ρ⁴, f)` inside segment `j`.
    fn mass_ratio(&self, j: usize, rho: f64) -> (f64, f64) {
        let v = rho.powi(4);
        let d = v - self.v[j];
        let fv = self.f[j] + self.slope[j] * d;
        if j == 0 {
            (0.25 * (self.f[0] + 0.5 * self.slope[0] * v), fv)
        } else {
            let m = self.mass[j] + 0.25 * (self.f[j] * d + 0.5 * self.slope[j] * d * d);
            (m / v, fv)
        }
    }

    /// `∫_a^b M(s)/s³ ds` within segment `j`.
    fn flux_integral(&self, j: usize, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        GL4_X
            .iter()
            .zip(GL4_W.iter())
            .map(|(x, w)| {
                let s = c + h * x;
                let (ratio, _) = self.mass_ratio(j, s);
                w * ratio * s
            })
            .sum::<f64>()
            * h
    }

    fn jet(&self, rho: f64) -> Jet {
        let rho = rho.clamp(0.0, 1.0);
        let j = self.seg(rho);
        let b = self.knot(j + 1);
        let value = self.u[j + 1] + self.flux_integral(j, rho, b);
        let (ratio, fv) = self.mass_ratio(j, rho);
        Jet::new(value, -ratio * rho, -fv + 3.0 * ratio)
    }

    fn f_at(&self, rho: f64) -> f64 {
        self.mass_ratio(self.seg(rho), rho).1
    }
}

/// Radial solution of `-Δu = f♯`, `u(1) = 0`, with `f♯` radially decreasing.
///
/// `f♯` is sampled at `grid_size + 1` knots uniform in ρ and treated as
/// piecewise linear in `v = ρ⁴`; the double integral is then exact up to a
/// 4-point Gauss rule per cell.
pub fn talenti_radial_solve(f_sharp: impl Fn(f64) -> f64, grid_size: usize) -> Result<RadialProfile> {
    let n = grid_size.max(2);
    let fk: Vec<f64> = (0..=n).map(|j| f_sharp(j as f64 / n as f64)).collect();
    if let Some(j) = fk.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { x: j as f64 / n as f64 });
    }
    let sup = fk.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if fk.windows(2).any(|w| w[1] > w[0] + 1e-12 * sup.max(1e-300)) {
        return Err(Error::Precondition(
            "talenti_radial_solve needs a radially non-increasing right-hand side".into(),
        ));
    }
    let sol = TalentiSolution::build(fk);

    let checks = 997;
    for i in 1..checks {
        let rho = i as f64 / checks as f64;
        let jt = sol.jet(rho);
        let res = (-jt.d2 - 3.0 * jt.d1 / rho - sol.f_at(rho)).abs();
        if !(res <= 1e-6 * sup.max(1e-300)) {
            return Err(Error::NonConvergence {
                value: res,
                error: res,
                subdivisions: n,
            });
        }
    }
    Ok(RadialProfile::new("talenti", BoundaryKind::Navier, move |rho: f64| sol.jet(rho)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TalentiReport {
    /// `u ≥ v♯ - 1e-8` on every rearrangement node.
    pub holds: bool,
    pub min_gap: f64,
    pub l2_f: f64,
    pub l2_f_sharp: f64,
    pub l2_rel_diff: f64,
    pub l2_ok: bool,
    /// `∫_B v²` and `∫_B u²`.
    pub mass_v: f64,
    pub mass_u: f64,
    pub mass_ok: bool,
}

impl TalentiReport {
    pub fn all_ok(&self) -> bool {
        self.holds && self.l2_ok && self.mass_ok
    }
}

/// Runs the chain `f = -Δv → f♯ → u → compare with v♯`.
pub fn talenti_comparison_check(
    v: &RadialProfile,
    grid_size: usize,
    spec: &QuadratureSpec,
) -> Result<TalentiReport> {
    let f = |r: f64| -v.laplacian(r);
    let f_sharp = rearrange_fn(f, grid_size);
    let fs = f_sharp.repr.clone();
    let u = talenti_radial_solve(|rho| fs.jet(rho).value, grid_size)?;
    let v_sharp = rearrange_fn(|r| v.value(r), grid_size);

    let min_gap = v_sharp
        .radii
        .iter()
        .zip(v_sharp.values.iter())
        .map(|(&rho, &val)| u.value(rho) - val)
        .fold(f64::INFINITY, f64::min);

    let brk = v.breakpoints();
    let l2_f = (OMEGA3
        * integrate_with_breaks(|r| f(r).powi(2) * r.powi(3), 0.0, 1.0, brk, spec)?.value)
        .sqrt();
    let l2_f_sharp = f_sharp.integral(|x| x * x).sqrt();
    let l2_rel_diff = if l2_f > 0.0 {
        (l2_f - l2_f_sharp).abs() / l2_f
    } else {
        l2_f_sharp
    };
    let mass_v = OMEGA3
        * integrate_with_breaks(|r| v.value(r).powi(2) * r.powi(3), 0.0, 1.0, brk, spec)?.value;
    let mass_u = OMEGA3
        * integrate_with_breaks(|r| u.value(r).powi(2) * r.powi(3), 0.0, 1.0, &[], spec)?.value;

    Ok(TalentiReport {
        holds: min_gap >= -1e-8,
        min_gap,
        l2_f,
        l2_f_sharp,
        l2_rel_diff,
        l2_ok: l2_rel_diff <= 1e-8,
        mass_v,
        mass_u,
        mass_ok: mass_v <= mass_u + 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{profile_by_name, random_smooth_profiles};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn rearranging_decreasing_profile_is_identity() {
        let u = profile_by_name("poly2").unwrap();
        let s = decreasing_rearrangement(&u, 16384);
        for i in 0..=50 {
            let r = i as f64 / 50.0;
            assert!((s.value(r) - u.value(r)).abs() < 1e-6, "r = {r}");
        }
        assert_eq!(s.value(1.0), 0.0);
    }

    #[test]
    fn rearranging_identity_map() {
        let u = RadialProfile::new("r", BoundaryKind::Navier, |r: f64| Jet::new(r, 1.0, 0.0));
        let s = decreasing_rearrangement(&u, 8192);
        for rho in [0.0f64, 0.2, 0.5, 0.8, 0.9] {
            let exact = (1.0 - rho.powi(4)).powf(0.25);
            assert!((s.value(rho) - exact).abs() < 1e-4, "rho {rho}");
        }
        assert!(s.value(1.0).abs() < 1e-12);
    }

    #[test]
    fn rearranging_constant() {
        let u = RadialProfile::new("c", BoundaryKind::Navier, |_r: f64| Jet::new(2.5, 0.0, 0.0));
        let s = decreasing_rearrangement(&u, 128);
        for rho in [0.0, 0.3, 1.0] {
            assert_eq!(s.value(rho), 2.5);
        }
    }

    #[test]
    fn rearrangement_is_monotone_and_equimeasurable() {
        let u = profile_by_name("sinpi").unwrap();
        let s = decreasing_rearrangement(&u, 16384);
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let x = s.value(i as f64 / 1000.0);
            assert!(x <= prev);
            prev = x;
        }
        let m = |p: &RadialProfile| {
            let fine = spec().with_max_subdivisions(100_000).with_rel_tol(1e-8);
            integrate_with_breaks(|r| p.value(r).powi(2) * r.powi(3), 0.0, 1.0, &[], &fine)
                .unwrap()
                .value
        };
        let (a, b) = (m(&u), m(&s));
        assert!((a - b).abs() <= 1e-6 * a, "{a} vs {b}");
        let (a, b) = cavalieri_pair(&u, |x| x * x, DEFAULT_GRID, &spec()).unwrap();
        assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
    }

    #[test]
    fn talenti_solve_examples() {
        let z = talenti_radial_solve(|_| 0.0, 256).unwrap();
        assert_eq!(z.value(0.3), 0.0);
        let u = talenti_radial_solve(|_| 8.0, 256).unwrap();
        let h = talenti_radial_solve(|_| 4.0, 256).unwrap();
        for rho in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((u.value(rho) - (1.0 - rho * rho)).abs() < 1e-13);
            assert!((h.value(rho) - 0.5 * (1.0 - rho * rho)).abs() < 1e-13);
            assert!((u.d1(rho) + 2.0 * rho).abs() < 1e-12);
            assert!((u.d2(rho) + 2.0).abs() < 1e-12);
        }
        assert!(talenti_radial_solve(|r| r, 64).is_err());
        assert!(talenti_radial_solve(|r| 1.0 / r, 64).is_err());
    }

    #[test]
    fn talenti_linear_in_v_rhs() {
        // f = 24 - 48ρ⁴ gives u = 3(1-ρ²) - (1-ρ⁶)
        let u = talenti_radial_solve(|r| 24.0 - 48.0 * r.powi(4), 512).unwrap();
        for rho in [0.0f64, 0.25, 0.6, 0.95] {
            let exact = 3.0 * (1.0 - rho * rho) - (1.0 - rho.powi(6));
            assert!((u.value(rho) - exact).abs() < 1e-12, "{rho}");
        }
    }

    #[test]
    fn comparison_equality_case() {
        let v = profile_by_name("poly2").unwrap();
        let rep = talenti_comparison_check(&v, 4096, &spec()).unwrap();
        assert!(rep.all_ok(), "{rep:?}");
        assert!(rep.min_gap.abs() < 1e-10);
    }

    #[test]
    fn comparison_holds_on_random_profiles() {
        for v in random_smooth_profiles(5, 3) {
            let rep = talenti_comparison_check(&v, DEFAULT_GRID, &spec()).unwrap();
            assert!(rep.all_ok(), "{}: {rep:?}", v.label());
        }
    }
}
