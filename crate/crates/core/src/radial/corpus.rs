//! Named test profiles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryKind, Jet, RadialProfile};
use crate::error::{Error, Result};
use crate::moser::{moser_profile, MoserParams};

/// Profile `u(r) = P(r²)` from `(P, P', P'')` in `q = r²`.
pub(crate) fn from_q<F>(label: &str, bc: BoundaryKind, p: F) -> RadialProfile
where
    F: Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
{
    RadialProfile::new(label, bc, move |r: f64| {
        let q = r * r;
        let (v, d, dd) = p(q);
        Jet::new(v, 2.0 * r * d, 2.0 * d + 4.0 * q * dd)
    })
}

const NAMES: [&str; 12] = [
    "poly2",
    "poly4",
    "poly6",
    "quartic",
    "cos",
    "cos2",
    "gauss",
    "mixed",
    "expbump",
    "sinpi",
    "moser:1e-4:navier",
    "moser:1e-6:dirichlet",
];

pub fn corpus_names() -> &'static [&'static str] {
    &NAMES
}

/// All named profiles (unnormalized).
pub fn corpus() -> Vec<RadialProfile> {
    NAMES
        .iter()
        .map(|n| profile_by_name(n).expect("corpus names resolve"))
        .collect()
}

/// Looks up a corpus profile; `moser:<eps>:<bc>` builds any Moser member.
pub fn profile_by_name(name: &str) -> Result<RadialProfile> {
    use BoundaryKind::*;
    let u = match name {
        "poly2" => from_q(name, Navier, |q| (1.0 - q, -1.0, 0.0)),
        "poly4" => from_q(name, Dirichlet, |q| ((1.0 - q).powi(2), -2.0 * (1.0 - q), 2.0)),
        "poly6" => from_q(name, Dirichlet, |q| {
            let a = 1.0 - q;
            (a * a * a, -3.0 * a * a, 6.0 * a)
        }),
        "quartic" => from_q(name, Navier, |q| (1.0 - q * q, -2.0 * q, -2.0)),
        "cos" => RadialProfile::new(name, Navier, |r: f64| {
            let x = 0.5 * PI * r;
            Jet::new(x.cos(), -0.5 * PI * x.sin(), -0.25 * PI * PI * x.cos())
        }),
        "cos2" => RadialProfile::new(name, Dirichlet, |r: f64| {
            let x = PI * r;
            Jet::new(0.5 * (1.0 + x.cos()), -0.5 * PI * x.sin(), -0.5 * PI * PI * x.cos())
        }),
        "gauss" => from_q(name, Navier, |q| {
            let e = (-q).exp();
            (e - (-1f64).exp(), -e, e)
        }),
        "mixed" => from_q(name, Navier, |q| (1.0 + q - 2.0 * q * q, 1.0 - 4.0 * q, -4.0)),
        "expbump" => from_q(name, Dirichlet, |q| {
            let e = q.exp();
            let a = 1.0 - q;
            (a * a * e, -e * (1.0 - q * q), e * (q * q + 2.0 * q - 1.0))
        }),
        "sinpi" => RadialProfile::new(name, Navier, |r: f64| {
            let q = r * r;
            let (s, c) = (PI * q).sin_cos();
            let d1 = 2.0 * PI * r * c * (1.0 - r) - s;
            let d2 = (2.0 * PI * c - 4.0 * PI * PI * q * s) * (1.0 - r) - 4.0 * PI * r * c;
            Jet::new(s * (1.0 - r), d1, d2)
        }),
        _ => return moser_by_name(name),
    };
    Ok(u)
}

fn moser_by_name(name: &str) -> Result<RadialProfile> {
    let parts: Vec<&str> = name.split(':').collect();
    if parts.len() != 3 || parts[0] != "moser" {
        return Err(Error::InvalidInput(format!("unknown profile '{name}'")));
    }
    let eps: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad epsilon in '{name}'")))?;
    let bc: BoundaryKind = parts[2].parse()?;
    Ok(moser_profile(&MoserParams::new(eps, bc)?)?.with_label(name))
}

/// `Σ_{k=1..4} c_k (1 - r^{2k})` with `c_k` uniform in `[-1, 1]`.
///
/// Sign-changing coefficients give `Δu` of both signs, which is the
/// interesting case for the rearrangement comparison.
pub fn random_smooth_profile(seed: u64) -> RadialProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = [0.0f64; 4];
    for ck in c.iter_mut() {
        *ck = rng.gen_range(-1.0..=1.0);
    }
    if c.iter().all(|x| x.abs() < 1e-3) {
        c[0] = 1.0;
    }
    from_q(&format!("random:{seed}"), BoundaryKind::Navier, move |q| {
        let mut v = 0.0;
        let mut d = 0.0;
        let mut dd = 0.0;
        for (k, ck) in c.iter().enumerate() {
            let n = (k + 1) as i32;
            let nf = n as f64;
            v += ck * (1.0 - q.powi(n));
            d -= ck * nf * q.powi(n - 1);
            if n >= 2 {
                dd -= ck * nf * (nf - 1.0) * q.powi(n - 2);
            }
        }
        (v, d, dd)
    })
}

pub fn random_smooth_profiles(seed: u64, n: usize) -> Vec<RadialProfile> {
    (0..n as u64)
        .map(|i| random_smooth_profile(seed.wrapping_mul(1_000_003).wrapping_add(i)))
        .collect()
}
